//! Lifts along a constant null direction over totally geodesic slices, and the
//! inverse passage back to the Riemannian slice.

use std::sync::Arc;

use super::ambient::{AmbientKind, LorentzAmbient};
use super::lift::{LiftedImmersion, NullLiftData, Provenance, Route};
use crate::geometry::{Chart, ScalarMap, VecMap};
use crate::hypersurface::HypersurfaceImmersion;
use crate::{GeomError, Result};

/// Slot of the slice normal `nu_0` inside the hypersurface container.
fn nu0_slot(kind: AmbientKind, n: usize) -> usize {
    match kind {
        // (x, 0) in R^{n+1}
        AmbientKind::Minkowski => n,
        // (sigma, 0) with sigma in S^n of R^{n+1}
        AmbientKind::DeSitter => n + 1,
        // (sigma_space, 0, sigma_time): the zero goes before the timelike axis
        _ => n,
    }
}

/// Default totally geodesic slice parametrizations.
///
/// Minkowski uses the identity for any `n`. For surfaces, de Sitter uses
/// `(sin x cos y, sin y, cos x cos y)` on `S^2` and anti de Sitter uses
/// `(sinh x, cosh x sinh y, cosh x cosh y)` on `H^2`.
pub fn canonical_slice(kind: AmbientKind, n: usize) -> Result<VecMap> {
    match (kind, n) {
        (AmbientKind::Minkowski, _) => Ok(Arc::new(|x: &[f64]| Ok(x.to_vec()))),
        (AmbientKind::DeSitter, 2) => Ok(Arc::new(|x: &[f64]| {
            Ok(vec![x[0].sin() * x[1].cos(), x[1].sin(), x[0].cos() * x[1].cos()])
        })),
        (AmbientKind::AntiDeSitter, 2) => Ok(Arc::new(|x: &[f64]| {
            Ok(vec![x[0].sinh(), x[0].cosh() * x[1].sinh(), x[0].cosh() * x[1].cosh()])
        })),
        (AmbientKind::DeSitter | AmbientKind::AntiDeSitter, _) => Err(GeomError::Argument(format!(
            "no canonical {kind} slice for n = {n}; pass one explicitly"
        ))),
        _ => Err(product_refusal(kind)),
    }
}

fn product_refusal(kind: AmbientKind) -> GeomError {
    GeomError::UnsupportedAmbient(format!(
        "{kind}: a non-totally geodesic marginally trapped immersion with null second \
         fundamental form does not exist in this product"
    ))
}

/// `(iota(x), 0) + tau(x) (nu_0, 1)` over the totally geodesic slice `slice`.
pub fn null_lift(kind: AmbientKind, chart: Chart, slice: Option<VecMap>, tau: ScalarMap) -> Result<LiftedImmersion> {
    if kind.is_product() {
        return Err(product_refusal(kind));
    }
    let n = chart.dim();
    let slice = match slice {
        Some(s) => s,
        None => canonical_slice(kind, n)?,
    };
    let ambient = LorentzAmbient::new(kind, n);
    let slot = nu0_slot(kind, n);
    let slice_len = ambient.container_dim() - 2;
    let (s, t) = (slice.clone(), tau.clone());
    let eval: VecMap = Arc::new(move |x: &[f64]| {
        let sigma = s(x)?;
        if sigma.len() != slice_len {
            return Err(GeomError::Dimension {
                expected: slice_len,
                found: sigma.len(),
            });
        }
        let h = t(x)?;
        let mut y = sigma;
        y.insert(slot, h);
        y.push(h);
        Ok(y)
    });
    let dim = ambient.container_dim();
    let null_normal: VecMap = Arc::new(move |_x: &[f64]| {
        let mut v = vec![0.0; dim];
        v[slot] = 1.0;
        v[dim - 1] = 1.0;
        Ok(v)
    });
    Ok(LiftedImmersion {
        ambient,
        chart,
        eval,
        null_normal,
        provenance: Provenance::new(Route::NullLift, format!("{kind} null lift of a totally geodesic slice")),
        source: None,
        null_data: Some(NullLiftData { slice, tau }),
    })
}

/// `phi = psi - tau nu` where `y = (psi, tau)` and `(nu, 1)` is the lift's null normal.
pub fn null_projection(lift: &LiftedImmersion) -> Result<HypersurfaceImmersion> {
    if lift.ambient.kind.is_product() {
        return Err(GeomError::UnsupportedAmbient(format!(
            "null projection is defined for the space-form family, not {}",
            lift.ambient.kind
        )));
    }
    let (eval, normal) = (lift.eval.clone(), lift.null_normal.clone());
    let phi: VecMap = Arc::new(move |x: &[f64]| {
        let y = eval(x)?;
        let nbar = normal(x)?;
        let m = y.len() - 1;
        let last = nbar[m];
        if last.abs() < 1e-12 {
            return Err(GeomError::ConstructionConsistency(
                "null normal has no height component".into(),
            ));
        }
        let tau = y[m];
        Ok((0..m).map(|k| y[k] - tau * nbar[k] / last).collect())
    });
    HypersurfaceImmersion::numeric(lift.ambient.source_space(), lift.chart.clone(), phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Tolerances;
    use crate::hypersurface::{frame_at, spectrum_at};

    #[test]
    fn flat_null_lift() {
        let chart = Chart::rect((-1.0, 1.0), (-1.0, 1.0), (5, 5)).unwrap();
        let tau: ScalarMap = Arc::new(|x: &[f64]| Ok(x[0] * x[0]));
        let l = null_lift(AmbientKind::Minkowski, chart, None, tau).unwrap();
        assert_eq!(l.eval_at(&[0.5, 0.2]).unwrap(), vec![0.5, 0.2, 0.25, 0.25]);
        assert_eq!(l.null_normal_at(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn quadric_slices_satisfy_constraints() {
        let chart = Chart::rect((-1.0, 1.0), (-1.0, 1.0), (5, 5)).unwrap();
        for kind in [AmbientKind::DeSitter, AmbientKind::AntiDeSitter] {
            let tau: ScalarMap = Arc::new(|x: &[f64]| Ok((2.0 + x[0].sin()) * x[1].cos()));
            let l = null_lift(kind, chart.clone(), None, tau).unwrap();
            for x in chart.samples() {
                let y = l.eval_at(&x).unwrap();
                assert!(l.ambient.constraint_residual(&y) < 1e-12, "{kind}");
                let n = l.null_normal_at(&x).unwrap();
                let sig = l.ambient.container_signature;
                assert_eq!(sig.dot(&n, &n), 0.0);
                assert!(sig.dot(&n, &y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn products_refused() {
        let chart = Chart::rect((-1.0, 1.0), (-1.0, 1.0), (5, 5)).unwrap();
        let tau: ScalarMap = Arc::new(|_x: &[f64]| Ok(0.0));
        for kind in [AmbientKind::SphereProduct, AmbientKind::HyperbolicProduct] {
            assert!(matches!(
                null_lift(kind, chart.clone(), None, tau.clone()),
                Err(GeomError::UnsupportedAmbient(_))
            ));
        }
    }

    #[test]
    fn projection_recovers_slice() {
        let chart = Chart::rect((-1.0, 1.0), (-1.0, 1.0), (5, 5)).unwrap();
        let tau: ScalarMap = Arc::new(|x: &[f64]| Ok(x[0] * x[1] + 0.3));
        let l = null_lift(AmbientKind::DeSitter, chart, None, tau).unwrap();
        let phi = null_projection(&l).unwrap();
        let tol = Tolerances::default();
        let f = frame_at(&phi, &[0.2, -0.1], &tol).unwrap();
        let s = spectrum_at(&f, &tol).unwrap();
        assert_eq!(s.p(), 1);
        assert!(s.kappas[0].abs() < 1e-6);
    }
}
