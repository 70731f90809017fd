//! Convex surfaces from support functions on `S^2` and their lifts.
//!
//! The sphere is charted by `(colatitude, longitude)`, so the orientation rule
//! makes the Gauss map of `phi = f nu + grad f` equal to the outward `nu = x`.
//! Derivatives of `f` on the round sphere come from a scalar field `F` on
//! `R^3` through `grad_S f = grad F - (x . grad F) x` and
//! `lap_S f = tr Hess F - x^T Hess F x - 2 x . grad F`.

use std::sync::Arc;

use super::ambient::AmbientKind;
use super::lift::{HeightRule, LiftSource, LiftedImmersion, ParamFn, Provenance, Route};
use crate::config::Tolerances;
use crate::geometry::{AnalyticMap, Chart, Dual, HyperDual, Real, VecMap};
use crate::hypersurface::{HypersurfaceImmersion, SpaceForm};
use crate::constructor::ambient::LorentzAmbient;
use crate::{GeomError, Result};

/// Scalar field on `R^3`, generic over the scalar type.
pub trait ScalarField: Send + Sync + 'static {
    fn eval<T: Real>(&self, y: &[T]) -> T;
}

fn sphere_point<T: Real>(x: &[T]) -> [T; 3] {
    let (col, lon) = (x[0], x[1]);
    [col.sin() * lon.cos(), col.sin() * lon.sin(), col.cos()]
}

/// Support function `f` restricted to a chart of `S^2`.
pub struct SupportFunction<F: ScalarField> {
    pub chart: Chart,
    pub f: Arc<F>,
}

impl<F: ScalarField> Clone for SupportFunction<F> {
    fn clone(&self) -> Self {
        Self {
            chart: self.chart.clone(),
            f: self.f.clone(),
        }
    }
}

/// Values of `f`, its spherical gradient and Laplacian at a chart point.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalDerivatives {
    pub x: [f64; 3],
    pub f: f64,
    pub grad: [f64; 3],
    pub laplacian: f64,
}

impl<F: ScalarField> SupportFunction<F> {
    pub fn new(chart: Chart, f: Arc<F>) -> Result<Self> {
        if chart.dim() != 2 {
            return Err(GeomError::Dimension {
                expected: 2,
                found: chart.dim(),
            });
        }
        Ok(Self { chart, f })
    }

    /// Exact spherical derivatives through second-order automatic differentiation.
    pub fn derivatives(&self, x: &[f64]) -> SphericalDerivatives {
        let p = sphere_point(x);
        let vars: Vec<HyperDual<3>> = (0..3).map(|k| HyperDual::variable(p[k], k)).collect();
        let out = self.f.eval(&vars);
        let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        let radial = dot(&p, &out.g);
        let hxx: f64 = (0..3).map(|i| (0..3).map(|j| p[i] * out.h[i][j] * p[j]).sum::<f64>()).sum();
        let trace = out.h[0][0] + out.h[1][1] + out.h[2][2];
        SphericalDerivatives {
            x: p,
            f: out.v,
            grad: [0, 1, 2].map(|k| out.g[k] - radial * p[k]),
            laplacian: trace - hxx - 2.0 * radial,
        }
    }

    /// Finite-difference gradient and Laplacian in the round metric of the chart:
    /// `grad f = f_c d_c x + f_l / sin^2 c d_l x`, `lap f = f_cc + cot c f_c + f_ll / sin^2 c`.
    pub fn derivatives_fd(&self, x: &[f64], h: f64) -> SphericalDerivatives {
        let f = |c: f64, l: f64| self.f.eval(&sphere_point(&[c, l]));
        let (c, l) = (x[0], x[1]);
        let f0 = f(c, l);
        let fc = (f(c + h, l) - f(c - h, l)) / (2.0 * h);
        let fl = (f(c, l + h) - f(c, l - h)) / (2.0 * h);
        let fcc = (f(c + h, l) - 2.0 * f0 + f(c - h, l)) / (h * h);
        let fll = (f(c, l + h) - 2.0 * f0 + f(c, l - h)) / (h * h);
        let s = c.sin();
        let dc = [c.cos() * l.cos(), c.cos() * l.sin(), -s];
        let dl = [-s * l.sin(), s * l.cos(), 0.0];
        SphericalDerivatives {
            x: sphere_point(x),
            f: f0,
            grad: [0, 1, 2].map(|k| fc * dc[k] + fl / (s * s) * dl[k]),
            laplacian: fcc + c.cos() / s * fc + fll / (s * s),
        }
    }
}

/// `phi = f x + grad f` as an analytic map of the chart.
struct PalmerSurface<F: ScalarField>(Arc<F>);

impl<F: ScalarField> AnalyticMap for PalmerSurface<F> {
    fn dim(&self) -> usize {
        2
    }

    fn eval<T: Real>(&self, x: &[T]) -> Vec<T> {
        let p = sphere_point(x);
        let vars: Vec<Dual<T, 3>> = (0..3).map(|k| Dual::variable(p[k], k)).collect();
        let out = self.0.eval(&vars);
        let radial = p[0] * out.g[0] + p[1] * out.g[1] + p[2] * out.g[2];
        (0..3).map(|k| p[k] * out.v + out.g[k] - radial * p[k]).collect()
    }
}

/// The convex surface with support function `f`, with exact jets.
pub fn support_surface<F: ScalarField>(sf: &SupportFunction<F>) -> Result<HypersurfaceImmersion> {
    HypersurfaceImmersion::analytic(SpaceForm::euclidean(2), sf.chart.clone(), Arc::new(PalmerSurface(sf.f.clone())))
}

/// `tau = -f - lap f / 2` as a height rule.
fn support_height<F: ScalarField>(sf: &SupportFunction<F>) -> ParamFn {
    let sf = sf.clone();
    Arc::new(move |frame, _spec| {
        let d = sf.derivatives(&frame.x);
        Ok(-d.f - 0.5 * d.laplacian)
    })
}

/// Lift `(grad f - lap f / 2 * x, -f - lap f / 2)` of the support function into
/// Minkowski space, with null normal `(x, 1)`.
pub fn lift_palmer<F: ScalarField>(sf: &SupportFunction<F>, tol: &Tolerances) -> Result<LiftedImmersion> {
    let a = sf.clone();
    let eval: VecMap = Arc::new(move |x: &[f64]| {
        let d = a.derivatives(x);
        let half = 0.5 * d.laplacian;
        let mut y: Vec<f64> = (0..3).map(|k| d.grad[k] - half * d.x[k]).collect();
        y.push(-d.f - half);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(GeomError::NonFinite { point: x.to_vec() });
        }
        Ok(y)
    });
    let null_normal: VecMap = Arc::new(|x: &[f64]| {
        let p = sphere_point(x);
        Ok(vec![p[0], p[1], p[2], 1.0])
    });
    let source = LiftSource {
        hypersurface: support_surface(sf)?,
        kind: AmbientKind::Minkowski,
        rule: HeightRule::Custom(support_height(sf)),
        tol: *tol,
    };
    Ok(LiftedImmersion {
        ambient: LorentzAmbient::new(AmbientKind::Minkowski, 2),
        chart: sf.chart.clone(),
        eval,
        null_normal,
        provenance: Provenance::new(
            Route::Palmer,
            "support-function lift; equals the lift of phi = f nu + grad f at tau = H/K = -f - lap f / 2",
        ),
        source: Some(Arc::new(source)),
        null_data: None,
    })
}

/// The same lift through the surface route: reconstruct `phi` and lift it at `tau = H/K`.
pub fn lift_palmer_via_surface<F: ScalarField>(sf: &SupportFunction<F>, tol: &Tolerances) -> Result<LiftedImmersion> {
    super::lift::lift_from_rule(&support_surface(sf)?, AmbientKind::Minkowski, HeightRule::MeanOverGauss, tol)
}
