use std::fmt;
use std::sync::Arc;

use super::ambient::{AmbientKind, LorentzAmbient};
use super::polynomial::{acot, acoth, curvature_polynomial, solve_roots};
use crate::config::Tolerances;
use crate::geometry::{Chart, ScalarMap, VecMap};
use crate::hypersurface::{frame_at, mean_gauss_at, spectrum_at, HypersurfaceImmersion, PointFrame, ShapeSpectrum};
use crate::{GeomError, Result};

/// Height parameter as a function of the hypersurface frame: `tau` for the
/// space-form family, `s` for products.
pub type ParamFn = Arc<dyn Fn(&PointFrame, &ShapeSpectrum) -> Result<f64> + Send + Sync>;

#[derive(Clone)]
pub enum HeightRule {
    /// The `k`-th root (ascending) of the curvature polynomial.
    Root(usize),
    /// `tau = H/K` for surfaces.
    MeanOverGauss,
    /// Arbitrary parameter field, e.g. for negative controls.
    Custom(ParamFn),
}

impl fmt::Debug for HeightRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeightRule::Root(k) => write!(f, "Root({k})"),
            HeightRule::MeanOverGauss => f.write_str("MeanOverGauss"),
            HeightRule::Custom(_) => f.write_str("Custom"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// Lift of a totally geodesic slice along a null direction.
    NullLift,
    /// Root of the curvature polynomial.
    PolynomialRoot,
    /// `tau = H/K`.
    MeanOverGauss,
    /// Support-function formula.
    Palmer,
    /// Explicit parametrization from the catalog.
    Explicit,
    /// Caller-supplied height.
    Custom,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::NullLift => "null-lift",
            Route::PolynomialRoot => "polynomial-root",
            Route::MeanOverGauss => "mean-over-gauss",
            Route::Palmer => "palmer",
            Route::Explicit => "explicit",
            Route::Custom => "custom-height",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub route: Route,
    pub root_index: Option<usize>,
    pub note: String,
    /// Samples where the construction failed or degenerated during threading.
    pub degenerate_samples: usize,
}

impl Provenance {
    pub fn new(route: Route, note: impl Into<String>) -> Self {
        Self {
            route,
            root_index: None,
            note: note.into(),
            degenerate_samples: 0,
        }
    }
}

/// Hypersurface data a lift was built from; used for lemma cross-checks.
#[derive(Debug, Clone)]
pub struct LiftSource {
    pub hypersurface: HypersurfaceImmersion,
    pub kind: AmbientKind,
    pub rule: HeightRule,
    pub tol: Tolerances,
}

/// Frame, spectrum and height parameter at one chart point.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftPoint {
    pub frame: PointFrame,
    pub spectrum: ShapeSpectrum,
    pub param: f64,
}

impl LiftSource {
    pub fn param_at(&self, x: &[f64]) -> Result<LiftPoint> {
        let frame = frame_at(&self.hypersurface, x, &self.tol)?;
        let spectrum = spectrum_at(&frame, &self.tol)?;
        let param = match &self.rule {
            HeightRule::Root(k) => {
                let poly = curvature_polynomial(&spectrum, self.kind, &self.tol)?;
                let roots = solve_roots(&poly, self.tol.tol_root)?;
                let root = roots.roots.get(*k).ok_or(GeomError::MissingRoot {
                    index: *k,
                    available: roots.len(),
                })?;
                if root.degenerate {
                    return Err(GeomError::ConstructionConsistency(format!(
                        "root {} sits on a principal curvature",
                        root.value
                    )));
                }
                root.value
            }
            HeightRule::MeanOverGauss => {
                if !self.kind.is_space_form_family() {
                    return Err(GeomError::UnsupportedAmbient(format!(
                        "tau = H/K applies to the space-form family, not {}",
                        self.kind
                    )));
                }
                let (h, k) = mean_gauss_at(&frame)?;
                if k.abs() <= self.tol.tol_zero {
                    return Err(GeomError::VanishingCurvature { kappa: k });
                }
                h / k
            }
            HeightRule::Custom(f) => f(&frame, &spectrum)?,
        };
        Ok(LiftPoint { frame, spectrum, param })
    }
}

/// Spacelike immersion into a Lorentzian ambient with its distinguished null normal.
#[derive(Clone)]
pub struct LiftedImmersion {
    pub ambient: LorentzAmbient,
    pub chart: Chart,
    pub eval: VecMap,
    pub null_normal: VecMap,
    pub provenance: Provenance,
    pub source: Option<Arc<LiftSource>>,
    /// Slice parametrization and height field of a null lift.
    pub null_data: Option<NullLiftData>,
}

#[derive(Clone)]
pub struct NullLiftData {
    pub slice: VecMap,
    pub tau: ScalarMap,
}

impl fmt::Debug for LiftedImmersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LiftedImmersion")
            .field("ambient", &self.ambient)
            .field("chart", &self.chart)
            .field("provenance", &self.provenance)
            .field("has_source", &self.source.is_some())
            .finish()
    }
}

impl LiftedImmersion {
    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn eval_at(&self, x: &[f64]) -> Result<Vec<f64>> {
        (self.eval)(x)
    }

    pub fn null_normal_at(&self, x: &[f64]) -> Result<Vec<f64>> {
        (self.null_normal)(x)
    }

    pub fn with_chart(&self, chart: Chart) -> Result<Self> {
        if chart.dim() != self.dim() {
            return Err(GeomError::Dimension {
                expected: self.dim(),
                found: chart.dim(),
            });
        }
        let mut c = self.clone();
        c.chart = chart;
        Ok(c)
    }

    /// Same lift seen through `y = factor * x`.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor != 0.0) {
            return Err(GeomError::Argument(format!("invalid scale factor {factor}")));
        }
        let chart = self.chart.scaled(factor)?;
        let wrap = |m: VecMap| -> VecMap {
            Arc::new(move |y: &[f64]| {
                let x: Vec<f64> = y.iter().map(|v| v / factor).collect();
                m(&x)
            })
        };
        let mut c = self.clone();
        c.chart = chart;
        c.eval = wrap(self.eval.clone());
        c.null_normal = wrap(self.null_normal.clone());
        // lemma data is tied to the original chart
        c.source = None;
        c.null_data = None;
        Ok(c)
    }
}

/// Lift of one frame with height parameter `param`: `(y, null normal)`.
pub fn lift_point(kind: AmbientKind, frame: &PointFrame, param: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let phi = &frame.point;
    let nu = &frame.normal;
    let mut y: Vec<f64>;
    let mut nbar: Vec<f64>;
    match kind {
        AmbientKind::Minkowski | AmbientKind::DeSitter | AmbientKind::AntiDeSitter => {
            let tau = param;
            y = phi.iter().zip(nu).map(|(p, v)| p + tau * v).collect();
            y.push(tau);
            nbar = nu.clone();
            nbar.push(1.0);
        }
        AmbientKind::SphereProduct => {
            let s = param;
            let r = (1.0 + s * s).sqrt();
            y = phi.iter().zip(nu).map(|(p, v)| (s * p + v) / r).collect();
            y.push(acot(s));
            nbar = phi.iter().zip(nu).map(|(p, v)| (-p + s * v) / r).collect();
            nbar.push(1.0);
        }
        AmbientKind::HyperbolicProduct => {
            let s = param;
            let t = acoth(s)?;
            let r = (s * s - 1.0).sqrt();
            y = phi.iter().zip(nu).map(|(p, v)| (s * p + v) / r).collect();
            y.push(t);
            nbar = phi.iter().zip(nu).map(|(p, v)| (p + s * v) / r).collect();
            nbar.push(1.0);
        }
    }
    Ok((y, nbar))
}

/// Builds the lift of `imm` into `kind` with heights chosen by `rule`.
pub fn lift_from_rule(
    imm: &HypersurfaceImmersion,
    kind: AmbientKind,
    rule: HeightRule,
    tol: &Tolerances,
) -> Result<LiftedImmersion> {
    let ambient = LorentzAmbient::new(kind, imm.dim());
    if imm.space != ambient.source_space() {
        return Err(GeomError::UnsupportedAmbient(format!(
            "{kind} lifts hypersurfaces of the {} space form, got {}",
            ambient.source_space().kind,
            imm.space.kind
        )));
    }
    let (route, root_index) = match &rule {
        HeightRule::Root(k) => (Route::PolynomialRoot, Some(*k)),
        HeightRule::MeanOverGauss => (Route::MeanOverGauss, None),
        HeightRule::Custom(_) => (Route::Custom, None),
    };
    let source = Arc::new(LiftSource {
        hypersurface: imm.clone(),
        kind,
        rule,
        tol: *tol,
    });
    let src_eval = source.clone();
    let eval: VecMap = Arc::new(move |x: &[f64]| {
        let lp = src_eval.param_at(x)?;
        Ok(lift_point(kind, &lp.frame, lp.param)?.0)
    });
    let src_normal = source.clone();
    let null_normal: VecMap = Arc::new(move |x: &[f64]| {
        let lp = src_normal.param_at(x)?;
        Ok(lift_point(kind, &lp.frame, lp.param)?.1)
    });
    let mut provenance = Provenance::new(route, format!("{kind} lift of a {} hypersurface", imm.space.kind));
    provenance.root_index = root_index;
    Ok(LiftedImmersion {
        ambient,
        chart: imm.chart.clone(),
        eval,
        null_normal,
        provenance,
        source: Some(source),
        null_data: None,
    })
}

fn lift_root(imm: &HypersurfaceImmersion, kind: AmbientKind, root: usize, tol: &Tolerances) -> Result<LiftedImmersion> {
    lift_from_rule(imm, kind, HeightRule::Root(root), tol)
}

/// `(phi + tau nu, tau)` in Minkowski space.
pub fn lift_minkowski(imm: &HypersurfaceImmersion, root: usize, tol: &Tolerances) -> Result<LiftedImmersion> {
    lift_root(imm, AmbientKind::Minkowski, root, tol)
}

/// `(phi + tau nu, tau)` in de Sitter space.
pub fn lift_desitter(imm: &HypersurfaceImmersion, root: usize, tol: &Tolerances) -> Result<LiftedImmersion> {
    lift_root(imm, AmbientKind::DeSitter, root, tol)
}

/// `(phi + tau nu, tau)` in anti de Sitter space.
pub fn lift_antidesitter(imm: &HypersurfaceImmersion, root: usize, tol: &Tolerances) -> Result<LiftedImmersion> {
    lift_root(imm, AmbientKind::AntiDeSitter, root, tol)
}

/// `((s phi + nu)/sqrt(1+s^2), acot s)` in `S^{n+1} x R`.
pub fn lift_sphere_product(imm: &HypersurfaceImmersion, root: usize, tol: &Tolerances) -> Result<LiftedImmersion> {
    lift_root(imm, AmbientKind::SphereProduct, root, tol)
}

/// `((s phi + nu)/sqrt(s^2-1), acoth s)` in `H^{n+1} x R`.
pub fn lift_hyperbolic_product(imm: &HypersurfaceImmersion, root: usize, tol: &Tolerances) -> Result<LiftedImmersion> {
    lift_root(imm, AmbientKind::HyperbolicProduct, root, tol)
}

/// Lift given directly by container maps (catalog surfaces).
pub fn explicit_lift(
    kind: AmbientKind,
    chart: Chart,
    eval: VecMap,
    null_normal: VecMap,
    note: impl Into<String>,
) -> LiftedImmersion {
    LiftedImmersion {
        ambient: LorentzAmbient::new(kind, chart.dim()),
        chart,
        eval,
        null_normal,
        provenance: Provenance::new(Route::Explicit, note),
        source: None,
        null_data: None,
    }
}
