//! Named example corpus: classical hypersurfaces to lift, and explicit
//! marginally trapped surfaces to verify.

pub mod expr;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::num::NonZeroUsize;
use std::sync::{Arc, OnceLock};

use gauss_quad::GaussLegendre;

use crate::constructor::{construct_lifts, explicit_lift, lift_palmer, null_lift, AmbientKind, LiftedImmersion, NullLiftData, ScalarField};
use crate::constructor::SupportFunction;
use crate::geometry::{AnalyticMap, Chart, Dual, HyperDual, Real, ScalarMap, VecMap};
use crate::hypersurface::{HypersurfaceImmersion, SpaceForm, SpaceFormKind};
use crate::verifier::Verdict;
use crate::{GeomError, Result, Tolerances};

pub use expr::Expr;

/// Parameter of a catalog entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: &'static str,
    pub doc: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryKind {
    /// Hypersurface of a Riemannian space form, lifted by `construct`.
    Hypersurface(SpaceFormKind),
    /// Surface given directly in a Lorentzian ambient.
    Lift,
}

impl fmt::Display for EntryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntryKind::Hypersurface(k) => write!(f, "hypersurface in {k}"),
            EntryKind::Lift => f.write_str("lifted surface"),
        }
    }
}

/// Static description of a catalog entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EntryInfo {
    pub name: &'static str,
    pub kind: EntryKind,
    pub params: &'static [ParamSpec],
    pub citation: &'static str,
}

const fn p(name: &'static str, default: &'static str, doc: &'static str) -> ParamSpec {
    ParamSpec { name, default, doc }
}

const ENTRIES: &[EntryInfo] = &[
    EntryInfo {
        name: "chen-l1",
        kind: EntryKind::Lift,
        params: &[
            p("f", "x^2", "profile f(x); f'' must not vanish on the chart"),
            p("perturb", "0", "adds perturb*y^2 to the third coordinate only (negative control)"),
        ],
        citation: "Chen & Van der Veken: L1(x,y) = (x, y, f(x), f(x)) in R^4_1",
    },
    EntryInfo {
        name: "chen-l2",
        kind: EntryKind::Lift,
        params: &[
            p("q", "sin(x)", "function q(x)"),
            p("r", "1", "function r(x)"),
        ],
        citation: "Chen & Van der Veken: family L2 in R^4_1 built from q and r",
    },
    EntryInfo {
        name: "chen-l3",
        kind: EntryKind::Lift,
        params: &[p("f", "2+sin(x)", "profile f(x); f''+f must not vanish")],
        citation: "Chen & Van der Veken: L3 = (sin x cos y, sin y, cos x cos y, f cos y, f cos y) in dS^4",
    },
    EntryInfo {
        name: "chen-l4",
        kind: EntryKind::Lift,
        params: &[],
        citation: "Chen & Van der Veken: L4 in AdS^4 with constant null normal (-1,0,1,-1,1)",
    },
    EntryInfo {
        name: "torus",
        kind: EntryKind::Hypersurface(SpaceFormKind::Euclidean),
        params: &[p("R", "2", "distance from the axis to the tube centre"), p("r", "1", "tube radius")],
        citation: "torus of revolution in E^3",
    },
    EntryInfo {
        name: "sphere",
        kind: EntryKind::Hypersurface(SpaceFormKind::Euclidean),
        params: &[p("rho", "1", "radius")],
        citation: "round sphere in E^3 (umbilic, no lifts)",
    },
    EntryInfo {
        name: "ellipsoid",
        kind: EntryKind::Hypersurface(SpaceFormKind::Euclidean),
        params: &[p("a", "1.5", "semi-axis x"), p("b", "1.2", "semi-axis y"), p("c", "1", "semi-axis z")],
        citation: "triaxial ellipsoid in E^3, chart away from the umbilics",
    },
    EntryInfo {
        name: "catenoid",
        kind: EntryKind::Hypersurface(SpaceFormKind::Euclidean),
        params: &[p("c", "1", "neck radius")],
        citation: "catenoid in E^3 (minimal; lift at height 0)",
    },
    EntryInfo {
        name: "clifford-torus",
        kind: EntryKind::Hypersurface(SpaceFormKind::Sphere),
        params: &[p("alpha", "pi/4", "radii cos(alpha), sin(alpha); minimal at pi/4")],
        citation: "flat torus (cos a e^iu, sin a e^iv) in S^3",
    },
    EntryInfo {
        name: "small-sphere",
        kind: EntryKind::Hypersurface(SpaceFormKind::Sphere),
        params: &[p("r", "0.6", "spherical radius in (0, pi/2)")],
        citation: "umbilic small sphere in S^3",
    },
    EntryInfo {
        name: "hyperbolic-cylinder",
        kind: EntryKind::Hypersurface(SpaceFormKind::Hyperbolic),
        params: &[p("r", "0.8", "distance to the axis geodesic")],
        citation: "equidistant tube around a geodesic of H^3",
    },
    EntryInfo {
        name: "hyperbolic-ellipsoid",
        kind: EntryKind::Hypersurface(SpaceFormKind::Hyperbolic),
        params: &[p("a", "0.5", "semi-axis x"), p("b", "0.4", "semi-axis y"), p("c", "0.3", "semi-axis z")],
        citation: "Euclidean ellipsoid pushed onto the hyperboloid by y -> (y, sqrt(1+|y|^2))",
    },
    EntryInfo {
        name: "palmer-sphere",
        kind: EntryKind::Lift,
        params: &[p("f", "1+0.1*x3^2", "support function of x1, x2, x3 on S^2")],
        citation: "Palmer's support-function lift into R^4_1",
    },
    EntryInfo {
        name: "null-lift",
        kind: EntryKind::Lift,
        params: &[p("tau", "x^2+x*y", "height field tau(x, y)")],
        citation: "totally geodesic slice pushed along a constant null direction (null second fundamental form)",
    },
    EntryInfo {
        name: "random-graph",
        kind: EntryKind::Lift,
        params: &[p("amp", "0.1", "amplitude of the height amp*sin(x)*sin(y)")],
        citation: "spacelike graph in a time slice of R^4_1 (negative control)",
    },
];

/// All entries, in a fixed order.
pub fn catalog_list() -> &'static [EntryInfo] {
    ENTRIES
}

/// Entries whose name contains `filter` (all entries for an empty filter).
pub fn catalog_filter(filter: &str) -> Vec<&'static EntryInfo> {
    ENTRIES.iter().filter(|e| e.name.contains(filter)).collect()
}

pub fn entry_info(name: &str) -> Result<&'static EntryInfo> {
    ENTRIES
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| GeomError::UnknownEntry(name.to_string()))
}

/// `key=val,key=val` into a map; values may not contain commas.
pub fn parse_params(s: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| GeomError::Parse(format!("expected key=value, got `{part}`")))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(GeomError::Parse(format!("expected key=value, got `{part}`")));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(GeomError::Parse(format!("parameter `{k}` given twice")));
        }
    }
    Ok(out)
}

/// Parameters with defaults filled in and unknown keys rejected.
fn resolve(info: &EntryInfo, given: &BTreeMap<String, String>) -> Result<BTreeMap<String, String>> {
    for k in given.keys() {
        if !info.params.iter().any(|p| p.name == k) {
            let known: Vec<&str> = info.params.iter().map(|p| p.name).collect();
            return Err(GeomError::ParamConstraint(format!(
                "`{}` has no parameter `{k}` (known: {known:?})",
                info.name
            )));
        }
    }
    Ok(info
        .params
        .iter()
        .map(|p| (p.name.to_string(), given.get(p.name).cloned().unwrap_or_else(|| p.default.to_string())))
        .collect())
}

struct Params<'a>(&'a BTreeMap<String, String>);

impl Params<'_> {
    fn raw(&self, k: &str) -> &str {
        &self.0[k]
    }

    fn num(&self, k: &str) -> Result<f64> {
        Expr::value(self.raw(k)).map_err(|e| GeomError::ParamConstraint(format!("{k}: {e}")))
    }

    fn positive(&self, k: &str) -> Result<f64> {
        let v = self.num(k)?;
        if !(v > 0.0) {
            return Err(GeomError::ParamConstraint(format!("{k} must be positive, got {v}")));
        }
        Ok(v)
    }

    fn expr(&self, k: &str, vars: &[&str]) -> Result<Arc<Expr>> {
        Ok(Arc::new(Expr::parse(self.raw(k), vars)?))
    }
}

/// A built entry: a hypersurface awaiting construction, or a lift.
#[derive(Debug, Clone)]
pub enum Built {
    Hypersurface {
        imm: HypersurfaceImmersion,
        /// Ambients this hypersurface lifts into; the first is the default.
        ambients: Vec<AmbientKind>,
    },
    Lift(LiftedImmersion),
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub info: &'static EntryInfo,
    /// Resolved parameters, defaults included.
    pub params: BTreeMap<String, String>,
    pub built: Built,
    /// Expected verdict of the entry's lifts; `None` when no lift exists.
    pub expected_verdict: Option<Verdict>,
    pub warnings: Vec<String>,
}

impl CatalogEntry {
    pub fn name(&self) -> &'static str {
        self.info.name
    }

    pub fn chart(&self) -> &Chart {
        match &self.built {
            Built::Hypersurface { imm, .. } => &imm.chart,
            Built::Lift(l) => &l.chart,
        }
    }

    /// Same entry sampled on a different grid.
    pub fn with_resolution(mut self, resolution: Vec<usize>) -> Result<Self> {
        let chart = self.chart().clone().with_resolution(resolution)?;
        self.built = match self.built {
            Built::Hypersurface { imm, ambients } => Built::Hypersurface {
                imm: imm.with_chart(chart)?,
                ambients,
            },
            Built::Lift(l) => Built::Lift(l.with_chart(chart)?),
        };
        Ok(self)
    }

    /// `params` as `k=v,k=v` in key order.
    pub fn params_string(&self) -> String {
        self.params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(",")
    }

    pub fn ambient(&self) -> Option<AmbientKind> {
        match &self.built {
            Built::Hypersurface { ambients, .. } => ambients.first().copied(),
            Built::Lift(l) => Some(l.ambient.kind),
        }
    }

    /// The lift to verify: the entry itself, or the `root`-th lift of the hypersurface.
    pub fn lift(&self, ambient: Option<AmbientKind>, root: usize, tol: &Tolerances) -> Result<LiftedImmersion> {
        match &self.built {
            Built::Lift(l) => {
                if let Some(k) = ambient {
                    if k != l.ambient.kind {
                        return Err(GeomError::UnsupportedAmbient(format!(
                            "`{}` lives in {}, not {k}",
                            self.name(),
                            l.ambient.kind
                        )));
                    }
                }
                Ok(l.clone())
            }
            Built::Hypersurface { imm, ambients } => {
                let kind = ambient.unwrap_or(ambients[0]);
                let mut lifts = construct_lifts(imm, kind, tol)?.lifts;
                if root >= lifts.len() {
                    return Err(GeomError::MissingRoot {
                        index: root,
                        available: lifts.len(),
                    });
                }
                Ok(lifts.swap_remove(root))
            }
        }
    }
}

/// Builds an entry with default ambient selection.
pub fn catalog_lookup(name: &str, params: &BTreeMap<String, String>) -> Result<CatalogEntry> {
    catalog_lookup_in(name, params, None)
}

/// Builds an entry; `ambient` picks the space for `null-lift` and checks
/// compatibility elsewhere.
pub fn catalog_lookup_in(name: &str, given: &BTreeMap<String, String>, ambient: Option<AmbientKind>) -> Result<CatalogEntry> {
    let info = entry_info(name)?;
    let params = resolve(info, given)?;
    let pr = Params(&params);
    let mut warnings = Vec::new();
    let mut expected = Some(Verdict::MarginallyTrapped);
    let built = match name {
        "chen-l1" => {
            let f = pr.expr("f", &["x"])?;
            let eps = pr.num("perturb")?;
            let chart = Chart::rect((-1.0, 1.0), (-1.0, 1.0), (16, 16))?;
            check_along_x(&chart, |x| second_derivative(&f, x).abs() > 1e-12, "f'' vanishes")?;
            if eps == 0.0 {
                let tau: ScalarMap = {
                    let f = f.clone();
                    Arc::new(move |x: &[f64]| Ok(f.eval(&x[..1])))
                };
                Built::Lift(null_lift(AmbientKind::Minkowski, chart, None, tau)?)
            } else {
                expected = Some(Verdict::NotMarginal);
                let eval: VecMap = Arc::new(move |x: &[f64]| {
                    let v: f64 = f.eval(&x[..1]);
                    Ok(vec![x[0], x[1], v + eps * x[1] * x[1], v])
                });
                let nn: VecMap = Arc::new(|_x: &[f64]| Ok(vec![0.0, 0.0, 1.0, 1.0]));
                Built::Lift(explicit_lift(AmbientKind::Minkowski, chart, eval, nn, "L1 with the third coordinate perturbed"))
            }
        }
        "chen-l2" => {
            let q = pr.expr("q", &["x"])?;
            let r = pr.expr("r", &["x"])?;
            let chart = Chart::rect((-0.5, 0.5), (-0.5, 0.5), (16, 16))?;
            let vanishing = chart
                .samples()
                .iter()
                .filter(|x| (second_derivative(&q, x[0]) + q.eval::<f64>(&x[..1])).abs() <= 1e-12)
                .count();
            if vanishing > 0 {
                warnings.push(format!(
                    "q''+q vanishes at {vanishing} of {} samples; there the height is affine in the plane and the surface is totally geodesic",
                    chart.len()
                ));
            }
            for x in chart.samples() {
                let rv: f64 = r.eval(&x[..1]);
                if (x[1] + rv).abs() <= 1e-9 {
                    return Err(GeomError::ParamConstraint(format!("L2 chart degenerates where y = -r(x), at {x:?}")));
                }
            }
            let (qs, rs) = (q.clone(), r.clone());
            let slice: VecMap = Arc::new(move |x: &[f64]| Ok(l2_plane(&qs, &rs, x[0], x[1])[..2].to_vec()));
            let tau: ScalarMap = Arc::new(move |x: &[f64]| Ok(l2_plane(&q, &r, x[0], x[1])[2]));
            Built::Lift(null_lift(AmbientKind::Minkowski, chart, Some(slice), tau)?)
        }
        "chen-l3" => {
            let f = pr.expr("f", &["x"])?;
            let chart = Chart::rect((-1.0, 1.0), (-1.0, 1.0), (16, 16))?;
            check_along_x(
                &chart,
                |x| (second_derivative(&f, x) + f.eval::<f64>(&[x])).abs() > 1e-12,
                "f''+f vanishes",
            )?;
            let tau: ScalarMap = Arc::new(move |x: &[f64]| Ok(f.eval::<f64>(&x[..1]) * x[1].cos()));
            Built::Lift(null_lift(AmbientKind::DeSitter, chart, None, tau)?)
        }
        "chen-l4" => Built::Lift(chen_l4()?),
        "torus" => {
            let (big, small) = (pr.positive("R")?, pr.positive("r")?);
            if small >= big {
                return Err(GeomError::ParamConstraint(format!("need r < R, got r={small}, R={big}")));
            }
            let chart = Chart::rect((-1.2, 1.2), (-PI, PI), (16, 16))?;
            hyper(SpaceForm::euclidean(2), chart, Torus { big, small })?
        }
        "sphere" => {
            expected = None;
            let chart = Chart::rect((0.3, 2.8), (-PI, PI), (16, 16))?;
            hyper(SpaceForm::euclidean(2), chart, Sphere { rho: pr.positive("rho")? })?
        }
        "ellipsoid" => {
            let axes = [pr.positive("a")?, pr.positive("b")?, pr.positive("c")?];
            let chart = Chart::rect((0.3, 2.8), (0.3, 2.8), (16, 16))?;
            hyper(SpaceForm::euclidean(2), chart, Ellipsoid { axes })?
        }
        "catenoid" => {
            let chart = Chart::rect((-1.0, 1.0), (-PI, PI), (16, 16))?;
            hyper(SpaceForm::euclidean(2), chart, Catenoid { c: pr.positive("c")? })?
        }
        "clifford-torus" => {
            let alpha = pr.num("alpha")?;
            if !(alpha > 0.0 && alpha < PI / 2.0) {
                return Err(GeomError::ParamConstraint(format!("alpha must lie in (0, pi/2), got {alpha}")));
            }
            let chart = Chart::rect((-PI, PI), (-PI, PI), (16, 16))?;
            hyper_in(SpaceForm::sphere(2), chart, CliffordTorus { alpha }, &[AmbientKind::SphereProduct, AmbientKind::DeSitter])?
        }
        "small-sphere" => {
            let r = pr.num("r")?;
            if !(r > 0.0 && r < PI / 2.0) {
                return Err(GeomError::ParamConstraint(format!("r must lie in (0, pi/2), got {r}")));
            }
            let chart = Chart::rect((0.3, 2.8), (-PI, PI), (16, 16))?;
            hyper_in(SpaceForm::sphere(2), chart, SmallSphere { r }, &[AmbientKind::SphereProduct])?
        }
        "hyperbolic-cylinder" => {
            let chart = Chart::rect((-1.0, 1.0), (-PI, PI), (16, 16))?;
            hyper_in(
                SpaceForm::hyperbolic(2),
                chart,
                HypCylinder { r: pr.positive("r")? },
                // k1 k2 = 1 leaves the product equation without real roots
                &[AmbientKind::AntiDeSitter],
            )?
        }
        "hyperbolic-ellipsoid" => {
            let axes = [pr.positive("a")?, pr.positive("b")?, pr.positive("c")?];
            let chart = Chart::rect((0.3, 2.8), (0.3, 2.8), (16, 16))?;
            hyper_in(
                SpaceForm::hyperbolic(2),
                chart,
                HypEllipsoid { axes },
                &[AmbientKind::HyperbolicProduct, AmbientKind::AntiDeSitter],
            )?
        }
        "palmer-sphere" => {
            let f = pr.expr("f", &["x1", "x2", "x3"])?;
            let chart = Chart::rect((0.3, 2.8), (-3.0, 3.0), (16, 16))?;
            let sf = SupportFunction::new(chart, Arc::new(ExprField(f)))?;
            Built::Lift(lift_palmer(&sf, &Tolerances::default())?)
        }
        "null-lift" => {
            let tau = pr.expr("tau", &["x", "y"])?;
            let kind = ambient.unwrap_or(AmbientKind::Minkowski);
            let chart = Chart::rect((-1.0, 1.0), (-1.0, 1.0), (16, 16))?;
            let t: ScalarMap = Arc::new(move |x: &[f64]| Ok(tau.eval(x)));
            Built::Lift(null_lift(kind, chart, None, t)?)
        }
        "random-graph" => {
            expected = Some(Verdict::NotMarginal);
            Built::Lift(graph_in_slice(pr.num("amp")?)?)
        }
        other => return Err(GeomError::UnknownEntry(other.to_string())),
    };
    if let (Some(k), Built::Hypersurface { ambients, .. }) = (ambient, &built) {
        if !ambients.contains(&k) {
            return Err(GeomError::UnsupportedAmbient(format!(
                "`{name}` lifts into {:?}, not {k}",
                ambients.iter().map(|a| a.name()).collect::<Vec<_>>()
            )));
        }
    }
    Ok(CatalogEntry {
        info,
        params,
        built,
        expected_verdict: expected,
        warnings,
    })
}

fn second_derivative(f: &Expr, x: f64) -> f64 {
    f.eval(&[HyperDual::<1>::variable(x, 0)]).h[0][0]
}

fn check_along_x(chart: &Chart, ok: impl Fn(f64) -> bool, what: &str) -> Result<()> {
    for x in chart.samples() {
        if !ok(x[0]) {
            return Err(GeomError::ParamConstraint(format!("{what} at x = {}", x[0])));
        }
    }
    Ok(())
}

fn hyper<M: AnalyticMap>(space: SpaceForm, chart: Chart, map: M) -> Result<Built> {
    let ambients = match space.kind {
        SpaceFormKind::Euclidean => vec![AmbientKind::Minkowski],
        SpaceFormKind::Sphere => vec![AmbientKind::DeSitter, AmbientKind::SphereProduct],
        SpaceFormKind::Hyperbolic => vec![AmbientKind::AntiDeSitter, AmbientKind::HyperbolicProduct],
    };
    hyper_in(space, chart, map, &ambients)
}

fn hyper_in<M: AnalyticMap>(space: SpaceForm, chart: Chart, map: M, ambients: &[AmbientKind]) -> Result<Built> {
    Ok(Built::Hypersurface {
        imm: HypersurfaceImmersion::analytic(space, chart, Arc::new(map))?,
        ambients: ambients.to_vec(),
    })
}

fn gauss_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = NonZeroUsize::new(32).expect("nonzero");
        GaussLegendre::new(n).as_node_weight_pairs().to_vec()
    })
}

/// `int_0^x g(t) dt` by Gauss-Legendre on `[0, x]`; smooth in `x`, so it
/// differentiates like the integrand.
pub fn integrate_from_zero<T: Real>(x: T, g: impl Fn(T) -> T) -> T {
    let half = x * 0.5;
    gauss_rule()
        .iter()
        .fold(T::cst(0.0), |acc, &(node, w)| acc + g(half * (node + 1.0)) * w)
        * half
}

/// `(T_1, T_2, tau)` of the L2 family.
fn l2_plane<T: Real>(q: &Expr, r: &Expr, x: T, y: T) -> [T; 3] {
    let rs = integrate_from_zero(x, |t| r.eval(&[t]) * t.sin());
    let rc = integrate_from_zero(x, |t| r.eval(&[t]) * t.cos());
    let rq = integrate_from_zero(x, |t| {
        let dq = q.eval(&[Dual::<T, 1>::variable(t, 0)]).g[0];
        r.eval(&[t]) * dq
    });
    [y * x.cos() - rs, y * x.sin() + rc, rq + q.eval(&[x]) * y]
}

fn chen_l4() -> Result<LiftedImmersion> {
    let chart = Chart::rect((-1.0, 1.0), (-1.0, 1.0), (16, 16))?;
    let eval: VecMap = Arc::new(|v: &[f64]| {
        let (x, y) = (v[0], v[1]);
        let (ep, em) = (y.exp(), (-y).exp());
        Ok(vec![em, x * ep, x * x * ep - 0.5 * ep, 0.5 * ep + em, x * x * ep])
    });
    let nn: VecMap = Arc::new(|_x: &[f64]| Ok(vec![-1.0, 0.0, 1.0, -1.0, 1.0]));
    let mut lift = explicit_lift(AmbientKind::AntiDeSitter, chart, eval.clone(), nn, "L4 with constant null normal");
    // L4 = (phi, 0) + tau (nu, 1) with tau = x^2 e^y
    let tau: ScalarMap = Arc::new(|v: &[f64]| Ok(v[0] * v[0] * v[1].exp()));
    let slice: VecMap = Arc::new(move |v: &[f64]| {
        let y = eval(v)?;
        let t = y[4];
        Ok(vec![y[0] + t, y[1], y[2] - t, y[3] + t])
    });
    lift.null_data = Some(NullLiftData { slice, tau });
    Ok(lift)
}

fn graph_in_slice(amp: f64) -> Result<LiftedImmersion> {
    let chart = Chart::rect((-1.0, 1.0), (-1.0, 1.0), (16, 16))?;
    let eval: VecMap = Arc::new(move |x: &[f64]| Ok(vec![x[0], x[1], amp * x[0].sin() * x[1].sin(), 0.0]));
    let nn: VecMap = Arc::new(move |x: &[f64]| {
        let (hx, hy) = (amp * x[0].cos() * x[1].sin(), amp * x[0].sin() * x[1].cos());
        let s = (1.0 + hx * hx + hy * hy).sqrt();
        Ok(vec![-hx / s, -hy / s, 1.0 / s, 1.0])
    });
    Ok(explicit_lift(AmbientKind::Minkowski, chart, eval, nn, "graph in the slice x4 = 0"))
}

struct ExprField(Arc<Expr>);

impl ScalarField for ExprField {
    fn eval<T: Real>(&self, y: &[T]) -> T {
        self.0.eval(y)
    }
}

struct Torus {
    big: f64,
    small: f64,
}

impl AnalyticMap for Torus {
    fn dim(&self) -> usize {
        2
    }
    fn eval<T: Real>(&self, x: &[T]) -> Vec<T> {
        let rho = x[0].cos() * self.small + self.big;
        vec![rho * x[1].cos(), rho * x[1].sin(), x[0].sin() * self.small]
    }
}

struct Sphere {
    rho: f64,
}

impl AnalyticMap for Sphere {
    fn dim(&self) -> usize {
        2
    }
    fn eval<T: Real>(&self, x: &[T]) -> Vec<T> {
        let s = x[0].sin() * self.rho;
        vec![s * x[1].cos(), s * x[1].sin(), x[0].cos() * self.rho]
    }
}

fn ellipsoid_point<T: Real>(axes: &[f64; 3], x: &[T]) -> [T; 3] {
    let s = x[0].sin();
    [s * x[1].cos() * axes[0], s * x[1].sin() * axes[1], x[0].cos() * axes[2]]
}

struct Ellipsoid {
    axes: [f64; 3],
}

impl AnalyticMap for Ellipsoid {
    fn dim(&self) -> usize {
        2
    }
    fn eval<T: Real>(&self, x: &[T]) -> Vec<T> {
        ellipsoid_point(&self.axes, x).to_vec()
    }
}

struct Catenoid {
    c: f64,
}

impl AnalyticMap for Catenoid {
    fn dim(&self) -> usize {
        2
    }
    fn eval<T: Real>(&self, x: &[T]) -> Vec<T> {
        let r = (x[0] / self.c).cosh() * self.c;
        vec![r * x[1].cos(), r * x[1].sin(), x[0]]
    }
}

struct CliffordTorus {
    alpha: f64,
}

impl AnalyticMap for CliffordTorus {
    fn dim(&self) -> usize {
        2
    }
    fn eval<T: Real>(&self, x: &[T]) -> Vec<T> {
        let (c, s) = (self.alpha.cos(), self.alpha.sin());
        vec![x[0].cos() * c, x[0].sin() * c, x[1].cos() * s, x[1].sin() * s]
    }
}

struct SmallSphere {
    r: f64,
}

impl AnalyticMap for SmallSphere {
    fn dim(&self) -> usize {
        2
    }
    fn eval<T: Real>(&self, x: &[T]) -> Vec<T> {
        let s = x[0].sin() * self.r.sin();
        vec![s * x[1].cos(), s * x[1].sin(), x[0].cos() * self.r.sin(), T::cst(self.r.cos())]
    }
}

struct HypCylinder {
    r: f64,
}

impl AnalyticMap for HypCylinder {
    fn dim(&self) -> usize {
        2
    }
    fn eval<T: Real>(&self, x: &[T]) -> Vec<T> {
        let (sh, ch) = (self.r.sinh(), self.r.cosh());
        vec![x[1].cos() * sh, x[1].sin() * sh, x[0].sinh() * ch, x[0].cosh() * ch]
    }
}

struct HypEllipsoid {
    axes: [f64; 3],
}

impl AnalyticMap for HypEllipsoid {
    fn dim(&self) -> usize {
        2
    }
    fn eval<T: Real>(&self, x: &[T]) -> Vec<T> {
        let e = ellipsoid_point(&self.axes, x);
        let w = (e[0] * e[0] + e[1] * e[1] + e[2] * e[2] + 1.0).sqrt();
        vec![e[0], e[1], e[2], w]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructor::{null_projection, solve_roots, curvature_polynomial};
    use crate::hypersurface::{frame_at, spectrum_at};

    fn none() -> BTreeMap<String, String> {
        BTreeMap::new()
    }

    #[test]
    fn list_is_stable_and_complete() {
        let names: Vec<&str> = catalog_list().iter().map(|e| e.name).collect();
        for want in ["chen-l1", "chen-l2", "chen-l3", "chen-l4", "torus", "clifford-torus", "catenoid", "ellipsoid", "palmer-sphere"] {
            assert!(names.contains(&want), "{want}");
        }
        let all: Vec<&str> = catalog_filter("").iter().map(|e| e.name).collect();
        assert_eq!(all, names);
        let mut dedup = names.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), names.len());
    }

    #[test]
    fn every_entry_evaluates_on_its_chart() {
        let tol = Tolerances::default();
        for info in catalog_list() {
            let e = catalog_lookup(info.name, &none()).unwrap();
            for x in e.chart().samples() {
                match &e.built {
                    Built::Hypersurface { imm, .. } => {
                        frame_at(imm, &x, &tol).unwrap_or_else(|err| panic!("{}: {err}", info.name));
                    }
                    Built::Lift(l) => {
                        let y = l.eval_at(&x).unwrap();
                        assert!(y.iter().all(|v| v.is_finite()));
                        assert!(l.ambient.constraint_residual(&y) < 1e-10, "{}", info.name);
                    }
                }
            }
        }
    }

    #[test]
    fn params_and_errors() {
        let p = parse_params("f=x^3+x, perturb = 0.01").unwrap();
        assert_eq!(p["perturb"], "0.01");
        assert!(parse_params("f").is_err());
        assert!(parse_params("a=1,a=2").is_err());
        assert!(matches!(catalog_lookup("nope", &none()), Err(GeomError::UnknownEntry(_))));
        let bad = parse_params("g=1").unwrap();
        assert!(matches!(catalog_lookup("torus", &bad), Err(GeomError::ParamConstraint(_))));
        // f'' vanishes for a linear profile
        let lin = parse_params("f=2*x+1").unwrap();
        assert!(matches!(catalog_lookup("chen-l1", &lin), Err(GeomError::ParamConstraint(_))));
        let l3 = parse_params("f=sin(x)").unwrap();
        assert!(matches!(catalog_lookup("chen-l3", &l3), Err(GeomError::ParamConstraint(_))));
        assert!(catalog_lookup_in("torus", &none(), Some(AmbientKind::DeSitter)).is_err());
    }

    #[test]
    fn l1_matches_formula() {
        let e = catalog_lookup("chen-l1", &none()).unwrap();
        let Built::Lift(l) = &e.built else { panic!() };
        assert_eq!(l.eval_at(&[0.5, -0.25]).unwrap(), vec![0.5, -0.25, 0.25, 0.25]);
        assert_eq!(e.expected_verdict, Some(Verdict::MarginallyTrapped));
        let p = catalog_lookup("chen-l1", &parse_params("perturb=0.01").unwrap()).unwrap();
        assert_eq!(p.expected_verdict, Some(Verdict::NotMarginal));
    }

    #[test]
    fn l2_closed_form_for_sine() {
        // q = sin, r = 1: T = ((1+y) cos x - 1, (1+y) sin x), tau = (1+y) sin x
        let e = catalog_lookup("chen-l2", &none()).unwrap();
        assert_eq!(e.warnings.len(), 1);
        let Built::Lift(l) = &e.built else { panic!() };
        for x in e.chart().samples() {
            let y = l.eval_at(&x).unwrap();
            let rho = 1.0 + x[1];
            let want = [rho * x[0].cos() - 1.0, rho * x[0].sin(), rho * x[0].sin(), rho * x[0].sin()];
            assert!(y.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-14), "{y:?} {want:?}");
        }
        let e = catalog_lookup("chen-l2", &parse_params("q=x^2,r=1+x").unwrap()).unwrap();
        assert!(e.warnings.is_empty());
    }

    #[test]
    fn quadrature_against_antiderivatives() {
        let v: f64 = integrate_from_zero(1.3, |t: f64| t.exp() * t.cos());
        let exact = 0.5 * (1.3f64.exp() * (1.3f64.cos() + 1.3f64.sin()) - 1.0);
        assert!((v - exact).abs() < 1e-14);
        let d = integrate_from_zero(HyperDual::<1>::variable(0.8, 0), |t| t * t.sin());
        assert!((d.g[0] - 0.8 * 0.8f64.sin()).abs() < 1e-14);
        assert!((d.h[0][0] - (0.8f64.sin() + 0.8 * 0.8f64.cos())).abs() < 1e-13);
    }

    #[test]
    fn l4_is_in_ads_and_projects_to_a_geodesic_plane() {
        let e = catalog_lookup("chen-l4", &none()).unwrap();
        let Built::Lift(l) = &e.built else { panic!() };
        let x = [0.3, -0.4];
        let (a, b) = (x[0], x[1]);
        let y = l.eval_at(&x).unwrap();
        let want = [(-b).exp(), a * b.exp(), a * a * b.exp() - 0.5 * b.exp(), 0.5 * b.exp() + (-b).exp(), a * a * b.exp()];
        assert!(y.iter().zip(want).all(|(p, q)| (p - q).abs() < 1e-14));
        let phi = null_projection(l).unwrap();
        let tol = Tolerances::default();
        let f = frame_at(&phi, &x, &tol).unwrap();
        assert!(f.b.iter().flatten().all(|v| v.abs() < 1e-6), "{:?}", f.b);
    }

    #[test]
    fn hypersurface_spectra() {
        let tol = Tolerances::default();
        let x = [0.7, 1.1];
        let spec = |name: &str, params: &str| {
            let e = catalog_lookup(name, &parse_params(params).unwrap()).unwrap();
            let Built::Hypersurface { imm, .. } = &e.built else { panic!() };
            spectrum_at(&frame_at(imm, &x, &tol).unwrap(), &tol).unwrap()
        };
        let s = spec("clifford-torus", "alpha=0.6");
        let want = [-(0.6f64.tan()), 1.0 / 0.6f64.tan()];
        let mut got = s.kappas.clone();
        got.iter_mut().for_each(|k| *k = k.abs());
        let mut w: Vec<f64> = want.iter().map(|k| k.abs()).collect();
        w.sort_by(f64::total_cmp);
        got.sort_by(f64::total_cmp);
        assert!(got.iter().zip(&w).all(|(a, b)| (a - b).abs() < 1e-9), "{:?}", s.kappas);
        let s = spec("small-sphere", "r=0.6");
        assert_eq!(s.mults, vec![2]);
        assert!((s.kappas[0].abs() - 1.0 / 0.6f64.tan()).abs() < 1e-9);
        let s = spec("hyperbolic-cylinder", "r=0.8");
        let mut got: Vec<f64> = s.kappas.iter().map(|k| k.abs()).collect();
        got.sort_by(f64::total_cmp);
        assert!((got[0] - 0.8f64.tanh()).abs() < 1e-9 && (got[1] - 1.0 / 0.8f64.tanh()).abs() < 1e-9);
        let s = spec("catenoid", "c=1");
        assert!((s.kappas[0] + s.kappas[1]).abs() < 1e-9);
        let s = spec("hyperbolic-ellipsoid", "");
        assert!(s.kappas.iter().all(|k| k.abs() > 1.0));
        let poly = curvature_polynomial(&s, AmbientKind::HyperbolicProduct, &tol).unwrap();
        assert_eq!(solve_roots(&poly, tol.tol_root).unwrap().len(), 1);
    }
}
