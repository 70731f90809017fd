//! Independent numerical check of marginality.
//!
//! Everything here is computed from evaluations of a [`LiftedImmersion`]:
//! flat second differences in the container, then orthogonal projection onto
//! the normal plane. Constructor data is read only for lemma cross-checks.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::constructor::{acot, acoth, AmbientKind, LiftPoint, LiftedImmersion};
use crate::geometry::linalg::{euclidean_complement, mat_mul, max_abs_diff, spd_inverse, sym_eigen, Matrix};
use crate::geometry::{jet2_of, Jet2, Signature};
use crate::hypersurface::ShapeSpectrum;
use crate::{GeomError, Result};

/// Tangent data, induced metric and null normal pair at one chart point.
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzFrame {
    pub x: Vec<f64>,
    pub point: Vec<f64>,
    pub tangent: Vec<Vec<f64>>,
    /// Induced metric `g_bar`.
    pub metric: Matrix,
    pub min_eig: f64,
    /// Unit spacelike and timelike normals spanning the normal plane.
    pub unit_space: Vec<f64>,
    pub unit_time: Vec<f64>,
    /// Null normal matching the lift's stored one.
    pub null_primary: Vec<f64>,
    pub null_opposite: Vec<f64>,
    /// Distance between `null_primary` and the stored null normal after normalization.
    pub primary_mismatch: f64,
    /// The lift's own null normal at `x`.
    pub stored_normal: Vec<f64>,
    pub signature: Signature,
    pub jet: Jet2,
}

/// Scales a null vector to last coordinate 1 when possible, else to unit length.
pub fn normalize_null(v: &[f64]) -> Vec<f64> {
    let m = v.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    let last = v.last().copied().unwrap_or(0.0);
    if m > 0.0 && last.abs() > 1e-8 * m {
        return v.iter().map(|c| c / last).collect();
    }
    let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    if norm == 0.0 {
        return v.to_vec();
    }
    v.iter().map(|c| c / norm).collect()
}

fn sign_free_distance(a: &[f64], b: &[f64]) -> f64 {
    let plus = a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    let minus = a.iter().zip(b).map(|(p, q)| (p + q).abs()).fold(0.0, f64::max);
    plus.min(minus)
}

fn combine(coeffs: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let dim = basis[0].len();
    (0..dim).map(|k| coeffs.iter().zip(basis).map(|(c, b)| c * b[k]).sum()).collect()
}

/// Builds the frame of `lift` at `x`.
pub fn lorentz_frame_at(lift: &LiftedImmersion, x: &[f64], tol: &Tolerances) -> Result<LorentzFrame> {
    if lift.chart.is_excluded(x) {
        return Err(GeomError::Excluded);
    }
    let sig = lift.ambient.container_signature;
    let jet = jet2_of(lift.eval.as_ref(), x, tol.step, Some(&lift.chart))?;
    if jet.ambient_dim() != sig.dim() {
        return Err(GeomError::Dimension {
            expected: sig.dim(),
            found: jet.ambient_dim(),
        });
    }
    let n = jet.dim();
    let metric: Matrix = (0..n)
        .map(|i| (0..n).map(|j| sig.dot(&jet.d1[i], &jet.d1[j])).collect())
        .collect();
    let min_eig = sym_eigen(&metric, 1e-6)?.values[0];
    if !(min_eig > tol.tol_pd) {
        return Err(GeomError::SpacelikeViolation { min_eig });
    }

    let mut rows: Vec<Vec<f64>> = jet.d1.iter().map(|t| sig.lower(t)).collect();
    rows.extend(lift.ambient.constraint_normals(&jet.value).iter().map(|c| sig.lower(c)));
    let basis = euclidean_complement(&rows, sig.dim());
    if basis.len() != 2 {
        return Err(GeomError::FrameError { det: 0.0 });
    }
    let g2: Matrix = (0..2)
        .map(|a| (0..2).map(|b| sig.dot(&basis[a], &basis[b])).collect())
        .collect();
    let det = g2[0][0] * g2[1][1] - g2[0][1] * g2[1][0];
    if !(det < -1e-12) {
        return Err(GeomError::FrameError { det });
    }
    let eig = sym_eigen(&g2, 1e-9)?;
    let (lt, ls) = (eig.values[0], eig.values[1]);
    let unit_time: Vec<f64> = combine(&eig.vectors[0], &basis).iter().map(|v| v / (-lt).sqrt()).collect();
    let unit_space: Vec<f64> = combine(&eig.vectors[1], &basis).iter().map(|v| v / ls.sqrt()).collect();
    let plus: Vec<f64> = unit_time.iter().zip(&unit_space).map(|(t, s)| t + s).collect();
    let minus: Vec<f64> = unit_time.iter().zip(&unit_space).map(|(t, s)| t - s).collect();

    let stored = lift.null_normal_at(x)?;
    if stored.len() != sig.dim() {
        return Err(GeomError::Dimension {
            expected: sig.dim(),
            found: stored.len(),
        });
    }
    // the candidate closest to the stored direction has the smaller pairing
    let unit = |v: &[f64]| {
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        v.iter().map(|c| c / norm).collect::<Vec<f64>>()
    };
    let su = unit(&stored);
    let (a, b) = (sig.dot(&unit(&plus), &su).abs(), sig.dot(&unit(&minus), &su).abs());
    let (primary, opposite) = if a <= b { (plus, minus) } else { (minus, plus) };
    let null_primary = normalize_null(&primary);
    let null_opposite = normalize_null(&opposite);
    let primary_mismatch = sign_free_distance(&null_primary, &normalize_null(&stored));

    Ok(LorentzFrame {
        x: x.to_vec(),
        point: jet.value.clone(),
        tangent: jet.d1.clone(),
        metric,
        min_eig,
        unit_space,
        unit_time,
        null_primary,
        null_opposite,
        primary_mismatch,
        stored_normal: stored,
        signature: sig,
        jet,
    })
}

/// Vector-valued second fundamental form `h[i][j]`.
pub type SecondForm = Vec<Vec<Vec<f64>>>;

impl LorentzFrame {
    pub fn dim(&self) -> usize {
        self.tangent.len()
    }

    /// Orthogonal projection onto the normal plane.
    pub fn normal_part(&self, w: &[f64]) -> Vec<f64> {
        let sig = self.signature;
        let (a, b) = (sig.dot(w, &self.unit_space), sig.dot(w, &self.unit_time));
        self.unit_space.iter().zip(&self.unit_time).map(|(s, t)| a * s - b * t).collect()
    }

    pub fn second_form(&self) -> SecondForm {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.normal_part(&self.jet.d2[i][j])).collect())
            .collect()
    }

    /// `H = (1/n) g^{ij} h_ij`.
    pub fn mean_curvature(&self, h: &SecondForm) -> Result<Vec<f64>> {
        let n = self.dim();
        let gi = spd_inverse(&self.metric, 0.0)?;
        let dim = self.point.len();
        let mut out = vec![0.0; dim];
        for i in 0..n {
            for j in 0..n {
                for (k, o) in out.iter_mut().enumerate() {
                    *o += gi[i][j] * h[i][j][k];
                }
            }
        }
        out.iter_mut().for_each(|v| *v /= n as f64);
        Ok(out)
    }

    /// `|<H, nu>| / (1 + |H|_inf)` for the primary and the opposite null normal.
    pub fn null_residuals(&self, hvec: &[f64]) -> (f64, f64) {
        let scale = 1.0 + hvec.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        (
            self.signature.dot(hvec, &self.null_primary).abs() / scale,
            self.signature.dot(hvec, &self.null_opposite).abs() / scale,
        )
    }

    /// `max_i |<T_i, stored normal>|` and `|<stored, stored>|`.
    pub fn stored_normal_residuals(&self) -> (f64, f64) {
        let sig = self.signature;
        let tangent = self.tangent.iter().map(|t| sig.dot(t, &self.stored_normal).abs()).fold(0.0, f64::max);
        (tangent, sig.dot(&self.stored_normal, &self.stored_normal).abs())
    }
}

pub fn second_form_at(lift: &LiftedImmersion, x: &[f64], tol: &Tolerances) -> Result<(LorentzFrame, SecondForm)> {
    let frame = lorentz_frame_at(lift, x, tol)?;
    let h = frame.second_form();
    Ok((frame, h))
}

pub fn mean_curvature_at(lift: &LiftedImmersion, x: &[f64], tol: &Tolerances) -> Result<Vec<f64>> {
    let (frame, h) = second_form_at(lift, x, tol)?;
    frame.mean_curvature(&h)
}

/// `(C, S)` with `g_bar = C^2 g - 2 S C b + S^2 b g^-1 b` for the product lifts.
fn product_angles(kind: AmbientKind, s: f64) -> Result<(f64, f64)> {
    match kind {
        AmbientKind::SphereProduct => {
            let t = acot(s);
            Ok((t.cos(), t.sin()))
        }
        AmbientKind::HyperbolicProduct => {
            let t = acoth(s)?;
            Ok((t.cosh(), t.sinh()))
        }
        _ => Err(GeomError::Argument(format!("{kind} is not a product"))),
    }
}

fn bgb(g: &[Vec<f64>], b: &[Vec<f64>]) -> Result<Matrix> {
    let gi = spd_inverse(g, 0.0)?;
    Ok(mat_mul(&mat_mul(b, &gi), b))
}

fn lincomb(terms: &[(f64, &Matrix)]) -> Matrix {
    let n = terms[0].1.len();
    (0..n)
        .map(|i| (0..n).map(|j| terms.iter().map(|(c, m)| c * m[i][j]).sum()).collect())
        .collect()
}

/// Closed-form induced metric of the lift at height `param`.
pub fn lemma_metric(kind: AmbientKind, g: &Matrix, b: &Matrix, param: f64) -> Result<Matrix> {
    let bb = bgb(g, b)?;
    if kind.is_space_form_family() {
        let t = param;
        return Ok(lincomb(&[(1.0, g), (-2.0 * t, b), (t * t, &bb)]));
    }
    let (c, s) = product_angles(kind, param)?;
    Ok(lincomb(&[(c * c, g), (-2.0 * s * c, b), (s * s, &bb)]))
}

/// Closed-form `h_bar_nu = <h_bar, nu_bar>` for the stored null normal.
pub fn lemma_second_form(kind: AmbientKind, g: &Matrix, b: &Matrix, param: f64) -> Result<Matrix> {
    let bb = bgb(g, b)?;
    match kind {
        AmbientKind::SphereProduct => {
            let (c, s) = product_angles(kind, param)?;
            Ok(lincomb(&[(c * c - s * s, b), (s * c, g), (-s * c, &bb)]))
        }
        AmbientKind::HyperbolicProduct => {
            let (c, s) = product_angles(kind, param)?;
            Ok(lincomb(&[(c * c + s * s, b), (-s * c, g), (-s * c, &bb)]))
        }
        _ => Ok(lincomb(&[(1.0, b), (-param, &bb)])),
    }
}

/// Closed form of `<H_bar, nu_bar>` from the principal curvatures; `None` when
/// the lift degenerates at this height.
pub fn eq_h_closed_form(kind: AmbientKind, spectrum: &ShapeSpectrum, param: f64) -> Option<f64> {
    let n = spectrum.n() as f64;
    let mut sum = 0.0;
    for (&k, &m) in spectrum.kappas.iter().zip(&spectrum.mults) {
        let (num, den) = match kind {
            AmbientKind::SphereProduct => (k * param + 1.0, param - k),
            AmbientKind::HyperbolicProduct => (k * param - 1.0, param - k),
            _ => (k, 1.0 - param * k),
        };
        if den.abs() <= 1e-8 * (1.0 + num.abs()) {
            return None;
        }
        sum += m as f64 * num / den;
    }
    Some(sum / n)
}

/// `|<H_bar, nu_bar> - closed form|`.
pub fn check_eq_h(kind: AmbientKind, frame: &LorentzFrame, hvec: &[f64], lp: &LiftPoint) -> Option<f64> {
    let closed = eq_h_closed_form(kind, &lp.spectrum, lp.param)?;
    Some((frame.signature.dot(hvec, &frame.stored_normal) - closed).abs())
}

/// Max-norm distance between the measured induced metric and its closed form.
pub fn check_lemma_metric(kind: AmbientKind, frame: &LorentzFrame, lp: &LiftPoint) -> Result<f64> {
    let closed = lemma_metric(kind, &lp.frame.g, &lp.frame.b, lp.param)?;
    Ok(max_abs_diff(&frame.metric, &closed))
}

/// Max-norm distance between `<h_bar, nu_bar>` and its closed form.
pub fn check_lemma_second_form(kind: AmbientKind, frame: &LorentzFrame, h: &SecondForm, lp: &LiftPoint) -> Result<f64> {
    let closed = lemma_second_form(kind, &lp.frame.g, &lp.frame.b, lp.param)?;
    let n = frame.dim();
    let measured: Matrix = (0..n)
        .map(|i| (0..n).map(|j| frame.signature.dot(&h[i][j], &frame.stored_normal)).collect())
        .collect();
    Ok(max_abs_diff(&measured, &closed))
}

/// Covariant Hessian of `tau` in the induced metric, from the lift's own jet.
pub fn covariant_hessian(frame: &LorentzFrame, tau_jet: &Jet2) -> Result<Matrix> {
    let n = frame.dim();
    let sig = frame.signature;
    let gi = spd_inverse(&frame.metric, 0.0)?;
    let grad: Vec<f64> = (0..n).map(|k| tau_jet.d1[k][0]).collect();
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut v = tau_jet.d2[i][j][0];
                    for k in 0..n {
                        let c = sig.dot(&frame.jet.d2[i][j], &frame.tangent[k]);
                        for l in 0..n {
                            v -= gi[k][l] * c * grad[l];
                        }
                    }
                    v
                })
                .collect()
        })
        .collect())
}

/// Null lifts: `max |h_ij - (Hess_tau + c tau g)(i, j) (nu_0, 1)|` with `c` the
/// quadric constant (`0` in Minkowski space, `+-1` for de Sitter / anti de Sitter,
/// where the slice's own second fundamental form leaves the `c tau g` term).
pub fn check_null_hessian(lift: &LiftedImmersion, frame: &LorentzFrame, h: &SecondForm, tol: &Tolerances) -> Result<Option<f64>> {
    let Some(data) = &lift.null_data else {
        return Ok(None);
    };
    let tau = data.tau.clone();
    let f = move |x: &[f64]| -> Result<Vec<f64>> { Ok(vec![tau(x)?]) };
    let tau_jet = jet2_of(&f, &frame.x, tol.step, Some(&lift.chart))?;
    let mut hess = covariant_hessian(frame, &tau_jet)?;
    let n = frame.dim();
    let c = lift.ambient.quadric_constant.filter(|_| !lift.ambient.product).unwrap_or(0.0);
    let t = tau_jet.value[0];
    for i in 0..n {
        for j in 0..n {
            hess[i][j] += c * t * frame.metric[i][j];
        }
    }
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for (k, v) in h[i][j].iter().enumerate() {
                worst = worst.max((v - hess[i][j] * frame.stored_normal[k]).abs());
            }
        }
    }
    Ok(Some(worst))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    MarginallyTrapped,
    NotMarginal,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::MarginallyTrapped => "marginally_trapped",
            Verdict::NotMarginal => "not_marginal",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

impl std::str::FromStr for Verdict {
    type Err = GeomError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().replace('-', "_").as_str() {
            "marginally_trapped" | "pass" => Ok(Verdict::MarginallyTrapped),
            "not_marginal" | "fail" => Ok(Verdict::NotMarginal),
            "inconclusive" => Ok(Verdict::Inconclusive),
            other => Err(GeomError::Parse(format!("unknown verdict `{other}`"))),
        }
    }
}

/// Per-sample diagnostics. Checks that could not run are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub x: Vec<f64>,
    pub min_eig: Option<f64>,
    pub null_residual_primary: Option<f64>,
    pub null_residual_opposite: Option<f64>,
    pub hvec_norm_sq: Option<f64>,
    pub legendrian_residual: Option<f64>,
    pub normal_null_residual: Option<f64>,
    pub primary_mismatch: Option<f64>,
    pub lemma_metric_residual: Option<f64>,
    pub lemma_secondform_residual: Option<f64>,
    pub eq_h_residual: Option<f64>,
    /// Reason the sample was excluded or failed.
    pub error: Option<String>,
    /// The induced metric was not positive definite here.
    pub spacelike_violation: bool,
}

impl PointRecord {
    fn failed(x: &[f64], err: &GeomError) -> Self {
        let spacelike = matches!(err.root_cause(), GeomError::SpacelikeViolation { .. });
        let min_eig = match err.root_cause() {
            GeomError::SpacelikeViolation { min_eig } => Some(*min_eig),
            _ => None,
        };
        Self {
            x: x.to_vec(),
            min_eig,
            null_residual_primary: None,
            null_residual_opposite: None,
            hvec_norm_sq: None,
            legendrian_residual: None,
            normal_null_residual: None,
            primary_mismatch: None,
            lemma_metric_residual: None,
            lemma_secondform_residual: None,
            eq_h_residual: None,
            error: Some(err.to_string()),
            spacelike_violation: spacelike,
        }
    }

    /// `min(primary, opposite)` null residual.
    pub fn null_residual(&self) -> Option<f64> {
        match (self.null_residual_primary, self.null_residual_opposite) {
            (Some(a), Some(b)) => Some(a.min(b)),
            _ => None,
        }
    }

    pub fn is_excluded(&self) -> bool {
        self.error.is_some() && !self.spacelike_violation
    }
}

/// Full per-point check of `lift` at `x`.
pub fn check_point(lift: &LiftedImmersion, x: &[f64], tol: &Tolerances) -> PointRecord {
    match check_point_inner(lift, x, tol) {
        Ok(r) => r,
        Err(e) => PointRecord::failed(x, &e),
    }
}

fn check_point_inner(lift: &LiftedImmersion, x: &[f64], tol: &Tolerances) -> Result<PointRecord> {
    let (frame, h) = second_form_at(lift, x, tol).map_err(|e| e.at("lorentz frame", x))?;
    let hvec = frame.mean_curvature(&h)?;
    let (rp, ro) = frame.null_residuals(&hvec);
    let (leg, nn) = frame.stored_normal_residuals();
    let mut rec = PointRecord {
        x: x.to_vec(),
        min_eig: Some(frame.min_eig),
        null_residual_primary: Some(rp),
        null_residual_opposite: Some(ro),
        hvec_norm_sq: Some(frame.signature.dot(&hvec, &hvec)),
        legendrian_residual: Some(leg),
        normal_null_residual: Some(nn),
        primary_mismatch: Some(frame.primary_mismatch),
        lemma_metric_residual: None,
        lemma_secondform_residual: None,
        eq_h_residual: None,
        error: None,
        spacelike_violation: false,
    };
    if let Some(src) = &lift.source {
        // lemma cross-checks are diagnostics; a failed source evaluation leaves them empty
        if let Ok(lp) = src.param_at(x) {
            let kind = lift.ambient.kind;
            if eq_h_closed_form(kind, &lp.spectrum, lp.param).is_some() {
                rec.lemma_metric_residual = check_lemma_metric(kind, &frame, &lp).ok();
                rec.lemma_secondform_residual = check_lemma_second_form(kind, &frame, &h, &lp).ok();
                rec.eq_h_residual = check_eq_h(kind, &frame, &hvec, &lp);
            }
        }
    }
    if lift.null_data.is_some() {
        rec.lemma_secondform_residual = check_null_hessian(lift, &frame, &h, tol)?;
    }
    Ok(rec)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Stat {
    pub max: f64,
    pub median: f64,
    pub count: usize,
}

impl Stat {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let mut v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let k = v.len();
        let median = if k % 2 == 1 { v[k / 2] } else { 0.5 * (v[k / 2 - 1] + v[k / 2]) };
        Some(Self {
            max: v[k - 1],
            median,
            count: k,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    /// Smallest eigenvalue of the induced metric over the grid.
    pub min_eig_g: Option<f64>,
    pub null_residual: Option<Stat>,
    pub null_residual_primary: Option<Stat>,
    pub null_residual_opposite: Option<Stat>,
    pub hvec_norm_sq: Option<Stat>,
    pub legendrian_residual: Option<Stat>,
    pub primary_mismatch: Option<Stat>,
    pub lemma_metric_residual: Option<Stat>,
    pub lemma_secondform_residual: Option<Stat>,
    pub eq_h_residual: Option<Stat>,
    pub samples: usize,
    pub excluded: usize,
    pub spacelike_violations: usize,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalityReport {
    pub points: Vec<PointRecord>,
    pub summary: ReportSummary,
    pub tol_marginal: f64,
    pub tol_pd: f64,
}

impl MarginalityReport {
    pub fn verdict(&self) -> Verdict {
        self.summary.verdict
    }

    /// Sample with the largest null residual.
    pub fn worst_point(&self) -> Option<&PointRecord> {
        self.points
            .iter()
            .filter(|p| p.null_residual().is_some())
            .max_by(|a, b| a.null_residual().unwrap().total_cmp(&b.null_residual().unwrap()))
    }
}

/// Checks every chart sample of the lift and reduces to a verdict.
pub fn assemble_report(lift: &LiftedImmersion, tol: &Tolerances) -> Result<MarginalityReport> {
    tol.validate()?;
    let samples = lift.chart.samples();
    let points: Vec<PointRecord> = samples.par_iter().map(|x| check_point(lift, x, tol)).collect();
    Ok(summarize(points, tol))
}

/// Reduction of per-point records; deterministic in the record order.
pub fn summarize(points: Vec<PointRecord>, tol: &Tolerances) -> MarginalityReport {
    let stat = |f: &dyn Fn(&PointRecord) -> Option<f64>| Stat::of(points.iter().filter_map(f));
    let excluded = points.iter().filter(|p| p.is_excluded()).count();
    let spacelike_violations = points.iter().filter(|p| p.spacelike_violation).count();
    let min_eig_g = points.iter().filter_map(|p| p.min_eig).reduce(f64::min);
    let null_residual = stat(&|p| p.null_residual());
    let total = points.len();

    let verdict = if total == 0 || excluded as f64 > tol.max_excluded_fraction * total as f64 {
        Verdict::Inconclusive
    } else if spacelike_violations > 0 || min_eig_g.is_none_or(|m| !(m > tol.tol_pd)) {
        Verdict::NotMarginal
    } else {
        match null_residual {
            Some(s) if s.max <= tol.tol_marginal => Verdict::MarginallyTrapped,
            Some(_) => Verdict::NotMarginal,
            None => Verdict::Inconclusive,
        }
    };
    let summary = ReportSummary {
        min_eig_g,
        null_residual,
        null_residual_primary: stat(&|p| p.null_residual_primary),
        null_residual_opposite: stat(&|p| p.null_residual_opposite),
        hvec_norm_sq: stat(&|p| p.hvec_norm_sq.map(f64::abs)),
        legendrian_residual: stat(&|p| p.legendrian_residual),
        primary_mismatch: stat(&|p| p.primary_mismatch),
        lemma_metric_residual: stat(&|p| p.lemma_metric_residual),
        lemma_secondform_residual: stat(&|p| p.lemma_secondform_residual),
        eq_h_residual: stat(&|p| p.eq_h_residual),
        samples: total,
        excluded,
        spacelike_violations,
        verdict,
    };
    MarginalityReport {
        points,
        summary,
        tol_marginal: tol.tol_marginal,
        tol_pd: tol.tol_pd,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructor::{explicit_lift, lift_from_rule, lift_minkowski, null_lift, HeightRule};
    use crate::geometry::{AnalyticMap, Chart, Real, ScalarMap, VecMap};
    use crate::hypersurface::{mean_gauss_at, HypersurfaceImmersion, SpaceForm};
    use std::f64::consts::PI;
    use std::sync::Arc;

    struct Torus;
    impl AnalyticMap for Torus {
        fn dim(&self) -> usize {
            2
        }
        fn eval<T: Real>(&self, x: &[T]) -> Vec<T> {
            let rho = x[0].cos() + 2.0;
            vec![rho * x[1].cos(), rho * x[1].sin(), x[0].sin()]
        }
    }

    struct Clifford;
    impl AnalyticMap for Clifford {
        fn dim(&self) -> usize {
            2
        }
        fn eval<T: Real>(&self, x: &[T]) -> Vec<T> {
            let c = std::f64::consts::FRAC_1_SQRT_2;
            vec![x[0].cos() * c, x[0].sin() * c, x[1].cos() * c, x[1].sin() * c]
        }
    }

    /// Small sphere of radius `sin 0.6` in `S^3`, as a torus-like chart.
    struct SmallSphere;
    impl AnalyticMap for SmallSphere {
        fn dim(&self) -> usize {
            2
        }
        fn eval<T: Real>(&self, x: &[T]) -> Vec<T> {
            let (r, z) = (0.6f64.sin(), 0.6f64.cos());
            vec![x[0].sin() * x[1].cos() * r, x[0].sin() * x[1].sin() * r, x[0].cos() * r, T::cst(z)]
        }
    }

    /// Geodesic sphere of hyperbolic radius 0.8 in `H^3`.
    struct HypSphere;
    impl AnalyticMap for HypSphere {
        fn dim(&self) -> usize {
            2
        }
        fn eval<T: Real>(&self, x: &[T]) -> Vec<T> {
            let (r, z) = (0.8f64.sinh(), 0.8f64.cosh());
            vec![x[0].sin() * x[1].cos() * r, x[0].sin() * x[1].sin() * r, x[0].cos() * r, T::cst(z)]
        }
    }

    fn torus() -> HypersurfaceImmersion {
        let chart = Chart::rect((-1.2, 1.2), (-PI, PI), (10, 10)).unwrap();
        HypersurfaceImmersion::analytic(SpaceForm::euclidean(2), chart, Arc::new(Torus)).unwrap()
    }

    #[test]
    fn flat_plane_null_pair() {
        let chart = Chart::rect((-1.0, 1.0), (-1.0, 1.0), (5, 5)).unwrap();
        let tau: ScalarMap = Arc::new(|_x: &[f64]| Ok(0.0));
        let lift = null_lift(AmbientKind::Minkowski, chart, None, tau).unwrap();
        let tol = Tolerances::default();
        let f = lorentz_frame_at(&lift, &[0.1, 0.2], &tol).unwrap();
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(p, q)| (p - q).abs() < 1e-10);
        assert!(close(&f.null_primary, &[0.0, 0.0, 1.0, 1.0]));
        assert!(close(&f.null_opposite, &[0.0, 0.0, -1.0, 1.0]));
        let h = f.second_form();
        assert!(h.iter().flatten().flatten().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn timelike_map_is_rejected() {
        let chart = Chart::rect((-1.0, 1.0), (-1.0, 1.0), (5, 5)).unwrap();
        let eval: VecMap = Arc::new(|x: &[f64]| Ok(vec![x[0], x[1], 0.0, 2.0 * x[0]]));
        let nn: VecMap = Arc::new(|_x: &[f64]| Ok(vec![0.0, 0.0, 1.0, 1.0]));
        let lift = explicit_lift(AmbientKind::Minkowski, chart, eval, nn, "timelike");
        let tol = Tolerances::default();
        assert!(matches!(
            lorentz_frame_at(&lift, &[0.0, 0.0], &tol),
            Err(GeomError::SpacelikeViolation { .. })
        ));
        let report = assemble_report(&lift, &tol).unwrap();
        assert_eq!(report.verdict(), Verdict::NotMarginal);
        assert_eq!(report.summary.spacelike_violations, 25);
    }

    #[test]
    fn torus_lift_passes_all_checks() {
        let tol = Tolerances::default();
        let lift = lift_minkowski(&torus(), 0, &tol).unwrap();
        let r = assemble_report(&lift, &tol).unwrap();
        let s = &r.summary;
        assert_eq!(s.verdict, Verdict::MarginallyTrapped, "{:?}", s.null_residual);
        assert!(s.lemma_metric_residual.unwrap().max < 1e-6);
        assert!(s.lemma_secondform_residual.unwrap().max < 1e-6);
        assert!(s.eq_h_residual.unwrap().max < 1e-6);
        assert!(s.primary_mismatch.unwrap().max < 1e-6);
        assert!(s.legendrian_residual.unwrap().max < 1e-7);
        let f = lorentz_frame_at(&lift, &[0.3, 0.2], &tol).unwrap();
        let sig = f.signature;
        for nu in [&f.null_primary, &f.null_opposite] {
            assert!(sig.dot(nu, nu).abs() < 1e-8);
            assert!(f.tangent.iter().all(|t| sig.dot(t, nu).abs() < 1e-8));
        }
        assert!(sig.dot(&f.null_primary, &f.null_opposite).abs() > 0.1);
    }

    #[test]
    fn principal_frame_values() {
        // torus at x = (0.4, 0.3): kappas 1 and cos(0.4)/(2 + cos(0.4)), tau = H/K
        let tol = Tolerances::default();
        let imm = torus();
        let lift = lift_minkowski(&imm, 0, &tol).unwrap();
        let x = [0.4, 0.3];
        let (frame, h) = second_form_at(&lift, &x, &tol).unwrap();
        let src = crate::hypersurface::frame_at(&imm, &x, &tol).unwrap();
        let (hm, k) = mean_gauss_at(&src).unwrap();
        let tau = hm / k;
        let k1 = 0.4f64.cos() / (2.0 + 0.4f64.cos());
        // coordinate directions are principal here: g = diag(1, rho^2)
        let rho2 = (2.0 + 0.4f64.cos()).powi(2);
        let expect = [(1.0, 1.0, 0), (k1, rho2, 1)];
        for (kappa, gii, i) in expect {
            let gbar = frame.metric[i][i] / gii;
            assert!((gbar - (1.0 - tau * kappa).powi(2)).abs() < 1e-6, "{gbar}");
            let hnu = frame.signature.dot(&h[i][i], &frame.stored_normal) / gii;
            assert!((hnu - kappa * (1.0 - tau * kappa)).abs() < 1e-6, "{hnu}");
        }
    }

    #[test]
    fn off_root_height_fails_but_lemmas_hold() {
        let tol = Tolerances::default();
        let imm = torus();
        let rule = HeightRule::Custom(Arc::new(|f, _s| {
            let (h, k) = mean_gauss_at(f)?;
            Ok(h / k + 0.1)
        }));
        let lift = lift_from_rule(&imm, AmbientKind::Minkowski, rule, &tol).unwrap();
        let r = assemble_report(&lift, &tol).unwrap();
        assert_eq!(r.verdict(), Verdict::NotMarginal);
        assert!(r.summary.null_residual.unwrap().max > 1e-3);
        assert!(r.summary.eq_h_residual.unwrap().max < 1e-6);
        assert!(r.summary.lemma_metric_residual.unwrap().max < 1e-6);
    }

    #[test]
    fn product_lemmas_off_root() {
        let tol = Tolerances::default();
        let chart = Chart::rect((0.4, 2.7), (-PI, PI), (6, 6)).unwrap();
        let cases: Vec<(AmbientKind, HypersurfaceImmersion, f64)> = vec![
            (
                AmbientKind::SphereProduct,
                HypersurfaceImmersion::analytic(SpaceForm::sphere(2), chart.clone(), Arc::new(SmallSphere)).unwrap(),
                0.7,
            ),
            (
                AmbientKind::SphereProduct,
                HypersurfaceImmersion::analytic(
                    SpaceForm::sphere(2),
                    Chart::rect((-PI, PI), (-PI, PI), (6, 6)).unwrap(),
                    Arc::new(Clifford),
                )
                .unwrap(),
                -0.4,
            ),
            (
                AmbientKind::HyperbolicProduct,
                HypersurfaceImmersion::analytic(SpaceForm::hyperbolic(2), chart.clone(), Arc::new(HypSphere)).unwrap(),
                3.0,
            ),
            (
                AmbientKind::HyperbolicProduct,
                HypersurfaceImmersion::analytic(SpaceForm::hyperbolic(2), chart, Arc::new(HypSphere)).unwrap(),
                -2.5,
            ),
        ];
        for (kind, imm, s) in cases {
            let rule = HeightRule::Custom(Arc::new(move |_f, _sp| Ok(s)));
            let lift = lift_from_rule(&imm, kind, rule, &tol).unwrap();
            let r = assemble_report(&lift, &tol).unwrap();
            let sm = &r.summary;
            assert_eq!(sm.excluded, 0, "{kind} {s}: {:?}", r.points[0].error);
            assert!(sm.lemma_metric_residual.unwrap().max < 1e-6, "{kind} {s} {sm:?}");
            assert!(sm.lemma_secondform_residual.unwrap().max < 1e-6, "{kind} {s} {sm:?}");
            assert!(sm.eq_h_residual.unwrap().max < 1e-6, "{kind} {s} {sm:?}");
            assert!(sm.primary_mismatch.unwrap().max < 1e-6, "{kind} {s}");
        }
    }

    #[test]
    fn clifford_root_lift_is_marginal() {
        let tol = Tolerances::default();
        let chart = Chart::rect((-PI, PI), (-PI, PI), (8, 8)).unwrap();
        let imm = HypersurfaceImmersion::analytic(SpaceForm::sphere(2), chart, Arc::new(Clifford)).unwrap();
        let lift = lift_from_rule(&imm, AmbientKind::SphereProduct, HeightRule::Root(0), &tol).unwrap();
        let r = assemble_report(&lift, &tol).unwrap();
        assert_eq!(r.verdict(), Verdict::MarginallyTrapped);
        // minimal in S^3 and at t = pi/2: H_bar vanishes altogether
        assert!(r.summary.hvec_norm_sq.unwrap().max < 1e-8);
    }

    #[test]
    fn null_lift_second_form_is_hessian() {
        let tol = Tolerances::default();
        let chart = Chart::rect((-0.8, 0.8), (-0.8, 0.8), (6, 6)).unwrap();
        for kind in [AmbientKind::Minkowski, AmbientKind::DeSitter, AmbientKind::AntiDeSitter] {
            let tau: ScalarMap = Arc::new(|x: &[f64]| Ok(x[0] * x[0] + x[0] * x[1] + 0.3 * x[1].sin()));
            let lift = null_lift(kind, chart.clone(), None, tau).unwrap();
            let r = assemble_report(&lift, &tol).unwrap();
            assert_eq!(r.verdict(), Verdict::MarginallyTrapped, "{kind}");
            assert!(r.summary.lemma_secondform_residual.unwrap().max < 1e-6, "{kind} {:?}", r.summary);
        }
    }

    #[test]
    fn plain_hessian_misses_tau_g_in_de_sitter() {
        // h = (Hess tau + tau g)(nu0, 1) in dS; the bare Hessian is off by exactly tau g
        let tol = Tolerances::default();
        let chart = Chart::rect((-0.8, 0.8), (-0.8, 0.8), (5, 5)).unwrap();
        let tau: ScalarMap = Arc::new(|x: &[f64]| Ok(1.0 + x[0] * x[1]));
        let lift = null_lift(AmbientKind::DeSitter, chart.clone(), None, tau.clone()).unwrap();
        for x in chart.samples() {
            let (frame, h) = second_form_at(&lift, &x, &tol).unwrap();
            let f = |y: &[f64]| -> Result<Vec<f64>> { Ok(vec![tau(y)?]) };
            let jet = jet2_of(&f, &x, tol.step, Some(&chart)).unwrap();
            let hess = covariant_hessian(&frame, &jet).unwrap();
            let t = jet.value[0];
            for i in 0..2 {
                for j in 0..2 {
                    let along: f64 = frame.signature.dot(&h[i][j], &frame.stored_normal);
                    // <(nu0,1), (nu0,1)> = 0, so measure against the opposite null direction
                    let scale = frame.signature.dot(&frame.stored_normal, &frame.null_opposite);
                    let coeff = frame.signature.dot(&h[i][j], &frame.null_opposite) / scale;
                    assert!(along.abs() < 1e-6);
                    let gap = coeff - hess[i][j];
                    assert!((gap - t * frame.metric[i][j]).abs() < 1e-5, "{gap} vs {}", t * frame.metric[i][j]);
                }
            }
            assert!(t * frame.metric[0][0] > 0.1);
        }
    }

    #[test]
    fn verdicts_survive_rescaling() {
        let tol = Tolerances::default();
        let lift = lift_minkowski(&torus(), 0, &tol).unwrap();
        let a = assemble_report(&lift, &tol).unwrap();
        let b = assemble_report(&lift.rescaled(2.0).unwrap(), &tol.with_step(2.0 * tol.step)).unwrap();
        assert_eq!(a.verdict(), b.verdict());
        let (ra, rb) = (a.summary.null_residual.unwrap().max, b.summary.null_residual.unwrap().max);
        assert!((ra - rb).abs() < 1e-7);
    }

    #[test]
    fn stats_and_verdict_names() {
        let s = Stat::of([3.0, 1.0, 2.0, f64::NAN]).unwrap();
        assert_eq!((s.max, s.median, s.count), (3.0, 2.0, 3));
        assert!(Stat::of(Vec::<f64>::new()).is_none());
        for v in [Verdict::MarginallyTrapped, Verdict::NotMarginal, Verdict::Inconclusive] {
            assert_eq!(v.to_string().parse::<Verdict>().unwrap(), v);
        }
    }
}
