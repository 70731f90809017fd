//! Curvature polynomials whose roots select marginally trapped lifts, and the
//! bracketed root solver.

use super::ambient::AmbientKind;
use crate::config::Tolerances;
use crate::hypersurface::ShapeSpectrum;
use crate::{GeomError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyFamily {
    /// `P(tau) = sum m_i prod_{j != i} (r_j - tau)`, `r = 1/kappa`.
    SpaceForm,
    /// `P(s) = sum m_i (kappa_i s + 1) prod_{j != i} (s - kappa_j)`.
    SphereProduct,
    /// `P(s) = sum m_i (kappa_i s - 1) prod_{j != i} (s - kappa_j)`.
    HyperbolicProduct,
}

impl PolyFamily {
    pub fn of(kind: AmbientKind) -> Self {
        match kind {
            AmbientKind::Minkowski | AmbientKind::DeSitter | AmbientKind::AntiDeSitter => PolyFamily::SpaceForm,
            AmbientKind::SphereProduct => PolyFamily::SphereProduct,
            AmbientKind::HyperbolicProduct => PolyFamily::HyperbolicProduct,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvaturePolynomial {
    pub ambient_kind: AmbientKind,
    pub family: PolyFamily,
    pub kappas: Vec<f64>,
    pub mults: Vec<usize>,
    /// Intervals holding exactly one root each.
    pub brackets: Vec<(f64, f64)>,
    /// Products only: `sum m_i kappa_i` vanished to tolerance.
    pub minimal: bool,
}

/// `a + b t` factors in ascending coefficient form.
type Linear = (f64, f64);

fn mul_linear(p: &[f64], (a, b): Linear) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + 1];
    for (k, c) in p.iter().enumerate() {
        out[k] += a * c;
        out[k + 1] += b * c;
    }
    out
}

pub(crate) fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * t + v)
}

pub(crate) fn derivative_coeffs(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, v)| k as f64 * v).collect()
}

impl CurvaturePolynomial {
    pub fn p(&self) -> usize {
        self.kappas.len()
    }

    /// Name of the polynomial variable.
    pub fn variable(&self) -> &'static str {
        match self.family {
            PolyFamily::SpaceForm => "tau",
            _ => "s",
        }
    }

    fn lead_factor(&self, i: usize) -> Linear {
        let k = self.kappas[i];
        match self.family {
            PolyFamily::SpaceForm => (1.0, 0.0),
            PolyFamily::SphereProduct => (1.0, k),
            PolyFamily::HyperbolicProduct => (-1.0, k),
        }
    }

    fn other_factor(&self, j: usize) -> Linear {
        let k = self.kappas[j];
        match self.family {
            PolyFamily::SpaceForm => (1.0 / k, -1.0),
            _ => (-k, 1.0),
        }
    }

    /// Evaluation in product form.
    pub fn eval(&self, t: f64) -> f64 {
        let p = self.p();
        (0..p)
            .map(|i| {
                let (a, b) = self.lead_factor(i);
                let mut term = self.mults[i] as f64 * (a + b * t);
                for j in (0..p).filter(|&j| j != i) {
                    let (c, d) = self.other_factor(j);
                    term *= c + d * t;
                }
                term
            })
            .sum()
    }

    /// Expanded coefficients, ascending.
    pub fn coefficients(&self) -> Vec<f64> {
        let p = self.p();
        let mut total = vec![0.0; p + 1];
        for i in 0..p {
            let mut term = vec![self.mults[i] as f64];
            term = mul_linear(&term, self.lead_factor(i));
            for j in (0..p).filter(|&j| j != i) {
                term = mul_linear(&term, self.other_factor(j));
            }
            for (k, c) in term.iter().enumerate() {
                total[k] += c;
            }
        }
        total
    }

    pub fn derivative(&self, t: f64) -> f64 {
        horner(&derivative_coeffs(&self.coefficients()), t)
    }

    /// Points at which the paper's sign argument applies: sorted radii for the
    /// space-form family, sorted curvatures for products.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self.family {
            PolyFamily::SpaceForm => {
                let mut r: Vec<f64> = self.kappas.iter().map(|k| 1.0 / k).collect();
                r.sort_by(f64::total_cmp);
                r
            }
            _ => self.kappas.clone(),
        }
    }
}

/// Builds the polynomial for `spec` in the family of `kind`, with its brackets.
pub fn curvature_polynomial(
    spec: &ShapeSpectrum,
    kind: AmbientKind,
    tol: &Tolerances,
) -> Result<CurvaturePolynomial> {
    let family = PolyFamily::of(kind);
    let scale: f64 = spec.kappas.iter().zip(&spec.mults).map(|(k, &m)| m as f64 * k.abs()).sum();
    let trace = spec.trace();
    let minimal = family != PolyFamily::SpaceForm && trace.abs() <= tol.tol_zero * scale.max(1.0);
    if family == PolyFamily::SpaceForm {
        if let Some(k) = spec.kappas.iter().find(|k| k.abs() <= tol.tol_zero) {
            return Err(GeomError::VanishingCurvature { kappa: *k });
        }
    }
    let mut poly = CurvaturePolynomial {
        ambient_kind: kind,
        family,
        kappas: spec.kappas.clone(),
        mults: spec.mults.clone(),
        brackets: Vec::new(),
        minimal,
    };
    poly.brackets = match family {
        PolyFamily::SpaceForm => poly.breakpoints().windows(2).map(|w| (w[0], w[1])).collect(),
        PolyFamily::SphereProduct => sphere_brackets(&poly, trace, scale)?,
        PolyFamily::HyperbolicProduct => isolate_real_roots(&poly, tol)?,
    };
    Ok(poly)
}

fn sphere_brackets(poly: &CurvaturePolynomial, trace: f64, scale: f64) -> Result<Vec<(f64, f64)>> {
    let k = &poly.kappas;
    let mut out: Vec<(f64, f64)> = k.windows(2).map(|w| (w[0], w[1])).collect();
    if poly.minimal {
        return Ok(out);
    }
    // one more root beyond the extreme curvatures; P(kappa_p) > 0 always
    let width0 = (2.0 / trace.abs() * scale.max(1.0)).max(1.0);
    let expand = |anchor: f64, dir: f64| -> Result<(f64, f64)> {
        let p_anchor = poly.eval(anchor);
        let mut w = width0;
        for _ in 0..200 {
            let far = anchor + dir * w;
            let p_far = poly.eval(far);
            if p_far == 0.0 || p_far.signum() != p_anchor.signum() {
                return Ok(if dir > 0.0 { (anchor, far) } else { (far, anchor) });
            }
            w *= 2.0;
        }
        let far = anchor + dir * w;
        Err(GeomError::Bracketing {
            lo: anchor.min(far),
            hi: anchor.max(far),
            p_lo: p_anchor,
            p_hi: poly.eval(far),
        })
    };
    if trace < 0.0 {
        out.push(expand(k[k.len() - 1], 1.0)?);
    } else {
        out.insert(0, expand(k[0], -1.0)?);
    }
    Ok(out)
}

/// Isolating intervals for every real root, found between consecutive
/// critical points (recursively through the derivatives).
fn isolate_real_roots(poly: &CurvaturePolynomial, tol: &Tolerances) -> Result<Vec<(f64, f64)>> {
    let mut c = poly.coefficients();
    let cmax = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if cmax == 0.0 {
        return Ok(Vec::new());
    }
    while c.len() > 1 && c[c.len() - 1].abs() <= tol.tol_zero * cmax {
        c.pop();
    }
    let mut out = Vec::new();
    for (lo, hi) in isolate_coeffs(&c) {
        // refine to respect the product-form sign
        if lo == hi || poly.eval(lo).signum() != poly.eval(hi).signum() || poly.eval(lo) == 0.0 {
            out.push((lo, hi));
        }
    }
    Ok(out)
}

fn isolate_coeffs(c: &[f64]) -> Vec<(f64, f64)> {
    let d = c.len().saturating_sub(1);
    if d == 0 {
        return Vec::new();
    }
    let lead = c[d];
    let bound = 1.0 + c[..d].iter().fold(0.0f64, |m, v| m.max((v / lead).abs()));
    if d == 1 {
        let r = -c[0] / c[1];
        return vec![(r, r)];
    }
    let crit: Vec<f64> = isolate_coeffs(&derivative_coeffs(c))
        .into_iter()
        .map(|(a, b)| bisect_coeffs(&derivative_coeffs(c), a, b))
        .collect();
    let mut pts = vec![-bound];
    pts.extend(crit.iter().copied().filter(|x| x.abs() < bound));
    pts.push(bound);
    let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (pa, pb) = (horner(c, a), horner(c, b));
        if pa.abs() <= 1e-13 * scale * (1.0 + a.abs()).powi(d as i32) {
            if out.last().is_none_or(|l| l.1 < a) {
                out.push((a, a));
            }
        } else if pb != 0.0 && pa.signum() != pb.signum() {
            out.push((a, b));
        }
    }
    out
}

fn bisect_coeffs(c: &[f64], lo: f64, hi: f64) -> f64 {
    if lo == hi {
        return lo;
    }
    let (mut a, mut b) = (lo, hi);
    let sa = horner(c, a).signum();
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if horner(c, m).signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Root {
    pub value: f64,
    pub bracket: (f64, f64),
    /// Root sits on a principal curvature (degenerate induced metric).
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RootSet {
    /// Kept roots, ascending.
    pub roots: Vec<Root>,
    /// Real roots rejected by the `|s| > 1` filter.
    pub discarded: Vec<f64>,
}

impl RootSet {
    pub fn values(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.value).collect()
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

/// True when a root makes the lift degenerate.
pub fn is_degenerate_root(family: PolyFamily, value: f64, kappas: &[f64]) -> bool {
    kappas.iter().any(|&k| match family {
        PolyFamily::SpaceForm => (1.0 - value * k).abs() <= 1e-8,
        _ => (value - k).abs() <= 1e-8 * (1.0 + k.abs()),
    })
}

/// One root per bracket by bisection, then Newton polish; hyperbolic-product
/// roots with `|s| <= 1` are discarded.
pub fn solve_roots(poly: &CurvaturePolynomial, tol_root: f64) -> Result<RootSet> {
    let coeffs = poly.coefficients();
    let dcoeffs = derivative_coeffs(&coeffs);
    let mut set = RootSet::default();
    for &(lo, hi) in &poly.brackets {
        let value = if lo == hi {
            lo
        } else {
            let (pa, pb) = (poly.eval(lo), poly.eval(hi));
            if pa == 0.0 {
                lo
            } else if pb == 0.0 {
                hi
            } else if pa.signum() == pb.signum() {
                return Err(GeomError::Bracketing { lo, hi, p_lo: pa, p_hi: pb });
            } else {
                let (mut a, mut b) = (lo, hi);
                while b - a > tol_root {
                    let m = 0.5 * (a + b);
                    if m <= a || m >= b {
                        break;
                    }
                    let pm = poly.eval(m);
                    if pm == 0.0 {
                        a = m;
                        b = m;
                        break;
                    }
                    if pm.signum() == pa.signum() {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                let mut x = 0.5 * (a + b);
                for _ in 0..3 {
                    let d = horner(&dcoeffs, x);
                    if d == 0.0 || !d.is_finite() {
                        break;
                    }
                    let nx = x - poly.eval(x) / d;
                    if nx >= lo && nx <= hi && poly.eval(nx).abs() <= poly.eval(x).abs() {
                        x = nx;
                    } else {
                        break;
                    }
                }
                x
            }
        };
        if poly.family == PolyFamily::HyperbolicProduct && value.abs() <= 1.0 {
            set.discarded.push(value);
            continue;
        }
        set.roots.push(Root {
            value,
            bracket: (lo, hi),
            degenerate: is_degenerate_root(poly.family, value, &poly.kappas),
        });
    }
    set.roots.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(set)
}

/// `cot^{-1}` with values in `(0, pi)`.
pub fn acot(s: f64) -> f64 {
    std::f64::consts::FRAC_PI_2 - s.atan()
}

/// `coth^{-1} s = ln((s+1)/(s-1)) / 2` for `|s| > 1`.
pub fn acoth(s: f64) -> Result<f64> {
    if !(s.abs() > 1.0) {
        return Err(GeomError::FilteredRoot { s });
    }
    Ok(0.5 * ((s + 1.0) / (s - 1.0)).ln())
}

/// Surface case (`n = 2`): `tau = H/K = (r_1 + r_2)/2`.
pub fn minkowski_closed_form(k1: f64, k2: f64) -> Result<f64> {
    if k1 * k2 == 0.0 {
        return Err(GeomError::VanishingCurvature { kappa: 0.0 });
    }
    Ok((k1 + k2) / (2.0 * k1 * k2))
}

/// Surface case in `S^3 x R`: `s = a +- sqrt(a^2 + 1)`, `a = (k1 k2 - 1)/(k1 + k2)`;
/// the minimal case has the single root `s = 0`.
pub fn sphere_product_closed_form(k1: f64, k2: f64) -> Vec<f64> {
    let sum = k1 + k2;
    if sum == 0.0 {
        return vec![0.0];
    }
    let a = (k1 * k2 - 1.0) / sum;
    let r = (a * a + 1.0).sqrt();
    vec![a - r, a + r]
}

/// Surface case in `H^3 x R`: the root of `s^2 - 2 a s + 1` with `|s| > 1`,
/// `a = (k1 k2 + 1)/(k1 + k2)`; none when `|a| <= 1` or the surface is minimal.
pub fn hyperbolic_product_closed_form(k1: f64, k2: f64) -> Option<f64> {
    let sum = k1 + k2;
    if sum == 0.0 {
        return None;
    }
    let a = (k1 * k2 + 1.0) / sum;
    if a > 1.0 {
        Some(a + (a * a - 1.0).sqrt())
    } else if a < -1.0 {
        Some(a - (a * a - 1.0).sqrt())
    } else {
        None
    }
}

/// Counts `(alpha, beta, gamma, delta)`: curvatures below `-1`, inside
/// `(-1, 1)`, above `1` and equal to `+-1`.
pub fn curvature_counts(kappas: &[f64]) -> (usize, usize, usize, usize) {
    let a = kappas.iter().filter(|&&k| k < -1.0).count();
    let b = kappas.iter().filter(|&&k| k.abs() < 1.0).count();
    let g = kappas.iter().filter(|&&k| k > 1.0).count();
    let d = kappas.iter().filter(|&&k| k.abs() == 1.0).count();
    (a, b, g, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn poly(k: &[f64], m: &[usize], kind: AmbientKind) -> CurvaturePolynomial {
        let s = ShapeSpectrum::from_parts(k.to_vec(), m.to_vec()).unwrap();
        curvature_polynomial(&s, kind, &tol()).unwrap()
    }

    #[test]
    fn two_radii_mean() {
        let p = poly(&[1.0 / 3.0, 1.0], &[1, 1], AmbientKind::Minkowski);
        let r = solve_roots(&p, tol().tol_root).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r.roots[0].value - 2.0).abs() < 1e-14);
        assert!((minkowski_closed_form(1.0 / 3.0, 1.0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn three_radii() {
        let p = poly(&[0.25, 0.5, 1.0], &[1, 1, 1], AmbientKind::Minkowski);
        // 3 tau^2 - 14 tau + 14
        let c = p.coefficients();
        assert!((c[0] - 14.0).abs() < 1e-12 && (c[1] + 14.0).abs() < 1e-12 && (c[2] - 3.0).abs() < 1e-12);
        assert_eq!(p.brackets, vec![(1.0, 2.0), (2.0, 4.0)]);
        let r = solve_roots(&p, 1e-14).unwrap().values();
        let s7 = 7f64.sqrt();
        assert!((r[0] - (7.0 - s7) / 3.0).abs() < 1e-12);
        assert!((r[1] - (7.0 + s7) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn vanishing_curvature_and_single_value() {
        let s = ShapeSpectrum::from_parts(vec![0.0, 1.0], vec![1, 1]).unwrap();
        assert!(matches!(
            curvature_polynomial(&s, AmbientKind::Minkowski, &tol()),
            Err(GeomError::VanishingCurvature { .. })
        ));
        let p = poly(&[1.0], &[2], AmbientKind::DeSitter);
        assert!(solve_roots(&p, 1e-14).unwrap().is_empty());
    }

    #[test]
    fn clifford_minimal() {
        let p = poly(&[-1.0, 1.0], &[1, 1], AmbientKind::SphereProduct);
        assert!(p.minimal);
        let c = p.coefficients();
        assert!(c[0].abs() < 1e-15 && (c[1] - 4.0).abs() < 1e-15 && c[2].abs() < 1e-15);
        let r = solve_roots(&p, 1e-14).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r.roots[0].value.abs() < 1e-14);
        assert!((acot(0.0) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn sphere_product_closed_form_matches() {
        for (k1, k2) in [(0.5, 2.0), (-3.0, 0.4), (1.5, 1.7), (-0.9, -0.2)] {
            let p = poly(&[k1, k2], &[1, 1], AmbientKind::SphereProduct);
            let r = solve_roots(&p, 1e-14).unwrap().values();
            let mut c = sphere_product_closed_form(k1, k2);
            c.sort_by(f64::total_cmp);
            assert_eq!(r.len(), 2);
            for (a, b) in r.iter().zip(&c) {
                assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()), "{r:?} vs {c:?}");
            }
        }
    }

    #[test]
    fn sign_alternation() {
        let p = poly(&[-2.0, -0.5, 0.3, 1.2, 4.0], &[1, 2, 1, 1, 1], AmbientKind::Minkowski);
        let v: Vec<f64> = p.breakpoints().iter().map(|&r| p.eval(r)).collect();
        assert!(v.windows(2).all(|w| w[0] * w[1] < 0.0), "{v:?}");
        let p = poly(&[-2.0, -0.5, 0.3, 1.2, 4.0], &[1, 2, 1, 1, 1], AmbientKind::SphereProduct);
        let v: Vec<f64> = p.kappas.iter().map(|&k| p.eval(k)).collect();
        assert!(v.windows(2).all(|w| w[0] * w[1] < 0.0) && *v.last().unwrap() > 0.0, "{v:?}");
        let r = solve_roots(&p, 1e-14).unwrap();
        assert_eq!(r.len(), 5);
    }

    #[test]
    fn umbilic_sphere_product() {
        let p = poly(&[1.0], &[2], AmbientKind::SphereProduct);
        let r = solve_roots(&p, 1e-14).unwrap().values();
        assert_eq!(r.len(), 1);
        assert!((r[0] + 1.0).abs() < 1e-14);
        // the surface closed form also offers s = kappa, where the lift degenerates
        let c = sphere_product_closed_form(1.0, 1.0);
        assert_eq!(c, vec![-1.0, 1.0]);
        assert!(is_degenerate_root(PolyFamily::SphereProduct, c[1], &[1.0]));
        assert!((acot(1.0) - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert!((acot(-1.0) - 3.0 * std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn hyperbolic_two_three() {
        let p = poly(&[2.0, 3.0], &[1, 1], AmbientKind::HyperbolicProduct);
        let r = solve_roots(&p, 1e-14).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r.discarded.len(), 1);
        let want = (7.0 + 24f64.sqrt()) / 5.0;
        assert!((r.roots[0].value - want).abs() < 1e-12);
        assert!((r.discarded[0] - (7.0 - 24f64.sqrt()) / 5.0).abs() < 1e-12);
        assert!((acoth(want).unwrap() - 0.25 * 6f64.ln()).abs() < 1e-12);
        assert!((hyperbolic_product_closed_form(2.0, 3.0).unwrap() - want).abs() < 1e-15);
        assert!(acoth(0.5).is_err());
    }

    #[test]
    fn acoth_half_angle_identity() {
        let mut a: f64 = 1.01;
        while a <= 10.0 {
            let s = a + (a * a - 1.0).sqrt();
            assert!((acoth(s).unwrap() - 0.5 * acoth(a).unwrap()).abs() < 1e-12, "a={a}");
            a += 0.01;
        }
    }

    proptest! {
        #[test]
        fn space_form_root_count(raw in prop::collection::btree_set(-40i32..40, 2..6)) {
            let k: Vec<f64> = raw.iter().filter(|&&v| v != 0).map(|&v| v as f64 / 8.0).collect();
            prop_assume!(k.len() >= 2);
            let m = vec![1; k.len()];
            let p = poly(&k, &m, AmbientKind::AntiDeSitter);
            let r = solve_roots(&p, 1e-14).unwrap();
            prop_assert_eq!(r.len(), k.len() - 1);
            for root in &r.roots {
                prop_assert!(root.value > root.bracket.0 && root.value < root.bracket.1);
                let scale: f64 = p.coefficients().iter().map(|c| c.abs()).sum::<f64>() * (1.0 + root.value.abs()).powi(k.len() as i32);
                prop_assert!(p.eval(root.value).abs() <= 1e-10 * scale);
            }
        }
    }
}
