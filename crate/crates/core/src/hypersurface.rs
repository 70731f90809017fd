//! Hypersurfaces of Euclidean space, the round sphere and hyperbolic space:
//! frames, shape operators and clustered principal curvatures.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::config::Tolerances;
use crate::geometry::linalg::{determinant, inverse, mat_mul, shape_eigen};
use crate::geometry::{analytic_maps, jet2_of, AnalyticMap, Chart, Jet2, JetMap, Signature, VecMap};
use crate::{GeomError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceFormKind {
    Euclidean,
    Sphere,
    Hyperbolic,
}

impl fmt::Display for SpaceFormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpaceFormKind::Euclidean => "euclidean",
            SpaceFormKind::Sphere => "sphere",
            SpaceFormKind::Hyperbolic => "hyperbolic",
        })
    }
}

/// Riemannian space form of dimension `dim = n + 1` in its flat container.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceForm {
    pub kind: SpaceFormKind,
    pub dim: usize,
    pub embedding_signature: Signature,
}

impl SpaceForm {
    /// `E^{n+1}`.
    pub fn euclidean(n: usize) -> Self {
        Self {
            kind: SpaceFormKind::Euclidean,
            dim: n + 1,
            embedding_signature: Signature::euclidean(n + 1),
        }
    }

    /// `S^{n+1}` as the unit sphere of `R^{n+2}`.
    pub fn sphere(n: usize) -> Self {
        Self {
            kind: SpaceFormKind::Sphere,
            dim: n + 1,
            embedding_signature: Signature::euclidean(n + 2),
        }
    }

    /// `H^{n+1}` as the upper sheet of `<x,x> = -1` in `R^{n+2}_1`.
    pub fn hyperbolic(n: usize) -> Self {
        Self {
            kind: SpaceFormKind::Hyperbolic,
            dim: n + 1,
            embedding_signature: Signature::new(n + 1, 1),
        }
    }

    pub fn hypersurface_dim(&self) -> usize {
        self.dim - 1
    }

    pub fn container_dim(&self) -> usize {
        self.embedding_signature.dim()
    }

    /// Value of `<x,x>` on the quadric, if any.
    pub fn quadric_constant(&self) -> Option<f64> {
        match self.kind {
            SpaceFormKind::Euclidean => None,
            SpaceFormKind::Sphere => Some(1.0),
            SpaceFormKind::Hyperbolic => Some(-1.0),
        }
    }

    /// `|<x,x> - c|` for quadrics, zero otherwise.
    pub fn constraint_residual(&self, x: &[f64]) -> f64 {
        match self.quadric_constant() {
            Some(c) => (self.embedding_signature.dot(x, x) - c).abs(),
            None => 0.0,
        }
    }
}

/// An immersion `phi: chart -> Q^{n+1}`.
#[derive(Clone)]
pub struct HypersurfaceImmersion {
    pub space: SpaceForm,
    pub chart: Chart,
    pub eval: VecMap,
    pub jets: Option<JetMap>,
    /// Reverses the orientation rule (`nu -> -nu`).
    pub flipped: bool,
}

impl fmt::Debug for HypersurfaceImmersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HypersurfaceImmersion")
            .field("space", &self.space)
            .field("chart", &self.chart)
            .field("analytic_jets", &self.jets.is_some())
            .field("flipped", &self.flipped)
            .finish()
    }
}

impl HypersurfaceImmersion {
    /// Immersion differentiated by finite differences.
    pub fn numeric(space: SpaceForm, chart: Chart, eval: VecMap) -> Result<Self> {
        Self::check_dims(&space, &chart)?;
        Ok(Self {
            space,
            chart,
            eval,
            jets: None,
            flipped: false,
        })
    }

    /// Immersion with exact jets from automatic differentiation.
    pub fn analytic<M: AnalyticMap>(space: SpaceForm, chart: Chart, map: Arc<M>) -> Result<Self> {
        Self::check_dims(&space, &chart)?;
        if map.dim() != chart.dim() {
            return Err(GeomError::Dimension {
                expected: chart.dim(),
                found: map.dim(),
            });
        }
        let (eval, jets) = analytic_maps(map)?;
        Ok(Self {
            space,
            chart,
            eval,
            jets: Some(jets),
            flipped: false,
        })
    }

    fn check_dims(space: &SpaceForm, chart: &Chart) -> Result<()> {
        if chart.dim() != space.hypersurface_dim() {
            return Err(GeomError::Dimension {
                expected: space.hypersurface_dim(),
                found: chart.dim(),
            });
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn flipped(&self) -> Self {
        let mut c = self.clone();
        c.flipped = !c.flipped;
        c
    }

    /// Same immersion with finite-difference jets only.
    pub fn without_jets(&self) -> Self {
        let mut c = self.clone();
        c.jets = None;
        c
    }

    pub fn with_chart(&self, chart: Chart) -> Result<Self> {
        Self::check_dims(&self.space, &chart)?;
        let mut c = self.clone();
        c.chart = chart;
        Ok(c)
    }

    pub fn eval_at(&self, x: &[f64]) -> Result<Vec<f64>> {
        (self.eval)(x)
    }

    /// Second-order jet at `x`, analytic when available.
    pub fn jet_at(&self, x: &[f64], tol: &Tolerances) -> Result<Jet2> {
        let jet = match &self.jets {
            Some(j) => j(x)?,
            None => jet2_of(self.eval.as_ref(), x, tol.step, Some(&self.chart))?,
        };
        if jet.ambient_dim() != self.space.container_dim() {
            return Err(GeomError::Dimension {
                expected: self.space.container_dim(),
                found: jet.ambient_dim(),
            });
        }
        Ok(jet)
    }

    /// Non-excluded grid samples in flat order.
    pub fn samples(&self) -> Vec<Vec<f64>> {
        self.chart
            .samples()
            .into_iter()
            .filter(|x| !self.chart.is_excluded(x))
            .collect()
    }
}

/// First-order frame data of a hypersurface at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointFrame {
    /// Chart coordinates.
    pub x: Vec<f64>,
    /// Container coordinates of `phi(x)`.
    pub point: Vec<f64>,
    pub tangent: Vec<Vec<f64>>,
    pub normal: Vec<f64>,
    pub g: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub signature: Signature,
}

impl PointFrame {
    pub fn dim(&self) -> usize {
        self.tangent.len()
    }

    /// Shape operator matrix `A = g^{-1} b` in chart coordinates.
    pub fn shape_operator(&self) -> Result<Vec<Vec<f64>>> {
        Ok(mat_mul(&inverse(&self.g)?, &self.b))
    }
}

/// Clustered principal curvatures at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeSpectrum {
    /// Distinct values, ascending.
    pub kappas: Vec<f64>,
    pub mults: Vec<usize>,
    /// Unclustered values, ascending.
    pub raw: Vec<f64>,
    pub cluster_tol: f64,
}

impl ShapeSpectrum {
    /// Single-linkage clustering of a raw eigenvalue list.
    pub fn from_raw(mut raw: Vec<f64>, cluster_tol: f64) -> Result<Self> {
        if raw.is_empty() {
            return Err(GeomError::Argument("empty curvature list".into()));
        }
        if raw.iter().any(|k| !k.is_finite()) {
            return Err(GeomError::NonFinite { point: raw });
        }
        raw.sort_by(f64::total_cmp);
        let mut groups: Vec<Vec<f64>> = vec![vec![raw[0]]];
        for w in raw.windows(2) {
            if w[1] - w[0] > cluster_tol {
                groups.push(vec![w[1]]);
            } else if let Some(last) = groups.last_mut() {
                last.push(w[1]);
            }
        }
        Ok(Self {
            kappas: groups
                .iter()
                .map(|g| g.iter().sum::<f64>() / g.len() as f64)
                .collect(),
            mults: groups.iter().map(Vec::len).collect(),
            raw,
            cluster_tol,
        })
    }

    /// Spectrum with prescribed distinct values and multiplicities.
    pub fn from_parts(kappas: Vec<f64>, mults: Vec<usize>) -> Result<Self> {
        if kappas.len() != mults.len() || kappas.is_empty() || mults.contains(&0) {
            return Err(GeomError::Argument(
                "kappas and positive multiplicities must have equal nonzero length".into(),
            ));
        }
        if kappas.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(GeomError::Argument("kappas must be strictly ascending".into()));
        }
        let raw = kappas
            .iter()
            .zip(&mults)
            .flat_map(|(&k, &m)| std::iter::repeat_n(k, m))
            .collect();
        Ok(Self {
            kappas,
            mults,
            raw,
            cluster_tol: 0.0,
        })
    }

    /// Number of distinct principal curvatures.
    pub fn p(&self) -> usize {
        self.kappas.len()
    }

    /// Sum of multiplicities.
    pub fn n(&self) -> usize {
        self.mults.iter().sum()
    }

    /// `sum m_i kappa_i = n H`.
    pub fn trace(&self) -> f64 {
        self.kappas.iter().zip(&self.mults).map(|(k, &m)| k * m as f64).sum()
    }

    pub fn pattern(&self) -> Vec<usize> {
        self.mults.clone()
    }
}

/// Unit normal at a point spanned by `rows`, with `det[rows, nu] > 0`.
///
/// Generalized cross product: `w_k = det[rows, e_k]` is Euclidean-orthogonal to
/// every row, and raising its index makes it orthogonal for the flat form.
fn cross_normal(sig: Signature, rows: &[Vec<f64>], x: &[f64]) -> Result<Vec<f64>> {
    let m = sig.dim();
    let mut w = vec![0.0; m];
    let mut mat: Vec<Vec<f64>> = rows.to_vec();
    mat.push(vec![0.0; m]);
    for (k, wk) in w.iter_mut().enumerate() {
        let last = mat.len() - 1;
        mat[last].iter_mut().for_each(|v| *v = 0.0);
        mat[last][k] = 1.0;
        *wk = determinant(&mat);
    }
    let nu: Vec<f64> = w.iter().enumerate().map(|(k, v)| sig.eta(k) * v).collect();
    let q = sig.dot(&nu, &nu);
    let scale: f64 = rows
        .iter()
        .map(|r| r.iter().map(|v| v * v).sum::<f64>())
        .product();
    if !(q > 1e-24 * scale.max(1e-300)) {
        return Err(GeomError::ImmersionFailure { point: x.to_vec() });
    }
    let s = q.sqrt();
    Ok(nu.into_iter().map(|v| v / s).collect())
}

/// Frame from a precomputed jet of the immersion.
pub fn frame_from_jet(
    imm: &HypersurfaceImmersion,
    x: &[f64],
    jet: &Jet2,
    tol: &Tolerances,
) -> Result<PointFrame> {
    let sig = imm.space.embedding_signature;
    let n = imm.dim();
    let residual = imm.space.constraint_residual(&jet.value);
    if residual > tol.tol_constraint * (1.0 + sig.dot(&jet.value, &jet.value).abs()) {
        return Err(GeomError::QuadricViolation { residual });
    }
    let mut rows = jet.d1.clone();
    let quadric = imm.space.quadric_constant().is_some();
    if quadric {
        rows.push(jet.value.clone());
    }
    let mut nu = cross_normal(sig, &rows, x)?;
    // quadric rule is det[d1..dn, nu, x] > 0 = -det[d1..dn, x, nu]
    if quadric != imm.flipped {
        nu.iter_mut().for_each(|v| *v = -*v);
    }
    let g: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| sig.dot(&jet.d1[i], &jet.d1[j])).collect())
        .collect();
    let b: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| sig.dot(&jet.d2[i][j], &nu)).collect())
        .collect();
    let min_eig = crate::geometry::linalg::min_eigenvalue(&g)?;
    if !(min_eig > tol.tol_pd) {
        return Err(GeomError::ImmersionFailure { point: x.to_vec() });
    }
    Ok(PointFrame {
        x: x.to_vec(),
        point: jet.value.clone(),
        tangent: jet.d1.clone(),
        normal: nu,
        g,
        b,
        signature: sig,
    })
}

/// Induced metric, oriented unit normal and second form at `x`.
pub fn frame_at(imm: &HypersurfaceImmersion, x: &[f64], tol: &Tolerances) -> Result<PointFrame> {
    if imm.chart.is_excluded(x) {
        return Err(GeomError::Excluded);
    }
    let jet = imm.jet_at(x, tol)?;
    frame_from_jet(imm, x, &jet, tol)
}

/// Clustered spectrum of the shape operator.
pub fn spectrum_at(frame: &PointFrame, tol: &Tolerances) -> Result<ShapeSpectrum> {
    let raw = shape_eigen(&frame.g, &frame.b, tol.tol_pd)?.kappas;
    ShapeSpectrum::from_raw(raw, tol.cluster_tol)
}

/// Mean and Gauss curvature of a surface (`n = 2`).
pub fn mean_gauss_at(frame: &PointFrame) -> Result<(f64, f64)> {
    if frame.dim() != 2 {
        return Err(GeomError::Argument(format!(
            "mean and Gauss curvature need n = 2, got n = {}",
            frame.dim()
        )));
    }
    let a = frame.shape_operator()?;
    Ok((0.5 * (a[0][0] + a[1][1]), determinant(&a)))
}

/// `max_i |<d phi_i, nu>|`.
pub fn legendrian_residual(imm: &HypersurfaceImmersion, x: &[f64], nu: &[f64], tol: &Tolerances) -> Result<f64> {
    let sig = imm.space.embedding_signature;
    if nu.len() != sig.dim() {
        return Err(GeomError::Dimension {
            expected: sig.dim(),
            found: nu.len(),
        });
    }
    let jet = imm.jet_at(x, tol)?;
    Ok(jet.d1.iter().map(|t| sig.dot(t, nu).abs()).fold(0.0, f64::max))
}

/// Multiplicity patterns seen over the chart grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PatternSummary {
    /// Pattern `(m_1, ..., m_p)` mapped to its sample count.
    pub patterns: BTreeMap<Vec<usize>, usize>,
    pub failed: usize,
}

impl PatternSummary {
    pub fn is_constant(&self) -> bool {
        self.patterns.len() <= 1
    }

    pub fn dominant(&self) -> Option<Vec<usize>> {
        self.patterns
            .iter()
            .max_by_key(|(_, c)| **c)
            .map(|(p, _)| p.clone())
    }
}

/// Computes the multiplicity pattern at every non-excluded grid sample.
pub fn pattern_over_grid(imm: &HypersurfaceImmersion, tol: &Tolerances) -> PatternSummary {
    let found: Vec<Option<Vec<usize>>> = imm
        .samples()
        .par_iter()
        .map(|x| {
            frame_at(imm, x, tol)
                .and_then(|f| spectrum_at(&f, tol))
                .map(|s| s.pattern())
                .ok()
        })
        .collect();
    let mut out = PatternSummary::default();
    for p in found {
        match p {
            Some(p) => *out.patterns.entry(p).or_insert(0) += 1,
            None => out.failed += 1,
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Real;
    use std::f64::consts::PI;

    struct Torus {
        big: f64,
        small: f64,
    }

    impl AnalyticMap for Torus {
        fn dim(&self) -> usize {
            2
        }
        fn eval<T: Real>(&self, x: &[T]) -> Vec<T> {
            let (u, v) = (x[0], x[1]);
            let rho = u.cos() * self.small + self.big;
            vec![rho * v.cos(), rho * v.sin(), u.sin() * self.small]
        }
    }

    struct RoundSphere(f64);

    impl AnalyticMap for RoundSphere {
        fn dim(&self) -> usize {
            2
        }
        // (longitude, colatitude)
        fn eval<T: Real>(&self, x: &[T]) -> Vec<T> {
            let (lon, col) = (x[0], x[1]);
            vec![
                col.sin() * lon.cos() * self.0,
                col.sin() * lon.sin() * self.0,
                col.cos() * self.0,
            ]
        }
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn torus() -> HypersurfaceImmersion {
        let chart = Chart::rect((-1.2, 1.2), (-PI, PI), (16, 16)).unwrap();
        HypersurfaceImmersion::analytic(
            SpaceForm::euclidean(2),
            chart,
            Arc::new(Torus { big: 2.0, small: 1.0 }),
        )
        .unwrap()
    }

    fn sphere(rho: f64) -> HypersurfaceImmersion {
        let chart = Chart::rect((-PI, PI), (0.2, PI - 0.2), (12, 12)).unwrap();
        HypersurfaceImmersion::analytic(SpaceForm::euclidean(2), chart, Arc::new(RoundSphere(rho))).unwrap()
    }

    #[test]
    fn round_sphere_is_umbilic() {
        for rho in [1.0, 2.5] {
            let imm = sphere(rho);
            for x in imm.samples() {
                let f = frame_at(&imm, &x, &tol()).unwrap();
                let s = spectrum_at(&f, &tol()).unwrap();
                assert_eq!(s.mults, vec![2]);
                assert!((s.kappas[0] - 1.0 / rho).abs() < 1e-6, "{:?}", s);
            }
        }
        // numeric jets agree
        let imm = sphere(1.0).without_jets();
        let f = frame_at(&imm, &[0.3, 1.1], &tol()).unwrap();
        let s = spectrum_at(&f, &tol()).unwrap();
        assert_eq!(s.p(), 1);
        assert!((s.kappas[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn plane_has_zero_second_form() {
        let chart = Chart::rect((-1.0, 1.0), (-1.0, 1.0), (5, 5)).unwrap();
        let eval: VecMap = Arc::new(|x: &[f64]| Ok(vec![x[0], x[1], 0.0]));
        let imm = HypersurfaceImmersion::numeric(SpaceForm::euclidean(2), chart, eval).unwrap();
        let f = frame_at(&imm, &[0.1, 0.2], &tol()).unwrap();
        assert!(f.b.iter().flatten().all(|v| v.abs() < 1e-8));
        assert_eq!(f.normal, vec![0.0, 0.0, 1.0]);
        let s = spectrum_at(&f, &tol()).unwrap();
        assert_eq!(s.mults, vec![2]);
    }

    #[test]
    fn torus_curvatures() {
        let imm = torus();
        let f = frame_at(&imm, &[0.0, 0.4], &tol()).unwrap();
        let s = spectrum_at(&f, &tol()).unwrap();
        assert_eq!(s.mults, vec![1, 1]);
        assert!((s.kappas[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((s.kappas[1] - 1.0).abs() < 1e-12);
        let (h, k) = mean_gauss_at(&f).unwrap();
        assert!((h - 2.0 / 3.0).abs() < 1e-12 && (k - 1.0 / 3.0).abs() < 1e-12);
        assert!((h / k - 2.0).abs() < 1e-12);
        // closed form at a general point
        for x in imm.samples() {
            let s = spectrum_at(&frame_at(&imm, &x, &tol()).unwrap(), &tol()).unwrap();
            let c = x[0].cos() / (2.0 + x[0].cos());
            let mut want = [1.0, c];
            want.sort_by(f64::total_cmp);
            assert!((s.raw[0] - want[0]).abs() < 1e-10 && (s.raw[1] - want[1]).abs() < 1e-10);
        }
    }

    #[test]
    fn clustering_examples() {
        let s = ShapeSpectrum::from_raw(vec![1.0, 1.0 + 1e-9], 1e-6).unwrap();
        assert_eq!((s.p(), s.mults.clone()), (1, vec![2]));
        let s = ShapeSpectrum::from_raw(vec![1.0 / 3.0, 1.0], 1e-6).unwrap();
        assert_eq!(s.mults, vec![1, 1]);
        let s = ShapeSpectrum::from_raw(vec![0.0, 0.0], 1e-5).unwrap();
        assert_eq!((s.kappas.clone(), s.mults.clone()), (vec![0.0], vec![2]));
    }

    #[test]
    fn minimal_point_mean_gauss() {
        let f = PointFrame {
            x: vec![0.0, 0.0],
            point: vec![0.0; 3],
            tangent: vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
            normal: vec![0.0, 0.0, 1.0],
            g: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            b: vec![vec![1.0, 0.0], vec![0.0, -1.0]],
            signature: Signature::euclidean(3),
        };
        assert_eq!(mean_gauss_at(&f).unwrap(), (0.0, -1.0));
        let mut f3 = f.clone();
        f3.tangent.push(vec![0.0; 3]);
        assert!(mean_gauss_at(&f3).is_err());
    }

    #[test]
    fn orientation_flip_negates_spectrum() {
        let imm = torus();
        let x = [0.5, 1.0];
        let a = spectrum_at(&frame_at(&imm, &x, &tol()).unwrap(), &tol()).unwrap();
        let b = spectrum_at(&frame_at(&imm.flipped(), &x, &tol()).unwrap(), &tol()).unwrap();
        for (p, q) in a.raw.iter().zip(b.raw.iter().rev()) {
            assert!((p + q).abs() < 1e-12);
        }
    }

    #[test]
    fn reparametrization_invariance() {
        let imm = torus().without_jets();
        // y = A x + c
        let a = [[1.3, 0.4], [-0.2, 0.9]];
        let c = [0.1, -0.3];
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let inv = [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]];
        let base = imm.eval.clone();
        let composed: VecMap = Arc::new(move |y: &[f64]| {
            let d = [y[0] - c[0], y[1] - c[1]];
            base(&[inv[0][0] * d[0] + inv[0][1] * d[1], inv[1][0] * d[0] + inv[1][1] * d[1]])
        });
        let chart = Chart::rect((-5.0, 5.0), (-5.0, 5.0), (5, 5)).unwrap();
        let other = HypersurfaceImmersion::numeric(SpaceForm::euclidean(2), chart, composed).unwrap();
        for x in [[0.2, 0.3], [-0.7, 2.0], [1.0, -1.5]] {
            let y = [a[0][0] * x[0] + a[0][1] * x[1] + c[0], a[1][0] * x[0] + a[1][1] * x[1] + c[1]];
            let s1 = spectrum_at(&frame_at(&imm, &x, &tol()).unwrap(), &tol()).unwrap();
            let s2 = spectrum_at(&frame_at(&other, &y, &tol()).unwrap(), &tol()).unwrap();
            // det A > 0 keeps the orientation
            for (p, q) in s1.raw.iter().zip(&s2.raw) {
                assert!((p - q).abs() < 1e-6, "{:?} {:?}", s1.raw, s2.raw);
            }
        }
    }

    #[test]
    fn quadric_frames() {
        // Clifford-type torus in S^3 and a geodesic sphere in H^3
        struct Clifford;
        impl AnalyticMap for Clifford {
            fn dim(&self) -> usize {
                2
            }
            fn eval<T: Real>(&self, x: &[T]) -> Vec<T> {
                let (a, b) = (0.6f64.cos(), 0.6f64.sin());
                vec![x[0].cos() * a, x[0].sin() * a, x[1].cos() * b, x[1].sin() * b]
            }
        }
        struct GeodesicSphere;
        impl AnalyticMap for GeodesicSphere {
            fn dim(&self) -> usize {
                2
            }
            fn eval<T: Real>(&self, x: &[T]) -> Vec<T> {
                let r = 0.7f64;
                vec![
                    x[1].sin() * x[0].cos() * r.sinh(),
                    x[1].sin() * x[0].sin() * r.sinh(),
                    x[1].cos() * r.sinh(),
                    T::cst(r.cosh()),
                ]
            }
        }
        let chart = Chart::rect((-3.0, 3.0), (0.3, 2.8), (7, 7)).unwrap();
        let cl = HypersurfaceImmersion::analytic(SpaceForm::sphere(2), chart.clone(), Arc::new(Clifford)).unwrap();
        let hs = HypersurfaceImmersion::analytic(SpaceForm::hyperbolic(2), chart, Arc::new(GeodesicSphere)).unwrap();
        for imm in [&cl, &hs] {
            let sig = imm.space.embedding_signature;
            for x in imm.samples() {
                let f = frame_at(imm, &x, &tol()).unwrap();
                for t in &f.tangent {
                    assert!(sig.dot(t, &f.point).abs() < 1e-8);
                    assert!(sig.dot(t, &f.normal).abs() < 1e-10);
                }
                assert!((sig.dot(&f.normal, &f.normal) - 1.0).abs() < 1e-12);
                assert!(sig.dot(&f.normal, &f.point).abs() < 1e-12);
                assert!(legendrian_residual(imm, &x, &f.normal, &tol()).unwrap() < 1e-8);
            }
        }
        let s = spectrum_at(&frame_at(&cl, &[0.1, 0.2], &tol()).unwrap(), &tol()).unwrap();
        let mut want = [0.6f64.tan(), -1.0 / 0.6f64.tan()];
        want.sort_by(f64::total_cmp);
        assert!(s.raw.iter().zip(&want).all(|(a, b)| (a.abs() - b.abs()).abs() < 1e-10), "{:?}", s);
        let s = spectrum_at(&frame_at(&hs, &[0.1, 1.2], &tol()).unwrap(), &tol()).unwrap();
        assert_eq!(s.p(), 1);
        assert!((s.kappas[0].abs() - 1.0 / 0.7f64.tanh()).abs() < 1e-10);
    }

    #[test]
    fn legendrian_detects_perturbation() {
        let imm = sphere(1.0);
        let x = [0.4, 1.0];
        let f = frame_at(&imm, &x, &tol()).unwrap();
        // analytic normal of the unit sphere is -position under the rule
        let pos: Vec<f64> = f.point.iter().map(|v| -v).collect();
        assert!(legendrian_residual(&imm, &x, &pos, &tol()).unwrap() < 1e-10);
        let mut bad: Vec<f64> = f.normal.iter().zip(&f.tangent[0]).map(|(n, t)| n + 0.1 * t).collect();
        let norm = bad.iter().map(|v| v * v).sum::<f64>().sqrt();
        bad.iter_mut().for_each(|v| *v /= norm);
        assert!(legendrian_residual(&imm, &x, &bad, &tol()).unwrap() > 1e-3);
    }

    #[test]
    fn quadric_violation_detected() {
        let chart = Chart::rect((-1.0, 1.0), (-1.0, 1.0), (5, 5)).unwrap();
        let eval: VecMap = Arc::new(|x: &[f64]| Ok(vec![x[0], x[1], 0.5, 0.5]));
        let imm = HypersurfaceImmersion::numeric(SpaceForm::sphere(2), chart, eval).unwrap();
        assert!(matches!(
            frame_at(&imm, &[0.0, 0.0], &tol()),
            Err(GeomError::QuadricViolation { .. })
        ));
    }

    #[test]
    fn constant_pattern_on_torus() {
        let p = pattern_over_grid(&torus(), &tol());
        assert!(p.is_constant());
        assert_eq!(p.dominant(), Some(vec![1, 1]));
    }
}
