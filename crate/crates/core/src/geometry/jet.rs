use std::sync::Arc;

use super::chart::Chart;
use crate::{GeomError, Result};

/// Fallible vector-valued map on a chart.
pub type VecMap = Arc<dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync>;

/// Fallible scalar field on a chart.
pub type ScalarMap = Arc<dyn Fn(&[f64]) -> Result<f64> + Send + Sync>;

/// Value, first and second partial derivatives of a vector-valued map at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: Vec<f64>,
    /// `d1[i]` is the partial derivative along chart axis `i`.
    pub d1: Vec<Vec<f64>>,
    /// `d2[i][j]` is the mixed second partial along axes `i`, `j`.
    pub d2: Vec<Vec<Vec<f64>>>,
    /// Largest `|d2[i][j] - d2[j][i]|` seen before symmetrization.
    pub asymmetry: f64,
}

impl Jet2 {
    /// Builds a jet, averaging the two orders of every mixed partial.
    pub fn new(value: Vec<f64>, d1: Vec<Vec<f64>>, mut d2: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let n = d1.len();
        let m = value.len();
        if d2.len() != n || d1.iter().any(|v| v.len() != m) {
            return Err(GeomError::Argument("inconsistent jet shapes".into()));
        }
        if d2.iter().any(|row| row.len() != n || row.iter().any(|v| v.len() != m)) {
            return Err(GeomError::Argument("inconsistent jet shapes".into()));
        }
        let mut asym: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                for k in 0..m {
                    let (a, b) = (d2[i][j][k], d2[j][i][k]);
                    asym = asym.max((a - b).abs());
                    let avg = 0.5 * (a + b);
                    d2[i][j][k] = avg;
                    d2[j][i][k] = avg;
                }
            }
        }
        Ok(Self {
            value,
            d1,
            d2,
            asymmetry: asym,
        })
    }

    pub fn dim(&self) -> usize {
        self.d1.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.value.len()
    }

    /// Max-norm of the second derivatives.
    pub fn d2_norm(&self) -> f64 {
        self.d2
            .iter()
            .flatten()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// True when the recorded asymmetry exceeds `tol_sym * (1 + |d2|)`.
    pub fn asymmetry_exceeds(&self, tol_sym: f64) -> bool {
        self.asymmetry > tol_sym * (1.0 + self.d2_norm())
    }

    /// Max-norm distance between two jets of the same shape.
    pub fn max_diff(&self, other: &Jet2) -> f64 {
        let v = self
            .value
            .iter()
            .zip(&other.value)
            .map(|(a, b)| (a - b).abs());
        let d1 = self
            .d1
            .iter()
            .flatten()
            .zip(other.d1.iter().flatten())
            .map(|(a, b)| (a - b).abs());
        let d2 = self
            .d2
            .iter()
            .flatten()
            .flatten()
            .zip(other.d2.iter().flatten().flatten())
            .map(|(a, b)| (a - b).abs());
        v.chain(d1).chain(d2).fold(0.0, f64::max)
    }
}

fn checked<F>(f: &F, x: &[f64]) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + ?Sized,
{
    let v = f(x)?;
    if v.iter().any(|c| !c.is_finite()) {
        return Err(GeomError::NonFinite { point: x.to_vec() });
    }
    Ok(v)
}

/// Second-order central-difference jet of `f` at `x` with step `h`.
///
/// Diagonal second partials use the three-point stencil, mixed partials the
/// four-point cross stencil. When `domain` is given, `x` must keep a margin of
/// `2h` from its boundary.
pub fn jet2_of<F>(f: &F, x: &[f64], h: f64, domain: Option<&Chart>) -> Result<Jet2>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + ?Sized,
{
    if !(h.is_finite() && h > 0.0) {
        return Err(GeomError::Argument(format!("step must be positive, got {h}")));
    }
    if let Some(chart) = domain {
        if chart.dim() != x.len() {
            return Err(GeomError::Dimension {
                expected: chart.dim(),
                found: x.len(),
            });
        }
        if !chart.contains_with_margin(x, 2.0 * h) {
            return Err(GeomError::OutOfDomain {
                point: x.to_vec(),
                step: h,
            });
        }
    }
    let n = x.len();
    let f0 = checked(f, x)?;
    let m = f0.len();
    let mut probe = x.to_vec();
    let mut shifted = |deltas: &[(usize, f64)]| -> Result<Vec<f64>> {
        probe.copy_from_slice(x);
        for &(axis, d) in deltas {
            probe[axis] += d;
        }
        checked(f, &probe)
    };

    let mut d1 = vec![vec![0.0; m]; n];
    let mut d2 = vec![vec![vec![0.0; m]; n]; n];
    for i in 0..n {
        let fp = shifted(&[(i, h)])?;
        let fm = shifted(&[(i, -h)])?;
        for k in 0..m {
            d1[i][k] = (fp[k] - fm[k]) / (2.0 * h);
            d2[i][i][k] = (fp[k] - 2.0 * f0[k] + fm[k]) / (h * h);
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let fpp = shifted(&[(i, h), (j, h)])?;
            let fpm = shifted(&[(i, h), (j, -h)])?;
            let fmp = shifted(&[(i, -h), (j, h)])?;
            let fmm = shifted(&[(i, -h), (j, -h)])?;
            for k in 0..m {
                let v = (fpp[k] - fpm[k] - fmp[k] + fmm[k]) / (4.0 * h * h);
                d2[i][j][k] = v;
                d2[j][i][k] = v;
            }
        }
    }
    Jet2::new(f0, d1, d2)
}
