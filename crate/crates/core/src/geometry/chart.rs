use std::fmt;
use std::sync::Arc;

use crate::{GeomError, Result};

pub type Predicate = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// Open box in `R^n` sampled on a cell-centred grid.
///
/// Samples sit at the centres of `resolution[k]` equal cells per axis, so every
/// sample keeps half a cell of margin from the boundary.
#[derive(Clone)]
pub struct Chart {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub resolution: Vec<usize>,
    excluded: Option<Predicate>,
}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Chart")
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("resolution", &self.resolution)
            .field("excluded", &self.excluded.is_some())
            .finish()
    }
}

impl Chart {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, resolution: Vec<usize>) -> Result<Self> {
        if lower.len() != upper.len() || lower.len() != resolution.len() || lower.is_empty() {
            return Err(GeomError::Argument(
                "chart bounds and resolution must share a nonzero dimension".into(),
            ));
        }
        for k in 0..lower.len() {
            if !(lower[k] < upper[k]) {
                return Err(GeomError::Argument(format!(
                    "chart axis {k}: lower {} must be below upper {}",
                    lower[k], upper[k]
                )));
            }
            if resolution[k] < 3 {
                return Err(GeomError::Argument(format!(
                    "chart axis {k}: resolution {} is below 3",
                    resolution[k]
                )));
            }
        }
        Ok(Self {
            lower,
            upper,
            resolution,
            excluded: None,
        })
    }

    /// Square-ish 2D chart helper.
    pub fn rect(u: (f64, f64), v: (f64, f64), res: (usize, usize)) -> Result<Self> {
        Self::new(vec![u.0, v.0], vec![u.1, v.1], vec![res.0, res.1])
    }

    pub fn with_excluded(mut self, pred: Predicate) -> Self {
        self.excluded = Some(pred);
        self
    }

    pub fn with_resolution(mut self, resolution: Vec<usize>) -> Result<Self> {
        let excluded = self.excluded.take();
        let mut c = Self::new(self.lower, self.upper, resolution)?;
        c.excluded = excluded;
        Ok(c)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn len(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / self.resolution[axis] as f64
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }

    pub fn is_excluded(&self, x: &[f64]) -> bool {
        self.excluded.as_ref().is_some_and(|p| p(x))
    }

    /// True when `x` lies inside the box with at least `margin` to spare on every axis.
    pub fn contains_with_margin(&self, x: &[f64], margin: f64) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(xi, (a, b))| *xi - margin >= *a && *xi + margin <= *b)
    }

    /// Multi-index of flat sample `k` (first axis varies slowest).
    pub fn multi_index(&self, mut k: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for axis in (0..self.dim()).rev() {
            idx[axis] = k % self.resolution[axis];
            k /= self.resolution[axis];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.resolution)
            .fold(0, |acc, (i, r)| acc * r + i)
    }

    pub fn point(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .enumerate()
            .map(|(axis, &i)| self.lower[axis] + (i as f64 + 0.5) * self.cell(axis))
            .collect()
    }

    /// All grid samples in flat order.
    pub fn samples(&self) -> Vec<Vec<f64>> {
        (0..self.len())
            .map(|k| self.point(&self.multi_index(k)))
            .collect()
    }

    /// Chart for the reparametrization `y = factor * x`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let (lo, hi): (Vec<f64>, Vec<f64>) = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(a, b)| {
                let (p, q) = (a * factor, b * factor);
                (p.min(q), p.max(q))
            })
            .unzip();
        let mut c = Self::new(lo, hi, self.resolution.clone())?;
        if let Some(p) = self.excluded.clone() {
            c.excluded = Some(Arc::new(move |y: &[f64]| {
                let x: Vec<f64> = y.iter().map(|v| v / factor).collect();
                p(&x)
            }));
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_bounds() {
        assert!(Chart::new(vec![1.0], vec![0.0], vec![4]).is_err());
        assert!(Chart::new(vec![0.0], vec![1.0], vec![2]).is_err());
    }

    #[test]
    fn cell_centred_samples() {
        let c = Chart::rect((0.0, 1.0), (0.0, 2.0), (4, 3)).unwrap();
        assert_eq!(c.len(), 12);
        let s = c.samples();
        assert_eq!(s[0], vec![0.125, 1.0 / 3.0]);
        assert_eq!(s[11][0], 0.875);
        assert!((s[11][1] - 5.0 / 3.0).abs() < 1e-15);
        for k in 0..c.len() {
            assert_eq!(c.flat_index(&c.multi_index(k)), k);
        }
    }

    #[test]
    fn margin() {
        let c = Chart::rect((0.0, 1.0), (0.0, 1.0), (3, 3)).unwrap();
        assert!(c.contains_with_margin(&[0.5, 0.5], 0.4));
        assert!(!c.contains_with_margin(&[0.05, 0.5], 0.1));
    }

    #[test]
    fn scaling_keeps_exclusion() {
        let c = Chart::rect((0.0, 1.0), (0.0, 1.0), (3, 3))
            .unwrap()
            .with_excluded(Arc::new(|x: &[f64]| x[0] > 0.9));
        let d = c.scaled(2.0).unwrap();
        assert_eq!(d.upper, vec![2.0, 2.0]);
        assert!(d.is_excluded(&[1.9, 0.0]));
        assert!(!d.is_excluded(&[1.7, 0.0]));
    }
}
