use crate::{GeomError, Result};

/// Diagonal flat form with `plus` leading `+1` entries followed by `minus` `-1` entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature {
    pub plus: usize,
    pub minus: usize,
}

impl Signature {
    pub const fn new(plus: usize, minus: usize) -> Self {
        Self { plus, minus }
    }

    pub const fn euclidean(dim: usize) -> Self {
        Self::new(dim, 0)
    }

    pub const fn lorentzian(dim: usize) -> Self {
        Self::new(dim - 1, 1)
    }

    pub const fn dim(&self) -> usize {
        self.plus + self.minus
    }

    /// Diagonal entry `i` of the form.
    #[inline]
    pub fn eta(&self, i: usize) -> f64 {
        if i < self.plus {
            1.0
        } else {
            -1.0
        }
    }

    /// `sum_{i<plus} u_i v_i - sum_{i>=plus} u_i v_i`.
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.dot(u, v))
    }

    /// Unchecked variant of [`Signature::bilinear`] for internal hot loops.
    #[inline]
    pub(crate) fn dot(&self, u: &[f64], v: &[f64]) -> f64 {
        let (up, um) = u.split_at(self.plus);
        let (vp, vm) = v.split_at(self.plus);
        let pos: f64 = up.iter().zip(vp).map(|(a, b)| a * b).sum();
        let neg: f64 = um.iter().zip(vm).map(|(a, b)| a * b).sum();
        pos - neg
    }

    /// Lowers an index: returns `eta * v`.
    pub(crate) fn lower(&self, v: &[f64]) -> Vec<f64> {
        v.iter().enumerate().map(|(i, x)| self.eta(i) * x).collect()
    }

    fn check(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(GeomError::Dimension {
                expected: self.dim(),
                found: v.len(),
            });
        }
        Ok(())
    }
}

/// Free-function form of [`Signature::bilinear`].
pub fn bilinear(sig: Signature, u: &[f64], v: &[f64]) -> Result<f64> {
    sig.bilinear(u, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn orthogonal_axes() {
        assert_eq!(bilinear(Signature::new(2, 0), &[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn lifted_unit_normal_is_null() {
        let s = 1.0 / 3f64.sqrt();
        let v = [s, s, s, 1.0];
        let q = bilinear(Signature::new(3, 1), &v, &v).unwrap();
        assert!(q.abs() < 1e-15);
    }

    #[test]
    fn two_minus_entries() {
        let v = [0.0, 0.0, 0.0, 1.0, 1.0];
        assert_eq!(bilinear(Signature::new(3, 2), &v, &v).unwrap(), -2.0);
    }

    #[test]
    fn dimension_mismatch() {
        let err = bilinear(Signature::new(3, 1), &[1.0; 3], &[1.0; 4]).unwrap_err();
        assert_eq!(err, GeomError::Dimension { expected: 4, found: 3 });
    }

    proptest! {
        #[test]
        fn symmetric_and_linear(
            plus in 0usize..4, minus in 0usize..3,
            seed in prop::collection::vec(-10.0f64..10.0, 21),
            a in -3.0f64..3.0,
        ) {
            let sig = Signature::new(plus, minus);
            let d = sig.dim();
            let u = &seed[..d];
            let v = &seed[7..7 + d];
            let w = &seed[14..14 + d];
            prop_assert_eq!(sig.bilinear(u, v).unwrap(), sig.bilinear(v, u).unwrap());
            let uw: Vec<f64> = u.iter().zip(w).map(|(x, y)| a * x + y).collect();
            let lhs = sig.bilinear(&uw, v).unwrap();
            let rhs = a * sig.bilinear(u, v).unwrap() + sig.bilinear(w, v).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
        }
    }
}
