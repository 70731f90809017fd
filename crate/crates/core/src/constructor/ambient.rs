use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geometry::Signature;
use crate::hypersurface::SpaceForm;
use crate::{GeomError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmbientKind {
    Minkowski,
    DeSitter,
    AntiDeSitter,
    SphereProduct,
    HyperbolicProduct,
}

impl AmbientKind {
    pub const ALL: [AmbientKind; 5] = [
        AmbientKind::Minkowski,
        AmbientKind::DeSitter,
        AmbientKind::AntiDeSitter,
        AmbientKind::SphereProduct,
        AmbientKind::HyperbolicProduct,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AmbientKind::Minkowski => "minkowski",
            AmbientKind::DeSitter => "de-sitter",
            AmbientKind::AntiDeSitter => "anti-de-sitter",
            AmbientKind::SphereProduct => "sphere-product",
            AmbientKind::HyperbolicProduct => "hyperbolic-product",
        }
    }

    /// Minkowski, de Sitter and anti de Sitter share one polynomial in `tau`.
    pub fn is_space_form_family(&self) -> bool {
        matches!(
            self,
            AmbientKind::Minkowski | AmbientKind::DeSitter | AmbientKind::AntiDeSitter
        )
    }

    pub fn is_product(&self) -> bool {
        !self.is_space_form_family()
    }
}

impl fmt::Display for AmbientKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AmbientKind {
    type Err = GeomError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "minkowski" => Ok(AmbientKind::Minkowski),
            "de-sitter" | "desitter" | "ds" => Ok(AmbientKind::DeSitter),
            "anti-de-sitter" | "antidesitter" | "ads" => Ok(AmbientKind::AntiDeSitter),
            "sphere-product" | "sphereproduct" => Ok(AmbientKind::SphereProduct),
            "hyperbolic-product" | "hyperbolicproduct" => Ok(AmbientKind::HyperbolicProduct),
            other => Err(GeomError::UnsupportedAmbient(other.to_string())),
        }
    }
}

/// Lorentzian ambient of dimension `n + 2` realized in a flat container.
///
/// The last container coordinate is always the height (the `R` factor or the
/// extra timelike axis); quadric ambients and product factors keep their own
/// coordinates in front of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzAmbient {
    pub kind: AmbientKind,
    /// `n + 2`.
    pub dim: usize,
    pub container_signature: Signature,
    /// `<y,y>` for quadrics, `<psi,psi>` on the first factor for products.
    pub quadric_constant: Option<f64>,
    pub product: bool,
}

impl LorentzAmbient {
    pub fn new(kind: AmbientKind, n: usize) -> Self {
        let (sig, c) = match kind {
            AmbientKind::Minkowski => (Signature::new(n + 1, 1), None),
            AmbientKind::DeSitter => (Signature::new(n + 2, 1), Some(1.0)),
            AmbientKind::AntiDeSitter => (Signature::new(n + 1, 2), Some(-1.0)),
            AmbientKind::SphereProduct => (Signature::new(n + 2, 1), Some(1.0)),
            AmbientKind::HyperbolicProduct => (Signature::new(n + 1, 2), Some(-1.0)),
        };
        Self {
            kind,
            dim: n + 2,
            container_signature: sig,
            quadric_constant: c,
            product: kind.is_product(),
        }
    }

    pub fn n(&self) -> usize {
        self.dim - 2
    }

    pub fn container_dim(&self) -> usize {
        self.container_signature.dim()
    }

    /// Space form the source hypersurfaces live in.
    pub fn source_space(&self) -> SpaceForm {
        let n = self.n();
        match self.kind {
            AmbientKind::Minkowski => SpaceForm::euclidean(n),
            AmbientKind::DeSitter | AmbientKind::SphereProduct => SpaceForm::sphere(n),
            AmbientKind::AntiDeSitter | AmbientKind::HyperbolicProduct => SpaceForm::hyperbolic(n),
        }
    }

    /// Normals of the container constraints at `y`: the position for quadrics,
    /// the first-factor position for products.
    pub fn constraint_normals(&self, y: &[f64]) -> Vec<Vec<f64>> {
        match self.kind {
            AmbientKind::Minkowski => Vec::new(),
            AmbientKind::DeSitter | AmbientKind::AntiDeSitter => vec![y.to_vec()],
            AmbientKind::SphereProduct | AmbientKind::HyperbolicProduct => {
                let mut v = y.to_vec();
                if let Some(last) = v.last_mut() {
                    *last = 0.0;
                }
                vec![v]
            }
        }
    }

    /// Absolute constraint residual at `y`.
    pub fn constraint_residual(&self, y: &[f64]) -> f64 {
        let sig = self.container_signature;
        match (self.kind, self.quadric_constant) {
            (AmbientKind::Minkowski, _) | (_, None) => 0.0,
            (AmbientKind::DeSitter | AmbientKind::AntiDeSitter, Some(c)) => (sig.dot(y, y) - c).abs(),
            (_, Some(c)) => {
                let m = y.len() - 1;
                let factor = Signature::new(sig.plus, sig.minus - 1);
                (factor.dot(&y[..m], &y[..m]) - c).abs()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signatures() {
        assert_eq!(LorentzAmbient::new(AmbientKind::Minkowski, 2).container_signature, Signature::new(3, 1));
        assert_eq!(LorentzAmbient::new(AmbientKind::DeSitter, 2).container_signature, Signature::new(4, 1));
        assert_eq!(LorentzAmbient::new(AmbientKind::AntiDeSitter, 2).container_signature, Signature::new(3, 2));
        assert_eq!(LorentzAmbient::new(AmbientKind::SphereProduct, 2).container_signature, Signature::new(4, 1));
        assert_eq!(LorentzAmbient::new(AmbientKind::HyperbolicProduct, 2).container_signature, Signature::new(3, 2));
    }

    #[test]
    fn parse_names() {
        for k in AmbientKind::ALL {
            assert_eq!(k.name().parse::<AmbientKind>().unwrap(), k);
        }
        assert!("anti-minkowski".parse::<AmbientKind>().is_err());
    }

    #[test]
    fn residuals() {
        let ads = LorentzAmbient::new(AmbientKind::AntiDeSitter, 2);
        // chen-l4 at x = y = 0
        let y = [1.0, 0.0, -0.5, 1.5, 0.0];
        assert!(ads.constraint_residual(&y) < 1e-15);
        let hp = LorentzAmbient::new(AmbientKind::HyperbolicProduct, 2);
        assert!(hp.constraint_residual(&[0.0, 0.0, 0.0, 1.0, 7.0]) < 1e-15);
        assert_eq!(hp.constraint_normals(&[0.0, 0.0, 0.0, 1.0, 7.0]), vec![vec![0.0, 0.0, 0.0, 1.0, 0.0]]);
    }
}
