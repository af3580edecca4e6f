//! Entropy functionals, all in nats.
//!
//! Zero-probability terms are handled uniformly through [`z`], so `0 · ln 0 = 0`
//! in every sum.

mod boltzmann;
mod continuous;
mod discrete;
mod partition;

pub use boltzmann::{boltzmann_configurational_pdf, partition_function, BoltzmannSystem};
pub use continuous::{
    continuous_entropy, continuous_entropy_mc, continuous_entropy_refined, discretize_1d,
    sample_coordinates, EntropyEstimate, GridDomain, McEntropyEstimate,
    GridPdf, QuadratureGrid,
};
pub use discrete::{
    conditional_entropy, convolve_finite, kl_divergence, self_information, shannon_entropy,
    von_neumann_entropy, ConditionalEntropies, Density, DensityMatrix, DiscretePdf, JointPdf,
    NORMALIZATION_TOL,
};
pub use partition::{measure_information, partition_entropy, Partition};

use serde::{Deserialize, Serialize};

use crate::Result;

/// `z(φ) = -φ ln φ`, with `z(0) = 0`.
///
/// Also used for density values above 1, where it goes negative.
#[inline]
pub fn z(phi: f64) -> f64 {
    if phi == 0.0 {
        0.0
    } else {
        -phi * phi.ln()
    }
}

pub fn nats_to_bits(nats: f64) -> f64 {
    nats / std::f64::consts::LN_2
}

/// Either kind of probability density, as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Pdf {
    Discrete {
        /// Free-form label for what the indices refer to (e.g. a group name).
        #[serde(default, skip_serializing_if = "Option::is_none")]
        domain: Option<String>,
        probs: DiscretePdf,
    },
    Grid(GridPdf),
}

impl Pdf {
    /// Shannon entropy or quadrature continuous entropy, by kind.
    pub fn entropy(&self) -> f64 {
        match self {
            Pdf::Discrete { probs, .. } => shannon_entropy(probs),
            Pdf::Grid(g) => continuous_entropy(g),
        }
    }

    pub fn kl_divergence(&self, other: &Pdf) -> Result<f64> {
        match (self, other) {
            (Pdf::Discrete { probs: p, .. }, Pdf::Discrete { probs: q, .. }) => kl_divergence(p, q),
            (Pdf::Grid(p), Pdf::Grid(q)) => kl_divergence(p, q),
            _ => Err(crate::Error::invalid(
                "KL divergence needs two pdfs of the same kind",
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_function() {
        assert_eq!(z(0.0), 0.0);
        assert_eq!(z(1.0), 0.0);
        assert!((z(0.5) - 0.5 * std::f64::consts::LN_2).abs() < 1e-16);
    }

    #[test]
    fn bits() {
        assert!((nats_to_bits(4f64.ln()) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn pdf_json() {
        let p: Pdf = serde_json::from_str(r#"{"kind":"discrete","probs":[0.5,0.25,0.25]}"#).unwrap();
        assert!((p.entropy() - 1.5 * std::f64::consts::LN_2).abs() < 1e-15);
        let bad = serde_json::from_str::<Pdf>(r#"{"kind":"discrete","probs":[0.5,0.25]}"#);
        assert!(bad.is_err());
        let grid = GridPdf::normalized(
            QuadratureGrid::box_grid(&[0.0], &[2.0], 8).unwrap(),
            |x| 1.0 + x[0],
        )
        .unwrap();
        let g = Pdf::Grid(grid);
        let text = serde_json::to_string(&g).unwrap();
        let back: Pdf = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
        assert!(g.kl_divergence(&p).is_err());
    }
}
