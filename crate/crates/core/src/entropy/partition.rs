use std::fmt;
use std::sync::Arc;

use super::z;
use crate::numeric::pairwise_sum_by;
use crate::{Error, Result};

type Membership = Arc<dyn Fn(&[f64]) -> Option<usize> + Send + Sync>;

/// A finite partition of a probability space: normalized cell volumes and,
/// optionally, a rule assigning points to cells.
#[derive(Clone)]
pub struct Partition {
    volumes: Vec<f64>,
    membership: Option<Membership>,
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Partition")
            .field("volumes", &self.volumes)
            .field("membership", &self.membership.is_some())
            .finish()
    }
}

impl Partition {
    pub fn new(volumes: Vec<f64>) -> Result<Self> {
        if volumes.is_empty() {
            return Err(Error::invalid("partition needs at least one cell"));
        }
        if let Some(v) = volumes.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::invalid(format!("cell volume {v}")));
        }
        let total = pairwise_sum_by(volumes.len(), &|i| volumes[i]);
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("cell volumes sum to {total}, not 1")));
        }
        Ok(Partition {
            volumes,
            membership: None,
        })
    }

    /// Attach a point-to-cell rule. Returning `None` means the point lies in no cell.
    pub fn with_membership(mut self, f: impl Fn(&[f64]) -> Option<usize> + Send + Sync + 'static) -> Self {
        self.membership = Some(Arc::new(f));
        self
    }

    /// Partition of `[0, 1)` at the given interior break points.
    pub fn unit_interval(breaks: &[f64]) -> Result<Self> {
        let mut edges = vec![0.0];
        edges.extend_from_slice(breaks);
        edges.push(1.0);
        if edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("break points must be strictly increasing inside (0, 1)"));
        }
        let volumes = edges.windows(2).map(|w| w[1] - w[0]).collect();
        let interior = breaks.to_vec();
        Ok(Partition::new(volumes)?.with_membership(move |x| {
            let t = *x.first()?;
            if !(0.0..1.0).contains(&t) {
                return None;
            }
            Some(interior.partition_point(|b| *b <= t))
        }))
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn cell_of(&self, x: &[f64]) -> Result<usize> {
        let m = self
            .membership
            .as_ref()
            .ok_or_else(|| Error::invalid("partition has no membership rule"))?;
        match m(x) {
            Some(i) if i < self.volumes.len() => Ok(i),
            Some(i) => Err(Error::invalid(format!("membership returned cell {i} of {}", self.volumes.len()))),
            None => Err(Error::invalid(format!("point {x:?} lies outside every cell"))),
        }
    }

    /// `-ln V(A)` for cell `A`.
    pub fn cell_information(&self, cell: usize) -> f64 {
        -self.volumes[cell].ln()
    }
}

/// `H(α) = Σ z(V(A))`.
pub fn partition_entropy(part: &Partition) -> f64 {
    pairwise_sum_by(part.volumes.len(), &|i| z(part.volumes[i]))
}

/// `I_α(x) = -ln V(A)` for the cell `A` containing `x`.
pub fn measure_information(part: &Partition, x: &[f64]) -> Result<f64> {
    Ok(part.cell_information(part.cell_of(x)?))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::LN_2;

    use rand::Rng;

    use super::*;

    #[test]
    fn entropy_examples() {
        assert!((partition_entropy(&Partition::new(vec![0.5, 0.5]).unwrap()) - LN_2).abs() < 1e-15);
        assert_eq!(partition_entropy(&Partition::new(vec![1.0]).unwrap()), 0.0);
        let p = Partition::new(vec![0.5, 0.25, 0.25]).unwrap();
        assert!((partition_entropy(&p) - 1.5 * LN_2).abs() < 1e-15);
        assert!(Partition::new(vec![0.5, 0.4]).is_err());
        assert!(Partition::new(vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn information_examples() {
        let p = Partition::unit_interval(&[0.125]).unwrap();
        assert!((measure_information(&p, &[0.1]).unwrap() - 3.0 * LN_2).abs() < 1e-14);
        let whole = Partition::unit_interval(&[]).unwrap();
        assert_eq!(measure_information(&whole, &[0.7]).unwrap(), 0.0);
        assert!(measure_information(&whole, &[1.2]).is_err());
        assert!(measure_information(&Partition::new(vec![1.0]).unwrap(), &[0.0]).is_err());
        assert!(Partition::unit_interval(&[0.5, 0.3]).is_err());
    }

    #[test]
    fn average_information_matches_entropy() {
        let p = Partition::unit_interval(&[0.1, 0.35, 0.4, 0.8]).unwrap();
        let mut rng = crate::rng::stream(7, 0);
        let n = 100_000;
        let samples: Vec<f64> = (0..n)
            .map(|_| measure_information(&p, &[rng.random::<f64>()]).unwrap())
            .collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - partition_entropy(&p)).abs() < 3.0 * se, "{mean} ± {se}");
    }
}
