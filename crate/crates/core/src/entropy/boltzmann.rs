use std::fmt;
use std::sync::Arc;

use super::continuous::{GridPdf, QuadratureGrid};
use crate::numeric::pairwise_sum_by;
use crate::{Error, Result};

type Field = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Configurational part of a classical system: potential energy `V(q)`, the
/// mass-metric volume factor `|M(q)|^½` and inverse temperature `β`.
#[derive(Clone)]
pub struct BoltzmannSystem {
    potential: Field,
    mass_det_sqrt: Field,
    beta: f64,
}

impl fmt::Debug for BoltzmannSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoltzmannSystem").field("beta", &self.beta).finish_non_exhaustive()
    }
}

impl BoltzmannSystem {
    pub fn new(
        potential: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        mass_det_sqrt: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        beta: f64,
    ) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::invalid(format!("beta must be positive and finite, got {beta}")));
        }
        Ok(BoltzmannSystem {
            potential: Arc::new(potential),
            mass_det_sqrt: Arc::new(mass_det_sqrt),
            beta,
        })
    }

    /// `β = 1 / (k_B T)`.
    pub fn from_temperature(
        potential: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        mass_det_sqrt: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        k_b: f64,
        temperature: f64,
    ) -> Result<Self> {
        BoltzmannSystem::new(potential, mass_det_sqrt, 1.0 / (k_b * temperature))
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn potential(&self, q: &[f64]) -> f64 {
        (self.potential)(q)
    }

    pub fn mass_det_sqrt(&self, q: &[f64]) -> f64 {
        (self.mass_det_sqrt)(q)
    }

    fn evaluate(&self, grid: &QuadratureGrid) -> Result<(Vec<f64>, Vec<f64>)> {
        let energy = grid.evaluate(|q| self.potential(q));
        let metric = grid.evaluate(|q| self.mass_det_sqrt(q));
        if let Some(i) = energy.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("potential is not finite at node {i}")));
        }
        if let Some(i) = metric.iter().position(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::invalid(format!("|M|^1/2 is negative or not finite at node {i}")));
        }
        Ok((energy, metric))
    }
}

/// `Z = Σ w |M(q)|^½ exp(-β V(q))` over the grid.
pub fn partition_function(sys: &BoltzmannSystem, grid: &QuadratureGrid) -> Result<f64> {
    let (energy, metric) = sys.evaluate(grid)?;
    let w = grid.weights();
    Ok(pairwise_sum_by(w.len(), &|i| w[i] * metric[i] * (-sys.beta * energy[i]).exp()))
}

/// The configurational Boltzmann density `exp(-βV) / Z` with respect to `|M|^½ dq`.
///
/// The returned pdf's weights are the grid weights times `|M|^½`, so
/// `continuous_entropy` of it is the configurational entropy.
pub fn boltzmann_configurational_pdf(sys: &BoltzmannSystem, grid: &QuadratureGrid) -> Result<GridPdf> {
    let (energy, metric) = sys.evaluate(grid)?;
    let measure = grid.reweighted(&metric);
    let w = measure.weights();
    if w.iter().all(|w| *w == 0.0) {
        return Err(Error::invalid("measure |M|^1/2 dq vanishes on the whole grid"));
    }
    // shift by the minimum energy so the exponentials cannot all underflow
    let v_min = energy.iter().copied().fold(f64::INFINITY, f64::min);
    let mut values: Vec<f64> = energy.iter().map(|v| (-sys.beta * (v - v_min)).exp()).collect();
    let z = pairwise_sum_by(w.len(), &|i| w[i] * values[i]);
    if !(z > 0.0) {
        return Err(Error::invalid("Boltzmann weights are not normalizable"));
    }
    values.iter_mut().for_each(|v| *v /= z);
    GridPdf::new(measure, values)
}
