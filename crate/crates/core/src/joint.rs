//! Dense probability tables over binary configurations of the causes.

use crate::error::{Error, Result};
use crate::vars::{Config, VarSet};

/// `P(X)` over `2^n` configurations, variable 0 in the least significant bit.
///
/// Tables returned by [`JointTable::marginal`] and [`JointTable::condition`] are over a
/// subset of the causes; their variables are the subset in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    n_vars: usize,
    probs: Vec<f64>,
}

const SUM_TOLERANCE: f64 = 1e-9;

impl JointTable {
    pub fn new(n_vars: usize, probs: Vec<f64>) -> Result<Self> {
        if n_vars > crate::DEFAULT_MAX_CAUSES {
            return Err(Error::Capacity { n_causes: n_vars, ceiling: crate::DEFAULT_MAX_CAUSES });
        }
        if probs.len() != 1 << n_vars {
            return Err(Error::Domain(format!(
                "joint table over {n_vars} variables needs {} entries, got {}",
                1usize << n_vars,
                probs.len()
            )));
        }
        if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| !p.is_finite() || **p < 0.0) {
            return Err(Error::Domain(format!("joint entry {i} is {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::Domain(format!("joint table sums to {total}, not 1")));
        }
        Ok(Self { n_vars, probs })
    }

    pub fn uniform(n_vars: usize) -> Result<Self> {
        let size = 1usize << n_vars;
        Self::new(n_vars, vec![1.0 / size as f64; size])
    }

    /// Independent variables with the given `P(X_i = 1)`.
    pub fn product(p_one: &[f64]) -> Result<Self> {
        let n = p_one.len();
        let mut probs = vec![1.0; 1 << n];
        for (x, slot) in probs.iter_mut().enumerate() {
            for (i, &p) in p_one.iter().enumerate() {
                *slot *= if (x >> i) & 1 == 1 { p } else { 1.0 - p };
            }
        }
        Self::new(n, probs)
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, x: usize) -> f64 {
        self.probs[x]
    }

    pub fn n_configs(&self) -> usize {
        self.probs.len()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.probs.iter().all(|&p| p > 0.0)
    }

    /// Probability of the event `c`.
    pub fn event_mass(&self, c: &Config) -> f64 {
        self.probs.iter().enumerate().filter(|(x, _)| c.matches(*x)).map(|(_, p)| p).sum()
    }

    /// Marginal over `keep`.
    pub fn marginal(&self, keep: &VarSet) -> JointTable {
        let mut out = vec![0.0; keep.n_configs()];
        for (x, &p) in self.probs.iter().enumerate() {
            out[keep.project(x)] += p;
        }
        JointTable { n_vars: keep.len(), probs: out }
    }

    /// `P(X_i = 1)` for every variable.
    pub fn single_marginals(&self) -> Vec<f64> {
        (0..self.n_vars)
            .map(|i| self.probs.iter().enumerate().filter(|(x, _)| (x >> i) & 1 == 1).map(|(_, p)| p).sum())
            .collect()
    }

    /// `P(x_comp | c)` over the variables not fixed by `c`.
    pub fn condition(&self, c: &Config) -> Result<JointTable> {
        if let Some(v) = c.vars().max() {
            if v.0 >= self.n_vars {
                return Err(Error::Domain(format!("{v} is out of range for {} variables", self.n_vars)));
            }
        }
        let comp = c.vars().complement(self.n_vars);
        let mut out = vec![0.0; comp.n_configs()];
        for (x, &p) in self.probs.iter().enumerate() {
            if c.matches(x) {
                out[comp.project(x)] += p;
            }
        }
        let mass: f64 = out.iter().sum();
        if mass <= 0.0 {
            return Err(Error::Positivity { event: c.to_string(), mass });
        }
        out.iter_mut().for_each(|p| *p /= mass);
        Ok(JointTable { n_vars: comp.len(), probs: out })
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        -self.probs.iter().filter(|&&p| p > 0.0).map(|&p| p * p.ln()).sum::<f64>()
    }
}
