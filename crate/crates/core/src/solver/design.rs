//! Constraints compiled against a fixed `P(X)`.
//!
//! Every expectation the solver matches is affine in the table `p1(x) = P_λ(Y=1|x)`:
//!
//! ```text
//! E_t(λ) = base_t + Σ_{x : cfg(x) = t} w(x) p1(x)
//! ```
//!
//! and `p1(x) = σ(Σ_blocks λ[cfg(x)] s(x))`, where `s(x) = f(1, x) - f(0, x)`. Each
//! block (constraint) therefore stores, per configuration, its active target index,
//! the weight `w(x)` and the statistic difference `s(x)`. Residuals, the objective
//! and its gradient are then a pair of passes over the `2^D` configurations.

use crate::constraint::{ConstraintKind, ConstraintSpec};
use crate::error::{Error, Result};
use crate::joint::JointTable;

struct Block {
    offset: usize,
    targets: Vec<f64>,
    cfg: Vec<u32>,
    stat_delta: Vec<f64>,
    weight: Vec<f64>,
    base: f64,
}

pub(crate) struct Design {
    n_configs: usize,
    n_mult: usize,
    blocks: Vec<Block>,
}

impl Design {
    pub fn compile(constraints: &[ConstraintSpec], p: &JointTable) -> Result<Self> {
        let n = p.n_vars();
        let n_configs = p.n_configs();
        let mut blocks = Vec::with_capacity(constraints.len());
        let mut offset = 0;
        for c in constraints {
            c.check_range(n)?;
            let scope = c.scope();
            let cfg: Vec<u32> = (0..n_configs).map(|x| scope.project(x) as u32).collect();
            let (stat_delta, weight, base) = match c.kind() {
                ConstraintKind::Marginal => {
                    let stat = c.statistic();
                    let delta: Vec<f64> = (0..n_configs).map(|x| stat.at(1, x) - stat.at(0, x)).collect();
                    let weight = (0..n_configs).map(|x| p.prob(x) * delta[x]).collect();
                    let base = (0..n_configs).map(|x| p.prob(x) * stat.at(0, x)).sum();
                    (delta, weight, base)
                }
                ConstraintKind::Conditional => {
                    let mut mass = vec![0.0; scope.n_configs()];
                    for x in 0..n_configs {
                        mass[cfg[x] as usize] += p.prob(x);
                    }
                    check_mass(c, &mass)?;
                    let weight = (0..n_configs).map(|x| p.prob(x) / mass[cfg[x] as usize]).collect();
                    (vec![1.0; n_configs], weight, 0.0)
                }
                ConstraintKind::Interventional => {
                    // w(x) = P(x_R, x_C) / P(x_C), with R the causes outside I ∪ C.
                    let int_mask = c.int_set().mask();
                    let cond = c.cond_set();
                    let mut joint_rc = vec![0.0; n_configs];
                    for x in 0..n_configs {
                        joint_rc[x & !int_mask] += p.prob(x);
                    }
                    let mut cond_mass = vec![0.0; cond.n_configs()];
                    for x in 0..n_configs {
                        cond_mass[cond.project(x)] += p.prob(x);
                    }
                    if let Some(b) = cond_mass.iter().position(|&m| m <= 0.0) {
                        return Err(Error::Positivity {
                            event: crate::vars::Config::from_index(cond.clone(), b).to_string(),
                            mass: cond_mass[b],
                        });
                    }
                    let weight =
                        (0..n_configs).map(|x| joint_rc[x & !int_mask] / cond_mass[cond.project(x)]).collect();
                    (vec![1.0; n_configs], weight, 0.0)
                }
            };
            blocks.push(Block { offset, targets: c.targets().to_vec(), cfg, stat_delta, weight, base });
            offset += c.n_targets();
        }
        Ok(Self { n_configs, n_mult: offset, blocks })
    }

    pub fn n_multipliers(&self) -> usize {
        self.n_mult
    }

    /// `P_λ(Y=1 | x)` for all configurations.
    pub fn prob_table(&self, lambda: &[f64]) -> Vec<f64> {
        let mut logit = vec![0.0; self.n_configs];
        for b in &self.blocks {
            for (x, a) in logit.iter_mut().enumerate() {
                *a += lambda[b.offset + b.cfg[x] as usize] * b.stat_delta[x];
            }
        }
        logit.into_iter().map(sigmoid).collect()
    }

    fn expectations(&self, p1: &[f64]) -> Vec<f64> {
        let mut e = vec![0.0; self.n_mult];
        for b in &self.blocks {
            for t in 0..b.targets.len() {
                e[b.offset + t] = b.base;
            }
            for x in 0..self.n_configs {
                e[b.offset + b.cfg[x] as usize] += b.weight[x] * p1[x];
            }
        }
        e
    }

    /// Sum of squared residuals, writing its gradient into `grad`.
    pub fn objective_and_gradient(&self, lambda: &[f64], grad: &mut [f64]) -> Result<f64> {
        let p1 = self.prob_table(lambda);
        let e = self.expectations(&p1);
        let mut residuals = Vec::with_capacity(self.n_mult);
        for b in &self.blocks {
            for (t, target) in b.targets.iter().enumerate() {
                residuals.push(target - e[b.offset + t]);
            }
        }
        let objective: f64 = residuals.iter().map(|r| r * r).sum();
        if !objective.is_finite() {
            return Err(Error::Numeric(format!("objective evaluated to {objective}")));
        }

        // u(x) = p1 (1 - p1) Σ_blocks r[cfg(x)] w(x)
        let mut u: Vec<f64> = p1.iter().map(|p| p * (1.0 - p)).collect();
        let mut acc = vec![0.0; self.n_configs];
        for b in &self.blocks {
            for (x, a) in acc.iter_mut().enumerate() {
                *a += residuals[b.offset + b.cfg[x] as usize] * b.weight[x];
            }
        }
        for (ux, a) in u.iter_mut().zip(&acc) {
            *ux *= a;
        }
        grad.iter_mut().for_each(|g| *g = 0.0);
        for b in &self.blocks {
            for x in 0..self.n_configs {
                grad[b.offset + b.cfg[x] as usize] -= 2.0 * b.stat_delta[x] * u[x];
            }
        }
        Ok(objective)
    }
}

fn check_mass(c: &ConstraintSpec, mass: &[f64]) -> Result<()> {
    match mass.iter().position(|&m| m <= 0.0) {
        Some(k) => Err(Error::Positivity { event: c.target_config(k).to_string(), mass: mass[k] }),
        None => Ok(()),
    }
}

#[inline]
pub(crate) fn sigmoid(a: f64) -> f64 {
    if a >= 0.0 {
        1.0 / (1.0 + (-a).exp())
    } else {
        let e = a.exp();
        e / (1.0 + e)
    }
}
