//! Fitting the multipliers by minimizing the squared residuals between the
//! empirical averages and the model's expectations.
//!
//! A fit starts from `λ = 0` (the uniform conditional) and runs BFGS until the
//! gradient vanishes or the iteration budget is spent. While the residual norm is
//! still at or above the tolerance, BFGS is restarted from the multipliers it
//! reached, at most `max_restarts` times.

mod bfgs;
mod design;

use serde::{Deserialize, Serialize};

use crate::constraint::{ConstraintSpec, MultiplierVector};
use crate::error::{Error, Result};
use crate::graph::GraphSpec;
use crate::identify;
use crate::joint::JointTable;
use crate::model::ConditionalModel;

use design::Design;
pub(crate) use design::sigmoid;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Convergence threshold on the sum of squared residuals.
    pub tolerance: f64,
    pub max_restarts: usize,
    /// BFGS iterations per run.
    pub max_iterations: usize,
    /// A run terminates successfully once every gradient component is below this.
    pub gradient_tolerance: f64,
    pub epsilon_smoothing: f64,
    /// Accept interventional constraints the identifiability gate rejects.
    pub allow_unidentifiable: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 0.01,
            max_restarts: 10,
            max_iterations: 500,
            gradient_tolerance: 1e-10,
            epsilon_smoothing: f64::EPSILON,
            allow_unidentifiable: false,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::Domain(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.max_restarts < 1 {
            return Err(Error::Domain("max_restarts must be at least 1".into()));
        }
        if self.max_iterations < 1 {
            return Err(Error::Domain("max_iterations must be at least 1".into()));
        }
        if !(self.epsilon_smoothing > 0.0) {
            return Err(Error::Domain("epsilon_smoothing must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// Sum of squared residuals at the returned multipliers.
    pub residual_norm: f64,
    pub restarts: usize,
    /// `residual_norm < tolerance`.
    pub converged: bool,
    /// Whether the last BFGS run met its gradient criterion.
    pub optimizer_success: bool,
    /// `H(Y | X)` of the fitted model, in nats.
    pub conditional_entropy: f64,
    pub iterations: usize,
    /// Residual norm at the end of each run; non-increasing.
    pub run_norms: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Fit {
    pub lambda: MultiplierVector,
    pub model: ConditionalModel,
    pub report: FitReport,
}

/// `(p_i + eps) / Σ_j (p_j + eps)`.
pub fn smooth_joint(p: &JointTable, eps: f64) -> Result<JointTable> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Domain(format!("smoothing epsilon must be positive, got {eps}")));
    }
    let total: f64 = p.probs().iter().map(|v| v + eps).sum();
    JointTable::new(p.n_vars(), p.probs().iter().map(|v| (v + eps) / total).collect())
}

/// The maximum-entropy joint with the given single-variable marginals, which is the
/// product of independent Bernoullis.
pub fn merge_marginals_maxent(p_one: &[f64]) -> Result<JointTable> {
    if let Some(p) = p_one.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        return Err(Error::Domain(format!("marginal {p} is not in (0, 1)")));
    }
    JointTable::product(p_one)
}

fn check_inputs(constraints: &[ConstraintSpec], p: &JointTable, graph: &GraphSpec) -> Result<()> {
    if graph.n_causes() != p.n_vars() {
        return Err(Error::Domain(format!(
            "graph has {} causes but the joint table covers {}",
            graph.n_causes(),
            p.n_vars()
        )));
    }
    for c in constraints {
        c.check_range(p.n_vars())?;
    }
    Ok(())
}

/// `target - expectation` for every (constraint, target configuration), in
/// multiplier order, evaluated through [`ConditionalModel`].
pub fn assemble_residuals(
    lambda: &MultiplierVector,
    constraints: &[ConstraintSpec],
    p: &JointTable,
    graph: &GraphSpec,
) -> Result<Vec<f64>> {
    check_inputs(constraints, p, graph)?;
    identify::require_admissible(graph, constraints)?;
    let model = ConditionalModel::normalize(p.n_vars(), constraints.to_vec(), lambda.clone())?;
    let mut out = Vec::with_capacity(lambda.len());
    for (k, c) in constraints.iter().enumerate() {
        for (t, target) in c.targets().iter().enumerate() {
            out.push(target - model.constraint_expectation(p, Some(graph), k, t)?);
        }
    }
    Ok(out)
}

/// Sum of squared residuals and its analytic gradient, without the identifiability gate.
pub fn objective_and_gradient(
    lambda: &MultiplierVector,
    constraints: &[ConstraintSpec],
    p: &JointTable,
) -> Result<(f64, Vec<f64>)> {
    let design = Design::compile(constraints, p)?;
    if lambda.len() != design.n_multipliers() {
        return Err(Error::InvalidModel("multiplier count does not match constraints".into()));
    }
    let mut grad = vec![0.0; lambda.len()];
    let objective = design.objective_and_gradient(lambda.entries(), &mut grad)?;
    Ok((objective, grad))
}

pub fn fit(
    constraints: &[ConstraintSpec],
    p: &JointTable,
    graph: &GraphSpec,
    options: &SolverOptions,
) -> Result<Fit> {
    options.validate()?;
    check_inputs(constraints, p, graph)?;
    if !p.is_strictly_positive() {
        let x = p.probs().iter().position(|&v| v <= 0.0).unwrap_or(0);
        return Err(Error::Positivity {
            event: crate::vars::Config::full(p.n_vars(), x).to_string(),
            mass: p.prob(x),
        });
    }
    if !options.allow_unidentifiable {
        identify::require_admissible(graph, constraints)?;
    }

    let design = Design::compile(constraints, p)?;
    let settings = bfgs::Settings {
        max_iterations: options.max_iterations,
        gradient_tolerance: options.gradient_tolerance,
        objective_floor: 0.0,
    };

    let mut lambda = vec![0.0; design.n_multipliers()];
    let mut run_norms = Vec::new();
    let mut restarts = 0;
    let mut iterations = 0;
    let mut optimizer_success;
    loop {
        let run = bfgs::minimize(
            |l, g| design.objective_and_gradient(l, g),
            lambda,
            &settings,
        )?;
        lambda = run.x;
        iterations += run.iterations;
        optimizer_success = run.success;
        run_norms.push(run.value);
        if run.value < options.tolerance || restarts == options.max_restarts {
            break;
        }
        restarts += 1;
        log::debug!("restart {restarts}: residual norm {:.3e}", run.value);
    }

    let residual_norm = *run_norms.last().expect("at least one run");
    let lambda = MultiplierVector::new(lambda);
    let model = ConditionalModel::normalize(p.n_vars(), constraints.to_vec(), lambda.clone())?;
    let conditional_entropy = model.conditional_entropy(p)?;
    Ok(Fit {
        lambda,
        model,
        report: FitReport {
            residual_norm,
            restarts,
            converged: residual_norm < options.tolerance,
            optimizer_success,
            conditional_entropy,
            iterations,
            run_norms,
        },
    })
}
