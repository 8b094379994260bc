//! The feature-selection settings and the joint-interventional study.
//!
//! Each graph replicate owns its seed streams, derived from the run seed and the
//! graph id, so results do not depend on how replicates are scheduled.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use icmaxent_core::identify::intervenable;
use icmaxent_core::select::score_all;
use icmaxent_core::solver::{merge_marginals_maxent, smooth_joint};
use icmaxent_core::synth::{derive_seed, empirical_averages, sample_scm, ConstraintTemplate};
use icmaxent_core::{
    fit, Config, ConstraintSpec, Dataset, Error, Fit, GraphSpec, JointTable, Result, ScmInstance, SolverOptions,
    ThetaScore, VarId, VarSet,
};

use crate::env::Environment;

pub const DEFAULT_GRAPHS: usize = 200;
pub const SELECTION_SAMPLES: usize = 100;
pub const JOINT_SAMPLES: usize = 1000;
/// Fresh draws of a replicate's data before an empty conditioning cell is fatal.
pub const MAX_DATA_ATTEMPTS: u64 = 10;

const STREAM_SCM: u64 = 0;
const STREAM_DATA: u64 = 1;
const STREAM_PAIR: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Icmaxent,
    Cmaxent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PxMode {
    Exact,
    Marginals,
}

impl std::str::FromStr for PxMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(PxMode::Exact),
            "marginals" => Ok(PxMode::Marginals),
            other => Err(Error::Parse(format!("unknown P(X) mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Template the replicates are drawn from. Effect parents are drawn per graph
    /// unless the template fixes them.
    pub structure: GraphSpec,
    pub n_graphs: usize,
    /// Records per observational dataset and per intervention configuration.
    pub n_samples: usize,
    pub seed: u64,
    pub solver: SolverOptions,
    /// Restricts every pipeline to one way of supplying `P(X)`. Unset, setting 1
    /// runs both and the other studies use the exact joint.
    pub px: Option<PxMode>,
}

impl ExperimentConfig {
    pub fn new(structure: GraphSpec, n_samples: usize) -> Self {
        Self { structure, n_graphs: DEFAULT_GRAPHS, n_samples, seed: 0, solver: SolverOptions::default(), px: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_graphs == 0 {
            return Err(Error::Domain("n_graphs must be at least 1".into()));
        }
        if self.n_samples == 0 {
            return Err(Error::Domain("n_samples must be at least 1".into()));
        }
        if self.structure.n_causes() < 2 {
            return Err(Error::InvalidGraph("experiments need at least two causes".into()));
        }
        self.solver.validate()
    }

    /// The ground-truth system for replicate `graph_id`.
    pub fn scm(&self, graph_id: usize) -> Result<ScmInstance> {
        sample_scm(&self.structure, derive_seed(self.seed, &[graph_id as u64, STREAM_SCM]))
    }

    fn px_modes(&self) -> Vec<PxMode> {
        match self.px {
            Some(m) => vec![m],
            None => vec![PxMode::Exact, PxMode::Marginals],
        }
    }

    fn single_px(&self) -> PxMode {
        self.px.unwrap_or(PxMode::Exact)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Setting1Row {
    pub graph_id: usize,
    pub variable: String,
    pub theta: f64,
    pub is_parent: bool,
    pub method: Method,
    pub px_mode: PxMode,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Setting2Row {
    pub graph_id: usize,
    pub variable: String,
    pub theta: f64,
    pub is_parent: bool,
    pub n_interventional: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointRow {
    pub graph_id: usize,
    pub scenario: u8,
    pub x1: u8,
    pub x2: u8,
    pub estimated: f64,
    #[serde(rename = "true")]
    pub truth: f64,
    pub residual: f64,
    pub converged: bool,
}

/// Single-variable averages for every cause.
#[derive(Debug, Clone)]
pub struct SingleAverages {
    /// `E[Y | x_i]` from the observational sample.
    pub conditional: Vec<ConstraintSpec>,
    /// `E[Y | do(x_i)]` from the clamped samples.
    pub interventional: Vec<ConstraintSpec>,
}

/// The observational sample and one clamped sample per `do(X_i = v)`, at index `2i + v`.
#[derive(Debug, Clone)]
pub struct Evidence {
    pub observational: Dataset,
    pub interventions: Vec<Dataset>,
}

impl Evidence {
    pub fn collect<E: Environment>(env: &E, n_causes: usize, n: usize, seed: u64) -> Result<Self> {
        let observational = env.observe(n, derive_seed(seed, &[0]))?;
        let mut interventions = Vec::with_capacity(2 * n_causes);
        for i in 0..n_causes {
            for v in 0..2u8 {
                let target = Config::single(VarId(i), v)?;
                let stream = 1 + 2 * i as u64 + u64::from(v);
                interventions.push(env.intervene(&target, n, derive_seed(seed, &[stream]))?);
            }
        }
        Ok(Self { observational, interventions })
    }

    pub fn all(&self) -> Vec<&Dataset> {
        std::iter::once(&self.observational).chain(&self.interventions).collect()
    }

    pub fn single_averages(&self, n_causes: usize) -> Result<SingleAverages> {
        let all = self.all();
        let mut conditional = Vec::with_capacity(n_causes);
        let mut interventional = Vec::with_capacity(n_causes);
        for i in 0..n_causes {
            let var = VarSet::from_indices(&[i]);
            conditional.push(empirical_averages(&all, &ConstraintTemplate::Conditional(var.clone()))?);
            interventional.push(empirical_averages(
                &all,
                &ConstraintTemplate::Interventional { int_set: var, cond_set: VarSet::empty() },
            )?);
        }
        Ok(SingleAverages { conditional, interventional })
    }
}

/// Draws the replicate's data and derives constraints from it, redrawing when a
/// conditioning cell comes out empty.
pub(crate) fn with_resampling<E: Environment, T>(
    env: &E,
    cfg: &ExperimentConfig,
    graph_id: usize,
    derive: impl Fn(&Evidence) -> Result<T>,
) -> Result<T> {
    let d = cfg.structure.n_causes();
    let mut last = None;
    for attempt in 0..MAX_DATA_ATTEMPTS {
        let seed = derive_seed(cfg.seed, &[graph_id as u64, STREAM_DATA, attempt]);
        let evidence = Evidence::collect(env, d, cfg.n_samples, seed)?;
        match derive(&evidence) {
            Err(Error::InsufficientData { config }) => {
                log::warn!("graph {graph_id}: no records for {config}, drawing new data");
                last = Some(config);
            }
            other => return other,
        }
    }
    Err(Error::InsufficientData { config: last.unwrap_or_default() })
}

fn supplied_joint<E: Environment>(env: &E, mode: PxMode, eps: f64) -> Result<JointTable> {
    let exact = env.joint_x()?;
    let p = match mode {
        PxMode::Exact => exact,
        PxMode::Marginals => merge_marginals_maxent(&exact.single_marginals())?,
    };
    smooth_joint(&p, eps)
}

fn fit_logged(
    graph_id: usize,
    label: &str,
    constraints: &[ConstraintSpec],
    p: &JointTable,
    structure: &GraphSpec,
    options: &SolverOptions,
) -> Result<Fit> {
    let fit = fit(constraints, p, structure, options)?;
    if !fit.report.converged {
        log::warn!(
            "graph {graph_id}: {label} stopped at residual norm {:.3e} after {} restarts",
            fit.report.residual_norm,
            fit.report.restarts
        );
    }
    Ok(fit)
}

fn scores(fit: &Fit) -> Result<Vec<ThetaScore>> {
    Ok(score_all(&fit.model)?.scores)
}

/// All four selection pipelines on one replicate.
///
/// The interventional pipeline uses every single-variable interventional constraint,
/// including ones the identifiability gate would reject.
pub fn setting1_graph<E: Environment>(env: &E, graph_id: usize, cfg: &ExperimentConfig) -> Result<Vec<Setting1Row>> {
    let d = cfg.structure.n_causes();
    let averages = with_resampling(env, cfg, graph_id, |ev| ev.single_averages(d))?;
    let structure = env.structure();
    let interventional_options = SolverOptions { allow_unidentifiable: true, ..cfg.solver.clone() };

    let mut scored = Vec::new();
    for method in [Method::Icmaxent, Method::Cmaxent] {
        let (constraints, options) = match method {
            Method::Icmaxent => (&averages.interventional, &interventional_options),
            Method::Cmaxent => (&averages.conditional, &cfg.solver),
        };
        for px in cfg.px_modes() {
            let p = supplied_joint(env, px, cfg.solver.epsilon_smoothing)?;
            let label = format!("{method:?}/{px:?}");
            let fit = fit_logged(graph_id, &label, constraints, &p, &structure, options)?;
            scored.push((method, px, fit.report.converged, scores(&fit)?));
        }
    }

    let parents = env.y_parents();
    Ok(scored
        .into_iter()
        .flat_map(|(method, px_mode, converged, scores)| {
            let parents = &parents;
            scores.into_iter().map(move |s| Setting1Row {
                graph_id,
                variable: s.var.to_string(),
                theta: s.theta,
                is_parent: parents.contains(s.var),
                method,
                px_mode,
                converged,
            })
        })
        .collect())
}

/// Causes the gate admits for a single-variable intervention, lowest first.
pub fn interventional_pool(structure: &GraphSpec) -> Result<Vec<VarId>> {
    let mut pool = Vec::new();
    for i in 0..structure.n_causes() {
        if intervenable(structure, VarId(i))?.admissible {
            pool.push(VarId(i));
        }
    }
    Ok(pool)
}

/// Interventional constraints for the first `k` admissible causes and conditional
/// constraints for the rest, for every `k` from zero to the pool size.
pub fn setting2_graph<E: Environment>(env: &E, graph_id: usize, cfg: &ExperimentConfig) -> Result<Vec<Setting2Row>> {
    let d = cfg.structure.n_causes();
    let averages = with_resampling(env, cfg, graph_id, |ev| ev.single_averages(d))?;
    let structure = env.structure();
    let pool = interventional_pool(&structure)?;
    let p = supplied_joint(env, cfg.single_px(), cfg.solver.epsilon_smoothing)?;

    let mut scored = Vec::new();
    for k in 0..=pool.len() {
        let constraints: Vec<ConstraintSpec> = (0..d)
            .map(|i| {
                if pool[..k].contains(&VarId(i)) {
                    averages.interventional[i].clone()
                } else {
                    averages.conditional[i].clone()
                }
            })
            .collect();
        let fit = fit_logged(graph_id, &format!("k={k}"), &constraints, &p, &structure, &cfg.solver)?;
        scored.push((k, fit.report.converged, scores(&fit)?));
    }

    let parents = env.y_parents();
    Ok(scored
        .into_iter()
        .flat_map(|(k, converged, scores)| {
            let parents = &parents;
            scores.into_iter().map(move |s| Setting2Row {
                graph_id,
                variable: s.var.to_string(),
                theta: s.theta,
                is_parent: parents.contains(s.var),
                n_interventional: k,
                converged,
            })
        })
        .collect())
}

pub const SCENARIOS: [u8; 5] = [1, 2, 3, 4, 5];

/// The pair whose joint conditional average scenarios 1 and 2 use.
pub fn random_pair(cfg: &ExperimentConfig, graph_id: usize) -> (VarId, VarId) {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[graph_id as u64, STREAM_PAIR]));
    let picked = sample(&mut rng, cfg.structure.n_causes(), 2);
    let (a, b) = (picked.index(0), picked.index(1));
    (VarId(a.min(b)), VarId(a.max(b)))
}

/// Constraint set of each scenario:
/// 1. `E[Y | x_i, x_j]` for the random pair plus `E[Y | do(x_k)]` for every other cause;
/// 2. `E[Y | x_i, x_j]` alone;
/// 3. `E[Y | do(x_k)]` for every cause;
/// 4. `E[Y | x_k]` for every cause;
/// 5. nothing.
pub fn scenario_constraints(
    scenario: u8,
    pair: (VarId, VarId),
    pair_average: &ConstraintSpec,
    averages: &SingleAverages,
) -> Result<Vec<ConstraintSpec>> {
    let others = || {
        averages
            .interventional
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != pair.0.index() && *k != pair.1.index())
            .map(|(_, c)| c.clone())
    };
    Ok(match scenario {
        1 => std::iter::once(pair_average.clone()).chain(others()).collect(),
        2 => vec![pair_average.clone()],
        3 => averages.interventional.clone(),
        4 => averages.conditional.clone(),
        5 => Vec::new(),
        other => return Err(Error::Domain(format!("scenario {other} is not one of 1-5"))),
    })
}

/// Estimates `P(Y = 1 | do(X1 = x1, X2 = x2))` on one replicate under every scenario.
pub fn joint_graph<E: Environment>(env: &E, graph_id: usize, cfg: &ExperimentConfig) -> Result<Vec<JointRow>> {
    let d = cfg.structure.n_causes();
    let pair = random_pair(cfg, graph_id);
    let (pair_average, averages) = with_resampling(env, cfg, graph_id, |ev| {
        let cond = VarSet::from_unsorted([pair.0, pair.1]);
        let pair_average = empirical_averages(&ev.all(), &ConstraintTemplate::Conditional(cond))?;
        Ok((pair_average, ev.single_averages(d)?))
    })?;
    let structure = env.structure();
    let p = supplied_joint(env, cfg.single_px(), cfg.solver.epsilon_smoothing)?;
    let query_vars = VarSet::from_indices(&[0, 1]);

    let mut rows = Vec::with_capacity(SCENARIOS.len() * query_vars.n_configs());
    for scenario in SCENARIOS {
        let constraints = scenario_constraints(scenario, pair, &pair_average, &averages)?;
        let fit = fit_logged(graph_id, &format!("scenario {scenario}"), &constraints, &p, &structure, &cfg.solver)?;
        for t in 0..query_vars.n_configs() {
            let int = Config::from_index(query_vars.clone(), t);
            let estimated = fit.model.interventional_expectation(&p, &structure, &int, &Config::empty())?;
            let truth = env.query(&int, &Config::empty())?;
            let values = int.values();
            rows.push(JointRow {
                graph_id,
                scenario,
                x1: values[0],
                x2: values[1],
                estimated,
                truth,
                residual: estimated - truth,
                converged: fit.report.converged,
            });
        }
    }
    Ok(rows)
}

/// Runs `per_graph` on every replicate in parallel and concatenates the rows in
/// graph order.
pub fn run_replicates<R, F>(cfg: &ExperimentConfig, per_graph: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(&ScmInstance, usize) -> Result<Vec<R>> + Sync,
{
    cfg.validate()?;
    let batches: Vec<Vec<R>> = (0..cfg.n_graphs)
        .into_par_iter()
        .map(|g| per_graph(&cfg.scm(g)?, g))
        .collect::<Result<_>>()?;
    Ok(batches.into_iter().flatten().collect())
}

pub fn run_setting1(cfg: &ExperimentConfig) -> Result<Vec<Setting1Row>> {
    run_replicates(cfg, |scm, g| setting1_graph(scm, g, cfg))
}

pub fn run_setting2(cfg: &ExperimentConfig) -> Result<Vec<Setting2Row>> {
    run_replicates(cfg, |scm, g| setting2_graph(scm, g, cfg))
}

pub fn run_joint(cfg: &ExperimentConfig) -> Result<Vec<JointRow>> {
    run_replicates(cfg, |scm, g| joint_graph(scm, g, cfg))
}
