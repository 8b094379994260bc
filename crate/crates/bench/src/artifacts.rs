//! File-based generation and single fits.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};

use icmaxent_core::io;
use icmaxent_core::solver::{merge_marginals_maxent, smooth_joint};
use icmaxent_core::{fit, FitReport, JointTable, SolverOptions};

use crate::env::Environment;
use crate::experiments::{with_resampling, ExperimentConfig};

pub const GRAPH_FILE: &str = "graph.json";
pub const JOINT_FILE: &str = "joint.json";
pub const MARGINALS_FILE: &str = "marginals.json";
pub const INTERVENTIONAL_FILE: &str = "constraints_interventional.json";
pub const CONDITIONAL_FILE: &str = "constraints_conditional.json";
pub const MODEL_FILE: &str = "model.json";
pub const DATA_DIR: &str = "data";

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Writes replicate 0 of `cfg`: its graph with the true effect parents, exact
/// `P(X)` and its marginals, the raw samples, and both single-variable constraint
/// sets. Returns the written paths.
pub fn generate(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<Vec<PathBuf>> {
    cfg.validate()?;
    let scm = cfg.scm(0)?;
    let d = scm.n_causes();
    let (evidence, averages) = with_resampling(&scm, cfg, 0, |ev| Ok((ev.clone(), ev.single_averages(d)?)))?;
    let p = scm.joint_x()?;

    let data_dir = out.join(DATA_DIR);
    fs::create_dir_all(&data_dir).with_context(|| format!("creating {}", data_dir.display()))?;
    let mut files = vec![
        (out.join(GRAPH_FILE), io::graph_to_string(scm.graph())),
        (out.join(JOINT_FILE), io::joint_to_string(&p)),
        (out.join(MARGINALS_FILE), io::marginals_to_string(&p.single_marginals())),
        (out.join(INTERVENTIONAL_FILE), io::constraints_to_string(d, &averages.interventional)),
        (out.join(CONDITIONAL_FILE), io::constraints_to_string(d, &averages.conditional)),
        (data_dir.join("observational.csv"), io::dataset_to_string(&evidence.observational)),
    ];
    for ds in &evidence.interventions {
        let target = ds.intervention().expect("clamped samples carry their intervention");
        let var = target.vars().as_slice()[0];
        let name = format!("do_{var}_{}.csv", target.values()[0]);
        files.push((data_dir.join(name), io::dataset_to_string(ds)));
    }
    for (path, text) in &files {
        write(path, text)?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}

/// Where a single fit takes `P(X)` from.
#[derive(Debug, Clone)]
pub enum JointSource {
    Joint(PathBuf),
    Marginals(PathBuf),
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub model_path: PathBuf,
    pub report: FitReport,
}

/// Fits one constraint file and writes the model with its report to `out/model.json`.
pub fn fit_files(
    constraints: &Path,
    source: &JointSource,
    graph: &Path,
    options: &SolverOptions,
    out: &Path,
) -> anyhow::Result<FitOutcome> {
    let set = io::parse_constraints(&read(constraints)?).with_context(|| format!("in {}", constraints.display()))?;
    let graph_spec = io::parse_graph(&read(graph)?).with_context(|| format!("in {}", graph.display()))?;
    let p: JointTable = match source {
        JointSource::Joint(path) => io::parse_joint(&read(path)?).with_context(|| format!("in {}", path.display()))?,
        JointSource::Marginals(path) => {
            let m = io::parse_marginals(&read(path)?).with_context(|| format!("in {}", path.display()))?;
            merge_marginals_maxent(&m)?
        }
    };
    if set.n_causes != graph_spec.n_causes() || p.n_vars() != graph_spec.n_causes() {
        bail!(
            "cause counts disagree: constraints {}, graph {}, joint {}",
            set.n_causes,
            graph_spec.n_causes(),
            p.n_vars()
        );
    }
    let p = smooth_joint(&p, options.epsilon_smoothing)?;
    let fitted = fit(&set.constraints, &p, &graph_spec.without_y_parents(), options)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let model_path = out.join(MODEL_FILE);
    write(&model_path, &io::model_to_string(&fitted.model, Some(&fitted.report))?)?;
    Ok(FitOutcome { model_path, report: fitted.report })
}
