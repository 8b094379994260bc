use std::sync::Mutex;

use icmaxent_bench::experiments::{
    interventional_pool, joint_graph, random_pair, run_joint, run_setting1, run_setting2, scenario_constraints,
    setting1_graph, setting2_graph, Evidence, JOINT_SAMPLES, SELECTION_SAMPLES,
};
use icmaxent_bench::{Environment, ExperimentConfig, Method, PxMode};
use icmaxent_core::synth::derive_seed;
use icmaxent_core::{Config, ConstraintKind, Dataset, GraphSpec, JointTable, Result, ScmInstance, Structure, VarId, VarSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn config(structure: Structure, n_graphs: usize, samples: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(structure.graph(), samples);
    cfg.n_graphs = n_graphs;
    cfg.seed = 42;
    cfg
}

/// Records every call and can misreport the effect's parents.
struct Recorder {
    inner: ScmInstance,
    reported_parents: VarSet,
    calls: Mutex<Vec<&'static str>>,
    /// Observational draws to answer with `X1` constant at zero.
    degenerate_draws: Mutex<usize>,
}

impl Recorder {
    fn new(inner: ScmInstance) -> Self {
        let reported_parents = inner.y_parents().clone();
        Self { inner, reported_parents, calls: Mutex::new(Vec::new()), degenerate_draws: Mutex::new(0) }
    }

    fn log(&self, call: &'static str) {
        self.calls.lock().unwrap().push(call);
    }

    fn calls(&self) -> Vec<&'static str> {
        self.calls.lock().unwrap().clone()
    }
}

impl Environment for Recorder {
    fn structure(&self) -> GraphSpec {
        self.log("structure");
        self.inner.graph().without_y_parents()
    }

    fn observe(&self, n: usize, seed: u64) -> Result<Dataset> {
        self.log("observe");
        let ds = self.inner.ancestral_sample(n, None, seed)?;
        let mut left = self.degenerate_draws.lock().unwrap();
        if *left == 0 {
            return Ok(ds);
        }
        *left -= 1;
        let width = ds.n_causes() + 1;
        let mut rows: Vec<u8> = ds.rows().flat_map(|r| r.to_vec()).collect();
        rows.chunks_mut(width).for_each(|r| r[0] = 0);
        Dataset::new(ds.n_causes(), rows, None)
    }

    fn intervene(&self, target: &Config, n: usize, seed: u64) -> Result<Dataset> {
        self.log("intervene");
        self.inner.ancestral_sample(n, Some(target), seed)
    }

    fn joint_x(&self) -> Result<JointTable> {
        self.log("joint_x");
        self.inner.exact_joint_x()
    }

    fn query(&self, int: &Config, cond: &Config) -> Result<f64> {
        self.log("query");
        self.inner.exact_query(int, cond)
    }

    fn y_parents(&self) -> VarSet {
        self.log("y_parents");
        self.reported_parents.clone()
    }
}

#[test]
fn row_counts_follow_the_design() {
    let cfg = config(Structure::A, 3, SELECTION_SAMPLES);
    assert_eq!(run_setting1(&cfg).unwrap().len(), 3 * 5 * 4);
    assert_eq!(run_setting2(&cfg).unwrap().len(), 3 * 6 * 5);
    let c = config(Structure::C, 3, SELECTION_SAMPLES);
    assert_eq!(run_setting2(&c).unwrap().len(), 3 * 5 * 5);
    let j = config(Structure::A, 3, JOINT_SAMPLES);
    assert_eq!(run_joint(&j).unwrap().len(), 3 * 5 * 4);
}

#[test]
fn results_do_not_depend_on_scheduling() {
    let cfg = config(Structure::B, 4, SELECTION_SAMPLES);
    let parallel = run_setting1(&cfg).unwrap();
    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| run_setting1(&cfg).unwrap());
    assert_eq!(parallel, serial);
    assert_eq!(parallel, run_setting1(&cfg).unwrap());
    let ids: Vec<usize> = parallel.iter().map(|r| r.graph_id).collect();
    assert!(ids.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn ground_truth_is_read_only_for_labelling() {
    let cfg = config(Structure::C, 1, SELECTION_SAMPLES);
    let scm = cfg.scm(0).unwrap();
    let honest = Recorder::new(scm.clone());
    let rows = setting1_graph(&honest, 0, &cfg).unwrap();
    let calls = honest.calls();
    assert_eq!(calls.iter().filter(|c| **c == "y_parents").count(), 1);
    assert_eq!(calls.last(), Some(&"y_parents"));

    // Lying about the parents changes labels only.
    let mut liar = Recorder::new(scm.clone());
    liar.reported_parents = scm.y_parents().complement(5);
    let lied = setting1_graph(&liar, 0, &cfg).unwrap();
    for (a, b) in rows.iter().zip(&lied) {
        assert_eq!(a.theta.to_bits(), b.theta.to_bits());
        assert_eq!(a.variable, b.variable);
        assert_ne!(a.is_parent, b.is_parent);
    }

    let honest = Recorder::new(scm);
    setting2_graph(&honest, 0, &cfg).unwrap();
    let calls = honest.calls();
    assert_eq!(calls.iter().filter(|c| **c == "y_parents").count(), 1);
    assert_eq!(calls.last(), Some(&"y_parents"));
}

#[test]
fn joint_study_never_reads_the_parents() {
    let cfg = config(Structure::A, 1, 200);
    let env = Recorder::new(cfg.scm(0).unwrap());
    joint_graph(&env, 0, &cfg).unwrap();
    assert!(!env.calls().contains(&"y_parents"));
}

#[test]
fn empty_cells_trigger_a_fresh_draw() {
    let cfg = config(Structure::A, 1, SELECTION_SAMPLES);
    let env = Recorder::new(cfg.scm(0).unwrap());
    *env.degenerate_draws.lock().unwrap() = 1;
    let rows = setting1_graph(&env, 0, &cfg).unwrap();
    assert_eq!(rows.len(), 20);
    assert_eq!(env.calls().iter().filter(|c| **c == "observe").count(), 2);

    let stuck = Recorder::new(cfg.scm(0).unwrap());
    *stuck.degenerate_draws.lock().unwrap() = usize::MAX;
    let err = setting1_graph(&stuck, 0, &cfg).unwrap_err();
    assert!(matches!(err, icmaxent_core::Error::InsufficientData { .. }), "{err}");
}

#[test]
fn interventional_pool_respects_the_gate() {
    let ids = |s: Structure| interventional_pool(&s.graph()).unwrap().iter().map(|v| v.0).collect::<Vec<_>>();
    assert_eq!(ids(Structure::A), vec![0, 1, 2, 3, 4]);
    assert_eq!(ids(Structure::C), vec![1, 2, 3, 4]);

    let cfg = config(Structure::C, 2, SELECTION_SAMPLES);
    let rows = run_setting2(&cfg).unwrap();
    assert_eq!(rows.iter().map(|r| r.n_interventional).max(), Some(4));
}

#[test]
fn scenario_constraint_sets() {
    let cfg = config(Structure::A, 1, 300);
    let scm = cfg.scm(0).unwrap();
    let ev = Evidence::collect(&scm, 5, 300, 1).unwrap();
    let averages = ev.single_averages(5).unwrap();
    let pair = random_pair(&cfg, 0);
    assert!(pair.0 < pair.1);
    assert_eq!(pair, random_pair(&cfg, 0));
    let pair_set = VarSet::from_unsorted([pair.0, pair.1]);
    let pair_avg = icmaxent_core::synth::empirical_averages(
        &ev.all(),
        &icmaxent_core::synth::ConstraintTemplate::Conditional(pair_set.clone()),
    )
    .unwrap();

    let kinds = |s: u8| -> Vec<ConstraintKind> {
        scenario_constraints(s, pair, &pair_avg, &averages).unwrap().iter().map(|c| c.kind()).collect()
    };
    let one = scenario_constraints(1, pair, &pair_avg, &averages).unwrap();
    assert_eq!(one.len(), 4);
    assert_eq!(one[0].cond_set(), &pair_set);
    assert!(one[1..].iter().all(|c| c.kind() == ConstraintKind::Interventional && c.int_set().is_disjoint(&pair_set)));
    assert_eq!(kinds(2), vec![ConstraintKind::Conditional]);
    assert_eq!(kinds(3), vec![ConstraintKind::Interventional; 5]);
    assert_eq!(kinds(4), vec![ConstraintKind::Conditional; 5]);
    assert!(kinds(5).is_empty());
    assert!(scenario_constraints(6, pair, &pair_avg, &averages).is_err());
}

#[test]
fn unconstrained_scenario_is_uniform() {
    let cfg = config(Structure::A, 3, JOINT_SAMPLES);
    let rows = run_joint(&cfg).unwrap();
    for r in rows.iter().filter(|r| r.scenario == 5) {
        assert_eq!(r.estimated, 0.5);
        assert_eq!(r.residual, r.estimated - r.truth);
    }
}

#[test]
fn truths_in_the_joint_study_are_exact_queries() {
    let cfg = config(Structure::A, 2, 200);
    let rows = run_joint(&cfg).unwrap();
    for r in &rows {
        let scm = cfg.scm(r.graph_id).unwrap();
        let int = Config::new(VarSet::from_indices(&[0, 1]), &[r.x1, r.x2]).unwrap();
        assert_eq!(r.truth, scm.exact_query(&int, &Config::empty()).unwrap());
    }
}

#[test]
fn joint_study_needs_an_identifiable_query() {
    let cfg = config(Structure::C, 1, 100);
    assert!(run_joint(&cfg).is_err());
}

/// Mean of `values` and a percentile bootstrap interval for it.
fn bootstrap_mean(values: &[f64], seed: u64) -> (f64, f64, f64) {
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means: Vec<f64> = (0..2000)
        .map(|_| {
            let draw: Vec<f64> = (0..values.len()).map(|_| values[rng.gen_range(0..values.len())]).collect();
            mean(&draw)
        })
        .collect();
    means.sort_by(f64::total_cmp);
    (mean(values), means[49], means[1949])
}

#[test]
fn parents_outscore_non_parents_with_independent_causes() {
    let independent = GraphSpec::new(5, vec![], vec![], None).unwrap();
    let mut gaps = Vec::new();
    for seed in 0..50u64 {
        let mut cfg = ExperimentConfig::new(independent.clone(), SELECTION_SAMPLES);
        cfg.n_graphs = 1;
        cfg.seed = derive_seed(77, &[seed]);
        cfg.px = Some(PxMode::Exact);
        let rows = run_setting1(&cfg).unwrap();
        let mean_of = |parent: bool| {
            let v: Vec<f64> = rows
                .iter()
                .filter(|r| r.method == Method::Icmaxent && r.is_parent == parent)
                .map(|r| r.theta)
                .collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        gaps.push(mean_of(true) - mean_of(false));
    }
    let (mean, lower, _) = bootstrap_mean(&gaps, 1);
    assert!(lower > 0.0, "mean gap {mean}, lower bound {lower}");
}

#[test]
fn fixed_effect_parents_are_kept() {
    let template = Structure::A.graph().with_y_parents(VarSet::from_indices(&[1, 3])).unwrap();
    let mut cfg = ExperimentConfig::new(template, SELECTION_SAMPLES);
    cfg.n_graphs = 2;
    for row in run_setting1(&cfg).unwrap() {
        assert_eq!(row.is_parent, row.variable == VarId(1).to_string() || row.variable == VarId(3).to_string());
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let mut cfg = config(Structure::A, 0, 10);
    assert!(run_setting1(&cfg).is_err());
    cfg.n_graphs = 1;
    cfg.n_samples = 0;
    assert!(run_setting2(&cfg).is_err());
}
