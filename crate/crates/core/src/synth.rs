//! Synthetic ground truth: three-level SCMs (latents, causes, effect), ancestral
//! sampling, empirical averages and exact oracle queries.
//!
//! Nodes are laid out as `[latents.., causes.., Y]`. Each latent is a root whose
//! children are one clique of confounded causes. A node's CPT lists `P(node = 1)`
//! for every configuration of its parents, with bit `k` of the parent index holding
//! the `k`-th parent in node order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constraint::{ConstraintSpec, StatisticTable};
use crate::error::{Error, Result};
use crate::graph::GraphSpec;
use crate::joint::JointTable;
use crate::vars::{Config, VarId, VarSet};

pub const CPT_LOW: f64 = 0.1;
pub const CPT_HIGH: f64 = 0.9;

/// Mixes stream identifiers into a base seed (splitmix64 finalizer per step).
pub fn derive_seed(seed: u64, streams: &[u64]) -> u64 {
    let mut z = seed;
    for &s in streams {
        z = mix(z ^ mix(s.wrapping_add(0x9E37_79B9_7F4A_7C15)));
    }
    z
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
struct Node {
    parents: Vec<usize>,
    p_one: Vec<f64>,
}

impl Node {
    fn p_one_at(&self, values: &[u8]) -> f64 {
        let mut idx = 0;
        for (k, &p) in self.parents.iter().enumerate() {
            idx |= (values[p] as usize) << k;
        }
        self.p_one[idx]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScmInstance {
    graph: GraphSpec,
    latents: Vec<VarSet>,
    nodes: Vec<Node>,
    order: Vec<usize>,
}

impl ScmInstance {
    /// Builds an SCM from explicit CPTs, one per node in `[latents.., causes.., Y]`
    /// order. `graph` must carry the effect's parents.
    pub fn from_cpts(graph: GraphSpec, cpts: Vec<Vec<f64>>) -> Result<Self> {
        let y_parents = graph
            .y_parents()
            .ok_or_else(|| Error::InvalidGraph("an SCM needs the effect's parents".into()))?
            .clone();
        let latents = graph.latent_groups();
        let l = latents.len();
        let d = graph.n_causes();
        let mut parents: Vec<Vec<usize>> = vec![Vec::new(); l];
        for i in 0..d {
            let mut p: Vec<usize> = latents
                .iter()
                .enumerate()
                .filter(|(_, g)| g.contains(VarId(i)))
                .map(|(u, _)| u)
                .collect();
            p.extend(graph.parents(VarId(i)).iter().map(|v| l + v.0));
            parents.push(p);
        }
        parents.push(y_parents.iter().map(|v| l + v.0).collect());

        if cpts.len() != parents.len() {
            return Err(Error::InvalidModel(format!("{} CPTs given for {} nodes", cpts.len(), parents.len())));
        }
        let mut nodes = Vec::with_capacity(parents.len());
        for (k, (parents, p_one)) in parents.into_iter().zip(cpts).enumerate() {
            if p_one.len() != 1 << parents.len() {
                return Err(Error::InvalidModel(format!(
                    "node {k} has {} parents but {} CPT entries",
                    parents.len(),
                    p_one.len()
                )));
            }
            if let Some(p) = p_one.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
                return Err(Error::InvalidModel(format!("CPT entry {p} of node {k} is not in (0, 1)")));
            }
            nodes.push(Node { parents, p_one });
        }
        let mut order: Vec<usize> = (0..l).collect();
        order.extend(graph.topological_order().expect("graph is acyclic").into_iter().map(|v| l + v.0));
        order.push(l + d);
        Ok(Self { graph, latents, nodes, order })
    }

    pub fn graph(&self) -> &GraphSpec {
        &self.graph
    }

    pub fn n_causes(&self) -> usize {
        self.graph.n_causes()
    }

    pub fn y_parents(&self) -> &VarSet {
        self.graph.y_parents().expect("checked at construction")
    }

    pub fn latents(&self) -> &[VarSet] {
        &self.latents
    }

    fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    fn cause_node(&self, v: VarId) -> usize {
        self.latents.len() + v.0
    }

    fn y_node(&self) -> usize {
        self.n_nodes() - 1
    }

    /// `P(node = 1 | parents)` tables in node order.
    pub fn cpts(&self) -> Vec<&[f64]> {
        self.nodes.iter().map(|n| n.p_one.as_slice()).collect()
    }

    fn check_config(&self, c: &Config) -> Result<()> {
        match c.vars().max() {
            Some(v) if v.0 >= self.n_causes() => {
                Err(Error::Domain(format!("{v} is out of range for {} causes", self.n_causes())))
            }
            _ => Ok(()),
        }
    }

    /// Draws `n` records. Intervened causes are clamped and their CPTs ignored;
    /// latents are sampled and dropped.
    pub fn ancestral_sample(&self, n: usize, intervention: Option<&Config>, seed: u64) -> Result<Dataset> {
        if n == 0 {
            return Err(Error::Domain("sample size must be at least 1".into()));
        }
        let clamp = self.clamp_table(intervention)?;
        let d = self.n_causes();
        let l = self.latents.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut values = vec![0u8; self.n_nodes()];
        let mut rows = Vec::with_capacity(n * (d + 1));
        for _ in 0..n {
            for &k in &self.order {
                values[k] = match clamp[k] {
                    Some(v) => v,
                    None => u8::from(rng.gen::<f64>() < self.nodes[k].p_one_at(&values)),
                };
            }
            rows.extend_from_slice(&values[l..]);
        }
        Dataset::new(d, rows, intervention.cloned())
    }

    fn clamp_table(&self, intervention: Option<&Config>) -> Result<Vec<Option<u8>>> {
        let mut clamp = vec![None; self.n_nodes()];
        if let Some(c) = intervention {
            self.check_config(c)?;
            for (v, val) in c.vars().iter().zip(c.values()) {
                clamp[self.cause_node(v)] = Some(val);
            }
        }
        Ok(clamp)
    }

    /// Joint over all nodes under the truncated factorization for `intervention`.
    fn node_joint(&self, intervention: Option<&Config>) -> Result<Vec<f64>> {
        let clamp = self.clamp_table(intervention)?;
        let n = self.n_nodes();
        let mut values = vec![0u8; n];
        let mut out = vec![0.0; 1 << n];
        for (z, slot) in out.iter_mut().enumerate() {
            let mut prob = 1.0;
            for k in 0..n {
                values[k] = ((z >> k) & 1) as u8;
            }
            for k in 0..n {
                prob *= match clamp[k] {
                    Some(v) => f64::from(u8::from(values[k] == v)),
                    None => {
                        let p = self.nodes[k].p_one_at(&values);
                        if values[k] == 1 {
                            p
                        } else {
                            1.0 - p
                        }
                    }
                };
                if prob == 0.0 {
                    break;
                }
            }
            *slot = prob;
        }
        Ok(out)
    }

    /// Exact `P(X, Y)` as a table over `D + 1` variables, `Y` being variable `D`.
    pub fn exact_joint_xy(&self) -> Result<JointTable> {
        let l = self.latents.len();
        let full = self.node_joint(None)?;
        let mut out = vec![0.0; 1 << (self.n_causes() + 1)];
        for (z, p) in full.into_iter().enumerate() {
            out[z >> l] += p;
        }
        JointTable::new(self.n_causes() + 1, out)
    }

    /// Exact `P(X)` with the latents summed out.
    pub fn exact_joint_x(&self) -> Result<JointTable> {
        let xy = self.exact_joint_xy()?;
        Ok(xy.marginal(&VarSet::all(self.n_causes())))
    }

    /// Exact `P(Y = 1 | do(int), cond)` by enumeration of latents and causes.
    pub fn exact_query(&self, int: &Config, cond: &Config) -> Result<f64> {
        if !int.vars().is_disjoint(cond.vars()) {
            return Err(Error::Domain(format!("{} and {} overlap", int.vars(), cond.vars())));
        }
        self.check_config(cond)?;
        let intervention = if int.vars().is_empty() { None } else { Some(int) };
        let full = self.node_joint(intervention)?;
        let l = self.latents.len();
        let y_bit = self.y_node();
        let (mut num, mut den) = (0.0, 0.0);
        for (z, p) in full.into_iter().enumerate() {
            if cond.matches(z >> l) {
                den += p;
                if (z >> y_bit) & 1 == 1 {
                    num += p;
                }
            }
        }
        if den <= 0.0 {
            return Err(Error::Positivity { event: cond.to_string(), mass: den });
        }
        Ok(num / den)
    }
}

/// Samples CPT entries uniformly from `[0.1, 0.9)`. When the template carries no
/// effect parents, each cause is included with probability one half, redrawn until
/// at least one cause is in and one is out.
pub fn sample_scm(template: &GraphSpec, seed: u64) -> Result<ScmInstance> {
    let d = template.n_causes();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graph = match template.y_parents() {
        Some(_) => template.clone(),
        None => {
            if d < 2 {
                return Err(Error::InvalidGraph("drawing effect parents needs at least two causes".into()));
            }
            let parents = loop {
                let pick: Vec<VarId> = (0..d).filter(|_| rng.gen_bool(0.5)).map(VarId).collect();
                if !pick.is_empty() && pick.len() < d {
                    break VarSet::from_unsorted(pick);
                }
            };
            template.with_y_parents(parents)?
        }
    };
    let latents = graph.latent_groups();
    let mut sizes: Vec<usize> = vec![0; latents.len()];
    for i in 0..d {
        let n_latent = latents.iter().filter(|g| g.contains(VarId(i))).count();
        sizes.push(n_latent + graph.parents(VarId(i)).len());
    }
    sizes.push(graph.y_parents().map_or(0, VarSet::len));
    let cpts = sizes
        .into_iter()
        .map(|k| (0..1usize << k).map(|_| rng.gen_range(CPT_LOW..CPT_HIGH)).collect())
        .collect();
    ScmInstance::from_cpts(graph, cpts)
}

/// Binary records over the causes and `Y` (last column), with the intervention
/// that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n_causes: usize,
    rows: Vec<u8>,
    intervention: Option<Config>,
}

impl Dataset {
    pub fn new(n_causes: usize, rows: Vec<u8>, intervention: Option<Config>) -> Result<Self> {
        let width = n_causes + 1;
        if rows.len() % width != 0 {
            return Err(Error::Domain(format!("{} values do not form rows of width {width}", rows.len())));
        }
        if let Some(v) = rows.iter().find(|v| **v > 1) {
            return Err(Error::Domain(format!("non-binary value {v}")));
        }
        if let Some(c) = &intervention {
            if c.vars().max().is_some_and(|v| v.0 >= n_causes) {
                return Err(Error::Domain(format!("intervention {c} is out of range")));
            }
            for (r, row) in rows.chunks(width).enumerate() {
                if !c.matches(encode(&row[..n_causes])) {
                    return Err(Error::Domain(format!("row {r} violates the intervention {c}")));
                }
            }
        }
        Ok(Self { n_causes, rows, intervention })
    }

    pub fn n_causes(&self) -> usize {
        self.n_causes
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len() / (self.n_causes + 1)
    }

    pub fn intervention(&self) -> Option<&Config> {
        self.intervention.as_ref()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> {
        self.rows.chunks(self.n_causes + 1)
    }

    /// `(cause configuration index, y)` per row.
    pub fn records(&self) -> impl Iterator<Item = (usize, u8)> + '_ {
        self.rows().map(|r| (encode(&r[..self.n_causes]), r[self.n_causes]))
    }

    /// Column names `X1..XD, Y`.
    pub fn columns(&self) -> Vec<String> {
        (0..self.n_causes).map(|i| VarId(i).to_string()).chain(std::iter::once("Y".to_string())).collect()
    }
}

fn encode(bits: &[u8]) -> usize {
    bits.iter().enumerate().fold(0, |x, (k, &b)| x | (b as usize) << k)
}

/// The shape of a constraint whose targets are to be estimated from data.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintTemplate {
    Marginal(StatisticTable),
    Conditional(VarSet),
    Interventional { int_set: VarSet, cond_set: VarSet },
}

/// Sample means for `template`. Marginal and conditional templates read every
/// observational dataset; interventional templates read, for each configuration of
/// the intervened set, the one dataset clamped to it.
pub fn empirical_averages(datasets: &[&Dataset], template: &ConstraintTemplate) -> Result<ConstraintSpec> {
    match template {
        ConstraintTemplate::Marginal(stat) => {
            let (mut sum, mut n) = (0.0, 0usize);
            for ds in observational(datasets) {
                for (x, y) in ds.records() {
                    sum += stat.at(y, x);
                    n += 1;
                }
            }
            if n == 0 {
                return Err(Error::InsufficientData { config: "()".into() });
            }
            ConstraintSpec::marginal(stat.clone(), sum / n as f64)
        }
        ConstraintTemplate::Conditional(cond) => {
            let mut cells = vec![(0usize, 0usize); cond.n_configs()];
            for ds in observational(datasets) {
                tally(ds, cond, &mut cells);
            }
            ConstraintSpec::conditional(cond.clone(), means(cond, &cells)?)
        }
        ConstraintTemplate::Interventional { int_set, cond_set } => {
            let scope = int_set.union(cond_set);
            let mut cells = vec![(0usize, 0usize); scope.n_configs()];
            for t in 0..int_set.n_configs() {
                let target = Config::from_index(int_set.clone(), t);
                let ds = datasets
                    .iter()
                    .find(|ds| ds.intervention() == Some(&target))
                    .ok_or_else(|| Error::InsufficientData { config: format!("do{target}") })?;
                tally(ds, &scope, &mut cells);
            }
            ConstraintSpec::interventional(int_set.clone(), cond_set.clone(), means(&scope, &cells)?)
        }
    }
}

fn observational<'a>(datasets: &'a [&'a Dataset]) -> impl Iterator<Item = &'a Dataset> + 'a {
    datasets.iter().copied().filter(|ds| ds.intervention().is_none())
}

fn tally(ds: &Dataset, scope: &VarSet, cells: &mut [(usize, usize)]) {
    for (x, y) in ds.records() {
        let cell = &mut cells[scope.project(x)];
        cell.0 += y as usize;
        cell.1 += 1;
    }
}

fn means(scope: &VarSet, cells: &[(usize, usize)]) -> Result<Vec<f64>> {
    cells
        .iter()
        .enumerate()
        .map(|(k, &(ones, n))| {
            if n == 0 {
                Err(Error::InsufficientData { config: Config::from_index(scope.clone(), k).to_string() })
            } else {
                Ok(ones as f64 / n as f64)
            }
        })
        .collect()
}
