//! Text formats: JSON documents for graphs, constraints, tables and fitted models,
//! CSV for datasets.
//!
//! Causes are referenced as `X1..XD` everywhere except in graph files, which name
//! their causes freely; the `k`-th listed name is `Xk`. Configuration keys are
//! bitstrings over the referenced set in ascending variable order, first character
//! first variable. Syntax and type errors carry line and column; semantic errors name the
//! offending item.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::constraint::{ConstraintKind, ConstraintSpec, MultiplierVector, StatisticTable};
use crate::error::{Error, Result};
use crate::graph::GraphSpec;
use crate::joint::JointTable;
use crate::model::ConditionalModel;
use crate::solver::FitReport;
use crate::synth::Dataset;
use crate::vars::{index_to_bitstring, parse_bitstring, Config, VarId, VarSet};

fn json_error(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents hold only finite numbers and strings");
    s.push('\n');
    s
}

/// Parses `Xk` (one-based), up to the cause ceiling.
pub fn parse_var(name: &str) -> Result<VarId> {
    name.strip_prefix('X')
        .and_then(|k| k.parse::<usize>().ok())
        .filter(|&k| (1..=crate::DEFAULT_MAX_CAUSES).contains(&k) && !name[1..].starts_with('0'))
        .map(|k| VarId(k - 1))
        .ok_or_else(|| Error::Parse(format!("{name:?} is not a cause name like X1")))
}

fn parse_set(names: &[String]) -> Result<VarSet> {
    let vars: Vec<VarId> = names.iter().map(|n| parse_var(n)).collect::<Result<_>>()?;
    let set = VarSet::from_unsorted(vars.iter().copied());
    if set.len() != vars.len() {
        return Err(Error::Parse(format!("variable list {names:?} has duplicates")));
    }
    Ok(set)
}

fn set_names(set: &VarSet) -> Vec<String> {
    set.iter().map(|v| v.to_string()).collect()
}

// ---- graphs ----

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    causes: Vec<String>,
    #[serde(default)]
    directed_edges: Vec<[String; 2]>,
    #[serde(default)]
    confounders: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    y_parents: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(try_from = "RawGraph")]
struct GraphDoc(GraphSpec);

impl TryFrom<RawGraph> for GraphDoc {
    type Error = Error;

    fn try_from(raw: RawGraph) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, name) in raw.causes.iter().enumerate() {
            if name.is_empty() || index.insert(name.as_str(), VarId(i)).is_some() {
                return Err(Error::Parse(format!("cause name {name:?} is empty or repeated")));
            }
        }
        let lookup = |n: &String| {
            index.get(n.as_str()).copied().ok_or_else(|| Error::Parse(format!("unknown cause {n:?}")))
        };
        let pairs = |list: &[[String; 2]]| -> Result<Vec<(VarId, VarId)>> {
            list.iter().map(|[a, b]| Ok((lookup(a)?, lookup(b)?))).collect()
        };
        let y_parents = match &raw.y_parents {
            Some(names) => {
                let vars: Vec<VarId> = names.iter().map(lookup).collect::<Result<_>>()?;
                Some(VarSet::from_unsorted(vars))
            }
            None => None,
        };
        GraphSpec::new(raw.causes.len(), pairs(&raw.directed_edges)?, pairs(&raw.confounders)?, y_parents).map(GraphDoc)
    }
}

pub fn parse_graph(text: &str) -> Result<GraphSpec> {
    serde_json::from_str::<GraphDoc>(text).map(|d| d.0).map_err(json_error)
}

/// Writes the graph with causes named `X1..XD`.
pub fn graph_to_string(graph: &GraphSpec) -> String {
    let pair = |&(a, b): &(VarId, VarId)| [a.to_string(), b.to_string()];
    to_json(&RawGraph {
        causes: (0..graph.n_causes()).map(|i| VarId(i).to_string()).collect(),
        directed_edges: graph.directed_edges().iter().map(pair).collect(),
        confounders: graph.confounders().iter().map(pair).collect(),
        y_parents: graph.y_parents().map(set_names),
    })
}

// ---- constraints ----

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStatistic {
    scope: Vec<String>,
    /// `[f(0, x_S), f(1, x_S)]` per bitstring over the scope.
    values: BTreeMap<String, [f64; 2]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstraint {
    kind: ConstraintKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    int_set: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    cond_set: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    statistic: Option<RawStatistic>,
    targets: BTreeMap<String, f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstraintSet {
    n_causes: usize,
    constraints: Vec<RawConstraint>,
}

/// A constraint list together with the number of causes it is posed over.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    pub n_causes: usize,
    pub constraints: Vec<ConstraintSpec>,
}

#[derive(Deserialize)]
#[serde(try_from = "RawConstraintSet")]
struct ConstraintDoc(ConstraintSet);

/// Dense values from a bitstring-keyed map that must cover `scope` exactly.
fn dense<T: Copy>(scope: &VarSet, map: &BTreeMap<String, T>, what: &str) -> Result<Vec<T>> {
    let mut out: Vec<Option<T>> = vec![None; scope.n_configs()];
    for (key, &value) in map {
        let bits = parse_bitstring(key)?;
        if bits.len() != scope.len() {
            return Err(Error::Parse(format!("{what} key {key:?} does not have one bit per variable of {scope}")));
        }
        let k = Config::new(scope.clone(), &bits)?.index();
        out[k] = Some(value);
    }
    out.into_iter()
        .enumerate()
        .map(|(k, v)| {
            v.ok_or_else(|| Error::Parse(format!("{what} missing for {}", Config::from_index(scope.clone(), k))))
        })
        .collect()
}

fn keyed<T: Copy>(scope: &VarSet, values: &[T]) -> BTreeMap<String, T> {
    values.iter().enumerate().map(|(k, &v)| (index_to_bitstring(k, scope.len()), v)).collect()
}

fn build_constraint(raw: &RawConstraint) -> Result<ConstraintSpec> {
    let int_set = parse_set(&raw.int_set)?;
    let cond_set = parse_set(&raw.cond_set)?;
    match raw.kind {
        ConstraintKind::Marginal => {
            if !int_set.is_empty() || !cond_set.is_empty() {
                return Err(Error::Parse("marginal constraints take no variable sets".into()));
            }
            let statistic = match &raw.statistic {
                Some(s) => {
                    let scope = parse_set(&s.scope)?;
                    let values = dense(&scope, &s.values, "statistic value")?;
                    StatisticTable::new(scope, values)?
                }
                None => StatisticTable::identity_y(),
            };
            let target = dense(&VarSet::empty(), &raw.targets, "target")?;
            ConstraintSpec::marginal(statistic, target[0])
        }
        ConstraintKind::Conditional | ConstraintKind::Interventional if raw.statistic.is_some() => {
            Err(Error::Parse(format!("{} constraints take no statistic", raw.kind)))
        }
        ConstraintKind::Conditional => {
            if !int_set.is_empty() {
                return Err(Error::Parse("conditional constraints take no int_set".into()));
            }
            ConstraintSpec::conditional(cond_set.clone(), dense(&cond_set, &raw.targets, "target")?)
        }
        ConstraintKind::Interventional => {
            if !int_set.is_disjoint(&cond_set) {
                return Err(Error::Parse(format!("int_set {int_set} and cond_set {cond_set} overlap")));
            }
            let scope = int_set.union(&cond_set);
            ConstraintSpec::interventional(int_set, cond_set, dense(&scope, &raw.targets, "target")?)
        }
    }
}

impl TryFrom<RawConstraintSet> for ConstraintDoc {
    type Error = Error;

    fn try_from(raw: RawConstraintSet) -> Result<Self> {
        if raw.n_causes == 0 || raw.n_causes > crate::DEFAULT_MAX_CAUSES {
            return Err(Error::Parse(format!("n_causes {} is outside 1..={}", raw.n_causes, crate::DEFAULT_MAX_CAUSES)));
        }
        let mut constraints = Vec::with_capacity(raw.constraints.len());
        for (k, c) in raw.constraints.iter().enumerate() {
            let spec = build_constraint(c)
                .and_then(|s| s.check_range(raw.n_causes).map(|_| s))
                .map_err(|e| Error::Parse(format!("constraint {k}: {e}")))?;
            constraints.push(spec);
        }
        Ok(ConstraintDoc(ConstraintSet { n_causes: raw.n_causes, constraints }))
    }
}

fn raw_constraint(c: &ConstraintSpec) -> RawConstraint {
    let statistic = (c.kind() == ConstraintKind::Marginal && c.statistic() != &StatisticTable::identity_y()).then(|| {
        RawStatistic { scope: set_names(c.statistic().scope()), values: keyed(c.statistic().scope(), c.statistic().values()) }
    });
    RawConstraint {
        kind: c.kind(),
        int_set: set_names(c.int_set()),
        cond_set: set_names(c.cond_set()),
        statistic,
        targets: keyed(c.scope(), c.targets()),
    }
}

pub fn parse_constraints(text: &str) -> Result<ConstraintSet> {
    serde_json::from_str::<ConstraintDoc>(text).map(|d| d.0).map_err(json_error)
}

pub fn constraints_to_string(n_causes: usize, constraints: &[ConstraintSpec]) -> String {
    to_json(&RawConstraintSet { n_causes, constraints: constraints.iter().map(raw_constraint).collect() })
}

// ---- tables ----

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJoint {
    n_causes: usize,
    probs: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(try_from = "RawJoint")]
struct JointDoc(JointTable);

impl TryFrom<RawJoint> for JointDoc {
    type Error = Error;

    fn try_from(raw: RawJoint) -> Result<Self> {
        JointTable::new(raw.n_causes, raw.probs).map(JointDoc)
    }
}

/// `{"n_causes": D, "probs": [...]}` with `probs[x]` for configuration index `x`.
pub fn parse_joint(text: &str) -> Result<JointTable> {
    serde_json::from_str::<JointDoc>(text).map(|d| d.0).map_err(json_error)
}

pub fn joint_to_string(p: &JointTable) -> String {
    to_json(&RawJoint { n_causes: p.n_vars(), probs: p.probs().to_vec() })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMarginals {
    marginals: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(try_from = "RawMarginals")]
struct MarginalsDoc(Vec<f64>);

impl TryFrom<RawMarginals> for MarginalsDoc {
    type Error = Error;

    fn try_from(raw: RawMarginals) -> Result<Self> {
        if raw.marginals.is_empty() || raw.marginals.len() > crate::DEFAULT_MAX_CAUSES {
            return Err(Error::Parse(format!("{} marginals given", raw.marginals.len())));
        }
        if let Some(p) = raw.marginals.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
            return Err(Error::Parse(format!("marginal {p} is not in (0, 1)")));
        }
        Ok(MarginalsDoc(raw.marginals))
    }
}

/// `{"marginals": [P(X1=1), ...]}`.
pub fn parse_marginals(text: &str) -> Result<Vec<f64>> {
    serde_json::from_str::<MarginalsDoc>(text).map(|d| d.0).map_err(json_error)
}

pub fn marginals_to_string(p_one: &[f64]) -> String {
    to_json(&RawMarginals { marginals: p_one.to_vec() })
}

// ---- models ----

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMultiplier {
    constraint: usize,
    config: String,
    value: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    n_causes: usize,
    constraints: Vec<RawConstraint>,
    lambda: Vec<RawMultiplier>,
    /// `β(x)` per configuration index.
    beta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    report: Option<FitReport>,
}

/// A fitted model as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub model: ConditionalModel,
    pub report: Option<FitReport>,
}

#[derive(Deserialize)]
#[serde(try_from = "RawModel")]
struct ModelDoc(ModelFile);

impl TryFrom<RawModel> for ModelDoc {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        let ConstraintDoc(set) =
            ConstraintDoc::try_from(RawConstraintSet { n_causes: raw.n_causes, constraints: raw.constraints })?;
        let offsets = crate::constraint::multiplier_offsets(&set.constraints);
        let mut lambda: Vec<Option<f64>> = vec![None; *offsets.last().expect("offsets are non-empty")];
        for m in &raw.lambda {
            let c = set
                .constraints
                .get(m.constraint)
                .ok_or_else(|| Error::Parse(format!("multiplier refers to missing constraint {}", m.constraint)))?;
            let bits = parse_bitstring(&m.config)?;
            if bits.len() != c.scope().len() {
                return Err(Error::Parse(format!("multiplier config {:?} does not fit {}", m.config, c.scope())));
            }
            let slot = &mut lambda[offsets[m.constraint] + Config::new(c.scope().clone(), &bits)?.index()];
            if slot.replace(m.value).is_some() {
                return Err(Error::Parse(format!("multiplier ({}, {:?}) is repeated", m.constraint, m.config)));
            }
        }
        let lambda: Vec<f64> = lambda
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| Error::Parse(format!("multiplier {i} is missing"))))
            .collect::<Result<_>>()?;
        let model = ConditionalModel::normalize(set.n_causes, set.constraints, MultiplierVector::new(lambda))?;
        let beta = model.log_norm().expect("normalized");
        if beta.len() != raw.beta.len()
            || beta.iter().zip(&raw.beta).any(|(a, b)| (a - b).abs() > 1e-9 * a.abs().max(1.0))
        {
            return Err(Error::Parse("beta table does not match the multipliers".into()));
        }
        Ok(ModelDoc(ModelFile { model, report: raw.report }))
    }
}

/// Reads a model; `β` is recomputed from the multipliers and must agree with the file.
pub fn parse_model(text: &str) -> Result<ModelFile> {
    serde_json::from_str::<ModelDoc>(text).map(|d| d.0).map_err(json_error)
}

pub fn model_to_string(model: &ConditionalModel, report: Option<&FitReport>) -> Result<String> {
    let beta = model
        .log_norm()
        .ok_or_else(|| Error::InvalidModel("only normalized models can be written".into()))?
        .to_vec();
    let mut lambda = Vec::with_capacity(model.lambda().len());
    for (k, c) in model.constraints().iter().enumerate() {
        for (t, &value) in model.multipliers_of(k).iter().enumerate() {
            lambda.push(RawMultiplier { constraint: k, config: index_to_bitstring(t, c.scope().len()), value });
        }
    }
    Ok(to_json(&RawModel {
        n_causes: model.n_causes(),
        constraints: model.constraints().iter().map(raw_constraint).collect(),
        lambda,
        beta,
        report: report.cloned(),
    }))
}

// ---- datasets ----

const DO_PREFIX: &str = "#do ";

/// CSV with header `X1,..,XD,Y`. A clamped run starts with a line
/// `#do X2=1,X4=0` before the header.
pub fn parse_dataset(text: &str) -> Result<Dataset> {
    let (intervention_line, body, offset) = match text.strip_prefix(DO_PREFIX) {
        Some(rest) => {
            let (line, body) = rest.split_once('\n').unwrap_or((rest, ""));
            (Some(line.trim_end_matches('\r')), body, 1)
        }
        None => (None, text, 0),
    };
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
    let headers = reader.headers().map_err(|e| Error::Parse(format!("line {}: {e}", 1 + offset)))?.clone();
    let width = headers.len();
    if width < 2 || headers.get(width - 1) != Some("Y") {
        return Err(Error::Parse(format!("line {}: header must be X1,..,XD,Y", 1 + offset)));
    }
    let n_causes = width - 1;
    for (i, h) in headers.iter().take(n_causes).enumerate() {
        if h != VarId(i).to_string() {
            return Err(Error::Parse(format!("line {}: column {} is {h:?}, expected {}", 1 + offset, i + 1, VarId(i))));
        }
    }
    if n_causes > crate::DEFAULT_MAX_CAUSES {
        return Err(Error::Capacity { n_causes, ceiling: crate::DEFAULT_MAX_CAUSES });
    }
    let intervention = intervention_line.map(|l| parse_intervention(l, n_causes)).transpose()?;

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse(format!("{e}")))?;
        let line = record.position().map_or(0, |p| p.line()) as usize + offset;
        for (col, field) in record.iter().enumerate() {
            match field {
                "0" => rows.push(0),
                "1" => rows.push(1),
                other => {
                    return Err(Error::Parse(format!("line {line}, column {}: {other:?} is not 0 or 1", col + 1)))
                }
            }
        }
    }
    Dataset::new(n_causes, rows, intervention).map_err(|e| Error::Parse(e.to_string()))
}

fn parse_intervention(line: &str, n_causes: usize) -> Result<Config> {
    let mut pairs = Vec::new();
    for part in line.split(',') {
        let (name, value) =
            part.trim().split_once('=').ok_or_else(|| Error::Parse(format!("line 1: bad intervention {part:?}")))?;
        let v = parse_var(name.trim())?;
        if v.0 >= n_causes {
            return Err(Error::Parse(format!("line 1: {v} is not a column")));
        }
        let value = match value.trim() {
            "0" => 0,
            "1" => 1,
            other => return Err(Error::Parse(format!("line 1: {other:?} is not 0 or 1"))),
        };
        pairs.push((v, value));
    }
    pairs.sort();
    let vars = VarSet::new(pairs.iter().map(|p| p.0).collect())
        .map_err(|_| Error::Parse("line 1: intervention repeats a variable".into()))?;
    Config::new(vars, &pairs.iter().map(|p| p.1).collect::<Vec<_>>())
}

pub fn dataset_to_string(ds: &Dataset) -> String {
    let mut out = String::new();
    if let Some(c) = ds.intervention() {
        let parts: Vec<String> = c.vars().iter().zip(c.values()).map(|(v, x)| format!("{v}={x}")).collect();
        out.push_str(DO_PREFIX);
        out.push_str(&parts.join(","));
        out.push('\n');
    }
    out.push_str(&ds.columns().join(","));
    out.push('\n');
    for row in ds.rows() {
        let cells: Vec<&str> = row.iter().map(|&b| if b == 1 { "1" } else { "0" }).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
