//! Expectation constraints and the multiplier layout they induce.
//!
//! Each constraint contributes one multiplier per target configuration:
//!
//! * `Marginal`: a single target `E[f(Y, X_S)]` and a single multiplier.
//! * `Conditional`: one target `E[Y | x_S]` per configuration of `S`.
//! * `Interventional`: one target `E[Y | do(x_I), x_C]` per configuration of `I ∪ C`.
//!
//! Multipliers are laid out in declaration order, and within a constraint by the
//! configuration index over its scope (see [`crate::vars`]).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vars::{Config, VarSet};

/// A statistic `f(y, x_S)` stored as `values[config][y]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StatisticTable {
    scope: VarSet,
    values: Vec<[f64; 2]>,
}

impl StatisticTable {
    pub fn new(scope: VarSet, values: Vec<[f64; 2]>) -> Result<Self> {
        if values.len() != scope.n_configs() {
            return Err(Error::InvalidConstraint(format!(
                "statistic over {scope} needs {} rows, got {}",
                scope.n_configs(),
                values.len()
            )));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConstraint("statistic has a non-finite value".into()));
        }
        Ok(Self { scope, values })
    }

    /// `f(y, ·) = y`.
    pub fn identity_y() -> Self {
        Self { scope: VarSet::empty(), values: vec![[0.0, 1.0]] }
    }

    pub fn constant(c: f64) -> Self {
        Self { scope: VarSet::empty(), values: vec![[c, c]] }
    }

    pub fn scope(&self) -> &VarSet {
        &self.scope
    }

    pub fn values(&self) -> &[[f64; 2]] {
        &self.values
    }

    #[inline]
    pub fn value(&self, y: u8, config: usize) -> f64 {
        self.values[config][y as usize]
    }

    /// Evaluates at a full configuration of the causes.
    #[inline]
    pub fn at(&self, y: u8, x: usize) -> f64 {
        self.value(y, self.scope.project(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintKind {
    Marginal,
    Conditional,
    Interventional,
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstraintKind::Marginal => "marginal",
            ConstraintKind::Conditional => "conditional",
            ConstraintKind::Interventional => "interventional",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSpec {
    kind: ConstraintKind,
    statistic: StatisticTable,
    int_set: VarSet,
    cond_set: VarSet,
    scope: VarSet,
    targets: Vec<f64>,
}

impl ConstraintSpec {
    /// `E[f(Y, X_S)] = target`.
    pub fn marginal(statistic: StatisticTable, target: f64) -> Result<Self> {
        if !target.is_finite() {
            return Err(Error::InvalidConstraint(format!("marginal target {target} is not finite")));
        }
        Ok(Self {
            kind: ConstraintKind::Marginal,
            statistic,
            int_set: VarSet::empty(),
            cond_set: VarSet::empty(),
            scope: VarSet::empty(),
            targets: vec![target],
        })
    }

    /// `E[Y | x_S] = targets[config index of x_S]`.
    pub fn conditional(cond_set: VarSet, targets: Vec<f64>) -> Result<Self> {
        check_targets(&cond_set, &targets)?;
        Ok(Self {
            kind: ConstraintKind::Conditional,
            statistic: StatisticTable::identity_y(),
            int_set: VarSet::empty(),
            scope: cond_set.clone(),
            cond_set,
            targets,
        })
    }

    /// `E[Y | do(x_I), x_C] = targets[config index over I ∪ C]`.
    pub fn interventional(int_set: VarSet, cond_set: VarSet, targets: Vec<f64>) -> Result<Self> {
        if int_set.is_empty() {
            return Err(Error::InvalidConstraint("interventional constraint with no intervened variable".into()));
        }
        if !int_set.is_disjoint(&cond_set) {
            return Err(Error::InvalidConstraint(format!(
                "intervened set {int_set} overlaps conditioning set {cond_set}"
            )));
        }
        let scope = int_set.union(&cond_set);
        check_targets(&scope, &targets)?;
        Ok(Self {
            kind: ConstraintKind::Interventional,
            statistic: StatisticTable::identity_y(),
            int_set,
            cond_set,
            scope,
            targets,
        })
    }

    pub fn kind(&self) -> ConstraintKind {
        self.kind
    }

    pub fn statistic(&self) -> &StatisticTable {
        &self.statistic
    }

    pub fn int_set(&self) -> &VarSet {
        &self.int_set
    }

    pub fn cond_set(&self) -> &VarSet {
        &self.cond_set
    }

    /// Variables whose configuration selects the active multiplier; empty for marginals.
    pub fn scope(&self) -> &VarSet {
        &self.scope
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn n_targets(&self) -> usize {
        self.targets.len()
    }

    /// Every variable the constraint mentions.
    pub fn variables(&self) -> VarSet {
        self.scope.union(self.statistic.scope())
    }

    /// The configuration addressed by target `k`.
    pub fn target_config(&self, k: usize) -> Config {
        Config::from_index(self.scope.clone(), k)
    }

    /// Splits target `k` into its intervened and conditioning parts.
    pub fn split_target(&self, k: usize) -> (Config, Config) {
        let bits = self.scope.embed(k);
        (
            Config::from_index(self.int_set.clone(), self.int_set.project(bits)),
            Config::from_index(self.cond_set.clone(), self.cond_set.project(bits)),
        )
    }

    /// Index of the multiplier that is active at full configuration `x`.
    #[inline]
    pub fn active_config(&self, x: usize) -> usize {
        self.scope.project(x)
    }

    pub fn check_range(&self, n_causes: usize) -> Result<()> {
        match self.variables().max() {
            Some(v) if v.0 >= n_causes => Err(Error::InvalidConstraint(format!(
                "{} constraint mentions {v}, but there are only {n_causes} causes",
                self.kind
            ))),
            _ => Ok(()),
        }
    }

    /// Same constraint with new targets.
    pub fn with_targets(&self, targets: Vec<f64>) -> Result<Self> {
        match self.kind {
            ConstraintKind::Marginal => {
                if targets.len() != 1 {
                    return Err(Error::InvalidConstraint("marginal constraints take exactly one target".into()));
                }
                Self::marginal(self.statistic.clone(), targets[0])
            }
            ConstraintKind::Conditional => Self::conditional(self.cond_set.clone(), targets),
            ConstraintKind::Interventional => {
                Self::interventional(self.int_set.clone(), self.cond_set.clone(), targets)
            }
        }
    }
}

fn check_targets(scope: &VarSet, targets: &[f64]) -> Result<()> {
    if targets.len() != scope.n_configs() {
        return Err(Error::InvalidConstraint(format!(
            "constraint over {scope} needs {} targets, got {}",
            scope.n_configs(),
            targets.len()
        )));
    }
    if let Some(t) = targets.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::InvalidConstraint(format!("target {t} is not a probability")));
    }
    Ok(())
}

/// Offset of each constraint's first multiplier, plus the total count at the end.
pub fn multiplier_offsets(constraints: &[ConstraintSpec]) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(constraints.len() + 1);
    let mut acc = 0;
    offsets.push(0);
    for c in constraints {
        acc += c.n_targets();
        offsets.push(acc);
    }
    offsets
}

/// Lagrange multipliers, one per (constraint, target configuration).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiplierVector(Vec<f64>);

impl MultiplierVector {
    pub fn new(entries: Vec<f64>) -> Self {
        Self(entries)
    }

    pub fn zeros(constraints: &[ConstraintSpec]) -> Self {
        Self(vec![0.0; constraints.iter().map(ConstraintSpec::n_targets).sum()])
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}
