//! Which interventional constraints can be expressed through observational
//! quantities, given only the structure among the potential causes.
//!
//! A cause whose only possible child is `Y` can be intervened on, with every other
//! cause as a valid adjustment set. Confounding among the causes does not matter
//! because no latent variable reaches `Y`. For a set of intervened causes the rule
//! is applied jointly: no member may have a directed child outside the set.

use std::fmt;

use crate::constraint::{ConstraintKind, ConstraintSpec};
use crate::error::{Error, Result};
use crate::graph::GraphSpec;
use crate::vars::{VarId, VarSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reason {
    /// No intervened variable has a directed child among the remaining causes.
    NoDirectedChildren,
    /// `var` has the directed child `child` among the remaining causes.
    DirectedChild { var: VarId, child: VarId },
    /// Marginal and conditional constraints need no adjustment.
    Observational,
    OutOfRange(VarId),
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reason::NoDirectedChildren => f.write_str("no-directed-children"),
            Reason::DirectedChild { var, child } => write!(f, "directed-child:{var}->{child}"),
            Reason::Observational => f.write_str("observational"),
            Reason::OutOfRange(v) => write!(f, "out-of-range:{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentifiabilityVerdict {
    pub vars: VarSet,
    pub admissible: bool,
    /// All causes minus `vars` when admissible, empty otherwise.
    pub adjustment_set: VarSet,
    pub reason: Reason,
}

impl IdentifiabilityVerdict {
    pub fn into_result(self) -> Result<Self> {
        if self.admissible {
            Ok(self)
        } else {
            Err(Error::Identifiability { vars: self.vars.to_string(), reason: self.reason.to_string() })
        }
    }
}

pub fn intervenable(graph: &GraphSpec, j: VarId) -> Result<IdentifiabilityVerdict> {
    if j.0 >= graph.n_causes() {
        return Err(Error::Domain(format!("{j} is out of range for {} causes", graph.n_causes())));
    }
    intervenable_set(graph, &VarSet::from_unsorted([j]))
}

pub fn intervenable_set(graph: &GraphSpec, s: &VarSet) -> Result<IdentifiabilityVerdict> {
    if s.is_empty() {
        return Err(Error::Domain("cannot judge an intervention on no variables".into()));
    }
    if let Some(v) = s.iter().find(|v| v.0 >= graph.n_causes()) {
        return Err(Error::Domain(format!("{v} is out of range for {} causes", graph.n_causes())));
    }
    Ok(judge(graph, s))
}

fn judge(graph: &GraphSpec, s: &VarSet) -> IdentifiabilityVerdict {
    let blocking = graph.directed_edges().iter().find(|(a, b)| s.contains(*a) && !s.contains(*b));
    match blocking {
        Some(&(var, child)) => IdentifiabilityVerdict {
            vars: s.clone(),
            admissible: false,
            adjustment_set: VarSet::empty(),
            reason: Reason::DirectedChild { var, child },
        },
        None => IdentifiabilityVerdict {
            vars: s.clone(),
            admissible: true,
            adjustment_set: s.complement(graph.n_causes()),
            reason: Reason::NoDirectedChildren,
        },
    }
}

/// One verdict per constraint. Never fails; problems are carried by the verdicts.
pub fn validate_constraints(graph: &GraphSpec, constraints: &[ConstraintSpec]) -> Vec<IdentifiabilityVerdict> {
    constraints
        .iter()
        .map(|c| match c.kind() {
            ConstraintKind::Marginal | ConstraintKind::Conditional => IdentifiabilityVerdict {
                vars: VarSet::empty(),
                admissible: true,
                adjustment_set: graph.causes(),
                reason: Reason::Observational,
            },
            ConstraintKind::Interventional => match c.int_set().iter().find(|v| v.0 >= graph.n_causes()) {
                Some(v) => IdentifiabilityVerdict {
                    vars: c.int_set().clone(),
                    admissible: false,
                    adjustment_set: VarSet::empty(),
                    reason: Reason::OutOfRange(v),
                },
                None => judge(graph, c.int_set()),
            },
        })
        .collect()
}

/// Fails on the first inadmissible constraint.
pub fn require_admissible(graph: &GraphSpec, constraints: &[ConstraintSpec]) -> Result<()> {
    for verdict in validate_constraints(graph, constraints) {
        verdict.into_result()?;
    }
    Ok(())
}
