//! Binary conditional models `P(Y | X)` fitted by maximum entropy to observational
//! and interventional averages.
//!
//! All variables are binary. Variable `i` is bit `i` of a configuration index, and
//! dense tables over `D` causes hold `2^D` entries.

pub mod constraint;
pub mod error;
pub mod graph;
pub mod identify;
pub mod io;
pub mod joint;
pub mod model;
pub mod select;
pub mod solver;
pub mod synth;
pub mod vars;

pub use constraint::{ConstraintKind, ConstraintSpec, MultiplierVector, StatisticTable};
pub use error::{Error, Result};
pub use graph::{GraphSpec, Structure};
pub use identify::{IdentifiabilityVerdict, Reason};
pub use joint::JointTable;
pub use model::ConditionalModel;
pub use select::{roc, theta, RocCurve, ThetaScore};
pub use solver::{fit, Fit, FitReport, SolverOptions};
pub use synth::{Dataset, ScmInstance};
pub use vars::{Config, VarId, VarSet};

/// Largest number of causes a dense table may cover.
pub const DEFAULT_MAX_CAUSES: usize = 20;
