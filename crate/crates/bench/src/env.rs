//! What an experiment may observe about a data-generating process.

use icmaxent_core::{Config, Dataset, GraphSpec, JointTable, Result, ScmInstance, VarSet};

/// Access to a system under study. Pipelines fit from the observation methods and
/// read [`Environment::y_parents`] only when labelling finished scores.
pub trait Environment {
    /// Known structure among the causes, without the effect's parents.
    fn structure(&self) -> GraphSpec;
    fn observe(&self, n: usize, seed: u64) -> Result<Dataset>;
    fn intervene(&self, target: &Config, n: usize, seed: u64) -> Result<Dataset>;
    /// Exact `P(X)`.
    fn joint_x(&self) -> Result<JointTable>;
    /// Exact `P(Y = 1 | do(int), cond)`.
    fn query(&self, int: &Config, cond: &Config) -> Result<f64>;
    /// Ground-truth parents of the effect.
    fn y_parents(&self) -> VarSet;
}

impl Environment for ScmInstance {
    fn structure(&self) -> GraphSpec {
        self.graph().without_y_parents()
    }

    fn observe(&self, n: usize, seed: u64) -> Result<Dataset> {
        self.ancestral_sample(n, None, seed)
    }

    fn intervene(&self, target: &Config, n: usize, seed: u64) -> Result<Dataset> {
        self.ancestral_sample(n, Some(target), seed)
    }

    fn joint_x(&self) -> Result<JointTable> {
        self.exact_joint_x()
    }

    fn query(&self, int: &Config, cond: &Config) -> Result<f64> {
        self.exact_query(int, cond)
    }

    fn y_parents(&self) -> VarSet {
        ScmInstance::y_parents(self).clone()
    }
}
