//! The exponential-family conditional `P_λ(Y | x)` and its expectations.
//!
//! For a full configuration `x` of the causes the exponent of outcome `y` is the sum,
//! over constraints, of the active multiplier times the constraint's statistic at
//! `(y, x)`. A constraint's multiplier for configuration `c` is active at `x` when `x`
//! restricted to the constraint's scope equals `c`; marginal constraints have a single
//! always-active multiplier. The log-normalizer is `β(x) = -log Σ_y exp(exponent)`.
//!
//! Every expectation is an exact enumeration over the `2^D` configurations.

use crate::constraint::{multiplier_offsets, ConstraintSpec, MultiplierVector, StatisticTable};
use crate::error::{Error, Result};
use crate::graph::GraphSpec;
use crate::identify;
use crate::joint::JointTable;
use crate::solver::sigmoid;
use crate::vars::Config;

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalModel {
    n_causes: usize,
    constraints: Vec<ConstraintSpec>,
    offsets: Vec<usize>,
    lambda: MultiplierVector,
    log_norm: Option<Vec<f64>>,
}

impl ConditionalModel {
    /// A model whose normalizer has not been computed yet. Evaluation fails until
    /// [`ConditionalModel::normalized`] is called.
    pub fn unnormalized(n_causes: usize, constraints: Vec<ConstraintSpec>, lambda: MultiplierVector) -> Result<Self> {
        for c in &constraints {
            c.check_range(n_causes)?;
        }
        let offsets = multiplier_offsets(&constraints);
        let expected = *offsets.last().unwrap();
        if lambda.len() != expected {
            return Err(Error::InvalidModel(format!(
                "{} multipliers given for {expected} constraint targets",
                lambda.len()
            )));
        }
        if lambda.entries().iter().any(|l| !l.is_finite()) {
            return Err(Error::InvalidModel("non-finite multiplier".into()));
        }
        Ok(Self { n_causes, constraints, offsets, lambda, log_norm: None })
    }

    /// Builds the model and computes `β(x)` for every configuration, with the default
    /// ceiling on the number of causes.
    pub fn normalize(n_causes: usize, constraints: Vec<ConstraintSpec>, lambda: MultiplierVector) -> Result<Self> {
        Self::normalize_with_ceiling(n_causes, constraints, lambda, crate::DEFAULT_MAX_CAUSES)
    }

    pub fn normalize_with_ceiling(
        n_causes: usize,
        constraints: Vec<ConstraintSpec>,
        lambda: MultiplierVector,
        ceiling: usize,
    ) -> Result<Self> {
        if n_causes > ceiling {
            return Err(Error::Capacity { n_causes, ceiling });
        }
        Self::unnormalized(n_causes, constraints, lambda)?.normalized()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let beta = (0..1usize << self.n_causes)
            .map(|x| {
                let e0 = self.exponent(0, x);
                let e1 = self.exponent(1, x);
                let m = e0.max(e1);
                -(m + ((e0 - m).exp() + (e1 - m).exp()).ln())
            })
            .collect();
        self.log_norm = Some(beta);
        Ok(self)
    }

    pub fn n_causes(&self) -> usize {
        self.n_causes
    }

    pub fn constraints(&self) -> &[ConstraintSpec] {
        &self.constraints
    }

    pub fn lambda(&self) -> &MultiplierVector {
        &self.lambda
    }

    /// Multipliers of constraint `k`, one per target configuration.
    pub fn multipliers_of(&self, k: usize) -> &[f64] {
        &self.lambda.entries()[self.offsets[k]..self.offsets[k + 1]]
    }

    pub fn log_norm(&self) -> Option<&[f64]> {
        self.log_norm.as_deref()
    }

    /// `Σ_constraints λ_active · f(y, x)` at full configuration `x`.
    pub fn exponent(&self, y: u8, x: usize) -> f64 {
        self.constraints
            .iter()
            .enumerate()
            .map(|(k, c)| self.lambda.entries()[self.offsets[k] + c.active_config(x)] * c.statistic().at(y, x))
            .sum()
    }

    fn beta(&self) -> Result<&[f64]> {
        self.log_norm
            .as_deref()
            .ok_or_else(|| Error::InvalidModel("log-normalizer has not been computed".into()))
    }

    /// `P_λ(y | x)` at full configuration index `x`.
    pub fn prob(&self, y: u8, x: usize) -> Result<f64> {
        let beta = self.beta()?;
        if y > 1 {
            return Err(Error::Domain(format!("y = {y} is not binary")));
        }
        if x >= beta.len() {
            return Err(Error::Domain(format!("configuration {x} out of range")));
        }
        Ok(self.logistic(y, x))
    }

    /// `P_λ(y | x)` as a logistic in the exponent difference; agrees with
    /// `exp(exponent + β)` and is exact at zero difference.
    fn logistic(&self, y: u8, x: usize) -> f64 {
        sigmoid(self.exponent(y, x) - self.exponent(1 - y, x))
    }

    /// `P_λ(Y = 1 | x)` for a configuration of all causes.
    pub fn eval_conditional(&self, x: &Config) -> Result<f64> {
        if x.vars().len() != self.n_causes || x.vars().max().map_or(0, |v| v.0 + 1) != self.n_causes {
            return Err(Error::Domain(format!("{x} does not assign all {} causes", self.n_causes)));
        }
        self.prob(1, x.full_bits())
    }

    /// `P_λ(Y = 1 | x)` for every configuration, indexed densely.
    pub fn prob_table(&self) -> Result<Vec<f64>> {
        let beta = self.beta()?;
        Ok((0..beta.len()).map(|x| self.logistic(1, x)).collect())
    }

    fn check_joint(&self, p: &JointTable) -> Result<()> {
        if p.n_vars() != self.n_causes {
            return Err(Error::Domain(format!(
                "joint table over {} variables used with a model over {} causes",
                p.n_vars(),
                self.n_causes
            )));
        }
        Ok(())
    }

    /// `E[Y | x_S = c]`, where `S` is the variable set of `c`.
    pub fn conditional_expectation(&self, p: &JointTable, c: &Config) -> Result<f64> {
        self.check_joint(p)?;
        let table = self.prob_table()?;
        let comp = c.vars().complement(self.n_causes);
        let given = p.condition(c)?;
        let fixed = c.full_bits();
        Ok(given
            .probs()
            .iter()
            .enumerate()
            .map(|(r, w)| w * table[fixed | comp.embed(r)])
            .sum())
    }

    /// `E[Y | do(x_I), x_C]` after checking that the intervention is identifiable in
    /// `graph`. See [`ConditionalModel::adjusted_expectation`].
    pub fn interventional_expectation(
        &self,
        p: &JointTable,
        graph: &GraphSpec,
        int: &Config,
        cond: &Config,
    ) -> Result<f64> {
        if graph.n_causes() != self.n_causes {
            return Err(Error::Domain("graph and model disagree on the number of causes".into()));
        }
        identify::intervenable_set(graph, int.vars())?.into_result()?;
        self.adjusted_expectation(p, int, cond)
    }

    /// Adjustment over the remaining causes `R`:
    /// `Σ_{x_R} P_λ(Y=1 | x_I, x_C, x_R) P(x_R | x_C)`.
    ///
    /// Does not consult the identifiability gate.
    pub fn adjusted_expectation(&self, p: &JointTable, int: &Config, cond: &Config) -> Result<f64> {
        self.check_joint(p)?;
        if int.vars().is_empty() {
            return Err(Error::Domain("interventional expectation with no intervened variable".into()));
        }
        if !int.vars().is_disjoint(cond.vars()) {
            return Err(Error::Domain(format!("{int} and {cond} overlap")));
        }
        let scope = int.vars().union(cond.vars());
        if scope.max().is_some_and(|v| v.0 >= self.n_causes) {
            return Err(Error::Domain(format!("{int} {cond} is out of range")));
        }
        let table = self.prob_table()?;
        let rest = scope.complement(self.n_causes);
        let mut weights = vec![0.0; rest.n_configs()];
        for (x, &px) in p.probs().iter().enumerate() {
            if cond.matches(x) {
                weights[rest.project(x)] += px;
            }
        }
        let mass: f64 = weights.iter().sum();
        if mass <= 0.0 {
            return Err(Error::Positivity { event: cond.to_string(), mass });
        }
        let fixed = int.full_bits() | cond.full_bits();
        let total: f64 = weights.iter().enumerate().map(|(r, w)| w * table[fixed | rest.embed(r)]).sum();
        Ok(total / mass)
    }

    /// `Σ_{y,x} P_λ(y | x) P(x) f(y, x_S)`.
    pub fn marginal_expectation(&self, p: &JointTable, statistic: &StatisticTable) -> Result<f64> {
        self.check_joint(p)?;
        if statistic.scope().max().is_some_and(|v| v.0 >= self.n_causes) {
            return Err(Error::Domain("statistic scope out of range".into()));
        }
        let mut total = 0.0;
        for (x, &px) in p.probs().iter().enumerate() {
            for y in 0..2u8 {
                total += self.prob(y, x)? * px * statistic.at(y, x);
            }
        }
        Ok(total)
    }

    /// `H(Y | X)` in nats; outcomes with zero probability contribute nothing.
    pub fn conditional_entropy(&self, p: &JointTable) -> Result<f64> {
        self.check_joint(p)?;
        let beta = self.beta()?;
        let mut h = 0.0;
        for (x, &px) in p.probs().iter().enumerate() {
            for y in 0..2u8 {
                let log_p = self.exponent(y, x) + beta[x];
                let prob = log_p.exp();
                if prob > 0.0 {
                    h -= px * prob * log_p;
                }
            }
        }
        Ok(h)
    }

    /// Expectation of constraint `k`'s statistic at its target `t`, gated by `graph`
    /// for interventional constraints unless `graph` is `None`.
    pub fn constraint_expectation(
        &self,
        p: &JointTable,
        graph: Option<&GraphSpec>,
        k: usize,
        t: usize,
    ) -> Result<f64> {
        let c = &self.constraints[k];
        match c.kind() {
            crate::ConstraintKind::Marginal => self.marginal_expectation(p, c.statistic()),
            crate::ConstraintKind::Conditional => self.conditional_expectation(p, &c.target_config(t)),
            crate::ConstraintKind::Interventional => {
                let (int, cond) = c.split_target(t);
                match graph {
                    Some(g) => self.interventional_expectation(p, g, &int, &cond),
                    None => self.adjusted_expectation(p, &int, &cond),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Structure;
    use crate::vars::{VarId, VarSet};

    fn cond1(var: usize, targets: [f64; 2]) -> ConstraintSpec {
        ConstraintSpec::conditional(VarSet::from_indices(&[var]), targets.to_vec()).unwrap()
    }

    /// A model that reproduces an arbitrary `P(Y=1|x)` table through one conditional
    /// constraint on all causes.
    fn table_model(table: &[f64]) -> ConditionalModel {
        let n = table.len().trailing_zeros() as usize;
        let c = ConstraintSpec::conditional(VarSet::all(n), vec![0.5; table.len()]).unwrap();
        let lambda = table.iter().map(|p| (p / (1.0 - p)).ln()).collect();
        ConditionalModel::normalize(n, vec![c], MultiplierVector::new(lambda)).unwrap()
    }

    #[test]
    fn zero_multipliers_give_one_half() {
        let cs = vec![cond1(0, [0.3, 0.7]), cond1(1, [0.3, 0.7])];
        let m = ConditionalModel::normalize(2, cs.clone(), MultiplierVector::zeros(&cs)).unwrap();
        for x in 0..4 {
            assert!((m.eval_conditional(&Config::full(2, x)).unwrap() - 0.5).abs() < 1e-15);
            assert!((m.log_norm().unwrap()[x] + 2f64.ln()).abs() < 1e-15);
        }
    }

    #[test]
    fn single_marginal_multiplier_is_a_logistic() {
        let c = ConstraintSpec::marginal(StatisticTable::identity_y(), 0.5).unwrap();
        let lambda = 0.8;
        let m = ConditionalModel::normalize(3, vec![c.clone()], MultiplierVector::new(vec![lambda])).unwrap();
        let expected = lambda.exp() / (1.0 + lambda.exp());
        for x in 0..8 {
            assert!((m.eval_conditional(&Config::full(3, x)).unwrap() - expected).abs() < 1e-15);
        }
        let m1 = ConditionalModel::normalize(3, vec![c], MultiplierVector::new(vec![1.0])).unwrap();
        for &b in m1.log_norm().unwrap() {
            assert!((b + (1.0 + 1f64.exp()).ln()).abs() < 1e-15);
        }
    }

    #[test]
    fn two_conditionals_match_hand_formula() {
        let cs = vec![cond1(0, [0.5; 2]), cond1(1, [0.5; 2])];
        let lam = vec![0.3, -1.1, 0.7, 2.0];
        let m = ConditionalModel::normalize(2, cs, MultiplierVector::new(lam.clone())).unwrap();
        for x in 0..4usize {
            let a = lam[x & 1] + lam[2 + (x >> 1 & 1)];
            let brute = a.exp() / (1.0 + a.exp());
            assert!((m.eval_conditional(&Config::full(2, x)).unwrap() - brute).abs() < 1e-14);
        }
    }

    #[test]
    fn unnormalized_model_refuses_evaluation() {
        let cs = vec![cond1(0, [0.5; 2])];
        let m = ConditionalModel::unnormalized(1, cs, MultiplierVector::new(vec![0.0, 0.0])).unwrap();
        assert!(matches!(m.eval_conditional(&Config::full(1, 0)), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn capacity_and_length_checks() {
        assert!(matches!(
            ConditionalModel::normalize(21, vec![], MultiplierVector::new(vec![])),
            Err(Error::Capacity { .. })
        ));
        assert!(matches!(
            ConditionalModel::normalize_with_ceiling(4, vec![], MultiplierVector::new(vec![]), 3),
            Err(Error::Capacity { .. })
        ));
        assert!(ConditionalModel::normalize(1, vec![cond1(0, [0.5; 2])], MultiplierVector::new(vec![0.0])).is_err());
        assert!(ConditionalModel::normalize(1, vec![cond1(1, [0.5; 2])], MultiplierVector::new(vec![0.0; 2])).is_err());
    }

    #[test]
    fn normalization_holds_for_random_multipliers() {
        let cs = vec![
            ConstraintSpec::marginal(StatisticTable::new(VarSet::from_indices(&[2]), vec![[0.5, -1.0], [2.0, 0.3]]).unwrap(), 0.1)
                .unwrap(),
            cond1(0, [0.5; 2]),
            ConstraintSpec::interventional(VarSet::from_indices(&[1]), VarSet::from_indices(&[2]), vec![0.5; 4]).unwrap(),
        ];
        let lam = vec![1.3, -0.4, 2.2, 0.9, -3.0, 0.1, 4.5];
        let m = ConditionalModel::normalize(3, cs, MultiplierVector::new(lam)).unwrap();
        for x in 0..8 {
            let s = m.prob(0, x).unwrap() + m.prob(1, x).unwrap();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn expectations_on_the_independent_pair() {
        // P(Y=1|x) with x indexed x1 + 2 x2: (0,0) .1, (1,0) .5, (0,1) .3, (1,1) .9
        let m = table_model(&[0.1, 0.5, 0.3, 0.9]);
        let p = JointTable::product(&[0.4, 0.5]).unwrap();
        let x1 = Config::single(VarId(0), 1).unwrap();
        let e = m.conditional_expectation(&p, &x1).unwrap();
        assert!((e - 0.7).abs() < 1e-12);
        let two = GraphSpec::new(2, vec![], vec![(VarId(0), VarId(1))], None).unwrap();
        let d = m.interventional_expectation(&p, &two, &x1, &Config::empty()).unwrap();
        assert!((d - 0.7).abs() < 1e-12);
    }

    #[test]
    fn full_conditioning_set_is_direct_evaluation() {
        let m = table_model(&[0.2, 0.6, 0.35, 0.8]);
        let p = JointTable::new(2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        for x in 0..4 {
            let c = Config::full(2, x);
            let e = m.conditional_expectation(&p, &c).unwrap();
            assert!((e - m.eval_conditional(&c).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn single_cause_do_equals_conditioning() {
        let m = table_model(&[0.25, 0.65]);
        let p = JointTable::product(&[0.3]).unwrap();
        let g = GraphSpec::new(1, vec![], vec![], None).unwrap();
        for v in 0..2u8 {
            let c = Config::single(VarId(0), v).unwrap();
            let a = m.interventional_expectation(&p, &g, &c, &Config::empty()).unwrap();
            let b = m.conditional_expectation(&p, &c).unwrap();
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn gate_refuses_unidentifiable_intervention() {
        let m = table_model(&[0.5; 32]);
        let p = JointTable::uniform(5).unwrap();
        let x1 = Config::single(VarId(0), 1).unwrap();
        let err = m.interventional_expectation(&p, &Structure::C.graph(), &x1, &Config::empty()).unwrap_err();
        assert!(matches!(err, Error::Identifiability { .. }));
        assert!(m.adjusted_expectation(&p, &x1, &Config::empty()).is_ok());
    }

    #[test]
    fn marginal_expectation_basics() {
        let cs = vec![cond1(0, [0.5; 2])];
        let zero = ConditionalModel::normalize(2, cs.clone(), MultiplierVector::zeros(&cs)).unwrap();
        let p = JointTable::new(2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let one = zero.marginal_expectation(&p, &StatisticTable::constant(1.0)).unwrap();
        assert!((one - 1.0).abs() < 1e-14);
        let y = zero.marginal_expectation(&p, &StatisticTable::identity_y()).unwrap();
        assert!((y - 0.5).abs() < 1e-14);
    }

    #[test]
    fn entropy_extremes() {
        let cs = vec![cond1(0, [0.5; 2])];
        let p = JointTable::product(&[0.3]).unwrap();
        let zero = ConditionalModel::normalize(1, cs.clone(), MultiplierVector::zeros(&cs)).unwrap();
        assert!((zero.conditional_entropy(&p).unwrap() - 2f64.ln()).abs() < 1e-15);
        let det = ConditionalModel::normalize(1, cs, MultiplierVector::new(vec![-1000.0, 1000.0])).unwrap();
        assert_eq!(det.conditional_entropy(&p).unwrap(), 0.0);
        assert_eq!(det.eval_conditional(&Config::full(1, 1)).unwrap(), 1.0);
        assert_eq!(det.eval_conditional(&Config::full(1, 0)).unwrap(), 0.0);
    }

    #[test]
    fn larger_marginal_multiplier_raises_mean() {
        let stat = StatisticTable::identity_y();
        let c = ConstraintSpec::marginal(stat.clone(), 0.5).unwrap();
        let p = JointTable::new(2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let means: Vec<f64> = [-2.0, -0.5, 0.0, 0.4, 3.0]
            .iter()
            .map(|&l| {
                ConditionalModel::normalize(2, vec![c.clone()], MultiplierVector::new(vec![l]))
                    .unwrap()
                    .marginal_expectation(&p, &stat)
                    .unwrap()
            })
            .collect();
        assert!(means.windows(2).all(|w| w[1] > w[0]));
    }
}
