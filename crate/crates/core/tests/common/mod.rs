//! Brute-force reference computations and fixture generators shared by the
//! integration tests. Nothing here goes through the library's evaluation paths:
//! configurations are decoded bit by bit and every sum is written out directly.

#![allow(dead_code)]

use icmaxent_core::synth::{sample_scm, ScmInstance};
use icmaxent_core::{ConstraintKind, ConstraintSpec, GraphSpec, JointTable, MultiplierVector, VarId, VarSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn bit(x: usize, v: usize) -> u8 {
    ((x >> v) & 1) as u8
}

/// Index of `x` restricted to `vars` (ascending), first variable in bit 0.
pub fn sub_index(x: usize, vars: &[usize]) -> usize {
    let mut idx = 0;
    for (k, &v) in vars.iter().enumerate() {
        idx += (bit(x, v) as usize) * (1 << k);
    }
    idx
}

fn indices(set: &VarSet) -> Vec<usize> {
    set.iter().map(|v| v.0).collect()
}

/// `P_λ(Y = 1 | x)` from the exponential-family formula with explicit
/// normalization over both values of `Y`.
pub fn brute_p1(constraints: &[ConstraintSpec], lambda: &[f64], x: usize) -> f64 {
    let mut score = [0.0f64; 2];
    for (y, s) in score.iter_mut().enumerate() {
        let mut offset = 0;
        for c in constraints {
            let cfg = sub_index(x, &indices(c.scope()));
            let f = match c.kind() {
                ConstraintKind::Marginal => {
                    let stat = c.statistic();
                    stat.values()[sub_index(x, &indices(stat.scope()))][y]
                }
                _ => y as f64,
            };
            *s += lambda[offset + cfg] * f;
            offset += c.n_targets();
        }
    }
    let (e0, e1) = (score[0].exp(), score[1].exp());
    e1 / (e0 + e1)
}

pub fn brute_table(constraints: &[ConstraintSpec], lambda: &[f64], d: usize) -> Vec<f64> {
    (0..1usize << d).map(|x| brute_p1(constraints, lambda, x)).collect()
}

/// `P(Y=1 | cond)` from the joint `P(x) p1(x)`.
pub fn brute_conditional(p1: &[f64], px: &[f64], cond: &[(usize, u8)]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for x in 0..px.len() {
        if cond.iter().all(|&(v, val)| bit(x, v) == val) {
            num += px[x] * p1[x];
            den += px[x];
        }
    }
    num / den
}

/// `Σ_x P(x | cond) p1(x with int overwritten)`, which is the adjustment formula
/// written as an expectation over the observational conditional.
pub fn brute_adjusted(p1: &[f64], px: &[f64], int: &[(usize, u8)], cond: &[(usize, u8)]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for x in 0..px.len() {
        if cond.iter().all(|&(v, val)| bit(x, v) == val) {
            let mut z = x;
            for &(v, val) in int {
                z = (z & !(1 << v)) | ((val as usize) << v);
            }
            num += px[x] * p1[z];
            den += px[x];
        }
    }
    num / den
}

/// `Σ_{y,x} P(x) P(y|x) f(y, x)`.
pub fn brute_marginal(p1: &[f64], px: &[f64], f: impl Fn(u8, usize) -> f64) -> f64 {
    (0..px.len()).map(|x| px[x] * ((1.0 - p1[x]) * f(0, x) + p1[x] * f(1, x))).sum()
}

pub fn brute_entropy(p1: &[f64], px: &[f64]) -> f64 {
    let h = |p: f64| if p > 0.0 { -p * p.ln() } else { 0.0 };
    (0..px.len()).map(|x| px[x] * (h(p1[x]) + h(1.0 - p1[x]))).sum()
}

pub fn random_joint(rng: &mut impl Rng, d: usize) -> JointTable {
    let w: Vec<f64> = (0..1usize << d).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    JointTable::new(d, w.into_iter().map(|v| v / s).collect()).unwrap()
}

pub fn random_subset(rng: &mut impl Rng, d: usize) -> Vec<usize> {
    (0..d).filter(|_| rng.gen_bool(0.5)).collect()
}

pub fn assignment(rng: &mut impl Rng, vars: &[usize]) -> Vec<(usize, u8)> {
    vars.iter().map(|&v| (v, rng.gen_range(0..2u8))).collect()
}

pub fn config(pairs: &[(usize, u8)]) -> icmaxent_core::Config {
    let mut sorted = pairs.to_vec();
    sorted.sort();
    let vars = VarSet::new(sorted.iter().map(|p| VarId(p.0)).collect()).unwrap();
    icmaxent_core::Config::new(vars, &sorted.iter().map(|p| p.1).collect::<Vec<_>>()).unwrap()
}

/// A random constraint list over `d` causes with targets in `[0, 1]`, mixing all
/// three kinds. Interventional sets avoid any graph restrictions; callers that need
/// the gate should use an edgeless graph.
pub fn random_constraints(rng: &mut impl Rng, d: usize) -> Vec<ConstraintSpec> {
    let n = rng.gen_range(1..=4);
    let mut out = Vec::new();
    for _ in 0..n {
        let c = match rng.gen_range(0..3) {
            0 => {
                let scope = VarSet::from_indices(&random_subset(rng, d));
                let values = (0..scope.n_configs()).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
                let stat = icmaxent_core::StatisticTable::new(scope, values).unwrap();
                ConstraintSpec::marginal(stat, rng.gen_range(-1.0..1.0)).unwrap()
            }
            1 => {
                let s = VarSet::from_indices(&random_subset(rng, d));
                ConstraintSpec::conditional(s.clone(), (0..s.n_configs()).map(|_| rng.gen()).collect()).unwrap()
            }
            _ => {
                let mut int = random_subset(rng, d);
                if int.is_empty() {
                    int.push(rng.gen_range(0..d));
                }
                let cond: Vec<usize> = random_subset(rng, d).into_iter().filter(|v| !int.contains(v)).collect();
                let (i, c) = (VarSet::from_indices(&int), VarSet::from_indices(&cond));
                let k = i.n_configs() * c.n_configs();
                ConstraintSpec::interventional(i, c, (0..k).map(|_| rng.gen()).collect()).unwrap()
            }
        };
        out.push(c);
    }
    out
}

pub fn random_lambda(rng: &mut impl Rng, constraints: &[ConstraintSpec], scale: f64) -> MultiplierVector {
    let n: usize = constraints.iter().map(|c| c.n_targets()).sum();
    MultiplierVector::new((0..n).map(|_| rng.gen_range(-scale..scale)).collect())
}

/// A random graph over `d` causes: each forward pair gets a directed edge or a
/// confounder with the given probabilities, and the effect gets a random parent set.
pub fn random_graph(rng: &mut impl Rng, d: usize, p_edge: f64, p_conf: f64) -> GraphSpec {
    let mut edges = Vec::new();
    let mut conf = Vec::new();
    for a in 0..d {
        for b in a + 1..d {
            if rng.gen_bool(p_edge) {
                edges.push((VarId(a), VarId(b)));
            }
            if rng.gen_bool(p_conf) {
                conf.push((VarId(a), VarId(b)));
            }
        }
    }
    let parents = VarSet::from_indices(&random_subset(rng, d));
    GraphSpec::new(d, edges, conf, Some(parents)).unwrap()
}

pub fn random_scm(seed: u64, d: usize, p_edge: f64, p_conf: f64) -> ScmInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_graph(&mut rng, d, p_edge, p_conf);
    sample_scm(&g, rng.gen()).unwrap()
}

/// `P(Y=1 | x)` of an SCM computed from its exact joint over `(X, Y)`.
pub fn true_p1(scm: &ScmInstance) -> Vec<f64> {
    let d = scm.n_causes();
    let xy = scm.exact_joint_xy().unwrap();
    (0..1usize << d)
        .map(|x| {
            let one = xy.prob(x | 1 << d);
            one / (one + xy.prob(x))
        })
        .collect()
}

/// A model whose conditional is exactly `table`, via one conditional constraint
/// over all causes with logit multipliers.
pub fn table_model(table: &[f64]) -> icmaxent_core::ConditionalModel {
    let d = table.len().trailing_zeros() as usize;
    let c = ConstraintSpec::conditional(VarSet::all(d), vec![0.5; table.len()]).unwrap();
    let lambda = table.iter().map(|p| (p / (1.0 - p)).ln()).collect();
    icmaxent_core::ConditionalModel::normalize(d, vec![c], MultiplierVector::new(lambda)).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random assignment to a random subset of `d` causes.
pub fn random_assignment(rng: &mut impl Rng, d: usize) -> Vec<(usize, u8)> {
    let vars = random_subset(rng, d);
    assignment(rng, &vars)
}

// ---- maximum entropy over the feasible set, by grid search ----

/// Linear system `rows · p1 = rhs` over the `2^D` entries of `P(Y=1|x)`, built
/// directly from `P(x)` for conditional and interventional targets.
pub fn linear_system(cs: &[ConstraintSpec], p: &JointTable) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = p.n_configs();
    let d = p.n_vars();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for c in cs {
        for t in 0..c.n_targets() {
            let mut row = vec![0.0; n];
            let mut base = 0.0;
            match c.kind() {
                ConstraintKind::Marginal => {
                    let stat = c.statistic();
                    let vars: Vec<usize> = stat.scope().iter().map(|v| v.0).collect();
                    for x in 0..n {
                        let f = stat.values()[sub_index(x, &vars)];
                        row[x] = p.prob(x) * (f[1] - f[0]);
                        base += p.prob(x) * f[0];
                    }
                }
                ConstraintKind::Conditional => {
                    let vars: Vec<usize> = c.scope().iter().map(|v| v.0).collect();
                    let mass: f64 = (0..n).filter(|&x| sub_index(x, &vars) == t).map(|x| p.prob(x)).sum();
                    for x in (0..n).filter(|&x| sub_index(x, &vars) == t) {
                        row[x] = p.prob(x) / mass;
                    }
                }
                ConstraintKind::Interventional => {
                    let scope: Vec<usize> = c.scope().iter().map(|v| v.0).collect();
                    let int: Vec<usize> = c.int_set().iter().map(|v| v.0).collect();
                    let cond: Vec<usize> = c.cond_set().iter().map(|v| v.0).collect();
                    let rest: Vec<usize> = (0..d).filter(|v| !scope.contains(v)).collect();
                    let (ti, tc) = c.split_target(t);
                    let cond_mass: f64 = (0..n).filter(|&x| sub_index(x, &cond) == tc.index()).map(|x| p.prob(x)).sum();
                    for x in 0..n {
                        if sub_index(x, &int) == ti.index() && sub_index(x, &cond) == tc.index() {
                            let joint_rc: f64 = (0..n)
                                .filter(|&z| sub_index(z, &rest) == sub_index(x, &rest) && sub_index(z, &cond) == tc.index())
                                .map(|z| p.prob(z))
                                .sum();
                            row[x] = joint_rc / cond_mass;
                        }
                    }
                }
            }
            rows.push(row);
            rhs.push(c.targets()[t] - base);
        }
    }
    (rows, rhs)
}

/// Reduced row echelon form; returns pivot columns.
pub fn rref(rows: &mut [Vec<f64>], rhs: &mut [f64]) -> Vec<usize> {
    let n = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(best) = (r..rows.len()).max_by(|&a, &b| rows[a][col].abs().total_cmp(&rows[b][col].abs())) else {
            break;
        };
        if rows[best][col].abs() < 1e-12 {
            continue;
        }
        rows.swap(r, best);
        rhs.swap(r, best);
        let piv = rows[r][col];
        rows[r].iter_mut().for_each(|v| *v /= piv);
        rhs[r] /= piv;
        for i in 0..rows.len() {
            if i != r && rows[i][col] != 0.0 {
                let f = rows[i][col];
                for j in 0..n {
                    rows[i][j] -= f * rows[r][j];
                }
                rhs[i] -= f * rhs[r];
            }
        }
        pivots.push(col);
        r += 1;
    }
    pivots
}

pub fn binary_entropy(p: f64) -> f64 {
    let h = |q: f64| if q > 0.0 { -q * q.ln() } else { 0.0 };
    h(p) + h(1.0 - p)
}

/// Largest `Σ P(x) H(p1(x))` over tables on the grid of the free coordinates that
/// satisfy the constraints exactly.
pub fn grid_max_entropy(cs: &[ConstraintSpec], p: &JointTable, steps: usize) -> f64 {
    let n = p.n_configs();
    let (mut rows, mut rhs) = linear_system(cs, p);
    let pivots = rref(&mut rows, &mut rhs);
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let mut best = f64::NEG_INFINITY;
    let mut counter = vec![0usize; free.len()];
    loop {
        let mut table = vec![0.0; n];
        for (k, &c) in free.iter().enumerate() {
            table[c] = counter[k] as f64 / steps as f64;
        }
        let mut ok = true;
        for (r, &pc) in pivots.iter().enumerate() {
            let v = rhs[r] - free.iter().map(|&c| rows[r][c] * table[c]).sum::<f64>();
            if !(-1e-12..=1.0 + 1e-12).contains(&v) {
                ok = false;
                break;
            }
            table[pc] = v.clamp(0.0, 1.0);
        }
        if ok {
            let h: f64 = (0..n).map(|x| p.prob(x) * binary_entropy(table[x])).sum();
            best = best.max(h);
        }
        let mut k = 0;
        loop {
            if k == counter.len() {
                return best;
            }
            counter[k] += 1;
            if counter[k] <= steps {
                break;
            }
            counter[k] = 0;
            k += 1;
        }
    }
}
