//! Edge scores from fitted multipliers, and ROC analysis of those scores.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constraint::ConstraintKind;
use crate::error::{Error, Result};
use crate::model::ConditionalModel;
use crate::vars::VarId;

/// Relative difference `|l1 - l2| / max{|l1|, |l2|, |l1 - l2|, 1}`.
pub fn theta(l1: f64, l2: f64) -> Result<f64> {
    if !l1.is_finite() || !l2.is_finite() {
        return Err(Error::Domain(format!("theta needs finite multipliers, got ({l1}, {l2})")));
    }
    let diff = (l1 - l2).abs();
    Ok(diff / l1.abs().max(l2.abs()).max(diff).max(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaScore {
    pub var: VarId,
    pub theta: f64,
    /// Multipliers at `x_i = 0` and `x_i = 1`.
    pub lambda_pair: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoreSet {
    /// Ordered by variable.
    pub scores: Vec<ThetaScore>,
    /// Causes with no single-variable constraint.
    pub unscored: Vec<VarId>,
}

/// Scores every cause that carries exactly one single-variable conditional or
/// interventional constraint.
pub fn score_all(model: &ConditionalModel) -> Result<ScoreSet> {
    let mut pairs: Vec<Option<(f64, f64)>> = vec![None; model.n_causes()];
    for (k, c) in model.constraints().iter().enumerate() {
        let var = match c.kind() {
            ConstraintKind::Conditional if c.cond_set().len() == 1 => c.cond_set().as_slice()[0],
            ConstraintKind::Interventional if c.int_set().len() == 1 && c.cond_set().is_empty() => {
                c.int_set().as_slice()[0]
            }
            _ => continue,
        };
        let m = model.multipliers_of(k);
        if pairs[var.index()].replace((m[0], m[1])).is_some() {
            return Err(Error::Ambiguity(var));
        }
    }
    let mut out = ScoreSet::default();
    for (i, pair) in pairs.into_iter().enumerate() {
        match pair {
            Some((l0, l1)) => out.scores.push(ThetaScore { var: VarId(i), theta: theta(l0, l1)?, lambda_pair: (l0, l1) }),
            None => {
                log::warn!("{} has no single-variable constraint and is not scored", VarId(i));
                out.unscored.push(VarId(i));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// From `(0, 0)` at threshold `+inf` to `(1, 1)`.
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// Threshold sweep over `(score, is_positive)` pairs, predicting positive when
/// `score >= threshold`. Equal scores enter at the same step.
pub fn roc(items: &[(f64, bool)]) -> Result<RocCurve> {
    let n_pos = items.iter().filter(|(_, l)| *l).count();
    let n_neg = items.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::DegenerateLabels);
    }
    if let Some((s, _)) = items.iter().find(|(s, _)| s.is_nan()) {
        return Err(Error::Domain(format!("score {s} is not comparable")));
    }
    let mut sorted = items.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut points = vec![RocPoint { threshold: f64::INFINITY, fpr: 0.0, tpr: 0.0 }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let threshold = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == threshold {
            if sorted[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let prev = points.last().expect("starts non-empty");
        let point = RocPoint { threshold, fpr: fp as f64 / n_neg as f64, tpr: tp as f64 / n_pos as f64 };
        auc += (point.fpr - prev.fpr) * (point.tpr + prev.tpr) / 2.0;
        points.push(point);
    }
    Ok(RocCurve { points, auc })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapInterval {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Percentile interval for `AUC(a) - AUC(b)` under resampling of whole groups.
///
/// `a[g]` and `b[g]` hold the scored items of group `g` under two methods; a
/// resample draws group indices with replacement and keeps both methods paired.
pub fn paired_auc_gap(
    a: &[Vec<(f64, bool)>],
    b: &[Vec<(f64, bool)>],
    n_resamples: usize,
    confidence: f64,
    seed: u64,
) -> Result<BootstrapInterval> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Domain("paired bootstrap needs the same non-empty set of groups".into()));
    }
    if n_resamples == 0 || !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::Domain("bootstrap needs resamples and a confidence in (0, 1)".into()));
    }
    let pooled = |groups: &[Vec<(f64, bool)>], picks: &[usize]| -> Vec<(f64, bool)> {
        picks.iter().flat_map(|&g| groups[g].iter().copied()).collect()
    };
    let all: Vec<usize> = (0..a.len()).collect();
    let estimate = roc(&pooled(a, &all))?.auc - roc(&pooled(b, &all))?.auc;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gaps = Vec::with_capacity(n_resamples);
    let mut picks = vec![0; a.len()];
    for _ in 0..n_resamples {
        picks.iter_mut().for_each(|p| *p = rng.gen_range(0..a.len()));
        let gap = match (roc(&pooled(a, &picks)), roc(&pooled(b, &picks))) {
            (Ok(ra), Ok(rb)) => ra.auc - rb.auc,
            (Err(Error::DegenerateLabels), _) | (_, Err(Error::DegenerateLabels)) => continue,
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        gaps.push(gap);
    }
    if gaps.is_empty() {
        return Err(Error::DegenerateLabels);
    }
    gaps.sort_by(f64::total_cmp);
    let alpha = (1.0 - confidence) / 2.0;
    Ok(BootstrapInterval { estimate, lower: quantile(&gaps, alpha), upper: quantile(&gaps, 1.0 - alpha) })
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}
