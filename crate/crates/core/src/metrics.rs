//! Per-timestep F1 over candidate node pairs, change points, aggregation.
//!
//! A pair is predicted positive iff its score is strictly greater than the
//! threshold. The candidate universe is either every unordered pair of the
//! snapshot, or every pair incident to one pivot node; there is no negative
//! sampling.

use std::collections::BTreeMap;
use std::ops::{Add, AddAssign, Range};

use crate::error::{Error, Result};
use crate::graph::{NodeId, Pair, Snapshot};
use crate::tasks::periodic_index;

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Link scores for one timestep; absent pairs score 0.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairScores {
    pub timestep: usize,
    scores: BTreeMap<Pair, f64>,
}

impl PairScores {
    pub fn new(timestep: usize) -> Self {
        PairScores {
            timestep,
            scores: BTreeMap::new(),
        }
    }

    /// Every edge of `snapshot` with score 1.
    pub fn from_snapshot(timestep: usize, snapshot: &Snapshot) -> Self {
        PairScores {
            timestep,
            scores: snapshot.edges().iter().map(|&p| (p, 1.0)).collect(),
        }
    }

    /// Every pair over `num_nodes` nodes with score 1.
    pub fn all_pairs(timestep: usize, num_nodes: u32) -> Self {
        let scores = (0..num_nodes)
            .flat_map(|u| (u + 1..num_nodes).map(move |v| (Pair::ordered(u, v), 1.0)))
            .collect();
        PairScores { timestep, scores }
    }

    pub fn insert(&mut self, pair: Pair, score: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::Predictions(format!(
                "score {score} for {pair} outside [0, 1]"
            )));
        }
        self.scores.insert(pair, score);
        Ok(())
    }

    pub fn score(&self, pair: Pair) -> f64 {
        self.scores.get(&pair).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Pair, f64)> + '_ {
        self.scores.iter().map(|(&p, &s)| (p, s))
    }

    pub fn positives(&self, threshold: f64) -> impl Iterator<Item = Pair> + '_ {
        self.iter()
            .filter(move |&(_, s)| s > threshold)
            .map(|(p, _)| p)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl Counts {
    pub fn f1(&self) -> f64 {
        f1_from_counts(self.tp, self.fp, self.fn_)
    }
}

impl Add for Counts {
    type Output = Counts;

    fn add(self, o: Counts) -> Counts {
        Counts {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
        }
    }
}

impl AddAssign for Counts {
    fn add_assign(&mut self, o: Counts) {
        *self = *self + o;
    }
}

/// `2tp / (2tp + fp + fn)`, and 1.0 when all three are zero.
pub fn f1_from_counts(tp: u64, fp: u64, fn_: u64) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        1.0
    } else {
        (2 * tp) as f64 / denom as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimestepScore {
    pub t: usize,
    pub f1: f64,
    pub counts: Counts,
    pub is_changepoint: bool,
}

fn check_pred_range(pred: &PairScores, num_nodes: u32) -> Result<()> {
    match pred
        .scores
        .keys()
        .next_back()
        .filter(|p| p.hi() >= num_nodes)
    {
        Some(p) => Err(Error::NodeOutOfRange {
            node: p.hi() as u64,
            num_nodes,
        }),
        None => Ok(()),
    }
}

fn score_counts<I>(positives: I, truth: &Snapshot, truth_size: usize) -> Counts
where
    I: Iterator<Item = Pair>,
{
    let (mut tp, mut predicted) = (0u64, 0u64);
    for p in positives {
        predicted += 1;
        if truth.contains(p) {
            tp += 1;
        }
    }
    Counts {
        tp,
        fp: predicted - tp,
        fn_: truth_size as u64 - tp,
    }
}

/// F1 over all `C(N, 2)` pairs of `truth`.
pub fn evaluate_all_pairs(
    pred: &PairScores,
    truth: &Snapshot,
    threshold: f64,
) -> Result<TimestepScore> {
    check_pred_range(pred, truth.num_nodes())?;
    let counts = score_counts(pred.positives(threshold), truth, truth.num_edges());
    Ok(TimestepScore {
        t: pred.timestep,
        f1: counts.f1(),
        counts,
        is_changepoint: false,
    })
}

/// F1 over the pairs `(pivot, x)`, `x != pivot`; everything else is ignored.
pub fn evaluate_node_restricted(
    pred: &PairScores,
    truth: &Snapshot,
    pivot: NodeId,
    threshold: f64,
) -> Result<TimestepScore> {
    let truth_size = truth.degree(pivot)?;
    check_pred_range(pred, truth.num_nodes())?;
    let positives = pred.positives(threshold).filter(|p| p.touches(pivot));
    let counts = score_counts(positives, truth, truth_size);
    Ok(TimestepScore {
        t: pred.timestep,
        f1: counts.f1(),
        counts,
        is_changepoint: false,
    })
}

/// Timesteps in `range` whose pattern index differs from the previous step.
pub fn change_points(k: usize, n: usize, range: Range<usize>) -> Result<Vec<usize>> {
    // Validates k and n even for an empty range.
    periodic_index(0, k, n)?;
    range
        .filter(|&t| t > 0)
        .filter_map(
            |t| match (periodic_index(t, k, n), periodic_index(t - 1, k, n)) {
                (Ok(a), Ok(b)) if a != b => Some(Ok(t)),
                (Err(e), _) | (_, Err(e)) => Some(Err(e)),
                _ => None,
            },
        )
        .collect()
}

fn mean(xs: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for x in xs {
        sum += x;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

/// Per-timestep scores plus their means.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub per_timestep: Vec<TimestepScore>,
    pub mean_all: f64,
    /// `None` unless at least one timestep is flagged as a change point.
    pub mean_changepoints: Option<f64>,
    pub counts: Counts,
    /// Spread of `mean_all` across seeds; set by [`aggregate`] over seeds.
    pub seed_std: Option<f64>,
    pub num_runs: usize,
}

impl MetricReport {
    pub fn from_scores(per_timestep: Vec<TimestepScore>) -> Result<Self> {
        let mean_all = mean(per_timestep.iter().map(|s| s.f1))
            .ok_or_else(|| Error::Aggregate("no evaluated timesteps".into()))?;
        let mean_changepoints = mean(
            per_timestep
                .iter()
                .filter(|s| s.is_changepoint)
                .map(|s| s.f1),
        );
        let counts = per_timestep
            .iter()
            .fold(Counts::default(), |acc, s| acc + s.counts);
        Ok(MetricReport {
            per_timestep,
            mean_all,
            mean_changepoints,
            counts,
            seed_std: None,
            num_runs: 1,
        })
    }

    /// Mean over the timesteps inside `range`.
    pub fn mean_over(&self, range: Range<usize>) -> Option<f64> {
        mean(
            self.per_timestep
                .iter()
                .filter(|s| range.contains(&s.t))
                .map(|s| s.f1),
        )
    }
}

/// Combines reports.
///
/// With `over_seeds`, the reports are repeated runs over the same timesteps:
/// per-timestep F1 is averaged element-wise, `mean_all` is the mean of the
/// run means and `seed_std` their sample standard deviation. Otherwise the
/// reports cover consecutive ranges and are concatenated.
pub fn aggregate(reports: &[MetricReport], over_seeds: bool) -> Result<MetricReport> {
    let first = reports
        .first()
        .ok_or_else(|| Error::Aggregate("no reports".into()))?;
    if !over_seeds {
        let scores = reports
            .iter()
            .flat_map(|r| r.per_timestep.iter().copied())
            .collect();
        return MetricReport::from_scores(scores);
    }

    for (i, r) in reports.iter().enumerate().skip(1) {
        let aligned = r.per_timestep.len() == first.per_timestep.len()
            && r.per_timestep
                .iter()
                .zip(&first.per_timestep)
                .all(|(a, b)| a.t == b.t && a.is_changepoint == b.is_changepoint);
        if !aligned {
            return Err(Error::Aggregate(format!(
                "report {i} covers different timesteps than report 0"
            )));
        }
    }
    let runs = reports.len() as f64;
    let per_timestep = (0..first.per_timestep.len())
        .map(|i| {
            let base = first.per_timestep[i];
            TimestepScore {
                f1: reports.iter().map(|r| r.per_timestep[i].f1).sum::<f64>() / runs,
                counts: reports
                    .iter()
                    .fold(Counts::default(), |acc, r| acc + r.per_timestep[i].counts),
                ..base
            }
        })
        .collect();
    let means: Vec<f64> = reports.iter().map(|r| r.mean_all).collect();
    let mean_all = means.iter().sum::<f64>() / runs;
    let seed_std = if reports.len() > 1 {
        let var = means.iter().map(|m| (m - mean_all).powi(2)).sum::<f64>() / (runs - 1.0);
        var.sqrt()
    } else {
        0.0
    };
    let mean_changepoints = reports
        .iter()
        .map(|r| r.mean_changepoints)
        .collect::<Option<Vec<_>>>()
        .and_then(mean);
    Ok(MetricReport {
        per_timestep,
        mean_all,
        mean_changepoints,
        counts: reports
            .iter()
            .fold(Counts::default(), |acc, r| acc + r.counts),
        seed_std: Some(seed_std),
        num_runs: reports.iter().map(|r| r.num_runs).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn snap(n: u32, pairs: &[(u32, u32)]) -> Snapshot {
        Snapshot::from_pairs(n, pairs.iter().copied()).unwrap()
    }

    fn score(t: usize, f1: f64, cp: bool) -> TimestepScore {
        TimestepScore {
            t,
            f1,
            counts: Counts::default(),
            is_changepoint: cp,
        }
    }

    #[test]
    fn f1_examples() {
        assert_eq!(f1_from_counts(5, 0, 0), 1.0);
        assert_eq!(f1_from_counts(1, 1, 1), 0.5);
        assert_eq!(f1_from_counts(0, 3, 2), 0.0);
        assert_eq!(f1_from_counts(0, 0, 0), 1.0);
    }

    #[test]
    fn all_pairs_examples() {
        let truth = snap(6, &[(0, 1), (2, 3), (4, 5)]);
        let exact = evaluate_all_pairs(&PairScores::from_snapshot(3, &truth), &truth, 0.5).unwrap();
        assert_eq!((exact.t, exact.f1), (3, 1.0));
        let none = evaluate_all_pairs(&PairScores::new(3), &truth, 0.5).unwrap();
        assert_eq!(none.f1, 0.0);
        // 2E / (E + C(N,2)) = 6 / 18.
        let all = evaluate_all_pairs(&PairScores::all_pairs(3, 6), &truth, 0.5).unwrap();
        assert_eq!(all.f1, 6.0 / 18.0);
    }

    #[test]
    fn threshold_is_strict() {
        let truth = snap(3, &[(0, 1)]);
        let mut pred = PairScores::new(0);
        pred.insert(Pair::new(0, 1).unwrap(), 0.5).unwrap();
        assert_eq!(evaluate_all_pairs(&pred, &truth, 0.5).unwrap().counts.tp, 0);
        pred.insert(Pair::new(0, 1).unwrap(), 0.500_000_1).unwrap();
        assert_eq!(evaluate_all_pairs(&pred, &truth, 0.5).unwrap().counts.tp, 1);
    }

    #[test]
    fn rejects_bad_predictions() {
        let truth = snap(3, &[(0, 1)]);
        let mut pred = PairScores::new(0);
        pred.insert(Pair::new(0, 5).unwrap(), 1.0).unwrap();
        assert!(evaluate_all_pairs(&pred, &truth, 0.5).is_err());
        assert!(evaluate_node_restricted(&PairScores::new(0), &truth, 3, 0.5).is_err());
        assert!(PairScores::new(0)
            .insert(Pair::new(0, 1).unwrap(), 1.5)
            .is_err());
        assert!(PairScores::new(0)
            .insert(Pair::new(0, 1).unwrap(), f64::NAN)
            .is_err());
    }

    #[test]
    fn restricted_examples() {
        // Pivot 0 linked to 3 of its 100 possible partners plus noise elsewhere.
        let truth = snap(101, &[(0, 4), (0, 9), (0, 50), (10, 11), (20, 30)]);
        let exact = evaluate_node_restricted(
            &PairScores::from_snapshot(0, &snap(101, &[(0, 4), (0, 9), (0, 50)])),
            &truth,
            0,
            0.5,
        )
        .unwrap();
        assert_eq!(exact.f1, 1.0);
        // All 100 pivot pairs positive: 2A / (A + 100) with A = 3.
        let all = evaluate_node_restricted(&PairScores::all_pairs(0, 101), &truth, 0, 0.5).unwrap();
        assert_eq!(all.f1, 6.0 / 103.0);
        let isolated = snap(101, &[(10, 11)]);
        let vac = evaluate_node_restricted(&PairScores::new(0), &isolated, 0, 0.5).unwrap();
        assert_eq!(vac.f1, 1.0);
    }

    #[test]
    fn change_point_examples() {
        assert_eq!(change_points(2, 3, 0..12).unwrap(), vec![3, 6, 9]);
        assert_eq!(change_points(2, 1, 0..5).unwrap(), vec![1, 2, 3, 4]);
        assert!(change_points(1, 4, 0..40).unwrap().is_empty());
        assert!(change_points(0, 1, 0..0).is_err());
    }

    #[test]
    fn aggregate_examples() {
        let r = MetricReport::from_scores(vec![score(0, 0.2, false), score(1, 0.4, true)]).unwrap();
        assert_eq!(aggregate(std::slice::from_ref(&r), false).unwrap(), r);
        let one = aggregate(std::slice::from_ref(&r), true).unwrap();
        assert_eq!(one.per_timestep, r.per_timestep);
        assert_eq!(one.mean_all, r.mean_all);
        assert_eq!(one.seed_std, Some(0.0));

        let a = MetricReport::from_scores(vec![score(0, 0.4, false)]).unwrap();
        let b = MetricReport::from_scores(vec![score(0, 0.6, false)]).unwrap();
        let ab = aggregate(&[a, b], true).unwrap();
        assert!((ab.mean_all - 0.5).abs() < 1e-15);
        assert!((ab.seed_std.unwrap() - 0.02f64.sqrt()).abs() < 1e-12);

        assert!(aggregate(&[], true).is_err());
        let shifted = MetricReport::from_scores(vec![score(5, 0.1, false)]).unwrap();
        let r0 = MetricReport::from_scores(vec![score(0, 0.1, false)]).unwrap();
        assert!(aggregate(&[r0, shifted], true).is_err());
    }

    #[test]
    fn changepoint_mean_only_over_flagged() {
        let r = MetricReport::from_scores(vec![
            score(0, 0.0, true),
            score(1, 1.0, false),
            score(2, 1.0, false),
        ])
        .unwrap();
        assert_eq!(r.mean_changepoints, Some(0.0));
        assert!((r.mean_all - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.mean_over(1..3), Some(1.0));
    }

    fn arb_snapshot(n: u32) -> impl Strategy<Value = Snapshot> {
        proptest::collection::vec((0..n, 0..n), 0..30).prop_map(move |raw| {
            Snapshot::from_pairs(n, raw.into_iter().filter(|(a, b)| a != b)).unwrap()
        })
    }

    proptest! {
        #[test]
        fn mean_of_means_equals_pooled_mean(
            runs in proptest::collection::vec(proptest::collection::vec(0.0f64..=1.0, 7), 1..6),
        ) {
            let reports: Vec<_> = runs
                .iter()
                .map(|fs| {
                    MetricReport::from_scores(
                        fs.iter().enumerate().map(|(t, &f)| score(t, f, false)).collect(),
                    )
                    .unwrap()
                })
                .collect();
            let seeds = aggregate(&reports, true).unwrap();
            let pooled: Vec<f64> = runs.iter().flatten().copied().collect();
            let brute = pooled.iter().sum::<f64>() / pooled.len() as f64;
            prop_assert!((seeds.mean_all - brute).abs() < 1e-12);
        }

        #[test]
        fn monotone_in_predictions(truth in arb_snapshot(10), extra in (0u32..10, 0u32..10)) {
            prop_assume!(extra.0 != extra.1);
            let pair = Pair::new(extra.0, extra.1).unwrap();
            let mut pred = PairScores::new(0);
            for (i, e) in truth.edges().iter().enumerate() {
                if i % 2 == 0 {
                    pred.insert(*e, 1.0).unwrap();
                }
            }
            prop_assume!(pred.score(pair) == 0.0);
            let before = evaluate_all_pairs(&pred, &truth, 0.5).unwrap().f1;
            pred.insert(pair, 1.0).unwrap();
            let after = evaluate_all_pairs(&pred, &truth, 0.5).unwrap().f1;
            if truth.contains(pair) {
                prop_assert!(after >= before);
            } else {
                prop_assert!(after <= before);
            }
        }

        #[test]
        fn change_points_are_exactly_index_changes(k in 1usize..6, n in 1usize..6, start in 0usize..30, len in 0usize..40) {
            let range = start..start + len;
            let cps = change_points(k, n, range.clone()).unwrap();
            for t in range {
                let is_cp = cps.contains(&t);
                if t == 0 {
                    prop_assert!(!is_cp);
                    continue;
                }
                let changed = periodic_index(t, k, n).unwrap() != periodic_index(t - 1, k, n).unwrap();
                prop_assert_eq!(is_cp, changed);
                if k >= 2 {
                    prop_assert_eq!(is_cp, t % n == 0);
                }
            }
        }
    }
}
