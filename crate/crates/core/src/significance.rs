//! Null models for the dynamics diagram and the repeated rejection-rate
//! protocol.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{infer_diagram, DynamicsDiagram, FitOptions};
use crate::error::{Error, Result};
use crate::faction::LeaderSeries;
use crate::sequence::{mine_sequences, OccurrenceCount};
use crate::stats::{run_all, TestTriple, DEFAULT_ALPHA};

/// Generator used for every randomised step; portable across platforms.
pub type SimRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniformly random reordering of the series entries.
pub fn permute_leader_series<R: Rng + ?Sized>(series: &LeaderSeries, rng: &mut R) -> LeaderSeries {
    let mut entries = series.entries.clone();
    entries.shuffle(rng);
    LeaderSeries { entries }
}

/// Redraws the heads of every node's out-edges as a uniformly random set of
/// distinct nodes other than the tail, keeping each edge's weight. Node set,
/// out-weights, edge count and the weight multiset are unchanged.
///
/// The self-transition probabilities in `a` are kept; the off-diagonal part of
/// `a` is rebuilt from the rewired adjacency.
pub fn rewire_diagram<R: Rng + ?Sized>(diagram: &DynamicsDiagram, rng: &mut R) -> DynamicsDiagram {
    let m = diagram.len();
    let mut out = diagram.clone();
    if m < 2 {
        return out;
    }
    let mut a_star = vec![vec![0.0; m]; m];
    for (i, row) in diagram.a_star.iter().enumerate() {
        let weights: Vec<f64> = row
            .iter()
            .enumerate()
            .filter(|&(k, &w)| k != i && w > 0.0)
            .map(|(_, &w)| w)
            .collect();
        let heads = rand::seq::index::sample(rng, m - 1, weights.len());
        for (h, w) in heads.into_iter().zip(weights) {
            let head = if h >= i { h + 1 } else { h };
            a_star[i][head] = w;
        }
    }
    for i in 0..m {
        let stay = diagram.a[i][i];
        for h in 0..m {
            if h != i {
                out.a[i][h] = a_star[i][h] * (1.0 - stay);
            }
        }
    }
    out.a_star = a_star;
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NullKind {
    /// Permute the leader series, refit, compare diagram edge weights.
    EdgeWeight,
    /// Rewire the diagram, compare leadership-sequence supports.
    SequenceSupport,
}

impl std::fmt::Display for NullKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NullKind::EdgeWeight => "edge-weight",
            NullKind::SequenceSupport => "sequence-support",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub repetitions: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            repetitions: 100,
            alpha: DEFAULT_ALPHA,
            seed: 0,
        }
    }
}

/// Everything the null models need from an inference run.
#[derive(Debug, Clone, Copy)]
pub struct SignificanceInput<'a> {
    pub series: &'a LeaderSeries,
    pub diagram: &'a DynamicsDiagram,
    pub seq: &'a [usize],
    pub phi: f64,
    pub fit: FitOptions,
    pub occurrence: OccurrenceCount,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PerTestRates {
    pub ks: f64,
    pub ranksum: f64,
    pub kruskal_wallis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionReport {
    pub kind: NullKind,
    #[serde(rename = "R")]
    pub repetitions: usize,
    pub alpha: f64,
    pub per_test_rates: PerTestRates,
    pub joint_rate: f64,
    pub seeds: Vec<u64>,
}

impl RejectionReport {
    pub fn from_outcomes(kind: NullKind, alpha: f64, seeds: Vec<u64>, outcomes: &[TestTriple]) -> Self {
        let r = outcomes.len().max(1) as f64;
        let rate = |f: &dyn Fn(&TestTriple) -> bool| outcomes.iter().filter(|t| f(t)).count() as f64 / r;
        RejectionReport {
            kind,
            repetitions: outcomes.len(),
            alpha,
            per_test_rates: PerTestRates {
                ks: rate(&|t| t.ks.rejected),
                ranksum: rate(&|t| t.ranksum.rejected),
                kruskal_wallis: rate(&|t| t.kruskal_wallis.rejected),
            },
            joint_rate: rate(&|t| t.all_rejected()),
            seeds,
        }
    }
}

/// The observed sample that a null sample is compared against.
pub fn observed_sample(kind: NullKind, input: &SignificanceInput<'_>) -> Vec<f64> {
    match kind {
        NullKind::EdgeWeight => input.diagram.edge_weights(),
        NullKind::SequenceSupport => mine_sequences(input.diagram, input.seq, input.occurrence).supports(),
    }
}

/// One draw from the null model.
pub fn null_sample(kind: NullKind, input: &SignificanceInput<'_>, rng: &mut SimRng) -> Result<Vec<f64>> {
    match kind {
        NullKind::EdgeWeight => {
            let permuted = permute_leader_series(input.series, rng);
            let (null, _) = infer_diagram(&permuted, input.phi, input.fit)?;
            Ok(null.edge_weights())
        }
        NullKind::SequenceSupport => {
            let rewired = rewire_diagram(input.diagram, rng);
            Ok(mine_sequences(&rewired, input.seq, input.occurrence).supports())
        }
    }
}

/// Repeats null generation and the three tests `repetitions` times.
///
/// Repetition `r` draws from its own generator seeded with `seed + r`, so the
/// report does not depend on scheduling.
pub fn significance_protocol(
    kind: NullKind,
    input: &SignificanceInput<'_>,
    cfg: &ProtocolConfig,
) -> Result<RejectionReport> {
    if cfg.repetitions == 0 {
        return Err(Error::InvalidParameter("repetitions must be positive".into()));
    }
    let observed = observed_sample(kind, input);
    if observed.is_empty() {
        return Err(Error::EmptySample);
    }
    let seeds: Vec<u64> = (0..cfg.repetitions as u64).map(|r| cfg.seed.wrapping_add(r)).collect();
    let outcomes = seeds
        .par_iter()
        .map(|&seed| {
            let mut rng = seeded_rng(seed);
            let null = null_sample(kind, input, &mut rng)?;
            run_all(&observed, &null, cfg.alpha)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RejectionReport::from_outcomes(kind, cfg.alpha, seeds, &outcomes))
}

/// Self-test under the null hypothesis: each repetition compares two
/// independent null draws, so the joint rate should stay near `alpha`.
pub fn calibration_protocol(
    kind: NullKind,
    input: &SignificanceInput<'_>,
    cfg: &ProtocolConfig,
) -> Result<RejectionReport> {
    if cfg.repetitions == 0 {
        return Err(Error::InvalidParameter("repetitions must be positive".into()));
    }
    let seeds: Vec<u64> = (0..cfg.repetitions as u64).map(|r| cfg.seed.wrapping_add(r)).collect();
    let outcomes = seeds
        .par_iter()
        .map(|&seed| {
            let mut rng = seeded_rng(seed);
            let a = null_sample(kind, input, &mut rng)?;
            let b = null_sample(kind, input, &mut rng)?;
            if a.is_empty() || b.is_empty() {
                return Err(Error::EmptySample);
            }
            run_all(&a, &b, cfg.alpha)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RejectionReport::from_outcomes(kind, cfg.alpha, seeds, &outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{fit_diagram, mine_frequent_sets, encode_states};
    use crate::faction::LeaderSet;

    fn cycle_series(laps: usize, dwell: usize) -> LeaderSeries {
        let mut entries = Vec::new();
        for _ in 0..laps {
            for s in 0..4 {
                entries.extend(std::iter::repeat_n(LeaderSet::new([s]), dwell));
            }
        }
        LeaderSeries { entries }
    }

    fn cycle_diagram() -> DynamicsDiagram {
        let series = cycle_series(5, 10);
        infer_diagram(&series, 0.01, FitOptions::default()).unwrap().0
    }

    #[test]
    fn permutation_keeps_multiset() {
        let one = LeaderSeries { entries: vec![LeaderSet::new([2])] };
        assert_eq!(permute_leader_series(&one, &mut seeded_rng(1)), one);

        let series = cycle_series(3, 4);
        let p = permute_leader_series(&series, &mut seeded_rng(7));
        let mut a = series.entries.clone();
        let mut b = p.entries.clone();
        a.sort();
        b.sort();
        assert_eq!(a, b);
        assert_ne!(p, series);
    }

    #[test]
    fn permutation_is_reproducible() {
        let series = LeaderSeries {
            entries: (0..8).map(|k| LeaderSet::new([k])).collect(),
        };
        let p = permute_leader_series(&series, &mut seeded_rng(42));
        let order: Vec<usize> = p.entries.iter().map(|s| s.members()[0]).collect();
        assert_eq!(order, vec![7, 1, 5, 4, 6, 0, 3, 2]);
        assert_eq!(p, permute_leader_series(&series, &mut seeded_rng(42)));
    }

    #[test]
    fn two_node_rewiring_is_identity() {
        let series = LeaderSeries {
            entries: [0, 0, 1, 1, 0, 0, 1].iter().map(|&k| LeaderSet::new([k])).collect(),
        };
        let d = infer_diagram(&series, 0.01, FitOptions::default()).unwrap().0;
        assert_eq!(rewire_diagram(&d, &mut seeded_rng(3)), d);
    }

    #[test]
    fn rewiring_cycle_golden() {
        let d = cycle_diagram();
        let r = rewire_diagram(&d, &mut seeded_rng(2));
        assert_eq!(r.states, d.states);
        assert_eq!(r.supports, d.supports);
        let heads: Vec<(usize, usize)> = r.edges().iter().map(|e| (e.from, e.to)).collect();
        assert_eq!(heads, vec![(0, 1), (1, 3), (2, 1), (3, 1)]);
        for i in 0..4 {
            assert_eq!(r.a[i][i], d.a[i][i]);
            assert!((r.a[i].iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn refit_after_permutation_keeps_supports() {
        let series = cycle_series(5, 10);
        let (d, _) = infer_diagram(&series, 0.01, FitOptions::default()).unwrap();
        let p = permute_leader_series(&series, &mut seeded_rng(5));
        let (q, _) = infer_diagram(&p, 0.01, FitOptions::default()).unwrap();
        assert_eq!(d.states, q.states);
        assert_eq!(d.supports, q.supports);
    }

    #[test]
    fn protocol_report_shape_and_reproducibility() {
        let series = cycle_series(5, 10);
        let frequent = mine_frequent_sets(&series, 0.01);
        let seq = encode_states(&series, &frequent).unwrap();
        let diagram = fit_diagram(&seq, &frequent, FitOptions::default()).unwrap();
        let input = SignificanceInput {
            series: &series,
            diagram: &diagram,
            seq: &seq,
            phi: 0.01,
            fit: FitOptions::default(),
            occurrence: OccurrenceCount::MinStep,
        };
        let cfg = ProtocolConfig { repetitions: 6, alpha: 0.01, seed: 100 };
        for kind in [NullKind::EdgeWeight, NullKind::SequenceSupport] {
            let a = significance_protocol(kind, &input, &cfg).unwrap();
            assert_eq!(a.seeds, (100..106).collect::<Vec<u64>>());
            assert_eq!(a.repetitions, 6);
            assert!((0.0..=1.0).contains(&a.joint_rate));
            assert!(a.joint_rate <= a.per_test_rates.ks);
            assert_eq!(a, significance_protocol(kind, &input, &cfg).unwrap());
        }
        let json = serde_json::to_value(significance_protocol(NullKind::EdgeWeight, &input, &cfg).unwrap()).unwrap();
        for key in ["kind", "R", "alpha", "per_test_rates", "joint_rate", "seeds"] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }
}
