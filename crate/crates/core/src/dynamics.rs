//! Frequent leader sets and the transition diagram between them.
//!
//! Leader sets that reach the support threshold become the observed states of
//! a discrete HMM whose emission matrix is the identity. Baum-Welch fits the
//! transition matrix; dropping self-transitions and renormalising each row
//! gives the diagram's adjacency.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::faction::{LeaderSeries, LeaderSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderSetSupport {
    pub set: LeaderSet,
    pub supp: f64,
}

/// Fraction of windows whose leader set equals each observed set, the empty
/// set included. Sorted by set.
pub fn leader_set_supports(series: &LeaderSeries) -> Vec<LeaderSetSupport> {
    let mut counts: BTreeMap<&LeaderSet, usize> = BTreeMap::new();
    for s in &series.entries {
        *counts.entry(s).or_default() += 1;
    }
    let total = series.len() as f64;
    counts
        .into_iter()
        .map(|(set, c)| LeaderSetSupport {
            set: set.clone(),
            supp: c as f64 / total,
        })
        .collect()
}

/// Non-empty leader sets with support at least `phi`, sorted by set.
pub fn mine_frequent_sets(series: &LeaderSeries, phi: f64) -> Vec<LeaderSetSupport> {
    leader_set_supports(series)
        .into_iter()
        .filter(|s| !s.set.is_empty() && s.supp >= phi)
        .collect()
}

/// Maps each window's leader set to its state index (0-based, in the order of
/// `frequent`). Windows whose set is empty or not frequent are dropped.
pub fn encode_states(series: &LeaderSeries, frequent: &[LeaderSetSupport]) -> Result<Vec<usize>> {
    if frequent.is_empty() {
        return Err(Error::NoFrequentStates);
    }
    let index: BTreeMap<&LeaderSet, usize> =
        frequent.iter().enumerate().map(|(k, s)| (&s.set, k)).collect();
    Ok(series
        .entries
        .iter()
        .filter_map(|s| index.get(s).copied())
        .collect())
}

/// Stopping rule for Baum-Welch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            tolerance: 1e-9,
            max_iterations: 200,
        }
    }
}

/// Discrete HMM with a fixed emission matrix; only `pi` and `a` are learnt.
#[derive(Debug, Clone, PartialEq)]
pub struct Hmm {
    pub pi: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
}

impl Hmm {
    /// Uniform start and transitions, identity emissions.
    pub fn uniform_identity(states: usize) -> Self {
        let u = 1.0 / states as f64;
        Hmm {
            pi: vec![u; states],
            a: vec![vec![u; states]; states],
            b: (0..states)
                .map(|i| (0..states).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
        }
    }

    fn states(&self) -> usize {
        self.pi.len()
    }

    /// Scaled forward pass: returns alphas, scaling factors and log-likelihood.
    fn forward(&self, obs: &[usize]) -> (Vec<Vec<f64>>, Vec<f64>, f64) {
        let m = self.states();
        let mut alpha = vec![vec![0.0; m]; obs.len()];
        let mut scale = vec![0.0; obs.len()];
        for i in 0..m {
            alpha[0][i] = self.pi[i] * self.b[i][obs[0]];
        }
        scale[0] = alpha[0].iter().sum();
        for t in 0..obs.len() {
            if t > 0 {
                for j in 0..m {
                    let s: f64 = (0..m).map(|i| alpha[t - 1][i] * self.a[i][j]).sum();
                    alpha[t][j] = s * self.b[j][obs[t]];
                }
                scale[t] = alpha[t].iter().sum();
            }
            if scale[t] > 0.0 {
                for v in &mut alpha[t] {
                    *v /= scale[t];
                }
            }
        }
        let ll = scale
            .iter()
            .map(|&c| if c > 0.0 { c.ln() } else { f64::NEG_INFINITY })
            .sum();
        (alpha, scale, ll)
    }

    fn backward(&self, obs: &[usize], scale: &[f64]) -> Vec<Vec<f64>> {
        let m = self.states();
        let len = obs.len();
        let mut beta = vec![vec![0.0; m]; len];
        beta[len - 1].iter_mut().for_each(|v| *v = 1.0);
        for t in (0..len - 1).rev() {
            for i in 0..m {
                beta[t][i] = (0..m)
                    .map(|j| self.a[i][j] * self.b[j][obs[t + 1]] * beta[t + 1][j])
                    .sum::<f64>();
                if scale[t + 1] > 0.0 {
                    beta[t][i] /= scale[t + 1];
                }
            }
        }
        beta
    }

    /// One EM step; returns the log-likelihood of the parameters used.
    fn em_step(&mut self, obs: &[usize]) -> f64 {
        let m = self.states();
        let (alpha, scale, ll) = self.forward(obs);
        let beta = self.backward(obs, &scale);

        let mut xi_sum = vec![vec![0.0; m]; m];
        let mut gamma_from = vec![0.0; m];
        for t in 0..obs.len() - 1 {
            let mut denom = 0.0;
            let mut xi = vec![vec![0.0; m]; m];
            for i in 0..m {
                for j in 0..m {
                    let v = alpha[t][i] * self.a[i][j] * self.b[j][obs[t + 1]] * beta[t + 1][j];
                    xi[i][j] = v;
                    denom += v;
                }
            }
            if denom <= 0.0 {
                continue;
            }
            for i in 0..m {
                for j in 0..m {
                    let v = xi[i][j] / denom;
                    xi_sum[i][j] += v;
                    gamma_from[i] += v;
                }
            }
        }
        let gamma0: Vec<f64> = (0..m).map(|i| alpha[0][i] * beta[0][i]).collect();
        let g0: f64 = gamma0.iter().sum();
        if g0 > 0.0 {
            self.pi = gamma0.iter().map(|v| v / g0).collect();
        }
        for i in 0..m {
            if gamma_from[i] > 0.0 {
                for j in 0..m {
                    self.a[i][j] = xi_sum[i][j] / gamma_from[i];
                }
            } else {
                // Never left: absorbing, so the diagram gets no outgoing edges.
                for j in 0..m {
                    self.a[i][j] = if i == j { 1.0 } else { 0.0 };
                }
            }
        }
        ll
    }

    pub fn log_likelihood(&self, obs: &[usize]) -> f64 {
        self.forward(obs).2
    }

    /// Runs Baum-Welch until the likelihood gain drops below the tolerance.
    /// Returns the number of EM steps taken.
    pub fn baum_welch(&mut self, obs: &[usize], opts: FitOptions) -> usize {
        let mut prev = f64::NEG_INFINITY;
        for it in 1..=opts.max_iterations {
            self.em_step(obs);
            let ll = self.log_likelihood(obs);
            if (ll - prev).abs() < opts.tolerance || ll.is_nan() {
                return it;
            }
            prev = ll;
        }
        opts.max_iterations
    }
}

/// Drops the diagonal and renormalises each row over its off-diagonal mass.
/// Rows without off-diagonal mass stay zero.
pub fn normalize_off_diagonal(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    a.iter()
        .enumerate()
        .map(|(i, row)| {
            let off: f64 = row.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, v)| v).sum();
            row.iter()
                .enumerate()
                .map(|(j, &v)| if j == i || off <= 0.0 { 0.0 } else { v / off })
                .collect()
        })
        .collect()
}

/// Transition diagram over frequent leader sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsDiagram {
    pub states: Vec<LeaderSet>,
    pub supports: Vec<f64>,
    /// Fitted transition matrix, self-transitions included.
    pub a: Vec<Vec<f64>>,
    /// Self-transition-free, row-normalised adjacency.
    pub a_star: Vec<Vec<f64>>,
    pub pi: Vec<f64>,
    pub log_likelihood: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagramEdge {
    pub from: usize,
    pub to: usize,
    pub prob: f64,
}

impl DynamicsDiagram {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Edges with positive normalised probability, in row-major order.
    pub fn edges(&self) -> Vec<DiagramEdge> {
        let mut out = Vec::new();
        for (i, row) in self.a_star.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                if p > 0.0 {
                    out.push(DiagramEdge { from: i, to: j, prob: p });
                }
            }
        }
        out
    }

    pub fn edge_weights(&self) -> Vec<f64> {
        self.edges().into_iter().map(|e| e.prob).collect()
    }

    pub fn state_index(&self, set: &LeaderSet) -> Option<usize> {
        self.states.iter().position(|s| s == set)
    }
}

/// Fits the diagram to an encoded state sequence.
///
/// `frequent` supplies the state labels and supports; `seq` holds indices into
/// it. A sequence that only ever shows one state yields a diagram without edges.
pub fn fit_diagram(
    seq: &[usize],
    frequent: &[LeaderSetSupport],
    opts: FitOptions,
) -> Result<DynamicsDiagram> {
    if seq.len() < 2 {
        return Err(Error::SequenceTooShort(seq.len()));
    }
    let m = frequent.len();
    if let Some(&bad) = seq.iter().find(|&&s| s >= m) {
        return Err(Error::InvalidParameter(format!("state {bad} outside {m} frequent sets")));
    }
    let mut hmm = Hmm::uniform_identity(m);
    let iterations = hmm.baum_welch(seq, opts);
    let log_likelihood = hmm.log_likelihood(seq);
    let a_star = normalize_off_diagonal(&hmm.a);
    Ok(DynamicsDiagram {
        states: frequent.iter().map(|s| s.set.clone()).collect(),
        supports: frequent.iter().map(|s| s.supp).collect(),
        a: hmm.a,
        a_star,
        pi: hmm.pi,
        log_likelihood,
        iterations,
    })
}

/// Mines frequent sets, encodes and fits in one go.
pub fn infer_diagram(series: &LeaderSeries, phi: f64, opts: FitOptions) -> Result<(DynamicsDiagram, Vec<usize>)> {
    let frequent = mine_frequent_sets(series, phi);
    let seq = encode_states(series, &frequent)?;
    let diagram = fit_diagram(&seq, &frequent, opts)?;
    Ok((diagram, seq))
}

/// Row-normalised bigram counts; rows without outgoing transitions are
/// absorbing. Useful as a reference for the fitted transition matrix.
pub fn bigram_mle(seq: &[usize], states: usize) -> Vec<Vec<f64>> {
    let mut counts = vec![vec![0.0; states]; states];
    for w in seq.windows(2) {
        counts[w[0]][w[1]] += 1.0;
    }
    for (i, row) in counts.iter_mut().enumerate() {
        let total: f64 = row.iter().sum();
        if total > 0.0 {
            row.iter_mut().for_each(|v| *v /= total);
        } else {
            row[i] = 1.0;
        }
    }
    counts
}
