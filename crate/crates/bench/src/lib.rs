//! Shared inputs for the benchmarks.

use leadfollow::sim::{simulate, Dynamics, Model, ScenarioSpec};
use leadfollow::{Dataset, Point};

/// A smooth deterministic track; `lag` shifts it in time.
pub fn track(len: usize, lag: usize) -> Vec<Point> {
    (0..len)
        .map(|t| {
            let s = (t + 1000 - lag) as f64 * 0.07;
            Point::new(s.cos() * 5.0 + s * 0.3, (1.7 * s).sin() * 3.0)
        })
        .collect()
}

/// One simulated hierarchical group of 30 over `length` steps.
pub fn dataset(length: usize) -> Dataset {
    let mut spec = ScenarioSpec::new(Model::Hierarchical, Dynamics::Type2, 7);
    spec.length = length;
    spec.events = 1;
    spec.event_len = length;
    spec.segment_len = length / 4;
    simulate(&spec).expect("valid scenario").0
}
