//! Synthetic group movement with scripted leadership.
//!
//! Every event runs four leadership segments. Under [`Dynamics::Type2`] the
//! leaders are individuals 1, 2, 3 and 4 in turn. Under [`Dynamics::Type1`]
//! individual 1 leads everyone, then the group splits into three sub-groups led
//! by 2, 3 and 4, which reconverge and are led by 3 and finally by 4. The last
//! leader of each event halts before the segment ends.
//!
//! Leaders walk straight lines at constant speed. Followers steer towards the
//! delayed position of whoever they follow, capped at a maximum speed, and
//! keep a fixed personal offset. Observed positions carry Gaussian noise.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::cluster::ClusterSet;
use crate::data::{Dataset, DatasetMeta, IndividualId, Point, Trajectory};
use crate::error::{Error, Result};
use crate::faction::LeaderSet;
use crate::significance::{seeded_rng, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    /// One initiator, everyone else follows it directly.
    #[serde(rename = "DM", alias = "dm")]
    Dictatorship,
    /// Followers form a chain, each following the next higher rank.
    #[serde(rename = "HM", alias = "hm")]
    Hierarchical,
    /// Followers join the initiator through an activation cascade.
    #[serde(rename = "IC", alias = "ic")]
    IndependentCascade,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Dictatorship => "DM",
            Model::Hierarchical => "HM",
            Model::IndependentCascade => "IC",
        })
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "DM" => Ok(Model::Dictatorship),
            "HM" => Ok(Model::Hierarchical),
            "IC" => Ok(Model::IndependentCascade),
            _ => Err(Error::InvalidSpec(format!("unknown model `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dynamics {
    /// Split and merge: {1} -> {2,3,4} -> {3} -> {4}.
    Type1,
    /// Linear hand-over: {1} -> {2} -> {3} -> {4}.
    Type2,
}

impl fmt::Display for Dynamics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dynamics::Type1 => "type1",
            Dynamics::Type2 => "type2",
        })
    }
}

impl FromStr for Dynamics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "type1" | "1" | "split" => Ok(Dynamics::Type1),
            "type2" | "2" | "linear" => Ok(Dynamics::Type2),
            _ => Err(Error::InvalidSpec(format!("unknown dynamics `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IcParams {
    /// Neighbours each newly active individual tries to activate.
    pub k: usize,
    /// Initial activation probability, also the per-attempt success probability.
    pub rho: f64,
}

/// Motion parameters. None of these are prescribed by the models themselves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Kinematics {
    pub leader_speed: f64,
    pub max_speed: f64,
    /// Delay between consecutive ranks in the hierarchical model.
    pub rank_delay: usize,
    /// Delay range (inclusive) for direct followers in DM and IC.
    pub delay_min: usize,
    pub delay_max: usize,
    /// Standard deviation of observation noise.
    pub noise: f64,
    /// Personal offsets are drawn uniformly from a disc of this radius.
    pub offset_radius: f64,
    /// Heading change between consecutive segments, drawn from this range (degrees, either sign).
    pub turn_min_deg: f64,
    pub turn_max_deg: f64,
    /// Angle between neighbouring sub-group headings in a split.
    pub split_angle_deg: f64,
    /// Steps at the end of each event's last segment during which its leader stands still.
    pub halt: usize,
    /// Steps a former leader spends stepping sideways out of the group's way.
    pub yield_steps: usize,
}

impl Default for Kinematics {
    fn default() -> Self {
        Kinematics {
            leader_speed: 1.0,
            max_speed: 1.5,
            rank_delay: 2,
            delay_min: 2,
            delay_max: 5,
            noise: 0.1,
            offset_radius: 1.0,
            turn_min_deg: 60.0,
            turn_max_deg: 120.0,
            split_angle_deg: 120.0,
            halt: 60,
            yield_steps: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub model: Model,
    pub dynamics: Dynamics,
    pub n: usize,
    pub length: usize,
    pub events: usize,
    pub event_len: usize,
    pub segment_len: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ic: Option<IcParams>,
    pub seed: u64,
    #[serde(default)]
    pub kinematics: Kinematics,
}

impl ScenarioSpec {
    /// Thirty individuals, five 800-step events of four 200-step segments.
    pub fn new(model: Model, dynamics: Dynamics, seed: u64) -> Self {
        ScenarioSpec {
            model,
            dynamics,
            n: 30,
            length: 4000,
            events: 5,
            event_len: 800,
            segment_len: 200,
            ic: (model == Model::IndependentCascade).then_some(IcParams { k: 5, rho: 0.5 }),
            seed,
            kinematics: Kinematics::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        let min_n = match self.dynamics {
            Dynamics::Type1 => 7,
            Dynamics::Type2 => 4,
        };
        if self.n < min_n {
            return bad(format!("{} needs at least {min_n} individuals", self.dynamics));
        }
        if self.events == 0 || self.segment_len == 0 {
            return bad("events and segment length must be positive".into());
        }
        if 4 * self.segment_len > self.event_len {
            return bad("four segments must fit into one event".into());
        }
        if self.events * self.event_len > self.length {
            return bad(format!(
                "{} events of {} steps exceed length {}",
                self.events, self.event_len, self.length
            ));
        }
        match (self.model, self.ic) {
            (Model::IndependentCascade, None) => return bad("IC model needs k and rho".into()),
            (Model::IndependentCascade, Some(p)) if p.k == 0 || !(0.0..=1.0).contains(&p.rho) => {
                return bad("IC needs k >= 1 and rho in [0, 1]".into())
            }
            (m, Some(_)) if m != Model::IndependentCascade => return bad("k and rho only apply to IC".into()),
            _ => {}
        }
        let k = &self.kinematics;
        if k.halt >= self.segment_len {
            return bad("halt must be shorter than a segment".into());
        }
        if k.delay_min == 0 || k.delay_min > k.delay_max || k.rank_delay == 0 {
            return bad("delays must be positive with delay_min <= delay_max".into());
        }
        if !(k.leader_speed > 0.0 && k.max_speed >= k.leader_speed && k.noise >= 0.0 && k.offset_radius >= 0.0) {
            return bad("speeds must be positive with max_speed >= leader_speed".into());
        }
        Ok(())
    }
}

/// Individual ids are `1..=n`; index `k` holds id `k + 1`.
pub fn scenario_ids(n: usize) -> Vec<IndividualId> {
    (1..=n).map(|k| IndividualId(k.to_string())).collect()
}

/// Split rosters as indices: the sub-groups led by 3, 4 and 2.
///
/// With thirty individuals these are {1,3,5..10}, {4,11..19} and {2,20..30}.
/// Other sizes split 5..=n into three consecutive blocks in the same 6:9:11
/// proportion.
pub fn split_clusters(n: usize) -> [Vec<usize>; 3] {
    let rest: Vec<usize> = (4..n).collect();
    let m = rest.len();
    let s1 = ((m as f64) * 6.0 / 26.0).round() as usize;
    let s2 = ((m as f64) * 9.0 / 26.0).round() as usize;
    let s1 = s1.clamp(1, m.saturating_sub(2).max(1));
    let s2 = s2.clamp(1, m.saturating_sub(s1 + 1).max(1));
    let mut c1 = vec![0, 2];
    c1.extend(&rest[..s1]);
    let mut c2 = vec![3];
    c2.extend(&rest[s1..s1 + s2]);
    let mut c3 = vec![1];
    c3.extend(&rest[s1 + s2..]);
    [c1, c2, c3]
}

#[derive(Debug, Clone, PartialEq)]
struct Group {
    leader: usize,
    members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
struct Segment {
    start: usize,
    end: usize,
    groups: Vec<Group>,
    /// Last event segment: the leader halts for the final steps.
    halts: bool,
}

fn script(spec: &ScenarioSpec) -> Vec<Segment> {
    let all: Vec<usize> = (0..spec.n).collect();
    let whole = |leader| vec![Group { leader, members: all.clone() }];
    let mut out = Vec::new();
    for e in 0..spec.events {
        let base = e * spec.event_len;
        for s in 0..4 {
            let groups = match (spec.dynamics, s) {
                (Dynamics::Type2, s) => whole(s),
                (Dynamics::Type1, 0) => whole(0),
                (Dynamics::Type1, 1) => {
                    let [c1, c2, c3] = split_clusters(spec.n);
                    vec![
                        Group { leader: 1, members: c3 },
                        Group { leader: 2, members: c1 },
                        Group { leader: 3, members: c2 },
                    ]
                }
                (Dynamics::Type1, 2) => whole(2),
                (Dynamics::Type1, _) => whole(3),
            };
            out.push(Segment {
                start: base + s * spec.segment_len,
                end: base + (s + 1) * spec.segment_len,
                groups,
                halts: s == 3,
            });
        }
    }
    out
}

/// Scripted leader set at every time step (empty between events).
fn leader_log(spec: &ScenarioSpec, segments: &[Segment]) -> Vec<LeaderSet> {
    let mut log = vec![LeaderSet::empty(); spec.length];
    for seg in segments {
        let set = LeaderSet::new(seg.groups.iter().map(|g| g.leader));
        for entry in &mut log[seg.start..seg.end] {
            *entry = set.clone();
        }
    }
    log
}

/// Global rank order of the hierarchical model, highest rank first.
///
/// Linear dynamics rank by id. Under split dynamics every sub-group forms a
/// contiguous block headed by its members in id order, so each sub-group
/// already travels together before it splits off.
fn ranking(spec: &ScenarioSpec) -> Vec<usize> {
    match spec.dynamics {
        Dynamics::Type2 => (0..spec.n).collect(),
        Dynamics::Type1 => split_clusters(spec.n).concat(),
    }
}

/// Chain order for the hierarchical model: the leader, then the other group
/// members in rank order, starting after the leader and wrapping around.
fn rank_order(group: &Group, ranking: &[usize]) -> Vec<usize> {
    let at = ranking.iter().position(|&m| m == group.leader).unwrap_or(0);
    let mut order = vec![group.leader];
    order.extend(
        ranking[at + 1..]
            .iter()
            .chain(&ranking[..at])
            .filter(|m| group.members.contains(m)),
    );
    order
}

fn unit(angle: f64) -> Point {
    Point::new(angle.cos(), angle.sin())
}

/// A former leader stepping out of the way after handing over.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Yield {
    /// Sideways direction, away from the new heading.
    aside: Point,
    aside_until: usize,
    /// Stands still from `aside_until` until this step, then follows.
    wait_until: usize,
}

/// What one individual does during one segment.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Role {
    Lead {
        heading: f64,
        out_and_back: bool,
    },
    Follow {
        target: usize,
        delay: usize,
        /// The target's trail is only used from this step on.
        since: usize,
        yielding: Option<Yield>,
        /// Stands still before this step because its target does.
        hold_until: usize,
    },
    Idle,
}

struct World<'a> {
    spec: &'a ScenarioSpec,
    rng: SimRng,
    /// True positions, `pos[t][i]`.
    pos: Vec<Vec<Point>>,
    offsets: Vec<Point>,
    heading: f64,
    active: Vec<bool>,
    attempted: Vec<Vec<bool>>,
    newly_active: Vec<usize>,
}

impl World<'_> {
    fn random_turn(&mut self) -> f64 {
        let k = &self.spec.kinematics;
        let mag = self.rng.random_range(k.turn_min_deg..=k.turn_max_deg).to_radians();
        if self.rng.random_bool(0.5) {
            mag
        } else {
            -mag
        }
    }

    fn roles(&mut self, seg: &Segment, prev: &[Role]) -> Vec<Role> {
        let spec = self.spec;
        let k = spec.kinematics;
        let first = seg.start == 0;
        let mut roles = vec![Role::Idle; spec.n];
        let base = if first {
            self.rng.random_range(0.0..std::f64::consts::TAU)
        } else {
            self.heading + self.random_turn()
        };
        self.heading = base;
        let split = seg.groups.len() > 1;
        for (g_idx, g) in seg.groups.iter().enumerate() {
            let heading = if split {
                base + (g_idx as f64 - 1.0) * k.split_angle_deg.to_radians()
            } else {
                base
            };
            roles[g.leader] = Role::Lead {
                heading,
                out_and_back: split,
            };
            let mut links = Vec::new();
            match spec.model {
                Model::Hierarchical => {
                    let order = rank_order(g, &ranking(spec));
                    if first {
                        // Start strung out along the chain rather than in a clump.
                        let back = unit(heading + std::f64::consts::PI);
                        for (r, &m) in order.iter().enumerate() {
                            let d = (r * k.rank_delay) as f64 * k.leader_speed;
                            let o = self.offsets[m];
                            self.pos[0][m] = Point::new(o.x + d * back.x, o.y + d * back.y);
                        }
                    }
                    for (r, w) in order.windows(2).enumerate() {
                        // Time for the hand-over point to reach this rank.
                        links.push((w[1], w[0], k.rank_delay, r * k.rank_delay));
                    }
                }
                Model::Dictatorship | Model::IndependentCascade => {
                    for &m in g.members.iter().filter(|&&m| m != g.leader) {
                        let delay = self.rng.random_range(k.delay_min..=k.delay_max);
                        links.push((m, g.leader, delay, 0));
                    }
                }
            }
            let v = unit(heading);
            let mut hold = vec![0usize; spec.n];
            for (m, target, delay, lag) in links {
                let was = prev[m];
                let yielding = match was {
                    Role::Lead { heading: old, .. } => {
                        let mut aside = unit(old + std::f64::consts::FRAC_PI_2);
                        if aside.x * v.x + aside.y * v.y > 0.0 {
                            aside = Point::new(-aside.x, -aside.y);
                        }
                        Some(Yield {
                            aside,
                            aside_until: seg.start + k.yield_steps,
                            wait_until: seg.start + (lag + delay).max(k.yield_steps),
                        })
                    }
                    _ => None,
                };
                let hold_until = if hold[target] > seg.start { hold[target] + delay } else { 0 };
                hold[m] = yielding.map_or(0, |y| y.wait_until);
                let same = matches!(was, Role::Follow { target: t, .. } if t == target);
                roles[m] = Role::Follow {
                    target,
                    delay,
                    since: if same { 0 } else { seg.start },
                    yielding,
                    hold_until,
                };
            }
        }
        roles
    }

    fn start_event(&mut self, seg: &Segment) {
        if self.spec.model != Model::IndependentCascade {
            return;
        }
        let p = self.spec.ic.expect("validated");
        let n = self.spec.n;
        self.active = (0..n).map(|_| self.rng.random_bool(p.rho)).collect();
        self.attempted = vec![vec![false; n]; n];
        for g in &seg.groups {
            self.active[g.leader] = true;
        }
        self.newly_active = (0..n).filter(|&i| self.active[i]).collect();
    }

    /// One wave of the cascade: every newly active individual tries its k
    /// nearest inactive neighbours once.
    fn cascade(&mut self, t: usize) {
        let p = self.spec.ic.expect("validated");
        let wave = std::mem::take(&mut self.newly_active);
        let mut next = Vec::new();
        for src in wave {
            let here = self.pos[t][src];
            let mut cand: Vec<usize> = (0..self.spec.n)
                .filter(|&j| !self.active[j] && !self.attempted[src][j])
                .collect();
            cand.sort_by(|&a, &b| {
                here.dist(self.pos[t][a])
                    .total_cmp(&here.dist(self.pos[t][b]))
                    .then(a.cmp(&b))
            });
            for &j in cand.iter().take(p.k) {
                self.attempted[src][j] = true;
                if self.rng.random_bool(p.rho) {
                    self.active[j] = true;
                    next.push(j);
                }
            }
        }
        self.newly_active = next;
    }

    fn step(&mut self, t: usize, roles: &[Role], seg: &Segment) {
        let k = self.spec.kinematics;
        let cur = self.pos[t].clone();
        let mut next = cur.clone();
        let halting = seg.halts && t + k.halt >= seg.end;
        let elapsed = t - seg.start;
        let half = (seg.end - seg.start) / 2;
        for (i, role) in roles.iter().enumerate() {
            match *role {
                Role::Lead { heading, out_and_back } => {
                    if halting {
                        continue;
                    }
                    let dir = if out_and_back && elapsed >= half { heading + std::f64::consts::PI } else { heading };
                    let u = unit(dir);
                    next[i] = Point::new(cur[i].x + k.leader_speed * u.x, cur[i].y + k.leader_speed * u.y);
                }
                Role::Follow {
                    target,
                    delay,
                    since,
                    yielding,
                    hold_until,
                } => {
                    if self.spec.model == Model::IndependentCascade && !self.active[i] {
                        continue;
                    }
                    if let Some(y) = yielding {
                        if t < y.aside_until {
                            let v = k.leader_speed;
                            next[i] = Point::new(cur[i].x + v * y.aside.x, cur[i].y + v * y.aside.y);
                            continue;
                        }
                        if t < y.wait_until {
                            continue;
                        }
                    }
                    if t < hold_until {
                        continue;
                    }
                    let anchor = self.pos[t.saturating_sub(delay).max(since.min(t))][target];
                    let goal = Point::new(
                        anchor.x + self.offsets[i].x - self.offsets[target].x,
                        anchor.y + self.offsets[i].y - self.offsets[target].y,
                    );
                    let (dx, dy) = (goal.x - cur[i].x, goal.y - cur[i].y);
                    let d = dx.hypot(dy);
                    let s = if d > k.max_speed { k.max_speed / d } else { 1.0 };
                    next[i] = Point::new(cur[i].x + dx * s, cur[i].y + dy * s);
                }
                Role::Idle => {}
            }
        }
        self.pos.push(next);
    }
}

/// Everything the evaluation compares against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub dynamics: Dynamics,
    pub ids: Vec<IndividualId>,
    /// Diagram states in cycle order.
    pub states: Vec<LeaderSet>,
    /// Self-transition-free transition matrix over `states`.
    pub diagram: Vec<Vec<f64>>,
    /// Co-faction support, zero diagonal.
    pub cofaction: Vec<Vec<f64>>,
    /// Initiators, as indices.
    pub leaders: Vec<usize>,
    /// `leadfollow[i][j]`: support of follower `i` towards initiator `j`.
    pub leadfollow: Vec<Vec<f64>>,
    pub clusters: ClusterSet,
    /// Scripted leader set at every time step.
    pub leader_log: Vec<LeaderSet>,
}

impl GroundTruth {
    pub fn state_labels(&self) -> Vec<String> {
        self.states.iter().map(|s| s.label(&self.ids)).collect()
    }
}

/// Target artifacts for a scenario, independent of the simulated motion.
pub fn ground_truth(spec: &ScenarioSpec) -> Result<GroundTruth> {
    spec.validate()?;
    let n = spec.n;
    let states: Vec<LeaderSet> = match spec.dynamics {
        Dynamics::Type1 => vec![
            LeaderSet::new([0]),
            LeaderSet::new([1, 2, 3]),
            LeaderSet::new([2]),
            LeaderSet::new([3]),
        ],
        Dynamics::Type2 => (0..4).map(|k| LeaderSet::new([k])).collect(),
    };
    let mut diagram = vec![vec![0.0; 4]; 4];
    for (i, row) in diagram.iter_mut().enumerate() {
        row[(i + 1) % 4] = 1.0;
    }
    let clusters = match spec.dynamics {
        Dynamics::Type1 => ClusterSet::new(split_clusters(n).to_vec()),
        Dynamics::Type2 => ClusterSet::new(vec![(0..n).collect()]),
    };
    let label = clusters.labels(n)?;
    let cofaction = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| match (i == j, label[i] == label[j]) {
                    (true, _) => 0.0,
                    (false, true) => 1.0,
                    (false, false) => 0.75,
                })
                .collect()
        })
        .collect();
    let mut leadfollow = vec![vec![0.0; n]; n];
    match spec.dynamics {
        Dynamics::Type2 => {
            for row in &mut leadfollow {
                row[..4].fill(0.25);
            }
        }
        Dynamics::Type1 => {
            let [c1, c2, c3] = split_clusters(n);
            for row in leadfollow.iter_mut() {
                row[0] = 0.25;
                row[2] = 0.25;
                row[3] = 0.25;
            }
            for &i in &c3 {
                leadfollow[i][1] = 0.25;
            }
            for &i in &c1 {
                leadfollow[i][2] = 0.5;
            }
            for &i in &c2 {
                leadfollow[i][3] = 0.5;
            }
        }
    }
    let segments = script(spec);
    Ok(GroundTruth {
        dynamics: spec.dynamics,
        ids: scenario_ids(n),
        states,
        diagram,
        cofaction,
        leaders: vec![0, 1, 2, 3],
        leadfollow,
        clusters,
        leader_log: leader_log(spec, &segments),
    })
}

/// Runs the scenario. The same spec always yields the same dataset.
pub fn simulate(spec: &ScenarioSpec) -> Result<(Dataset, GroundTruth)> {
    let truth = ground_truth(spec)?;
    let segments = script(spec);
    let k = spec.kinematics;
    let n = spec.n;
    let mut rng = seeded_rng(spec.seed);
    let offsets: Vec<Point> = (0..n)
        .map(|_| {
            let r = k.offset_radius * rng.random::<f64>().sqrt();
            let a = rng.random_range(0.0..std::f64::consts::TAU);
            Point::new(r * a.cos(), r * a.sin())
        })
        .collect();
    let mut world = World {
        spec,
        rng,
        pos: vec![offsets.clone()],
        offsets,
        heading: 0.0,
        active: vec![true; n],
        attempted: Vec::new(),
        newly_active: Vec::new(),
    };

    let mut roles = vec![Role::Idle; n];
    let mut seg_iter = segments.iter().peekable();
    let mut current: Option<&Segment> = None;
    for t in 0..spec.length - 1 {
        if let Some(seg) = seg_iter.next_if(|s| s.start == t) {
            let event_start = seg.start % spec.event_len == 0;
            if event_start {
                world.start_event(seg);
            }
            roles = world.roles(seg, &roles);
            if spec.model == Model::IndependentCascade {
                for g in &seg.groups {
                    if !world.active[g.leader] {
                        world.active[g.leader] = true;
                        world.newly_active.push(g.leader);
                    }
                }
            }
            current = Some(seg);
        }
        if current.is_some_and(|s| t >= s.end) {
            current = None;
            // Between events everyone keeps settling on their last target.
            for r in &mut roles {
                if matches!(r, Role::Lead { .. }) {
                    *r = Role::Idle;
                }
            }
        }
        if spec.model == Model::IndependentCascade && current.is_some() {
            world.cascade(t);
        }
        let seg = current.cloned().unwrap_or(Segment {
            start: t,
            end: t + 1,
            groups: Vec::new(),
            halts: false,
        });
        world.step(t, &roles, &seg);
    }

    let noise = Normal::new(0.0, k.noise.max(0.0)).map_err(|e| Error::InvalidSpec(e.to_string()))?;
    let mut rng = world.rng;
    let mut series: Vec<Vec<Point>> = vec![Vec::with_capacity(spec.length); n];
    for row in &world.pos {
        for (i, p) in row.iter().enumerate() {
            let (ex, ey) = if k.noise > 0.0 {
                (noise.sample(&mut rng), noise.sample(&mut rng))
            } else {
                (0.0, 0.0)
            };
            series[i].push(Point::new(p.x + ex, p.y + ey));
        }
    }
    let trajectories = truth
        .ids
        .iter()
        .zip(series)
        .map(|(id, pts)| Trajectory::new(id.clone(), 0, pts))
        .collect();
    let meta = DatasetMeta {
        source: format!("simulated {} {}", spec.model, spec.dynamics),
        seed: Some(spec.seed),
        model: Some(spec.model.to_string()),
    };
    Ok((Dataset::new(trajectories, meta)?, truth))
}
