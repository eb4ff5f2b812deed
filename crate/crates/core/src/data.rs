//! Trajectory data model, CSV ingestion/export and sliding-window segmentation.
//!
//! Every individual in a [`Dataset`] is sampled on the same integer time base
//! with unit stride. Positions are planar; geodetic data must be projected
//! before ingestion.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Opaque individual identifier.
///
/// Ordering is "natural": identifiers that both parse as integers compare
/// numerically, so `"2" < "10"`. Everything else compares as text.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndividualId(pub String);

impl IndividualId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for IndividualId {
    fn from(s: &str) -> Self {
        IndividualId(s.to_owned())
    }
}

impl From<String> for IndividualId {
    fn from(s: String) -> Self {
        IndividualId(s)
    }
}

impl fmt::Display for IndividualId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Ord for IndividualId {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.0.parse::<i64>(), other.0.parse::<i64>()) {
            (Ok(a), Ok(b)) => a.cmp(&b).then_with(|| self.0.cmp(&other.0)),
            _ => self.0.cmp(&other.0),
        }
    }
}

impl PartialOrd for IndividualId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A planar position.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// One individual's position series.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub id: IndividualId,
    /// Time of `points[0]`; sample `k` sits at `t0 + k`.
    pub t0: i64,
    pub points: Vec<Point>,
}

impl Trajectory {
    pub fn new(id: impl Into<IndividualId>, t0: i64, points: Vec<Point>) -> Self {
        Trajectory {
            id: id.into(),
            t0,
            points,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub source: String,
    pub seed: Option<u64>,
    pub model: Option<String>,
}

/// A validated set of equal-length trajectories, sorted by id.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    trajectories: Vec<Trajectory>,
    pub meta: DatasetMeta,
}

impl Dataset {
    /// Validates and sorts the trajectories.
    pub fn new(mut trajectories: Vec<Trajectory>, meta: DatasetMeta) -> Result<Self> {
        if trajectories.len() < 2 {
            return Err(Error::TooFewIndividuals(trajectories.len()));
        }
        trajectories.sort_by(|a, b| a.id.cmp(&b.id));
        for pair in trajectories.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(Error::DuplicateId(pair[0].id.to_string()));
            }
        }
        let expected = trajectories[0].len();
        let t0 = trajectories[0].t0;
        for tr in &trajectories {
            if tr.len() != expected || tr.is_empty() {
                return Err(Error::RaggedLengths {
                    id: tr.id.to_string(),
                    len: tr.len(),
                    expected,
                });
            }
            if tr.t0 != t0 {
                return Err(Error::MisalignedTime {
                    id: tr.id.to_string(),
                    t: tr.t0,
                });
            }
        }
        Ok(Dataset { trajectories, meta })
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    /// Number of individuals.
    pub fn n(&self) -> usize {
        self.trajectories.len()
    }

    /// Series length `T`.
    pub fn len(&self) -> usize {
        self.trajectories[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t0(&self) -> i64 {
        self.trajectories[0].t0
    }

    pub fn ids(&self) -> Vec<IndividualId> {
        self.trajectories.iter().map(|t| t.id.clone()).collect()
    }

    pub fn index_of(&self, id: &IndividualId) -> Option<usize> {
        self.trajectories.iter().position(|t| &t.id == id)
    }

    pub fn positions(&self, individual: usize) -> &[Point] {
        &self.trajectories[individual].points
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["id", "t", "x", "y"])?;
        for tr in &self.trajectories {
            for (k, p) in tr.points.iter().enumerate() {
                w.write_record([
                    tr.id.as_str(),
                    &(tr.t0 + k as i64).to_string(),
                    &p.x.to_string(),
                    &p.y.to_string(),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// Column names used when reading a trajectory CSV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSchema {
    pub id: String,
    pub t: String,
    pub x: String,
    pub y: String,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            id: "id".into(),
            t: "t".into(),
            x: "x".into(),
            y: "y".into(),
        }
    }
}

/// What to do with missing time steps inside a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GapPolicy {
    #[default]
    Reject,
    /// Fill interior gaps by linear interpolation between neighbours.
    Interpolate,
}

pub fn ingest_csv(path: impl AsRef<Path>, schema: &CsvSchema, gaps: GapPolicy) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut ds = read_csv(file, schema, gaps)?;
    ds.meta.source = path.display().to_string();
    Ok(ds)
}

pub fn read_csv<R: Read>(reader: R, schema: &CsvSchema, gaps: GapPolicy) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_owned()))
    };
    let (ci, ct, cx, cy) = (col(&schema.id)?, col(&schema.t)?, col(&schema.x)?, col(&schema.y)?);

    let mut rows: BTreeMap<IndividualId, Vec<(i64, Point)>> = BTreeMap::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |c: usize, name: &str| -> Result<f64> {
            let raw = record.get(c).unwrap_or("");
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::NonNumericCoordinate {
                    column: name.to_owned(),
                    value: raw.to_owned(),
                    line,
                })
        };
        let raw_t = record.get(ct).unwrap_or("");
        let t = raw_t.parse::<i64>().map_err(|_| Error::NonNumericCoordinate {
            column: schema.t.clone(),
            value: raw_t.to_owned(),
            line,
        })?;
        let p = Point::new(field(cx, &schema.x)?, field(cy, &schema.y)?);
        let id = IndividualId::from(record.get(ci).unwrap_or(""));
        rows.entry(id).or_default().push((t, p));
    }

    let mut trajectories = Vec::with_capacity(rows.len());
    for (id, mut samples) in rows {
        samples.sort_by_key(|&(t, _)| t);
        let points = regularize(&id, &samples, gaps)?;
        trajectories.push(Trajectory::new(id, samples[0].0, points));
    }
    Dataset::new(trajectories, DatasetMeta::default())
}

fn regularize(id: &IndividualId, samples: &[(i64, Point)], gaps: GapPolicy) -> Result<Vec<Point>> {
    let mut points = vec![samples[0].1];
    for w in samples.windows(2) {
        let ((ta, pa), (tb, pb)) = (w[0], w[1]);
        let step = tb - ta;
        if step == 1 {
            points.push(pb);
        } else if step > 1 && gaps == GapPolicy::Interpolate {
            for k in 1..=step {
                let a = k as f64 / step as f64;
                points.push(Point::new(pa.x + a * (pb.x - pa.x), pa.y + a * (pb.y - pa.y)));
            }
        } else {
            return Err(Error::NonMonotoneTime {
                id: id.to_string(),
                t: tb,
            });
        }
    }
    Ok(points)
}

/// Window length `omega` and slide `delta`, both in time steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub omega: usize,
    pub delta: usize,
}

impl WindowSpec {
    /// Slide defaults to a tenth of the window, at least one step.
    pub fn with_default_delta(omega: usize) -> Self {
        let delta = ((omega as f64) * 0.1).round().max(1.0) as usize;
        WindowSpec { omega, delta }
    }

    pub fn validate(&self, len: usize) -> Result<()> {
        if self.omega == 0 || self.delta == 0 {
            return Err(Error::InvalidWindow(format!(
                "omega={} delta={} must both be positive",
                self.omega, self.delta
            )));
        }
        if self.delta > self.omega {
            return Err(Error::InvalidWindow(format!(
                "delta={} exceeds omega={}",
                self.delta, self.omega
            )));
        }
        if self.omega > len {
            return Err(Error::OmegaExceedsLength {
                omega: self.omega,
                len,
            });
        }
        Ok(())
    }
}

/// Half-open sample ranges `[k*delta, k*delta + omega)` that fit inside `len`.
pub fn windows(len: usize, spec: WindowSpec) -> Result<Vec<Range<usize>>> {
    spec.validate(len)?;
    let count = (len - spec.omega) / spec.delta + 1;
    Ok((0..count)
        .map(|k| {
            let start = k * spec.delta;
            start..start + spec.omega
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv_of(s: &str) -> Result<Dataset> {
        read_csv(s.as_bytes(), &CsvSchema::default(), GapPolicy::Reject)
    }

    #[test]
    fn minimal_csv() {
        let ds = csv_of("id,t,x,y\nA,0,0,0\nA,1,1,0\nA,2,2,0\nB,0,0,1\nB,1,1,1\nB,2,2,1\n").unwrap();
        assert_eq!(ds.n(), 2);
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.positions(1)[2], Point::new(2.0, 1.0));
    }

    #[test]
    fn ragged_lengths_rejected() {
        let err = csv_of("id,t,x,y\nA,0,0,0\nA,1,1,0\nA,2,2,0\nB,0,0,1\nB,1,1,1\n").unwrap_err();
        assert!(matches!(err, Error::RaggedLengths { .. }), "{err}");
    }

    #[test]
    fn missing_column() {
        let err = csv_of("id,time,x,y\nA,0,0,0\n").unwrap_err();
        assert!(matches!(err, Error::MissingColumn(c) if c == "t"));
    }

    #[test]
    fn non_numeric_coordinate() {
        let err = csv_of("id,t,x,y\nA,0,zero,0\nB,0,0,0\n").unwrap_err();
        assert!(matches!(err, Error::NonNumericCoordinate { .. }));
    }

    #[test]
    fn duplicate_time_is_non_monotone() {
        let err = csv_of("id,t,x,y\nA,0,0,0\nA,0,1,0\nB,0,0,1\nB,1,1,1\n").unwrap_err();
        assert!(matches!(err, Error::NonMonotoneTime { .. }));
    }

    #[test]
    fn gaps_rejected_or_interpolated() {
        let text = "id,t,x,y\nA,0,0,0\nA,2,2,4\nB,0,0,1\nB,1,1,1\nB,2,2,1\n";
        assert!(matches!(csv_of(text), Err(Error::NonMonotoneTime { .. })));
        let ds = read_csv(text.as_bytes(), &CsvSchema::default(), GapPolicy::Interpolate).unwrap();
        assert_eq!(ds.positions(0)[1], Point::new(1.0, 2.0));
    }

    #[test]
    fn custom_schema_and_natural_id_order() {
        let schema = CsvSchema {
            id: "animal".into(),
            t: "step".into(),
            x: "e".into(),
            y: "n".into(),
        };
        let text = "animal,step,e,n\n10,0,1,1\n2,0,0,0\n";
        let ds = read_csv(text.as_bytes(), &schema, GapPolicy::Reject).unwrap();
        assert_eq!(ds.ids(), vec![IndividualId::from("2"), IndividualId::from("10")]);
    }

    #[test]
    fn window_counts() {
        let w = windows(10, WindowSpec { omega: 10, delta: 1 }).unwrap();
        assert_eq!(w, vec![0..10]);
        assert_eq!(windows(4000, WindowSpec { omega: 100, delta: 10 }).unwrap().len(), 391);
        assert!(matches!(
            windows(5, WindowSpec { omega: 10, delta: 1 }),
            Err(Error::OmegaExceedsLength { .. })
        ));
        assert_eq!(WindowSpec::with_default_delta(100).delta, 10);
        assert_eq!(WindowSpec::with_default_delta(3).delta, 1);
    }

    #[test]
    fn windows_tile_with_constant_stride() {
        for len in 1..60 {
            for omega in 1..=len {
                for delta in 1..=omega {
                    let w = windows(len, WindowSpec { omega, delta }).unwrap();
                    assert_eq!(w.len(), (len - omega) / delta + 1);
                    assert_eq!(w[0].start, 0);
                    assert!(w.last().unwrap().end <= len);
                    for pair in w.windows(2) {
                        assert_eq!(pair[1].start - pair[0].start, delta);
                        assert!(pair[1].start <= pair[0].end);
                    }
                }
            }
        }
    }
}
