//! Dataset loading: trajectory CSV files and lane model JSON.
//!
//! The trajectory format is one row per object per frame with the header
//! `object_id,frame,t,x,y,heading,v,width,length,class`. Objects are
//! grouped by id, ordered by time, split at sampling gaps and associated
//! with lanes per frame.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{LaneId, LaneKind, LaneModel, Point};

#[derive(
    Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct ObjectId(pub String);

impl ObjectId {
    pub fn new(s: impl Into<String>) -> Self {
        ObjectId(s.into())
    }
}

impl std::fmt::Display for ObjectId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectClass {
    Car,
    Truck,
    Other,
}

/// One tracked object state (a single CSV row after validation).
#[derive(Debug, Clone)]
pub struct VehicleState {
    pub frame: u64,
    pub t: f64,
    pub position: Point,
    /// Heading in radians, map frame, counterclockwise from +x.
    pub heading: f64,
    /// Speed in m/s when reported by the tracker.
    pub v: Option<f64>,
    /// Lane the vehicle center lies in; `None` is an explicit off-road
    /// marker.
    pub lane: Option<LaneId>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub id: ObjectId,
    pub class: ObjectClass,
    /// Vehicle width (m), lateral extent.
    pub width: f64,
    /// Vehicle length (m), longitudinal extent.
    pub length: f64,
    pub states: Vec<VehicleState>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceRoad {
    OnRamp,
    Highway,
}

impl Trajectory {
    pub fn start_t(&self) -> f64 {
        self.states.first().map(|s| s.t).unwrap_or(f64::NAN)
    }

    pub fn end_t(&self) -> f64 {
        self.states.last().map(|s| s.t).unwrap_or(f64::NAN)
    }

    /// Median sampling period.
    pub fn median_dt(&self) -> f64 {
        median_dt(&self.states)
    }

    /// Traveled path length: the sum of distances between consecutive
    /// positions.
    pub fn path_length(&self) -> f64 {
        self.states
            .windows(2)
            .map(|w| w[0].position.dist(w[1].position))
            .sum()
    }

    /// Position at time `t`, linearly interpolated between frames.
    /// `None` outside the recorded time span.
    pub fn position_at(&self, t: f64) -> Option<Point> {
        let states = &self.states;
        if t < states.first()?.t || t > states.last()?.t {
            return None;
        }
        let i = states.partition_point(|s| s.t <= t);
        if i == 0 {
            return Some(states[0].position);
        }
        if i == states.len() {
            return Some(states[states.len() - 1].position);
        }
        let (a, b) = (&states[i - 1], &states[i]);
        let u = (t - a.t) / (b.t - a.t);
        Some(a.position + (b.position - a.position) * u)
    }
}

fn median_dt(states: &[VehicleState]) -> f64 {
    let mut dts: Vec<f64> = states.windows(2).map(|w| w[1].t - w[0].t).collect();
    if dts.is_empty() {
        return 0.0;
    }
    dts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = dts.len();
    if n % 2 == 1 {
        dts[n / 2]
    } else {
        0.5 * (dts[n / 2 - 1] + dts[n / 2])
    }
}

/// Raw CSV row. `v` may be empty.
#[derive(Debug, Deserialize, Serialize)]
struct CsvRow {
    object_id: String,
    frame: u64,
    t: f64,
    x: f64,
    y: f64,
    heading: f64,
    v: Option<f64>,
    width: f64,
    length: f64,
    class: ObjectClass,
}

/// Loads trajectories from CSV and the lane model from JSON, associating
/// every state with a lane (or an explicit off-road marker).
///
/// Objects are ordered by time; a sampling gap larger than 3x the median
/// period splits the object into separate trajectories with `#k` id
/// suffixes. Single-state fragments are dropped.
pub fn load_dataset(
    trajectory_path: impl AsRef<Path>,
    lane_path: impl AsRef<Path>,
) -> Result<(Vec<Trajectory>, LaneModel)> {
    let lanes = LaneModel::load_json(lane_path)?;
    let trajectories = load_trajectories_csv(trajectory_path, &lanes)?;
    Ok((trajectories, lanes))
}

pub fn load_trajectories_csv(
    path: impl AsRef<Path>,
    lanes: &LaneModel,
) -> Result<Vec<Trajectory>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_open_error(path, e))?;

    // Group rows per object, keeping first-seen order for determinism of
    // the output ordering contract (sorted later anyway).
    let mut groups: BTreeMap<String, Vec<CsvRow>> = BTreeMap::new();
    for (idx, row) in reader.deserialize::<CsvRow>().enumerate() {
        let line = idx as u64 + 2; // header is line 1
        let row = row.map_err(|e| Error::CsvRow { line, msg: e.to_string() })?;
        validate_row(&row, line)?;
        groups.entry(row.object_id.clone()).or_default().push(row);
    }

    let mut out = Vec::new();
    for (id, mut rows) in groups {
        rows.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap());
        for w in rows.windows(2) {
            if w[1].t <= w[0].t {
                return Err(Error::Input(format!(
                    "object {id}: duplicate or non-increasing timestamp at t={}",
                    w[1].t
                )));
            }
        }
        let states: Vec<VehicleState> = rows
            .iter()
            .map(|r| {
                let position = Point::new(r.x, r.y);
                VehicleState {
                    frame: r.frame,
                    t: r.t,
                    position,
                    heading: r.heading,
                    v: r.v,
                    lane: lanes.lane_at(position).map(|l| l.id.clone()),
                }
            })
            .collect();
        let first = &rows[0];
        let pieces = split_on_gaps(states);
        let suffix_needed = pieces.len() > 1;
        for (k, piece) in pieces.into_iter().enumerate() {
            if piece.len() < 2 {
                continue;
            }
            let piece_id = if suffix_needed {
                ObjectId::new(format!("{id}#{}", k + 1))
            } else {
                ObjectId::new(id.clone())
            };
            out.push(Trajectory {
                id: piece_id,
                class: first.class,
                width: first.width,
                length: first.length,
                states: piece,
            });
        }
    }
    Ok(out)
}

fn csv_open_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Input(format!("cannot read {}: {other:?}", path.display())),
    }
}

fn validate_row(row: &CsvRow, line: u64) -> Result<()> {
    let bad = |msg: String| Err(Error::CsvRow { line, msg });
    if row.object_id.is_empty() {
        return bad("empty object_id".into());
    }
    if !row.width.is_finite() || row.width <= 0.0 {
        return bad(format!("width must be positive, got {}", row.width));
    }
    if !row.length.is_finite() || row.length <= 0.0 {
        return bad(format!("length must be positive, got {}", row.length));
    }
    for (name, v) in [("t", row.t), ("x", row.x), ("y", row.y), ("heading", row.heading)] {
        if !v.is_finite() {
            return bad(format!("non-finite {name}"));
        }
    }
    if let Some(v) = row.v {
        if !v.is_finite() || v < 0.0 {
            return bad(format!("invalid speed {v}"));
        }
    }
    Ok(())
}

fn split_on_gaps(states: Vec<VehicleState>) -> Vec<Vec<VehicleState>> {
    let med = median_dt(&states);
    if med <= 0.0 {
        return vec![states];
    }
    let mut pieces = vec![Vec::new()];
    for (i, state) in states.into_iter().enumerate() {
        if i > 0 {
            let prev_t = pieces.last().unwrap().last().map(|s: &VehicleState| s.t);
            if let Some(prev_t) = prev_t {
                if state.t - prev_t > 3.0 * med {
                    pieces.push(Vec::new());
                }
            }
        }
        pieces.last_mut().unwrap().push(state);
    }
    pieces
}

/// Drops trajectories whose traveled path length does not exceed half the
/// on-ramp lane length (measured along its left border). Short clipped
/// tracks carry too little context for maneuver decoding.
pub fn filter_clipped(trajectories: Vec<Trajectory>, lanes: &LaneModel) -> Vec<Trajectory> {
    let threshold = 0.5 * lanes.on_ramp().left_border.total_length();
    trajectories
        .into_iter()
        .filter(|t| t.path_length() > threshold)
        .collect()
}

/// Labels the road a trajectory originates from: on-ramp when it starts
/// on the acceleration lane and ends on a mainline lane, highway
/// otherwise. This is an evaluation-side labeler, not part of extraction.
pub fn associate_road(trajectory: &Trajectory, lanes: &LaneModel) -> SourceRoad {
    let lane_kind = |id: &LaneId| lanes.lane(id).map(|l| l.kind);
    let first = trajectory.states.iter().find_map(|s| s.lane.as_ref());
    let last = trajectory.states.iter().rev().find_map(|s| s.lane.as_ref());
    match (first.and_then(lane_kind), last.and_then(lane_kind)) {
        (Some(LaneKind::OnRamp), Some(LaneKind::Mainline)) => SourceRoad::OnRamp,
        _ => SourceRoad::Highway,
    }
}

/// Writes trajectories in the CSV interchange format.
pub fn write_trajectories_csv(
    path: impl AsRef<Path>,
    trajectories: &[Trajectory],
) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_open_error(path, e))?;
    // Written by hand so an empty dataset still carries the schema.
    writer
        .write_record([
            "object_id", "frame", "t", "x", "y", "heading", "v", "width", "length", "class",
        ])
        .map_err(|e| Error::Input(format!("csv write: {e}")))?;
    for traj in trajectories {
        for s in &traj.states {
            writer
                .serialize(CsvRow {
                    object_id: traj.id.0.clone(),
                    frame: s.frame,
                    t: s.t,
                    x: s.position.x,
                    y: s.position.y,
                    heading: s.heading,
                    v: s.v,
                    width: traj.width,
                    length: traj.length,
                    class: traj.class,
                })
                .map_err(|e| Error::Input(format!("csv write: {e}")))?;
        }
    }
    writer
        .flush()
        .map_err(|e| Error::io(path, e))
}
