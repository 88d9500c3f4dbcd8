//! Post-encroachment time against surrounding traffic.
//!
//! A merging vehicle sweeps its left flank into the target lane; the
//! vehicles already on that lane sweep their right flank along it. The
//! post-encroachment time (PET) of an ego/challenger pair is measured
//! where those flank corner paths cross: for every crossing, the time
//! difference between the ego reaching the crossing point and the
//! challenger reaching it. The pair's PET is the difference of smallest
//! magnitude, signed so that a positive value means the ego arrives
//! after the challenger (it merges behind), a negative value that it
//! cuts in ahead.

use serde::{Deserialize, Serialize};

use crate::geometry::{segment_intersection, LaneId, LaneModel, Point};
use crate::ingest::{ObjectId, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CornerKind {
    Front,
    Rear,
}

/// Paths of the two corners on one side of a vehicle, one vertex per
/// frame.
#[derive(Debug, Clone)]
pub struct CornerTrack {
    pub object_id: ObjectId,
    pub side: Side,
    pub times: Vec<f64>,
    pub front: Vec<Point>,
    pub rear: Vec<Point>,
}

impl CornerTrack {
    fn corners(&self, kind: CornerKind) -> &[Point] {
        match kind {
            CornerKind::Front => &self.front,
            CornerKind::Rear => &self.rear,
        }
    }
}

/// Corner positions over time for one side of the vehicle, from center
/// position, heading and body extent.
pub fn corner_tracks(trajectory: &Trajectory, side: Side) -> CornerTrack {
    let half_w = trajectory.width / 2.0;
    let half_l = trajectory.length / 2.0;
    let lateral = match side {
        Side::Left => half_w,
        Side::Right => -half_w,
    };
    let mut times = Vec::with_capacity(trajectory.states.len());
    let mut front = Vec::with_capacity(trajectory.states.len());
    let mut rear = Vec::with_capacity(trajectory.states.len());
    for state in &trajectory.states {
        let (sin, cos) = state.heading.sin_cos();
        let local = |lx: f64, ly: f64| {
            state.position + Point::new(lx * cos - ly * sin, lx * sin + ly * cos)
        };
        times.push(state.t);
        front.push(local(half_l, lateral));
        rear.push(local(-half_l, lateral));
    }
    CornerTrack { object_id: trajectory.id.clone(), side, times, front, rear }
}

/// One crossing of an ego corner path with a challenger corner path,
/// with arrival times linearly interpolated between frames.
#[derive(Debug, Clone, Copy)]
pub struct CornerCrossing {
    pub point: Point,
    pub t_ego: f64,
    pub t_challenger: f64,
    pub ego_corner: CornerKind,
    pub challenger_corner: CornerKind,
    /// Collinear path overlap rather than a transversal crossing.
    pub collinear: bool,
}

impl CornerCrossing {
    /// Signed encroachment delay: positive when the ego arrives after
    /// the challenger.
    pub fn dt(&self) -> f64 {
        self.t_ego - self.t_challenger
    }
}

/// The first crossing (in ego path order) for each of the four corner
/// pair combinations.
pub fn find_intersections(ego: &CornerTrack, challenger: &CornerTrack) -> Vec<CornerCrossing> {
    let mut out = Vec::new();
    for ego_corner in [CornerKind::Front, CornerKind::Rear] {
        for ch_corner in [CornerKind::Front, CornerKind::Rear] {
            if let Some(hit) =
                first_path_crossing(ego, ego_corner, challenger, ch_corner)
            {
                out.push(hit);
            }
        }
    }
    out
}

fn first_path_crossing(
    ego: &CornerTrack,
    ego_corner: CornerKind,
    challenger: &CornerTrack,
    ch_corner: CornerKind,
) -> Option<CornerCrossing> {
    let ep = ego.corners(ego_corner);
    let cp = challenger.corners(ch_corner);
    if cp.is_empty() {
        return None;
    }
    // Ego segments that cannot reach the challenger path's bounding
    // box cannot contain the first crossing; skipping them keeps the
    // scan cheap on long mostly-parallel recordings.
    let eps = 1e-9;
    let (mut lo, mut hi) = (cp[0], cp[0]);
    for p in cp {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    for i in 0..ep.len().saturating_sub(1) {
        let (a, b) = (ep[i], ep[i + 1]);
        if a.x.max(b.x) < lo.x - eps
            || a.x.min(b.x) > hi.x + eps
            || a.y.max(b.y) < lo.y - eps
            || a.y.min(b.y) > hi.y + eps
        {
            continue;
        }
        // Earliest hit within this ego segment across all challenger
        // segments; the outer scan makes it the first along the ego path.
        let mut best: Option<(f64, usize, f64, bool)> = None;
        for j in 0..cp.len().saturating_sub(1) {
            if let Some(hit) = segment_intersection(ep[i], ep[i + 1], cp[j], cp[j + 1]) {
                let replace = match best {
                    None => true,
                    Some((u, ..)) => hit.u < u,
                };
                if replace {
                    best = Some((hit.u, j, hit.v, hit.degenerate));
                }
            }
        }
        if let Some((u, j, v, collinear)) = best {
            let t_ego = ego.times[i] + u * (ego.times[i + 1] - ego.times[i]);
            let t_challenger =
                challenger.times[j] + v * (challenger.times[j + 1] - challenger.times[j]);
            let point = ep[i] + (ep[i + 1] - ep[i]) * u;
            return Some(CornerCrossing {
                point,
                t_ego,
                t_challenger,
                ego_corner,
                challenger_corner: ch_corner,
                collinear,
            });
        }
    }
    None
}

/// PET of one ego/challenger pair, serialized into scenario records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PetResult {
    pub challenger_id: ObjectId,
    /// Signed PET in seconds; absent when the paths never cross.
    pub pet_s: Option<f64>,
    pub n_intersections: usize,
    /// No crossing exists (paths disjoint or parallel).
    pub degenerate: bool,
    /// The encroachment zone was occupied by both vehicles in
    /// overlapping time windows (mixed arrival order across corner
    /// pairs, or collinear path overlap).
    pub overlap_warning: bool,
}

/// Computes the PET between the ego's left flank and the challenger's
/// right flank over the full recorded paths. Time overlap of the
/// recordings is not required; arrival times are compared per crossing
/// point.
pub fn pet(ego: &Trajectory, challenger: &Trajectory) -> PetResult {
    let ego_track = corner_tracks(ego, Side::Left);
    let ch_track = corner_tracks(challenger, Side::Right);
    let crossings = find_intersections(&ego_track, &ch_track);
    let dts: Vec<f64> = crossings.iter().map(|c| c.dt()).collect();
    let pet_s = min_abs_dt(&dts);
    let mixed_signs = dts.iter().any(|&d| d > 0.0) && dts.iter().any(|&d| d < 0.0);
    let collinear = crossings.iter().any(|c| c.collinear);
    PetResult {
        challenger_id: challenger.id.clone(),
        pet_s,
        n_intersections: crossings.len(),
        degenerate: crossings.is_empty(),
        overlap_warning: !crossings.is_empty() && (mixed_signs || collinear),
    }
}

/// The signed value of smallest magnitude; first occurrence wins ties.
pub fn min_abs_dt(dts: &[f64]) -> Option<f64> {
    let mut best: Option<f64> = None;
    for &dt in dts {
        match best {
            None => best = Some(dt),
            Some(b) if dt.abs() < b.abs() => best = Some(dt),
            _ => {}
        }
    }
    best
}

/// Challenger candidates for a scenario: every other object that is on
/// the target lane within a longitudinal vicinity of the ego when the
/// ego enters the crossing phase at `t_cross`.
pub fn select_challengers<'a>(
    ego: &Trajectory,
    t_cross: f64,
    all: &'a [Trajectory],
    lanes: &LaneModel,
    target_lane: &LaneId,
    vicinity_m: f64,
) -> Vec<&'a Trajectory> {
    let Some(target) = lanes.lane(target_lane) else {
        return Vec::new();
    };
    let Some(ego_pos) = ego.position_at(t_cross) else {
        return Vec::new();
    };
    let ego_s = target.centerline.project(ego_pos).s;
    all.iter()
        .filter(|other| other.id != ego.id)
        .filter(|other| {
            let Some(pos) = other.position_at(t_cross) else {
                return false;
            };
            let on_target = lanes.lane_at(pos).map(|l| &l.id == target_lane).unwrap_or(false);
            if !on_target {
                return false;
            }
            let proj = target.centerline.project(pos);
            !proj.extrapolated && (proj.s - ego_s).abs() <= vicinity_m
        })
        .collect()
}
