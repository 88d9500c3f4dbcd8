//! Per-frame lateral observations for primitive decoding.
//!
//! Two quantities drive the maneuver model: `d_c`, the magnitude of the
//! vehicle center's offset from the reference lane centerline normalized
//! by the local lane width, and `kappa`, a binary marker set while the
//! vehicle footprint overlaps a lane border. A lane keeper sits near
//! `d_c = 0`; a vehicle centered on the neighbor lane reads `d_c = 1`.
//!
//! The reference lane is sticky. It starts as the first lane the vehicle
//! is associated with and only re-anchors onto another lane after the
//! vehicle has stayed close to that lane's center for a hold time, so a
//! completed lane change plateaus near `d_c = 1` before the reference
//! switches and `d_c` collapses back to zero.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{LaneId, LaneModel, Point};
use crate::ingest::Trajectory;

/// Lower bound on the lane width used for normalization, so taper zones
/// where borders converge do not blow up `d_c`.
const WIDTH_FLOOR_M: f64 = 0.5;

/// Distances from the vehicle center to the next lane marking on each
/// side. A side without any marking (vehicle beyond the outermost border)
/// reads infinity and flags the frame off-road.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawFeatures {
    pub d_left: f64,
    pub d_right: f64,
    pub off_road: bool,
}

/// One decoder observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    /// Normalized absolute centerline offset, 0 at the reference lane
    /// center, 1 at the neighbor lane center.
    pub d_c: f64,
    /// 1.0 while the vehicle footprint overlaps a lane marking.
    pub kappa: f64,
}

#[derive(Debug, Clone)]
pub struct FeatureSeries {
    pub object_id: crate::ingest::ObjectId,
    pub observations: Vec<Observation>,
    pub raw: Vec<RawFeatures>,
    /// Reference lane per frame; changes exactly at re-anchor frames.
    pub reference_lane: Vec<LaneId>,
}

impl FeatureSeries {
    /// Frames at which the reference lane switched.
    pub fn re_anchor_frames(&self) -> Vec<usize> {
        self.reference_lane
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[0] != w[1])
            .map(|(i, _)| i + 1)
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TrackingConfig {
    /// Re-anchor when within this fraction of a lane width of the new
    /// lane's center...
    pub re_anchor_frac: f64,
    /// ...sustained for at least this long.
    pub re_anchor_hold_s: f64,
}

impl Default for TrackingConfig {
    fn default() -> Self {
        TrackingConfig { re_anchor_frac: 0.25, re_anchor_hold_s: 0.5 }
    }
}

/// Distances to the nearest marking on the left and on the right of `p`.
///
/// All lane borders within whose longitudinal extent the point lies count
/// as markings; a border exactly under the center contributes zero to
/// both sides.
pub fn raw_features(p: Point, lanes: &LaneModel) -> RawFeatures {
    let mut d_left = f64::INFINITY;
    let mut d_right = f64::INFINITY;
    for marking in lanes.markings() {
        let proj = marking.project(p);
        if proj.extrapolated {
            continue;
        }
        // proj.d > 0 means p is left of the marking, so the marking lies
        // to the vehicle's right.
        if proj.d >= 0.0 {
            d_right = d_right.min(proj.d);
        }
        if proj.d <= 0.0 {
            d_left = d_left.min(-proj.d);
        }
    }
    RawFeatures {
        d_left,
        d_right,
        off_road: !(d_left.is_finite() && d_right.is_finite()),
    }
}

/// Builds the observation for one frame against a fixed reference lane.
pub fn transform(
    p: Point,
    vehicle_width: f64,
    lanes: &LaneModel,
    ref_lane: &LaneId,
) -> Result<Observation> {
    let lane = lanes
        .lane(ref_lane)
        .ok_or_else(|| Error::Input(format!("unknown reference lane {ref_lane}")))?;
    let offset = lanes.signed_center_offset(lane, p);
    let width = lanes.lane_width_at(lane, p).max(WIDTH_FLOOR_M);
    let raw = raw_features(p, lanes);
    let kappa = if raw.d_left.min(raw.d_right) < vehicle_width / 2.0 {
        1.0
    } else {
        0.0
    };
    Ok(Observation { d_c: offset.d.abs() / width, kappa })
}

/// Computes the full observation series for a trajectory, tracking the
/// reference lane with re-anchor hysteresis.
///
/// Fails when the trajectory is never associated with any lane.
pub fn reference_lane_tracking(
    trajectory: &Trajectory,
    lanes: &LaneModel,
    cfg: TrackingConfig,
) -> Result<FeatureSeries> {
    let initial = trajectory
        .states
        .iter()
        .find_map(|s| s.lane.clone())
        .ok_or_else(|| Error::Unanchored(trajectory.id.0.clone()))?;

    let mut current = initial;
    let mut settle: Option<(LaneId, f64)> = None;
    let mut observations = Vec::with_capacity(trajectory.states.len());
    let mut raw = Vec::with_capacity(trajectory.states.len());
    let mut reference = Vec::with_capacity(trajectory.states.len());

    for state in &trajectory.states {
        let p = state.position;
        if let Some(candidate) = near_lane_center(p, lanes, &current, cfg.re_anchor_frac) {
            match &settle {
                Some((id, since)) if *id == candidate => {
                    if state.t - since >= cfg.re_anchor_hold_s {
                        current = candidate;
                        settle = None;
                    }
                }
                _ => settle = Some((candidate, state.t)),
            }
        } else {
            settle = None;
        }

        observations.push(transform(p, trajectory.width, lanes, &current)?);
        raw.push(raw_features(p, lanes));
        reference.push(current.clone());
    }

    Ok(FeatureSeries {
        object_id: trajectory.id.clone(),
        observations,
        raw,
        reference_lane: reference,
    })
}

/// The lane other than `current` whose center the point is within
/// `frac` lane widths of, if any. Bands of adjacent lanes do not overlap
/// for frac <= 0.5, so the first match is unique.
fn near_lane_center(
    p: Point,
    lanes: &LaneModel,
    current: &LaneId,
    frac: f64,
) -> Option<LaneId> {
    lanes
        .lanes
        .iter()
        .filter(|lane| &lane.id != current)
        .find(|lane| {
            let proj = lanes.signed_center_offset(lane, p);
            if proj.extrapolated {
                return false;
            }
            proj.d.abs() <= frac * lanes.lane_width_at(lane, p)
        })
        .map(|lane| lane.id.clone())
}

/// Per-frame feature dump for inspection, one CSV row per frame.
pub fn write_debug_csv(
    path: impl AsRef<Path>,
    trajectory: &Trajectory,
    series: &FeatureSeries,
) -> Result<()> {
    let path = path.as_ref();
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    writeln!(f, "object_id,frame,d_l,d_r,w,d_c,kappa,ref_lane")
        .map_err(|e| Error::io(path, e))?;
    for (i, state) in trajectory.states.iter().enumerate() {
        writeln!(
            f,
            "{},{},{},{},{},{},{},{}",
            trajectory.id,
            state.frame,
            series.raw[i].d_left,
            series.raw[i].d_right,
            trajectory.width,
            series.observations[i].d_c,
            series.observations[i].kappa,
            series.reference_lane[i]
        )
        .map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Lane, LaneKind, Polyline};
    use crate::ingest::{ObjectClass, ObjectId, VehicleState};
    use approx::assert_relative_eq;

    /// Two 4 m mainline lanes plus a 4 m ramp, all straight.
    /// Ramp y in [-4, 0], m1 in [0, 4], m2 in [4, 8].
    fn lanes_4m() -> LaneModel {
        let line = |y: f64| Polyline::from_coords(&[[0.0, y], [400.0, y]]).unwrap();
        let lane = |id: &str, kind, right: f64| Lane {
            id: LaneId::new(id),
            kind,
            left_border: line(right + 4.0),
            right_border: line(right),
            centerline: line(right + 2.0),
        };
        LaneModel::new(
            vec![
                lane("m2", LaneKind::Mainline, 4.0),
                lane("m1", LaneKind::Mainline, 0.0),
                lane("ramp", LaneKind::OnRamp, -4.0),
            ],
            40.0,
            300.0,
        )
        .unwrap()
    }

    fn traj(points: Vec<(f64, Point)>, lanes: &LaneModel, width: f64) -> Trajectory {
        let states = points
            .into_iter()
            .enumerate()
            .map(|(i, (t, position))| VehicleState {
                frame: i as u64,
                t,
                position,
                heading: 0.0,
                v: Some(20.0),
                lane: lanes.lane_at(position).map(|l| l.id.clone()),
            })
            .collect();
        Trajectory {
            id: ObjectId::new("t"),
            class: ObjectClass::Car,
            width,
            length: 4.5,
            states,
        }
    }

    #[test]
    fn centered_vehicle_sees_symmetric_marking_distances() {
        let lanes = lanes_4m();
        let raw = raw_features(Point::new(50.0, -2.0), &lanes);
        assert_relative_eq!(raw.d_left, 2.0);
        assert_relative_eq!(raw.d_right, 2.0);
        assert!(!raw.off_road);
    }

    #[test]
    fn center_on_marking_reads_zero_both_sides() {
        let lanes = lanes_4m();
        let raw = raw_features(Point::new(50.0, 0.0), &lanes);
        assert_relative_eq!(raw.d_left, 0.0);
        assert_relative_eq!(raw.d_right, 0.0);
    }

    #[test]
    fn next_marking_is_used_after_drifting_over_one() {
        let lanes = lanes_4m();
        // 1 m above the ramp/m1 border: next left marking is y=4.
        let raw = raw_features(Point::new(50.0, 1.0), &lanes);
        assert_relative_eq!(raw.d_left, 3.0);
        assert_relative_eq!(raw.d_right, 1.0);
    }

    #[test]
    fn beyond_outermost_marking_is_off_road() {
        let lanes = lanes_4m();
        let raw = raw_features(Point::new(50.0, -5.0), &lanes);
        assert!(raw.off_road);
        assert!(raw.d_right.is_infinite());
        assert_relative_eq!(raw.d_left, 1.0);
    }

    #[test]
    fn transform_normalizes_offset_by_lane_width() {
        let lanes = lanes_4m();
        let ramp = LaneId::new("ramp");
        let centered = transform(Point::new(50.0, -2.0), 2.0, &lanes, &ramp).unwrap();
        assert_relative_eq!(centered.d_c, 0.0);
        assert_relative_eq!(centered.kappa, 0.0);

        let half = transform(Point::new(50.0, 0.0), 2.0, &lanes, &ramp).unwrap();
        assert_relative_eq!(half.d_c, 0.5);
        assert_relative_eq!(half.kappa, 1.0);

        let neighbor = transform(Point::new(50.0, 2.0), 2.0, &lanes, &ramp).unwrap();
        assert_relative_eq!(neighbor.d_c, 1.0);
        assert_relative_eq!(neighbor.kappa, 0.0);
    }

    #[test]
    fn kappa_matches_footprint_rule_everywhere() {
        let lanes = lanes_4m();
        let ramp = LaneId::new("ramp");
        for i in 0..200 {
            let y = -4.0 + 12.0 * i as f64 / 200.0;
            let p = Point::new(60.0, y);
            let raw = raw_features(p, &lanes);
            let obs = transform(p, 2.0, &lanes, &ramp).unwrap();
            let expected = raw.d_left.min(raw.d_right) < 1.0;
            assert_eq!(obs.kappa == 1.0, expected, "y={y}");
        }
    }

    #[test]
    fn lane_keeper_keeps_reference_and_small_offset() {
        let lanes = lanes_4m();
        let points = (0..50)
            .map(|i| (i as f64 * 0.04, Point::new(10.0 + i as f64, -2.1)))
            .collect();
        let traj = traj(points, &lanes, 2.0);
        let series = reference_lane_tracking(&traj, &lanes, TrackingConfig::default()).unwrap();
        assert!(series.re_anchor_frames().is_empty());
        for obs in &series.observations {
            assert!(obs.d_c < 0.05);
            assert_eq!(obs.kappa, 0.0);
        }
    }

    #[test]
    fn lane_change_plateaus_then_re_anchors() {
        let lanes = lanes_4m();
        // Ramp center to m1 center over 2 s, then 2 s settled.
        let mut points = Vec::new();
        for i in 0..100 {
            let t = i as f64 * 0.04;
            let y = if t < 1.0 {
                -2.0
            } else if t < 3.0 {
                -2.0 + 4.0 * (t - 1.0) / 2.0
            } else {
                2.0
            };
            points.push((t, Point::new(10.0 + i as f64, y)));
        }
        let traj = traj(points, &lanes, 2.0);
        let series = reference_lane_tracking(&traj, &lanes, TrackingConfig::default()).unwrap();
        let anchors = series.re_anchor_frames();
        assert_eq!(anchors.len(), 1);
        let anchor = anchors[0];
        // Before the switch the offset has plateaued near one lane width.
        assert!(series.observations[anchor - 1].d_c > 0.85);
        assert_eq!(series.reference_lane[anchor], LaneId::new("m1"));
        // After the switch the offset is measured against the new lane.
        assert!(series.observations[anchor].d_c < 0.3);
        assert!(series.observations.last().unwrap().d_c < 0.05);
    }

    #[test]
    fn re_anchor_waits_for_hold_time() {
        let lanes = lanes_4m();
        // Crosses to m1's center band but returns within 0.3 s.
        let mut points = Vec::new();
        for i in 0..100 {
            let t = i as f64 * 0.04;
            let y = if (1.0..1.3).contains(&t) { 1.8 } else { -2.0 };
            points.push((t, Point::new(10.0 + i as f64, y)));
        }
        let traj = traj(points, &lanes, 2.0);
        let series = reference_lane_tracking(&traj, &lanes, TrackingConfig::default()).unwrap();
        assert!(series.re_anchor_frames().is_empty());
        assert!(series.reference_lane.iter().all(|l| l == &LaneId::new("ramp")));
    }

    #[test]
    fn abort_out_and_back_never_re_anchors() {
        let lanes = lanes_4m();
        let mut points = Vec::new();
        for i in 0..150 {
            let t = i as f64 * 0.04;
            let u = (t / 6.0).min(1.0);
            let y = -2.0 + 2.2 * (std::f64::consts::PI * u).sin().powi(2);
            points.push((t, Point::new(10.0 + i as f64, y)));
        }
        let traj = traj(points, &lanes, 2.0);
        let series = reference_lane_tracking(&traj, &lanes, TrackingConfig::default()).unwrap();
        assert!(series.re_anchor_frames().is_empty());
        let max_dc = series
            .observations
            .iter()
            .map(|o| o.d_c)
            .fold(0.0f64, f64::max);
        assert!(max_dc > 0.4 && max_dc < 0.8, "max_dc={max_dc}");
        assert!(series.observations.last().unwrap().d_c < 0.1);
    }

    #[test]
    fn unassociated_trajectory_is_an_error() {
        let lanes = lanes_4m();
        let points = (0..10)
            .map(|i| (i as f64 * 0.04, Point::new(10.0 + i as f64, 20.0)))
            .collect();
        let traj = traj(points, &lanes, 2.0);
        assert!(reference_lane_tracking(&traj, &lanes, TrackingConfig::default()).is_err());
    }

    #[test]
    fn observations_invariant_under_rigid_motion() {
        // Rotating and translating the whole scene must not change the
        // observation series.
        let lanes = lanes_4m();
        let angle: f64 = 0.7;
        let (sin, cos) = angle.sin_cos();
        let shift = Point::new(123.0, -45.0);
        let rot = |p: Point| Point::new(p.x * cos - p.y * sin, p.x * sin + p.y * cos) + shift;

        let moved_line = |poly: &Polyline| {
            Polyline::new(poly.vertices().iter().map(|&p| rot(p)).collect()).unwrap()
        };
        let moved_lanes = LaneModel::new(
            lanes
                .lanes
                .iter()
                .map(|l| Lane {
                    id: l.id.clone(),
                    kind: l.kind,
                    left_border: moved_line(&l.left_border),
                    right_border: moved_line(&l.right_border),
                    centerline: moved_line(&l.centerline),
                })
                .collect(),
            lanes.merge_start_s,
            lanes.merge_ref_length,
        )
        .unwrap();

        // The step is chosen so no frame lands exactly on the kappa
        // decision boundary, which is a measure-zero knife edge.
        let points: Vec<(f64, Point)> = (0..60)
            .map(|i| {
                let t = i as f64 * 0.04;
                (t, Point::new(10.0 + i as f64 * 2.0, -2.0 + i as f64 * 0.0613))
            })
            .collect();
        let base = traj(points.clone(), &lanes, 2.0);
        let moved_points: Vec<(f64, Point)> =
            points.iter().map(|&(t, p)| (t, rot(p))).collect();
        let mut moved = traj(moved_points, &moved_lanes, 2.0);
        for s in &mut moved.states {
            s.lane = moved_lanes.lane_at(s.position).map(|l| l.id.clone());
        }

        let a = reference_lane_tracking(&base, &lanes, TrackingConfig::default()).unwrap();
        let b = reference_lane_tracking(&moved, &moved_lanes, TrackingConfig::default()).unwrap();
        for (oa, ob) in a.observations.iter().zip(&b.observations) {
            assert_relative_eq!(oa.d_c, ob.d_c, epsilon = 1e-9);
            assert_eq!(oa.kappa, ob.kappa);
        }
    }
}
