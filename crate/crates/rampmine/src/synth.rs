//! Synthetic merging-site generator with ground-truth labels.
//!
//! Builds a two-lane highway with an acceleration lane that tapers out,
//! and populates it with scripted vehicles: completed merges with a
//! smooth sigmoid lateral profile, aborted merges that bump toward the
//! border and fall back, and mainline traffic that keeps its lane.
//! Every vehicle carries a ground-truth label, so extraction quality
//! can be scored exactly.

use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Lane, LaneId, LaneKind, LaneModel, Point, Polyline};
use crate::ingest::{write_trajectories_csv, ObjectClass, ObjectId, Trajectory, VehicleState};

pub const LANE_WIDTH_M: f64 = 3.75;
pub const SITE_LENGTH_M: f64 = 500.0;
pub const RAMP_START_X: f64 = 50.0;
pub const RAMP_END_X: f64 = 350.0;
pub const TAPER_START_X: f64 = 300.0;
pub const MERGE_START_X: f64 = 100.0;
pub const MERGE_REF_LENGTH_M: f64 = 250.0;
pub const FRAME_RATE_HZ: f64 = 25.0;

const RAMP_CENTER_Y: f64 = -LANE_WIDTH_M / 2.0;
const M1_CENTER_Y: f64 = LANE_WIDTH_M / 2.0;
const M2_CENTER_Y: f64 = 1.5 * LANE_WIDTH_M;
const RECORD_END_X: f64 = 485.0;

/// The synthetic site: mainline lanes m1 (right) and m2 (left) along
/// the full length, the on-ramp joining from the right between
/// `RAMP_START_X` and `RAMP_END_X` with a taper over the final 50 m.
/// The merging zone starts at `MERGE_START_X`; normalized position 1.0
/// falls at the ramp end.
pub fn merge_site() -> LaneModel {
    let line = |y: f64| {
        Polyline::from_coords(&[[0.0, y], [SITE_LENGTH_M, y]]).expect("two distinct points")
    };
    let ramp_left = Polyline::from_coords(&[[RAMP_START_X, 0.0], [RAMP_END_X, 0.0]])
        .expect("two distinct points");
    let ramp_right = Polyline::from_coords(&[
        [RAMP_START_X, -LANE_WIDTH_M],
        [TAPER_START_X, -LANE_WIDTH_M],
        [RAMP_END_X, 0.0],
    ])
    .expect("three distinct points");
    let ramp_center = Polyline::from_coords(&[
        [RAMP_START_X, RAMP_CENTER_Y],
        [TAPER_START_X, RAMP_CENTER_Y],
        [RAMP_END_X, 0.0],
    ])
    .expect("three distinct points");
    LaneModel::new(
        vec![
            Lane {
                id: LaneId::new("m2"),
                kind: LaneKind::Mainline,
                left_border: line(2.0 * LANE_WIDTH_M),
                right_border: line(LANE_WIDTH_M),
                centerline: line(M2_CENTER_Y),
            },
            Lane {
                id: LaneId::new("m1"),
                kind: LaneKind::Mainline,
                left_border: line(LANE_WIDTH_M),
                right_border: line(0.0),
                centerline: line(M1_CENTER_Y),
            },
            Lane {
                id: LaneId::new("ramp"),
                kind: LaneKind::OnRamp,
                left_border: ramp_left,
                right_border: ramp_right,
                centerline: ramp_center,
            },
        ],
        MERGE_START_X - RAMP_START_X,
        MERGE_REF_LENGTH_M,
    )
    .expect("hand-checked site geometry")
}

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_merges: usize,
    pub n_aborts: usize,
    pub n_mainline: usize,
    /// Per-frame position noise (both axes), meters.
    pub noise_std_m: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig { seed: 7, n_merges: 20, n_aborts: 5, n_mainline: 10, noise_std_m: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GtKind {
    Merge,
    Abort,
    #[serde(rename = "none")]
    Keep,
}

/// Ground-truth maneuver window, frame-quantized on the clean
/// (noise-free) lateral profile: it spans the frames where the
/// normalized offset from the ramp center exceeds 0.2 lane widths,
/// and for completed merges ends where it reaches 0.8.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GtManeuver {
    pub start_frame: usize,
    pub end_frame: usize,
    pub start_pos: f64,
    pub end_pos: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GtLabel {
    pub object_id: ObjectId,
    pub kind: GtKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub maneuver: Option<GtManeuver>,
}

pub fn save_labels(path: impl AsRef<Path>, labels: &[GtLabel]) -> Result<()> {
    let path = path.as_ref();
    let raw = serde_json::to_string_pretty(labels).map_err(|e| Error::json(path, e))?;
    std::fs::write(path, raw).map_err(|e| Error::io(path, e))
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<GtLabel>> {
    let path = path.as_ref();
    let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&raw).map_err(|e| Error::json(path, e))
}

#[derive(Debug, Clone)]
pub struct LabeledDataset {
    pub trajectories: Vec<Trajectory>,
    pub lanes: LaneModel,
    pub labels: Vec<GtLabel>,
}

impl LabeledDataset {
    /// Writes `trajectories.csv`, `lanes.json` and `labels.json` into
    /// `dir` (which must exist).
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        write_trajectories_csv(dir.join("trajectories.csv"), &self.trajectories)?;
        self.lanes.save_json(dir.join("lanes.json"))?;
        save_labels(dir.join("labels.json"), &self.labels)
    }
}

/// Smooth monotone ramp from 0 at `u = 0` to 1 at `u = 1`, exactly
/// attained at the endpoints, built from a rescaled tanh.
pub fn ease01(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    let t3 = 3.0f64.tanh();
    ((3.0 * (2.0 * u - 1.0)).tanh() + t3) / (2.0 * t3)
}

fn ease01_slope(u: f64) -> f64 {
    if !(0.0..=1.0).contains(&u) {
        return 0.0;
    }
    let t3 = 3.0f64.tanh();
    let c = (3.0 * (2.0 * u - 1.0)).cosh();
    3.0 / (t3 * c * c)
}

/// Lateral offset profiles in lane widths above the ramp center.
#[derive(Debug, Clone, Copy)]
enum Profile {
    /// Sigmoid sweep from the ramp center to `levels` lane widths up.
    Sweep { start_pos: f64, end_pos: f64, levels: f64 },
    /// Bump of `amplitude` lane widths, back to the ramp center.
    Bump { start_pos: f64, end_pos: f64, amplitude: f64 },
    Flat,
}

impl Profile {
    /// Offset in lane widths at normalized zone position `pos`, and
    /// its derivative with respect to `pos`.
    fn offset(&self, pos: f64) -> (f64, f64) {
        match *self {
            Profile::Sweep { start_pos, end_pos, levels } => {
                let span = end_pos - start_pos;
                let u = (pos - start_pos) / span;
                (levels * ease01(u), levels * ease01_slope(u) / span)
            }
            Profile::Bump { start_pos, end_pos, amplitude } => {
                let span = end_pos - start_pos;
                let u = ((pos - start_pos) / span).clamp(0.0, 1.0);
                let s = (std::f64::consts::PI * u).sin();
                let c = (std::f64::consts::PI * u).cos();
                (
                    amplitude * s * s,
                    2.0 * amplitude * s * c * std::f64::consts::PI / span,
                )
            }
            Profile::Flat => (0.0, 0.0),
        }
    }
}

struct VehicleScript {
    id: ObjectId,
    class: ObjectClass,
    width: f64,
    length: f64,
    /// Longitudinal start and speed.
    x0: f64,
    v: f64,
    /// Lateral base line and maneuver profile on top of it.
    base_y: f64,
    profile: Profile,
    /// Small lane-keeping wiggle amplitude, meters.
    wiggle_m: f64,
    /// Stop recording at this x.
    end_x: f64,
    kind: GtKind,
}

fn drive_script(
    script: &VehicleScript,
    lanes: &LaneModel,
    noise: Option<(&Normal<f64>, &mut ChaCha8Rng)>,
) -> (Trajectory, GtLabel) {
    let dt = 1.0 / FRAME_RATE_HZ;
    let mut states = Vec::new();
    let mut clean_dc = Vec::new();
    let mut positions = Vec::new();
    let mut frame = 0usize;
    let mut noise = noise;
    loop {
        let t = frame as f64 * dt;
        let x = script.x0 + script.v * t;
        if x > script.end_x {
            break;
        }
        let pos = (x - MERGE_START_X) / MERGE_REF_LENGTH_M;
        let (off_w, doff_dpos) = script.profile.offset(pos);
        let wiggle = script.wiggle_m * (x / 23.0).sin();
        let y = script.base_y + off_w * LANE_WIDTH_M + wiggle;
        let dy_dx = doff_dpos * LANE_WIDTH_M / MERGE_REF_LENGTH_M
            + script.wiggle_m * (x / 23.0).cos() / 23.0;
        let heading = dy_dx.atan();
        clean_dc.push(off_w.abs());
        positions.push(pos);

        let (mut px, mut py) = (x, y);
        if let Some((normal, rng)) = noise.as_mut() {
            px += normal.sample(*rng);
            py += normal.sample(*rng);
        }
        let position = Point::new(px, py);
        states.push(VehicleState {
            frame: frame as u64,
            t,
            position,
            heading,
            v: Some(script.v),
            lane: lanes.lane_at(position).map(|l| l.id.clone()),
        });
        frame += 1;
    }

    let maneuver = match script.kind {
        GtKind::Keep => None,
        GtKind::Merge => {
            let start = clean_dc.iter().position(|&d| d >= 0.2);
            let end = clean_dc.iter().position(|&d| d >= 0.8);
            start.zip(end).map(|(s, e)| GtManeuver {
                start_frame: s,
                end_frame: e,
                start_pos: positions[s],
                end_pos: positions[e],
            })
        }
        GtKind::Abort => {
            let start = clean_dc.iter().position(|&d| d >= 0.2);
            let end = clean_dc.iter().rposition(|&d| d >= 0.2);
            start.zip(end).map(|(s, e)| GtManeuver {
                start_frame: s,
                end_frame: e,
                start_pos: positions[s],
                end_pos: positions[e],
            })
        }
    };

    let trajectory = Trajectory {
        id: script.id.clone(),
        class: script.class,
        width: script.width,
        length: script.length,
        states,
    };
    let label = GtLabel { object_id: script.id.clone(), kind: script.kind, maneuver };
    (trajectory, label)
}

/// Generates a labeled dataset on the synthetic site. The same seed
/// always produces the same dataset.
pub fn generate(cfg: &SynthConfig) -> Result<LabeledDataset> {
    let lanes = merge_site();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise_dist = if cfg.noise_std_m > 0.0 {
        Some(Normal::new(0.0, cfg.noise_std_m).map_err(|e| Error::Input(e.to_string()))?)
    } else {
        None
    };

    let mut scripts = Vec::new();
    for i in 0..cfg.n_merges {
        let start_pos: f64 = rng.gen_range(0.05..0.5);
        let span: f64 = rng.gen_range(0.2..0.42);
        let end_pos = (start_pos + span).min(0.78);
        scripts.push(VehicleScript {
            id: ObjectId::new(format!("merge-{i:03}")),
            class: ObjectClass::Car,
            width: 1.8,
            length: 4.5,
            x0: RAMP_START_X + rng.gen_range(2.0..12.0),
            v: rng.gen_range(20.0..28.0),
            base_y: RAMP_CENTER_Y,
            profile: Profile::Sweep { start_pos, end_pos, levels: 1.0 },
            wiggle_m: 0.0,
            end_x: RECORD_END_X,
            kind: GtKind::Merge,
        });
    }
    for i in 0..cfg.n_aborts {
        let start_pos = rng.gen_range(0.05..0.35);
        let span = rng.gen_range(0.2..0.4);
        scripts.push(VehicleScript {
            id: ObjectId::new(format!("abort-{i:03}")),
            class: ObjectClass::Car,
            width: 1.8,
            length: 4.5,
            x0: RAMP_START_X + rng.gen_range(2.0..12.0),
            v: rng.gen_range(20.0..28.0),
            base_y: RAMP_CENTER_Y,
            profile: Profile::Bump {
                start_pos,
                end_pos: start_pos + span,
                amplitude: rng.gen_range(0.45..0.6),
            },
            wiggle_m: 0.0,
            // An aborting vehicle leaves the picture before the taper
            // forces it out.
            end_x: MERGE_START_X + 0.78 * MERGE_REF_LENGTH_M,
            kind: GtKind::Abort,
        });
    }
    for i in 0..cfg.n_mainline {
        let on_m2 = i % 2 == 1;
        let truck = i % 4 == 3;
        scripts.push(VehicleScript {
            id: ObjectId::new(format!("main-{i:03}")),
            class: if truck { ObjectClass::Truck } else { ObjectClass::Car },
            width: if truck { 2.5 } else { 1.8 },
            length: if truck { 12.0 } else { 4.5 },
            x0: rng.gen_range(2.0..150.0),
            v: rng.gen_range(25.0..33.0),
            base_y: if on_m2 { M2_CENTER_Y } else { M1_CENTER_Y },
            profile: Profile::Flat,
            wiggle_m: rng.gen_range(0.05..0.18),
            end_x: RECORD_END_X,
            kind: GtKind::Keep,
        });
    }

    let mut trajectories = Vec::with_capacity(scripts.len());
    let mut labels = Vec::with_capacity(scripts.len());
    for script in &scripts {
        // Not Option::map: the closure could not return the rng borrow.
        #[allow(clippy::manual_map)]
        let noise = match noise_dist.as_ref() {
            Some(n) => Some((n, &mut rng)),
            None => None,
        };
        let (trajectory, label) = drive_script(script, &lanes, noise);
        trajectories.push(trajectory);
        labels.push(label);
    }
    Ok(LabeledDataset { trajectories, lanes, labels })
}

/// A deterministic ego/challenger pair with a known PET. Both drive at
/// the same constant speed; the challenger keeps the adjacent mainline
/// lane offset so that the corner gap corresponds to `headway_s`
/// exactly. Returns the pair and the expected signed PET
/// (positive when `ego_behind`).
pub fn generate_pet_pair(headway_s: f64, ego_behind: bool) -> (Trajectory, Trajectory, f64) {
    let lanes = merge_site();
    let v = 25.0;
    let (width, length) = (1.8, 4.5);
    let ego_x0 = 60.0;
    let gap_m = length + v * headway_s;
    let ch_x0 = if ego_behind { ego_x0 + gap_m } else { ego_x0 - gap_m };

    let ego_script = VehicleScript {
        id: ObjectId::new("ego"),
        class: ObjectClass::Car,
        width,
        length,
        x0: ego_x0,
        v,
        base_y: RAMP_CENTER_Y,
        profile: Profile::Sweep { start_pos: 0.2, end_pos: 0.6, levels: 1.0 },
        wiggle_m: 0.0,
        end_x: RECORD_END_X,
        kind: GtKind::Merge,
    };
    let ch_script = VehicleScript {
        id: ObjectId::new("challenger"),
        class: ObjectClass::Car,
        width,
        length,
        x0: ch_x0,
        v,
        base_y: M1_CENTER_Y,
        profile: Profile::Flat,
        wiggle_m: 0.0,
        end_x: RECORD_END_X,
        kind: GtKind::Keep,
    };
    let (ego, _) = drive_script(&ego_script, &lanes, None);
    let (challenger, _) = drive_script(&ch_script, &lanes, None);
    let expected = if ego_behind { headway_s } else { -headway_s };
    (ego, challenger, expected)
}

/// A single late, wide maneuver: the ego starts past 0.6 of the zone
/// and sweeps across the first mainline lane into the second, crossing
/// two markings in one motion.
pub fn double_sweep_dataset() -> LabeledDataset {
    let lanes = merge_site();
    let script = VehicleScript {
        id: ObjectId::new("sweeper"),
        class: ObjectClass::Car,
        width: 1.8,
        length: 4.5,
        x0: RAMP_START_X + 5.0,
        v: 25.0,
        base_y: RAMP_CENTER_Y,
        profile: Profile::Sweep { start_pos: 0.65, end_pos: 1.4, levels: 2.0 },
        wiggle_m: 0.0,
        end_x: RECORD_END_X,
        kind: GtKind::Merge,
    };
    let (trajectory, label) = drive_script(&script, &lanes, None);
    LabeledDataset { trajectories: vec![trajectory], lanes, labels: vec![label] }
}
