//! Maneuver categories and the scenario record schema.
//!
//! Once a merge-family maneuver has PET values against its challengers,
//! the signs tell the story: a positive PET means the ego slotted in
//! behind that challenger, a negative one that it pulled in ahead. Both
//! signs together mean it took the gap between two vehicles.

use serde::{Deserialize, Serialize};

use crate::assessment::PetResult;
use crate::error::{Error, Result};
use crate::geometry::LaneId;
use crate::ingest::ObjectId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    /// No challenger interacted with the merge.
    Free,
    /// Ego entered ahead of all interacting challengers.
    InFront,
    /// Ego entered behind all interacting challengers.
    Behind,
    /// Ego entered a gap between challengers.
    Into,
    /// At least one exact simultaneous arrival; sign undefined.
    Ambiguous,
}

impl std::fmt::Display for Category {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Category::Free => "free",
            Category::InFront => "in_front",
            Category::Behind => "behind",
            Category::Into => "into",
            Category::Ambiguous => "ambiguous",
        };
        f.write_str(s)
    }
}

/// One extracted and assessed maneuver, serialized as a JSON line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRecord {
    pub object_id: ObjectId,
    /// Name of the best-matching pattern.
    pub pattern_class: String,
    /// DTW similarity of the decoded skeleton to that pattern.
    pub similarity: f64,
    /// Per-pattern similarity scores for the full library.
    pub scores: std::collections::BTreeMap<String, f64>,
    /// Frame span of the non-lane-keeping core (inclusive).
    pub core_frame_start: usize,
    pub core_frame_end: usize,
    /// Frame span of the full maneuver (inclusive).
    pub frame_start: usize,
    pub frame_end: usize,
    pub t_start: f64,
    pub t_end: f64,
    /// Positions along the merging zone, 0 at its start, 1 at the end
    /// of the reference length.
    pub maneuver_start_pos: f64,
    pub maneuver_end_pos: f64,
    /// First frame of the crossing phase.
    pub cross_entry_frame: usize,
    pub cross_entry_t: f64,
    pub target_lane: LaneId,
    pub challengers: Vec<PetResult>,
    pub category: Category,
    /// Lead plus lag gap in seconds; present for `into` merges only.
    pub accepted_gap_s: Option<f64>,
    pub critical: bool,
}

/// Challengers whose paths actually crossed the ego's.
fn interacting(challengers: &[PetResult]) -> impl Iterator<Item = f64> + '_ {
    challengers.iter().filter(|c| !c.degenerate).filter_map(|c| c.pet_s)
}

/// Assigns the category from the PET signs. Challengers whose paths
/// never crossed the ego's are ignored.
pub fn categorize(challengers: &[PetResult]) -> Category {
    let pets: Vec<f64> = interacting(challengers).collect();
    if pets.is_empty() {
        return Category::Free;
    }
    if pets.contains(&0.0) {
        return Category::Ambiguous;
    }
    let pos = pets.iter().any(|&p| p > 0.0);
    let neg = pets.iter().any(|&p| p < 0.0);
    match (pos, neg) {
        (true, true) => Category::Into,
        (true, false) => Category::Behind,
        (false, true) => Category::InFront,
        (false, false) => unreachable!("zero PETs were handled above"),
    }
}

/// Size of the accepted gap for an `into` merge: time headway to the
/// nearest vehicle ahead plus the one behind, i.e. the smallest
/// positive PET plus the magnitude of the largest (closest to zero)
/// negative PET.
pub fn accepted_gap(challengers: &[PetResult]) -> Result<f64> {
    if categorize(challengers) != Category::Into {
        return Err(Error::Input(
            "accepted gap is only defined for an into-gap merge".into(),
        ));
    }
    let mut lag = f64::INFINITY;
    let mut lead = f64::NEG_INFINITY;
    for p in interacting(challengers) {
        if p > 0.0 {
            lag = lag.min(p);
        } else {
            lead = lead.max(p);
        }
    }
    Ok(lag + lead.abs())
}

/// True when any interacting challenger is closer in time than the
/// threshold.
pub fn flag_critical(challengers: &[PetResult], threshold_s: f64) -> bool {
    interacting(challengers).any(|p| p.abs() < threshold_s)
}
