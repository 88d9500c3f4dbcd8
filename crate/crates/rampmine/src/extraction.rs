//! Candidate partitioning and pattern matching on primitive sequences.
//!
//! A decoded label sequence is cut into candidate maneuvers: maximal
//! runs of primitives at or above a threshold rank form the core, and
//! each core is padded with context out to the nearest lane-keeping
//! frame on either side. The candidate's run-length skeleton is then
//! compared against a small pattern library by dynamic time warping,
//! and merge-family matches become scenario records.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::categorization::{Category, ScenarioRecord};
use crate::error::{Error, Result};
use crate::features::{reference_lane_tracking, TrackingConfig};
use crate::geometry::{normalized_maneuver_position, LaneKind, LaneModel};
use crate::hmm::{viterbi, HmmParams, Primitive, N_STATES};
use crate::ingest::Trajectory;

/// A reference shape for one maneuver type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub name: String,
    pub sequence: Vec<Primitive>,
    /// Whether a match should be reported as an on-ramp scenario.
    pub merge_family: bool,
}

/// The built-in library: a completed merge, a canceled (aborted) merge
/// that returns to the ramp, and a merge entered already drifting.
pub fn default_patterns() -> Vec<Pattern> {
    use Primitive::{Approach, Change, Cross, Idle};
    vec![
        Pattern {
            name: "merge".into(),
            sequence: vec![Idle, Approach, Cross, Change],
            merge_family: true,
        },
        Pattern {
            name: "abort".into(),
            sequence: vec![Idle, Approach, Cross, Approach, Idle],
            merge_family: true,
        },
        Pattern {
            name: "overshoot_merge".into(),
            sequence: vec![Approach, Cross, Change],
            merge_family: true,
        },
    ]
}

#[derive(Serialize, Deserialize)]
struct PatternFileEntry {
    name: String,
    sequence: Vec<u8>,
    merge_family: bool,
}

/// Loads a pattern library from a JSON array of
/// `{name, sequence, merge_family}` entries, sequences given as
/// primitive indices 0..=3.
pub fn load_patterns(path: impl AsRef<Path>) -> Result<Vec<Pattern>> {
    let path = path.as_ref();
    let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let entries: Vec<PatternFileEntry> =
        serde_json::from_str(&raw).map_err(|e| Error::json(path, e))?;
    let mut patterns = Vec::with_capacity(entries.len());
    for entry in entries {
        if entry.name.is_empty() {
            return Err(Error::Input(format!("{}: empty pattern name", path.display())));
        }
        if entry.sequence.is_empty() {
            return Err(Error::Input(format!(
                "{}: pattern {} has an empty sequence",
                path.display(),
                entry.name
            )));
        }
        let sequence = entry
            .sequence
            .iter()
            .map(|&v| Primitive::try_from(v as usize))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Input(format!("{}: pattern {}: {e}", path.display(), entry.name)))?;
        patterns.push(Pattern { name: entry.name, sequence, merge_family: entry.merge_family });
    }
    let mut names: Vec<&str> = patterns.iter().map(|p| p.name.as_str()).collect();
    names.sort_unstable();
    if names.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Input(format!("{}: duplicate pattern names", path.display())));
    }
    if patterns.is_empty() {
        return Err(Error::Input(format!("{}: empty pattern library", path.display())));
    }
    Ok(patterns)
}

pub fn save_patterns(path: impl AsRef<Path>, patterns: &[Pattern]) -> Result<()> {
    let path = path.as_ref();
    let entries: Vec<PatternFileEntry> = patterns
        .iter()
        .map(|p| PatternFileEntry {
            name: p.name.clone(),
            sequence: p.sequence.iter().map(|&l| l.index() as u8).collect(),
            merge_family: p.merge_family,
        })
        .collect();
    let raw = serde_json::to_string_pretty(&entries).map_err(|e| Error::json(path, e))?;
    std::fs::write(path, raw).map_err(|e| Error::io(path, e))
}

/// Collapses consecutive repeats: `[0,0,1,1,2] -> [0,1,2]`.
pub fn run_length_compress(labels: &[Primitive]) -> Vec<Primitive> {
    let mut out: Vec<Primitive> = Vec::new();
    for &l in labels {
        if out.last() != Some(&l) {
            out.push(l);
        }
    }
    out
}

/// Dynamic time warping distance between two label sequences with
/// absolute rank difference as local cost and unit steps in either or
/// both sequences. Two empty sequences are at distance 0; an empty
/// sequence cannot be aligned to a non-empty one.
pub fn dtw_distance(a: &[Primitive], b: &[Primitive]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.len() == b.len() { 0.0 } else { f64::INFINITY };
    }
    let cost =
        |x: Primitive, y: Primitive| (x.index() as f64 - y.index() as f64).abs();
    let m = b.len();
    let mut prev = vec![f64::INFINITY; m];
    let mut cur = vec![0.0; m];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            let best = if i == 0 && j == 0 {
                0.0
            } else {
                let mut best = f64::INFINITY;
                if i > 0 {
                    best = best.min(prev[j]);
                }
                if j > 0 {
                    best = best.min(cur[j - 1]);
                }
                if i > 0 && j > 0 {
                    best = best.min(prev[j - 1]);
                }
                best
            };
            cur[j] = cost(ai, bj) + best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m - 1]
}

/// Similarity in (0, 1] derived from the DTW distance of the run-length
/// skeletons.
pub fn similarity(labels: &[Primitive], pattern: &[Primitive]) -> f64 {
    let d = dtw_distance(&run_length_compress(labels), &run_length_compress(pattern));
    1.0 / (1.0 + d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub pattern: String,
    pub merge_family: bool,
    pub similarity: f64,
    pub scores: BTreeMap<String, f64>,
}

/// Scores a label sequence against every pattern and picks the best;
/// ties go to the pattern listed first.
pub fn classify(labels: &[Primitive], patterns: &[Pattern]) -> Result<MatchResult> {
    let (first, rest) = patterns
        .split_first()
        .ok_or_else(|| Error::Input("empty pattern library".into()))?;
    let mut best = first;
    let mut best_sim = similarity(labels, &first.sequence);
    let mut scores = BTreeMap::new();
    scores.insert(first.name.clone(), best_sim);
    for p in rest {
        let sim = similarity(labels, &p.sequence);
        scores.insert(p.name.clone(), sim);
        if sim > best_sim {
            best = p;
            best_sim = sim;
        }
    }
    Ok(MatchResult {
        pattern: best.name.clone(),
        merge_family: best.merge_family,
        similarity: best_sim,
        scores,
    })
}

/// One candidate maneuver within a label sequence. All bounds are
/// inclusive frame indices; the context contains the core.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CandidateSequence {
    pub core_start: usize,
    pub core_end: usize,
    pub context_start: usize,
    pub context_end: usize,
}

/// Splits a label sequence into candidates: cores are maximal runs of
/// primitives with rank >= `xi`, contexts extend each core to the
/// nearest lane-keeping (idle) frame on both sides, inclusive. Cores
/// are disjoint; contexts of nearby candidates may overlap.
pub fn partition(labels: &[Primitive], xi: usize) -> Result<Vec<CandidateSequence>> {
    if xi >= N_STATES {
        return Err(Error::Input(format!(
            "threshold rank {xi} leaves no primitive to form a core (max {})",
            N_STATES - 1
        )));
    }
    let is_core = |l: Primitive| l.index() >= xi;
    let mut out = Vec::new();
    let mut i = 0;
    while i < labels.len() {
        if !is_core(labels[i]) {
            i += 1;
            continue;
        }
        let core_start = i;
        while i < labels.len() && is_core(labels[i]) {
            i += 1;
        }
        let core_end = i - 1;
        let mut context_start = core_start;
        while context_start > 0 && labels[context_start - 1] != Primitive::Idle {
            context_start -= 1;
        }
        context_start = context_start.saturating_sub(1);
        let mut context_end = core_end;
        while context_end + 1 < labels.len() && labels[context_end + 1] != Primitive::Idle {
            context_end += 1;
        }
        if context_end + 1 < labels.len() {
            context_end += 1;
        }
        out.push(CandidateSequence { core_start, core_end, context_start, context_end });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
pub struct ExtractionConfig {
    /// Minimum primitive rank that counts as a maneuver core.
    pub xi: usize,
    /// Cores shorter than this are decoder flicker, not maneuvers.
    pub min_candidate_duration_s: f64,
    pub tracking: TrackingConfig,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig {
            xi: 2,
            min_candidate_duration_s: 0.2,
            tracking: TrackingConfig::default(),
        }
    }
}

/// Runs the per-object pipeline: feature transform, decoding,
/// partitioning and classification. Returns one record per candidate
/// that starts from the on-ramp and matches a merge-family pattern.
/// Challenger assessment fields are left empty for a later pass.
pub fn extract_scenarios(
    trajectory: &Trajectory,
    lanes: &LaneModel,
    hmm_params: &HmmParams,
    patterns: &[Pattern],
    cfg: &ExtractionConfig,
) -> Result<Vec<ScenarioRecord>> {
    let features = reference_lane_tracking(trajectory, lanes, cfg.tracking)?;
    let decoded = viterbi(&features, hmm_params)?;
    let candidates = partition(&decoded.labels, cfg.xi)?;
    let re_anchors = features.re_anchor_frames();
    let ts: Vec<f64> = trajectory.states.iter().map(|s| s.t).collect();

    let mut records = Vec::new();
    for cand in candidates {
        if ts[cand.core_end] - ts[cand.core_start] < cfg.min_candidate_duration_s {
            continue;
        }
        let source = &features.reference_lane[cand.core_start];
        let source_kind = lanes.lane(source).map(|l| l.kind);
        if source_kind != Some(LaneKind::OnRamp) {
            continue;
        }

        // A completed lane change re-anchors the reference lane, which
        // resets the lateral features mid-candidate: frames from the
        // switch on describe keeping the *target* lane and would smear
        // the skeleton with a phantom return-to-idle. Classify on the
        // context up to the core only and let the maneuver end at the
        // switch itself.
        let re_anchor = re_anchors
            .iter()
            .copied()
            .find(|&r| r > cand.core_start && r <= cand.context_end);
        let context_end = if re_anchor.is_some() { cand.core_end } else { cand.context_end };
        let context = &decoded.labels[cand.context_start..=context_end];

        let matched = classify(context, patterns)?;
        if !matched.merge_family {
            continue;
        }

        let frame_start = decoded.labels[cand.context_start..=cand.core_start]
            .iter()
            .position(|&l| l == Primitive::Approach)
            .map(|off| cand.context_start + off)
            .unwrap_or(cand.core_start);
        let frame_end = re_anchor.unwrap_or(cand.context_end);
        let cross_entry_frame = decoded.labels[cand.context_start..=cand.context_end]
            .iter()
            .position(|&l| l == Primitive::Cross)
            .map(|off| cand.context_start + off)
            .unwrap_or(cand.core_start);
        let target_lane = match re_anchor {
            Some(r) => features.reference_lane[r].clone(),
            None => lanes.adjacent_mainline().id.clone(),
        };

        records.push(ScenarioRecord {
            object_id: trajectory.id.clone(),
            pattern_class: matched.pattern,
            similarity: matched.similarity,
            scores: matched.scores,
            core_frame_start: cand.core_start,
            core_frame_end: cand.core_end,
            frame_start,
            frame_end,
            t_start: ts[frame_start],
            t_end: ts[frame_end],
            maneuver_start_pos: normalized_maneuver_position(
                trajectory.states[frame_start].position,
                lanes,
            ),
            maneuver_end_pos: normalized_maneuver_position(
                trajectory.states[frame_end].position,
                lanes,
            ),
            cross_entry_frame,
            cross_entry_t: ts[cross_entry_frame],
            target_lane,
            challengers: Vec::new(),
            category: Category::Free,
            accepted_gap_s: None,
            critical: false,
        });
    }
    Ok(records)
}
