//! Batch runs over whole datasets: extraction, evaluation against
//! ground truth, and report generation, with file-based inputs and
//! outputs as used by the command line interface.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assessment::{pet, select_challengers};
use crate::behavior::{behavior_report, governing_pet, write_ecdf_csv, write_histogram_csv, Ecdf};
use crate::categorization::{accepted_gap, categorize, flag_critical, Category, ScenarioRecord};
use crate::error::{Error, Result};
use crate::extraction::{default_patterns, extract_scenarios, load_patterns, ExtractionConfig};
use crate::features::{reference_lane_tracking, write_debug_csv, TrackingConfig};
use crate::hmm::HmmParams;
use crate::ingest::{filter_clipped, load_dataset, Trajectory};
use crate::synth::{load_labels, GtKind, GtLabel};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub trajectories: PathBuf,
    pub lanes: PathBuf,
    /// Decoder parameters; the built-in table when absent.
    pub hmm_params: Option<PathBuf>,
    /// Pattern library; the built-in shapes when absent.
    pub patterns: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub xi: usize,
    pub min_candidate_duration_s: f64,
    pub tracking: TrackingConfig,
    /// Longitudinal challenger search range around the ego, meters.
    pub vicinity_m: f64,
    /// |PET| below this marks a scenario critical, seconds.
    pub critical_s: f64,
    /// Worker threads for the per-object stage; 0 picks the number of
    /// cores.
    pub workers: usize,
    /// Also write per-object feature tables for debugging.
    pub dump_features: bool,
}

impl RunConfig {
    pub fn new(
        trajectories: impl Into<PathBuf>,
        lanes: impl Into<PathBuf>,
        out_dir: impl Into<PathBuf>,
    ) -> Self {
        RunConfig {
            trajectories: trajectories.into(),
            lanes: lanes.into(),
            hmm_params: None,
            patterns: None,
            out_dir: out_dir.into(),
            xi: 2,
            min_candidate_duration_s: 0.2,
            tracking: TrackingConfig::default(),
            vicinity_m: 100.0,
            critical_s: 1.0,
            workers: 0,
            dump_features: false,
        }
    }
}

/// Optional JSON config file; every present field overrides the
/// corresponding command line flag.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub xi: Option<usize>,
    pub min_candidate_duration_s: Option<f64>,
    pub re_anchor_frac: Option<f64>,
    pub re_anchor_hold_s: Option<f64>,
    pub vicinity_m: Option<f64>,
    pub critical_s: Option<f64>,
    pub workers: Option<usize>,
}

impl ConfigFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&raw).map_err(|e| Error::json(path, e))
    }

    pub fn apply(&self, run: &mut RunConfig) {
        if let Some(v) = self.xi {
            run.xi = v;
        }
        if let Some(v) = self.min_candidate_duration_s {
            run.min_candidate_duration_s = v;
        }
        if let Some(v) = self.re_anchor_frac {
            run.tracking.re_anchor_frac = v;
        }
        if let Some(v) = self.re_anchor_hold_s {
            run.tracking.re_anchor_hold_s = v;
        }
        if let Some(v) = self.vicinity_m {
            run.vicinity_m = v;
        }
        if let Some(v) = self.critical_s {
            run.critical_s = v;
        }
        if let Some(v) = self.workers {
            run.workers = v;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractSummary {
    pub n_objects_loaded: usize,
    pub n_objects_analyzed: usize,
    pub n_objects_unanchored: usize,
    pub n_records: usize,
    pub class_counts: BTreeMap<String, usize>,
    pub category_counts: BTreeMap<String, usize>,
    pub n_critical: usize,
}

pub fn write_records(path: impl AsRef<Path>, records: &[ScenarioRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    for record in records {
        let line = serde_json::to_string(record).map_err(|e| Error::json(path, e))?;
        writeln!(out, "{line}").expect("vec write");
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn load_records(path: impl AsRef<Path>) -> Result<Vec<ScenarioRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for line in std::io::BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line).map_err(|e| Error::json(path, e))?);
    }
    Ok(records)
}

fn in_worker_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Internal(format!("worker pool: {e}")))?;
    Ok(pool.install(job))
}

/// Runs extraction and assessment over a dataset and writes
/// `scenarios.jsonl` and `summary.json` into the output directory.
/// Objects that never associate with a lane are skipped and counted.
pub fn run_extract(cfg: &RunConfig) -> Result<ExtractSummary> {
    let (all, lanes) = load_dataset(&cfg.trajectories, &cfg.lanes)?;
    let n_loaded = all.len();
    let analyzed = filter_clipped(all.clone(), &lanes);

    let hmm_params = match &cfg.hmm_params {
        Some(path) => HmmParams::load_json(path)?,
        None => HmmParams::default(),
    };
    let patterns = match &cfg.patterns {
        Some(path) => load_patterns(path)?,
        None => default_patterns(),
    };
    let extraction = ExtractionConfig {
        xi: cfg.xi,
        min_candidate_duration_s: cfg.min_candidate_duration_s,
        tracking: cfg.tracking,
    };

    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;

    let per_object: Vec<Result<Vec<ScenarioRecord>>> = in_worker_pool(cfg.workers, || {
        analyzed
            .par_iter()
            .map(|traj| extract_scenarios(traj, &lanes, &hmm_params, &patterns, &extraction))
            .collect()
    })?;

    let mut n_unanchored = 0;
    let mut records: Vec<ScenarioRecord> = Vec::new();
    for (traj, result) in analyzed.iter().zip(per_object) {
        match result {
            Ok(mut found) => {
                for record in &mut found {
                    enrich(record, traj, &all, &lanes, cfg)?;
                }
                records.extend(found);
            }
            Err(Error::Unanchored(_)) => n_unanchored += 1,
            Err(e) => return Err(e),
        }
    }
    records.sort_by(|a, b| {
        (&a.object_id.0, a.frame_start).cmp(&(&b.object_id.0, b.frame_start))
    });

    if cfg.dump_features {
        let debug_dir = cfg.out_dir.join("features");
        std::fs::create_dir_all(&debug_dir).map_err(|e| Error::io(&debug_dir, e))?;
        for traj in &analyzed {
            match reference_lane_tracking(traj, &lanes, cfg.tracking) {
                Ok(series) => {
                    write_debug_csv(debug_dir.join(format!("{}.csv", traj.id)), traj, &series)?
                }
                Err(Error::Unanchored(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }

    let mut class_counts = BTreeMap::new();
    let mut category_counts = BTreeMap::new();
    for r in &records {
        *class_counts.entry(r.pattern_class.clone()).or_insert(0usize) += 1;
        *category_counts.entry(r.category.to_string()).or_insert(0usize) += 1;
    }
    let summary = ExtractSummary {
        n_objects_loaded: n_loaded,
        n_objects_analyzed: analyzed.len(),
        n_objects_unanchored: n_unanchored,
        n_records: records.len(),
        class_counts,
        category_counts,
        n_critical: records.iter().filter(|r| r.critical).count(),
    };

    write_records(cfg.out_dir.join("scenarios.jsonl"), &records)?;
    let summary_json = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::json(cfg.out_dir.join("summary.json"), e))?;
    std::fs::write(cfg.out_dir.join("summary.json"), summary_json)
        .map_err(|e| Error::io(cfg.out_dir.join("summary.json"), e))?;
    Ok(summary)
}

/// Fills the assessment fields of a record: challengers, PET values,
/// category, accepted gap and criticality.
fn enrich(
    record: &mut ScenarioRecord,
    ego: &Trajectory,
    all: &[Trajectory],
    lanes: &crate::geometry::LaneModel,
    cfg: &RunConfig,
) -> Result<()> {
    let challengers = select_challengers(
        ego,
        record.cross_entry_t,
        all,
        lanes,
        &record.target_lane,
        cfg.vicinity_m,
    );
    record.challengers = challengers.iter().map(|ch| pet(ego, ch)).collect();
    record.category = categorize(&record.challengers);
    record.accepted_gap_s = if record.category == Category::Into {
        Some(accepted_gap(&record.challengers)?)
    } else {
        None
    };
    record.critical = flag_critical(&record.challengers, cfg.critical_s);
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissEntry {
    pub object_id: crate::ingest::ObjectId,
    pub kind: GtKind,
    pub gt_start_pos: Option<f64>,
    pub gt_end_pos: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationSummary {
    /// Labeled merge or abort maneuvers in the ground truth.
    pub n_gt_maneuvers: usize,
    pub n_records: usize,
    /// Ground-truth maneuvers matched by at least one record of the
    /// right class.
    pub true_positives: usize,
    /// Records whose object has no label of the matching class.
    pub false_positives: usize,
    pub misses: Vec<MissEntry>,
    /// Found ground-truth maneuvers over all ground-truth maneuvers.
    pub accuracy: Option<f64>,
    pub recall: Option<f64>,
    pub precision: Option<f64>,
}

/// A record claims a merge unless it matched the abort shape.
fn record_claims(record: &ScenarioRecord) -> GtKind {
    if record.pattern_class == "abort" {
        GtKind::Abort
    } else {
        GtKind::Merge
    }
}

/// Scores extracted records against ground-truth labels: a labeled
/// maneuver counts as found when some record on the same object claims
/// the same kind; every record without such a label is a false
/// positive.
pub fn evaluate(records: &[ScenarioRecord], labels: &[GtLabel]) -> EvaluationSummary {
    let mut gt_by_object: BTreeMap<&str, &GtLabel> = BTreeMap::new();
    for label in labels {
        gt_by_object.insert(label.object_id.0.as_str(), label);
    }

    let mut true_positives = 0;
    let mut misses = Vec::new();
    let mut n_gt = 0;
    for label in labels {
        if label.kind == GtKind::Keep {
            continue;
        }
        n_gt += 1;
        let found = records.iter().any(|r| {
            r.object_id == label.object_id && record_claims(r) == label.kind
        });
        if found {
            true_positives += 1;
        } else {
            misses.push(MissEntry {
                object_id: label.object_id.clone(),
                kind: label.kind,
                gt_start_pos: label.maneuver.map(|m| m.start_pos),
                gt_end_pos: label.maneuver.map(|m| m.end_pos),
            });
        }
    }

    let false_positives = records
        .iter()
        .filter(|r| {
            let gt = gt_by_object.get(r.object_id.0.as_str());
            !matches!(gt, Some(label) if label.kind == record_claims(r))
        })
        .count();

    let matched_records = records.len() - false_positives;
    let found_rate = (n_gt > 0).then(|| true_positives as f64 / n_gt as f64);
    EvaluationSummary {
        n_gt_maneuvers: n_gt,
        n_records: records.len(),
        true_positives,
        false_positives,
        misses,
        accuracy: found_rate,
        recall: found_rate,
        precision: (!records.is_empty())
            .then(|| matched_records as f64 / records.len() as f64),
    }
}

/// Loads records and labels from disk, scores them, and writes
/// `evaluation.json` into the output directory.
pub fn run_evaluate(
    scenarios: impl AsRef<Path>,
    labels: impl AsRef<Path>,
    out_dir: impl AsRef<Path>,
) -> Result<EvaluationSummary> {
    let records = load_records(scenarios)?;
    let labels = load_labels(labels)?;
    let summary = evaluate(&records, &labels);
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let path = out_dir.join("evaluation.json");
    let raw = serde_json::to_string_pretty(&summary).map_err(|e| Error::json(&path, e))?;
    std::fs::write(&path, raw).map_err(|e| Error::io(&path, e))?;
    Ok(summary)
}

/// Aggregates a scenario file into `report.json` plus plottable
/// ECDF and histogram tables.
pub fn run_report(
    scenarios: impl AsRef<Path>,
    out_dir: impl AsRef<Path>,
) -> Result<crate::behavior::BehaviorReport> {
    let records = load_records(scenarios)?;
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let report = behavior_report(&records);
    report.save_json(out_dir.join("report.json"))?;

    let starts: Vec<f64> = records.iter().map(|r| r.maneuver_start_pos).collect();
    let ends: Vec<f64> = records.iter().map(|r| r.maneuver_end_pos).collect();
    write_ecdf_csv(out_dir.join("start_pos_ecdf.csv"), &Ecdf::new(&starts)?)?;
    write_ecdf_csv(out_dir.join("end_pos_ecdf.csv"), &Ecdf::new(&ends)?)?;
    let pets: Vec<f64> = records.iter().filter_map(governing_pet).collect();
    write_histogram_csv(out_dir.join("pet_histogram.csv"), &pets, 0.5)?;
    Ok(report)
}
