//! Statistical characterization of extracted scenarios.
//!
//! Aggregates a batch of scenario records into distribution summaries:
//! where in the merging zone maneuvers start and end, how the PET is
//! distributed per category, and what gaps drivers accept when merging
//! between vehicles.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::assessment::min_abs_dt;
use crate::categorization::{Category, ScenarioRecord};
use crate::error::{Error, Result};
use crate::ingest::ObjectId;

/// Empirical CDF over a finite sample, right-continuous:
/// `F(x)` is the fraction of sample points `<= x`.
#[derive(Debug, Clone)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    /// Non-finite values are rejected; an empty sample is allowed but
    /// evaluates to 0 everywhere.
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("non-finite value in ECDF sample".into()));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Ecdf { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        if self.sorted.is_empty() {
            return 0.0;
        }
        let k = self.sorted.partition_point(|&v| v <= x);
        k as f64 / self.sorted.len() as f64
    }

    /// The sample points paired with the CDF value at each, suitable
    /// for plotting as a step function.
    pub fn steps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.sorted.len() as f64;
        self.sorted.iter().enumerate().map(move |(i, &x)| (x, (i + 1) as f64 / n))
    }
}

/// Linear-interpolation quantile (the common spreadsheet/NumPy
/// default): rank `h = (n - 1) q`, interpolated between the
/// surrounding order statistics. `q` must lie in [0, 1].
pub fn quantile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() || !(0.0..=1.0).contains(&q) {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Some(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q90: f64,
}

pub fn quantiles(values: &[f64]) -> Option<Quantiles> {
    Some(Quantiles {
        q25: quantile(values, 0.25)?,
        q50: quantile(values, 0.50)?,
        q75: quantile(values, 0.75)?,
        q90: quantile(values, 0.90)?,
    })
}

/// Sample mean and standard deviation (n - 1 in the denominator;
/// the deviation is None for fewer than two values).
pub fn mean_std(values: &[f64]) -> Option<(f64, Option<f64>)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        let ss = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
        Some((ss / (n - 1.0)).sqrt())
    } else {
        None
    };
    Some((mean, std))
}

/// The PET that governs a record: the smallest-magnitude signed PET
/// across its interacting challengers.
pub fn governing_pet(record: &ScenarioRecord) -> Option<f64> {
    let pets: Vec<f64> = record
        .challengers
        .iter()
        .filter(|c| !c.degenerate)
        .filter_map(|c| c.pet_s)
        .collect();
    min_abs_dt(&pets)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalEntry {
    pub object_id: ObjectId,
    pub pet_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapStats {
    pub n: usize,
    pub mean_s: f64,
    pub std_s: Option<f64>,
    pub quantiles_s: Option<Quantiles>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorReport {
    pub n_scenarios: usize,
    /// Scenario count per maneuver class (pattern name).
    pub class_counts: std::collections::BTreeMap<String, usize>,
    /// Scenario count per merge category.
    pub category_counts: std::collections::BTreeMap<String, usize>,
    pub start_pos_quantiles: Option<Quantiles>,
    pub end_pos_quantiles: Option<Quantiles>,
    /// Fraction of maneuvers starting within the first quarter, half
    /// and three quarters of the merging zone.
    pub frac_start_before_025: f64,
    pub frac_start_before_050: f64,
    pub frac_start_before_075: f64,
    /// Fraction of maneuvers completed within the merging zone.
    pub frac_end_within_zone: f64,
    /// |PET| quantiles per category, for categories with challengers.
    pub pet_abs_quantiles: std::collections::BTreeMap<String, Quantiles>,
    /// Accepted gap statistics over into-gap merges.
    pub accepted_gap: Option<GapStats>,
    pub n_critical: usize,
    pub critical: Vec<CriticalEntry>,
}

/// Builds the aggregate report over a batch of records.
pub fn behavior_report(records: &[ScenarioRecord]) -> BehaviorReport {
    let n = records.len();
    let mut class_counts = std::collections::BTreeMap::new();
    let mut category_counts = std::collections::BTreeMap::new();
    for r in records {
        *class_counts.entry(r.pattern_class.clone()).or_insert(0usize) += 1;
        *category_counts.entry(r.category.to_string()).or_insert(0usize) += 1;
    }

    let starts: Vec<f64> = records.iter().map(|r| r.maneuver_start_pos).collect();
    let ends: Vec<f64> = records.iter().map(|r| r.maneuver_end_pos).collect();
    let frac = |values: &[f64], limit: f64| {
        if values.is_empty() {
            0.0
        } else {
            values.iter().filter(|&&v| v < limit).count() as f64 / values.len() as f64
        }
    };
    let frac_end_within_zone = if ends.is_empty() {
        0.0
    } else {
        ends.iter().filter(|&&v| v <= 1.0).count() as f64 / ends.len() as f64
    };

    let mut pet_by_category: std::collections::BTreeMap<String, Vec<f64>> =
        std::collections::BTreeMap::new();
    for r in records {
        if let Some(p) = governing_pet(r) {
            pet_by_category.entry(r.category.to_string()).or_default().push(p.abs());
        }
    }
    let pet_abs_quantiles = pet_by_category
        .iter()
        .filter_map(|(k, v)| quantiles(v).map(|q| (k.clone(), q)))
        .collect();

    let gaps: Vec<f64> = records
        .iter()
        .filter(|r| r.category == Category::Into)
        .filter_map(|r| r.accepted_gap_s)
        .collect();
    let accepted_gap = mean_std(&gaps).map(|(mean_s, std_s)| GapStats {
        n: gaps.len(),
        mean_s,
        std_s,
        quantiles_s: quantiles(&gaps),
    });

    let critical: Vec<CriticalEntry> = records
        .iter()
        .filter(|r| r.critical)
        .filter_map(|r| {
            governing_pet(r).map(|p| CriticalEntry {
                object_id: r.object_id.clone(),
                pet_s: p,
            })
        })
        .collect();

    BehaviorReport {
        n_scenarios: n,
        class_counts,
        category_counts,
        start_pos_quantiles: quantiles(&starts),
        end_pos_quantiles: quantiles(&ends),
        frac_start_before_025: frac(&starts, 0.25),
        frac_start_before_050: frac(&starts, 0.50),
        frac_start_before_075: frac(&starts, 0.75),
        frac_end_within_zone,
        pet_abs_quantiles,
        accepted_gap,
        n_critical: critical.len(),
        critical,
    }
}

impl BehaviorReport {
    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let raw = serde_json::to_string_pretty(self).map_err(|e| Error::json(path, e))?;
        std::fs::write(path, raw).map_err(|e| Error::io(path, e))
    }
}

/// Writes an ECDF as `x,cdf` rows.
pub fn write_ecdf_csv(path: impl AsRef<Path>, ecdf: &Ecdf) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    writeln!(out, "x,cdf").expect("vec write");
    for (x, f) in ecdf.steps() {
        writeln!(out, "{x},{f}").expect("vec write");
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Writes a histogram of `values` with bins of `bin_width` aligned to
/// zero, as `bin_low,bin_high,count` rows. Empty bins inside the value
/// range are written with a zero count.
pub fn write_histogram_csv(
    path: impl AsRef<Path>,
    values: &[f64],
    bin_width: f64,
) -> Result<()> {
    let path = path.as_ref();
    if !bin_width.is_finite() || bin_width <= 0.0 {
        return Err(Error::Input("histogram bin width must be positive".into()));
    }
    let mut out = Vec::new();
    writeln!(out, "bin_low,bin_high,count").expect("vec write");
    if !values.is_empty() {
        let bin_of = |v: f64| (v / bin_width).floor() as i64;
        let lo = values.iter().copied().map(bin_of).min().expect("non-empty");
        let hi = values.iter().copied().map(bin_of).max().expect("non-empty");
        for bin in lo..=hi {
            let count = values.iter().filter(|&&v| bin_of(v) == bin).count();
            writeln!(
                out,
                "{},{},{count}",
                bin as f64 * bin_width,
                (bin + 1) as f64 * bin_width
            )
            .expect("vec write");
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assessment::PetResult;
    use crate::geometry::LaneId;
    use approx::assert_relative_eq;

    #[test]
    fn ecdf_is_right_continuous_at_sample_points() {
        let e = Ecdf::new(&[2.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(e.eval(0.9), 0.0);
        assert_eq!(e.eval(1.0), 0.25);
        assert_eq!(e.eval(1.5), 0.25);
        assert_eq!(e.eval(2.0), 0.75);
        assert_eq!(e.eval(3.0), 1.0);
        assert_eq!(e.eval(99.0), 1.0);
    }

    #[test]
    fn ecdf_rejects_non_finite_and_handles_empty() {
        assert!(Ecdf::new(&[1.0, f64::NAN]).is_err());
        assert!(Ecdf::new(&[f64::INFINITY]).is_err());
        let empty = Ecdf::new(&[]).unwrap();
        assert!(empty.is_empty());
        assert_eq!(empty.eval(0.0), 0.0);
    }

    #[test]
    fn quantile_interpolates_linearly() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_relative_eq!(quantile(&v, 0.25).unwrap(), 1.75);
        assert_relative_eq!(quantile(&v, 0.5).unwrap(), 2.5);
        assert_relative_eq!(quantile(&v, 0.0).unwrap(), 1.0);
        assert_relative_eq!(quantile(&v, 1.0).unwrap(), 4.0);
        assert_relative_eq!(quantile(&[10.0], 0.9).unwrap(), 10.0);
        assert_eq!(quantile(&[], 0.5), None);
        assert_eq!(quantile(&v, 1.5), None);
        // Order must not matter.
        assert_relative_eq!(quantile(&[4.0, 1.0, 3.0, 2.0], 0.5).unwrap(), 2.5);
    }

    #[test]
    fn mean_and_sample_std() {
        let (mean, std) = mean_std(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]).unwrap();
        assert_relative_eq!(mean, 5.0);
        assert_relative_eq!(std.unwrap(), (32.0f64 / 7.0).sqrt());
        let (mean, std) = mean_std(&[3.5]).unwrap();
        assert_eq!(mean, 3.5);
        assert_eq!(std, None);
        assert_eq!(mean_std(&[]), None);
    }

    #[allow(clippy::too_many_arguments)]
    fn record(
        id: &str,
        class: &str,
        start: f64,
        end: f64,
        pets: &[Option<f64>],
        category: Category,
        gap: Option<f64>,
        critical: bool,
    ) -> ScenarioRecord {
        ScenarioRecord {
            object_id: ObjectId::new(id),
            pattern_class: class.into(),
            similarity: 1.0,
            scores: Default::default(),
            core_frame_start: 0,
            core_frame_end: 1,
            frame_start: 0,
            frame_end: 1,
            t_start: 0.0,
            t_end: 1.0,
            maneuver_start_pos: start,
            maneuver_end_pos: end,
            cross_entry_frame: 0,
            cross_entry_t: 0.0,
            target_lane: LaneId::new("m1"),
            challengers: pets
                .iter()
                .enumerate()
                .map(|(i, p)| PetResult {
                    challenger_id: ObjectId::new(format!("{id}-c{i}")),
                    pet_s: *p,
                    n_intersections: usize::from(p.is_some()),
                    degenerate: p.is_none(),
                    overlap_warning: false,
                })
                .collect(),
            category,
            accepted_gap_s: gap,
            critical,
        }
    }

    #[test]
    fn governing_pet_is_smallest_magnitude() {
        let r = record(
            "a",
            "merge",
            0.2,
            0.8,
            &[Some(4.0), Some(-3.2), None],
            Category::Into,
            Some(7.2),
            false,
        );
        assert_eq!(governing_pet(&r), Some(-3.2));
        let free = record("b", "merge", 0.2, 0.8, &[], Category::Free, None, false);
        assert_eq!(governing_pet(&free), None);
    }

    #[test]
    fn report_aggregates_counts_and_fractions() {
        let records = vec![
            record("a", "merge", 0.10, 0.60, &[Some(2.0)], Category::Behind, None, false),
            record("b", "merge", 0.30, 0.90, &[Some(-1.5)], Category::InFront, None, false),
            record(
                "c",
                "merge",
                0.55,
                1.20,
                &[Some(3.0), Some(-4.0)],
                Category::Into,
                Some(7.0),
                false,
            ),
            record("d", "abort", 0.40, 0.70, &[], Category::Free, None, false),
            record("e", "merge", 0.20, 0.80, &[Some(0.4)], Category::Behind, None, true),
        ];
        let report = behavior_report(&records);
        assert_eq!(report.n_scenarios, 5);
        assert_eq!(report.class_counts["merge"], 4);
        assert_eq!(report.class_counts["abort"], 1);
        assert_eq!(report.category_counts["behind"], 2);
        assert_eq!(report.category_counts["free"], 1);
        assert_relative_eq!(report.frac_start_before_025, 0.4);
        assert_relative_eq!(report.frac_start_before_050, 0.8);
        assert_relative_eq!(report.frac_start_before_075, 1.0);
        assert_relative_eq!(report.frac_end_within_zone, 0.8);
        assert_eq!(report.n_critical, 1);
        assert_eq!(report.critical[0].object_id, ObjectId::new("e"));
        assert_relative_eq!(report.critical[0].pet_s, 0.4);
        let gap = report.accepted_gap.unwrap();
        assert_eq!(gap.n, 1);
        assert_relative_eq!(gap.mean_s, 7.0);
        assert_eq!(gap.std_s, None);
        assert!(report.pet_abs_quantiles.contains_key("behind"));
        assert_relative_eq!(report.pet_abs_quantiles["into"].q50, 3.0);
        let starts = report.start_pos_quantiles.unwrap();
        assert_relative_eq!(starts.q50, 0.3);
    }

    #[test]
    fn report_on_empty_batch() {
        let report = behavior_report(&[]);
        assert_eq!(report.n_scenarios, 0);
        assert_eq!(report.start_pos_quantiles, None);
        assert_eq!(report.accepted_gap, None);
        assert_eq!(report.frac_end_within_zone, 0.0);
        assert!(report.critical.is_empty());
    }

    #[test]
    fn report_round_trips_through_json() {
        let records = vec![record(
            "a",
            "merge",
            0.2,
            0.8,
            &[Some(2.0)],
            Category::Behind,
            None,
            true,
        )];
        let report = behavior_report(&records);
        let json = serde_json::to_string(&report).unwrap();
        let back: BehaviorReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn ecdf_csv_lists_steps() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ecdf.csv");
        write_ecdf_csv(&path, &Ecdf::new(&[0.5, 0.25, 1.0, 0.25]).unwrap()).unwrap();
        let content = std::fs::read_to_string(&path).unwrap();
        let mut lines = content.lines();
        assert_eq!(lines.next(), Some("x,cdf"));
        assert_eq!(lines.next(), Some("0.25,0.25"));
        assert_eq!(lines.next(), Some("0.25,0.5"));
        assert_eq!(lines.next(), Some("0.5,0.75"));
        assert_eq!(lines.next(), Some("1,1"));
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn histogram_csv_uses_zero_aligned_bins() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("hist.csv");
        write_histogram_csv(&path, &[0.2, 0.4, 0.6, -0.3], 0.5).unwrap();
        let content = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = content.lines().collect();
        assert_eq!(
            lines,
            vec!["bin_low,bin_high,count", "-0.5,0,1", "0,0.5,2", "0.5,1,1"]
        );
        // Interior empty bins appear with zero counts.
        write_histogram_csv(&path, &[0.1, 2.1], 1.0).unwrap();
        let content = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            content.lines().collect::<Vec<_>>(),
            vec!["bin_low,bin_high,count", "0,1,1", "1,2,0", "2,3,1"]
        );
        assert!(write_histogram_csv(&path, &[1.0], 0.0).is_err());
    }
}
