//! Batch statistics over extracted scenarios: run the full pipeline on a
//! synthetic dataset, then aggregate start and end positions, PET
//! magnitudes, accepted gaps and critical encounters into one report.
//!
//! Run with `cargo run --example behavior_report`.

use rampmine::pipeline::{run_extract, run_report, RunConfig};
use rampmine::synth::{generate, SynthConfig};

fn main() -> Result<(), rampmine::Error> {
    let base = std::env::temp_dir().join("rampmine-report");
    let data_dir = base.join("data");
    let out_dir = base.join("out");
    std::fs::create_dir_all(&data_dir).map_err(|e| rampmine::Error::io(&data_dir, e))?;

    let data = generate(&SynthConfig {
        seed: 17,
        n_merges: 30,
        n_aborts: 8,
        n_mainline: 25,
        noise_std_m: 0.08,
    })?;
    data.write(&data_dir)?;

    let run = RunConfig::new(
        data_dir.join("trajectories.csv"),
        data_dir.join("lanes.json"),
        &out_dir,
    );
    let summary = run_extract(&run)?;
    println!(
        "extracted {} records from {} vehicles",
        summary.n_records, summary.n_objects_analyzed
    );

    let report = run_report(out_dir.join("scenarios.jsonl"), &out_dir)?;
    println!("\nclasses:");
    for (name, n) in &report.class_counts {
        println!("  {name:<16} {n}");
    }
    println!("categories:");
    for (name, n) in &report.category_counts {
        println!("  {name:<16} {n}");
    }

    if let Some(q) = &report.start_pos_quantiles {
        println!(
            "\nmaneuver start position: q25 {:.3}, median {:.3}, q75 {:.3}, q90 {:.3}",
            q.q25, q.q50, q.q75, q.q90
        );
    }
    println!(
        "started in the first half of the zone: {:.0}%",
        100.0 * report.frac_start_before_050
    );
    println!(
        "completed inside the zone: {:.0}%",
        100.0 * report.frac_end_within_zone
    );

    for (category, q) in &report.pet_abs_quantiles {
        println!("|PET| for '{category}': median {:.2} s, q90 {:.2} s", q.q50, q.q90);
    }
    if let Some(gap) = &report.accepted_gap {
        println!("accepted gaps: n = {}, mean {:.2} s", gap.n, gap.mean_s);
    }
    println!(
        "critical encounters: {} across {} scenarios",
        report.n_critical, report.n_scenarios
    );

    println!("\ndistribution files under {}:", out_dir.display());
    for f in ["report.json", "start_pos_ecdf.csv", "end_pos_ecdf.csv", "pet_histogram.csv"] {
        println!("  {f}");
    }
    Ok(())
}
