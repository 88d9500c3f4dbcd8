use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rampmine::pipeline::{run_evaluate, run_extract, run_report, ConfigFile, RunConfig};
use rampmine::synth::{generate, SynthConfig};

/// Extraction and assessment of highway on-ramp merging scenarios
/// from trajectory datasets.
#[derive(Parser)]
#[command(name = "rampmine", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract, classify and assess merging scenarios from a dataset.
    Extract(ExtractArgs),
    /// Score extracted scenarios against ground-truth labels.
    Evaluate(EvaluateArgs),
    /// Generate a labeled synthetic dataset.
    Synth(SynthArgs),
    /// Aggregate extracted scenarios into distribution reports.
    Report(ReportArgs),
}

#[derive(Args)]
struct ExtractArgs {
    /// Trajectory CSV (object_id,frame,t,x,y,heading,v,width,length,class).
    #[arg(long)]
    trajectories: PathBuf,
    /// Lane model JSON.
    #[arg(long)]
    lanes: PathBuf,
    /// Output directory for scenarios.jsonl and summary.json.
    #[arg(long)]
    out: PathBuf,
    /// Decoder parameter JSON; built-in parameters when omitted.
    #[arg(long)]
    hmm_params: Option<PathBuf>,
    /// Pattern library JSON; built-in patterns when omitted.
    #[arg(long)]
    patterns: Option<PathBuf>,
    /// Minimum primitive rank that opens a candidate core.
    #[arg(long, default_value_t = 2)]
    xi: usize,
    /// Challenger search range around the ego, meters.
    #[arg(long, default_value_t = 100.0)]
    vicinity_m: f64,
    /// |PET| below this flags a scenario critical, seconds.
    #[arg(long, default_value_t = 1.0)]
    critical_s: f64,
    /// Drop candidate cores shorter than this, seconds.
    #[arg(long, default_value_t = 0.2)]
    min_duration_s: f64,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// JSON config whose fields override the flags above.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write per-object feature tables under <out>/features/.
    #[arg(long)]
    dump_features: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Extracted scenarios (JSON lines).
    #[arg(long)]
    scenarios: PathBuf,
    /// Ground-truth labels JSON.
    #[arg(long)]
    labels: PathBuf,
    /// Output directory for evaluation.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory for trajectories.csv, lanes.json, labels.json.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    merges: usize,
    #[arg(long, default_value_t = 5)]
    aborts: usize,
    #[arg(long, default_value_t = 10)]
    mainline: usize,
    /// Per-frame position noise, meters.
    #[arg(long, default_value_t = 0.0)]
    noise_std: f64,
}

#[derive(Args)]
struct ReportArgs {
    /// Extracted scenarios (JSON lines).
    #[arg(long)]
    scenarios: PathBuf,
    /// Output directory for report.json and plot tables.
    #[arg(long)]
    out: PathBuf,
}

fn run(cli: Cli) -> rampmine::Result<()> {
    match cli.command {
        Command::Extract(args) => {
            let mut cfg = RunConfig::new(args.trajectories, args.lanes, args.out);
            cfg.hmm_params = args.hmm_params;
            cfg.patterns = args.patterns;
            cfg.xi = args.xi;
            cfg.vicinity_m = args.vicinity_m;
            cfg.critical_s = args.critical_s;
            cfg.min_candidate_duration_s = args.min_duration_s;
            cfg.workers = args.workers;
            cfg.dump_features = args.dump_features;
            if let Some(path) = args.config {
                ConfigFile::load(path)?.apply(&mut cfg);
            }
            let summary = run_extract(&cfg)?;
            println!(
                "analyzed {} of {} objects, {} scenario records ({} critical)",
                summary.n_objects_analyzed,
                summary.n_objects_loaded,
                summary.n_records,
                summary.n_critical
            );
        }
        Command::Evaluate(args) => {
            let summary = run_evaluate(args.scenarios, args.labels, args.out)?;
            let rate = |v: Option<f64>| match v {
                Some(v) => format!("{v:.3}"),
                None => String::from("n/a"),
            };
            println!(
                "{} ground-truth maneuvers, {} records: recall {}, precision {}",
                summary.n_gt_maneuvers,
                summary.n_records,
                rate(summary.recall),
                rate(summary.precision)
            );
        }
        Command::Synth(args) => {
            let cfg = SynthConfig {
                seed: args.seed,
                n_merges: args.merges,
                n_aborts: args.aborts,
                n_mainline: args.mainline,
                noise_std_m: args.noise_std,
            };
            let data = generate(&cfg)?;
            std::fs::create_dir_all(&args.out)
                .map_err(|e| rampmine::Error::io(&args.out, e))?;
            data.write(&args.out)?;
            println!(
                "wrote {} trajectories and {} labels to {}",
                data.trajectories.len(),
                data.labels.len(),
                args.out.display()
            );
        }
        Command::Report(args) => {
            let report = run_report(args.scenarios, args.out)?;
            println!(
                "{} scenarios aggregated, {} critical",
                report.n_scenarios, report.n_critical
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
