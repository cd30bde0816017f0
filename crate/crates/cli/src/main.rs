use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

use dispatch_core::data::{
    generate_synthetic, ingest_dir, sample_condition, ConditionName, DataError,
    ExperimentCondition, GeneratorConfig,
};
use dispatch_core::dispatch::{
    evaluate_condition, read_decision_log, write_decision_log, EvalConfig, HistoricalDispatch,
};
use dispatch_core::fleet::{FleetError, DEFAULT_AREA_KM2};
use dispatch_core::roadnet::{load_graph, GraphError, VehicleClass};
use dispatch_core::stats::{
    build_report, run_benchmark, write_benchmark, write_distribution, write_journeys,
    write_reports, BenchmarkError, ReportOptions, StatsError, TestVariant,
};

#[derive(Parser)]
#[command(
    name = "dispatchsim",
    version,
    about = "Auction vs historical ambulance dispatch"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Emergency,
    Civilian,
}

impl Profile {
    fn class(self) -> VehicleClass {
        match self {
            Profile::Emergency => VehicleClass::Emergency,
            Profile::Civilian => VehicleClass::Civilian,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Test {
    Welch,
    Student,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset.
    Generate {
        /// Flat TOML generator config; defaults apply to missing keys.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare historical and auction dispatch for one condition.
    Simulate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_parser = parse_condition)]
        condition: ConditionName,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value = "emergency")]
        profile: Profile,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "welch")]
        test: Test,
        #[arg(long, default_value_t = DEFAULT_AREA_KM2)]
        area_km2: f64,
        #[arg(long, default_value_t = 100)]
        sample: usize,
    },
    /// Observed journey times against emergency and civilian routing.
    Benchmark {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 2000)]
        sample: usize,
        #[arg(long)]
        seed: u64,
        /// Also write benchmark.csv and journeys.csv here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute a comparison report from a decision log.
    Stats {
        #[arg(long)]
        decisions: PathBuf,
        #[arg(long, default_value = "unknown")]
        condition: String,
        #[arg(long, default_value = "emergency")]
        profile: String,
        #[arg(long, value_enum, default_value = "welch")]
        test: Test,
    },
}

fn parse_condition(s: &str) -> Result<ConditionName, String> {
    s.parse()
}

fn test_variant(t: Test) -> TestVariant {
    match t {
        Test::Welch => TestVariant::Welch,
        Test::Student => TestVariant::Student,
    }
}

const HIST_DISTRIBUTION: &str = "hist_travel_times.csv";
const AUCT_DISTRIBUTION: &str = "auct_travel_times.csv";

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn generate(config: Option<PathBuf>, seed: u64, out: PathBuf) -> anyhow::Result<()> {
    let cfg = match config {
        Some(path) => GeneratorConfig::load(&path)?,
        None => GeneratorConfig::default(),
    };
    let m = generate_synthetic(&cfg, seed, &out)?;
    println!(
        "wrote {}: {} nodes, {} edges, {} vehicles, {} incidents, {} responses",
        out.display(),
        m.nodes,
        m.edges,
        m.vehicles,
        m.incidents,
        m.responses
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    data: PathBuf,
    condition: ConditionName,
    seed: u64,
    profile: Profile,
    out: PathBuf,
    test: Test,
    area_km2: f64,
    sample: usize,
) -> anyhow::Result<()> {
    let graph = Arc::new(load_graph(&data)?);
    let dataset = ingest_dir(&data)?;
    let mission = dataset.mission(graph)?;
    let mut cond = ExperimentCondition::resolve(condition, &dataset, seed)?;
    cond.sample_size = sample;
    let incidents = sample_condition(&dataset, &cond)?;
    let hist: BTreeMap<_, _> = dataset
        .first_responses()
        .iter()
        .map(|(&id, r)| (id, HistoricalDispatch::from(r)))
        .collect();
    let cfg = EvalConfig {
        class: profile.class(),
        area_km2,
        ..EvalConfig::default()
    };
    let run = evaluate_condition(&mission, &incidents, &hist, &cfg);

    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let mut w = create(&out.join("decisions.csv"))?;
    write_decision_log(&mut w, &run.pairs)?;
    w.flush()?;
    let mut w = create(&out.join("rounds.jsonl"))?;
    run.write_round_log(&mut w)?;
    w.flush()?;
    let mut w = create(&out.join("skipped.csv"))?;
    writeln!(w, "incident_id,reason,detail")?;
    for s in &run.skipped {
        writeln!(
            w,
            "{},{},\"{}\"",
            s.incident,
            s.reason,
            s.detail.replace('"', "'")
        )?;
    }
    w.flush()?;
    write_distribution(
        out.join(HIST_DISTRIBUTION),
        run.pairs
            .iter()
            .map(|p| (p.hist.incident, p.hist.simulated_travel_time)),
    )?;
    write_distribution(
        out.join(AUCT_DISTRIBUTION),
        run.pairs
            .iter()
            .map(|p| (p.auct.incident, p.auct.simulated_travel_time)),
    )?;

    let profile_label = profile.class().to_string();
    let report = build_report(
        condition.as_str(),
        &run.paired(),
        &ReportOptions {
            profile: profile_label,
            test: test_variant(test),
            exclusions: Some(run.tally()),
            hist_distribution: Some(HIST_DISTRIBUTION.into()),
            auct_distribution: Some(AUCT_DISTRIBUTION.into()),
        },
    )?;
    let mut w = create(&out.join("report.csv"))?;
    write_reports(&mut w, std::slice::from_ref(&report))?;
    w.flush()?;

    let ccgs = match &cond.ccgs {
        Some(set) => set
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(" "),
        None => "all".into(),
    };
    println!(
        "{} ({} to {}, CCG {ccgs}): n={} excluded={}",
        condition,
        cond.first_month,
        cond.last_month,
        report.n,
        report.excluded_count.unwrap_or(0)
    );
    println!(
        "mean HIST {:.2} s, mean AUCT {:.2} s, t={:.4}, p={:.3e}, choice differs {:.1}%",
        report.mean_hist_s,
        report.mean_auct_s,
        report.t_statistic,
        report.p_value,
        report.pct_choice_differs
    );
    Ok(())
}

fn benchmark(data: PathBuf, sample: usize, seed: u64, out: Option<PathBuf>) -> anyhow::Result<()> {
    let graph = load_graph(&data)?;
    let dataset = ingest_dir(&data)?;
    let (report, journeys) = run_benchmark(&dataset, &graph, sample, seed)?;
    if let Some(out) = out {
        fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
        let mut w = create(&out.join("benchmark.csv"))?;
        write_benchmark(&mut w, &report)?;
        w.flush()?;
        let mut w = create(&out.join("journeys.csv"))?;
        write_journeys(&mut w, &journeys)?;
        w.flush()?;
    }
    write_benchmark(io::stdout().lock(), &report)?;
    Ok(())
}

fn stats(decisions: PathBuf, condition: String, profile: String, test: Test) -> anyhow::Result<()> {
    let pairs = read_decision_log(&decisions)?;
    let report = build_report(
        &condition,
        &pairs,
        &ReportOptions {
            profile,
            test: test_variant(test),
            ..ReportOptions::default()
        },
    )?;
    write_reports(io::stdout().lock(), &[report])?;
    Ok(())
}

/// 2 for invalid input, 3 for shortfalls and degenerate statistics, 1 otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    let data_code = |e: &DataError| match e {
        DataError::Shortfall { .. } => 3,
        DataError::Io { .. } => 1,
        _ => 2,
    };
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<DataError>() {
            return data_code(e);
        }
        if let Some(e) = cause.downcast_ref::<BenchmarkError>() {
            return match e {
                BenchmarkError::Data(d) => data_code(d),
                BenchmarkError::Stats(_) => 3,
            };
        }
        if cause.is::<StatsError>() {
            return 3;
        }
        if let Some(e) = cause.downcast_ref::<GraphError>() {
            return if matches!(e, GraphError::Io { .. }) {
                1
            } else {
                2
            };
        }
        if cause.is::<FleetError>() {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate { config, seed, out } => generate(config, seed, out),
        Command::Simulate {
            data,
            condition,
            seed,
            profile,
            out,
            test,
            area_km2,
            sample,
        } => simulate(data, condition, seed, profile, out, test, area_km2, sample),
        Command::Benchmark {
            data,
            sample,
            seed,
            out,
        } => benchmark(data, sample, seed, out),
        Command::Stats {
            decisions,
            condition,
            profile,
            test,
        } => stats(decisions, condition, profile, test),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
