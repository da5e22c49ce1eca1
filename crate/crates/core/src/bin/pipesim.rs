//! Command-line front end: single runs, parameter sweeps and CSV aggregation.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use pipesim::batch::{average_groups, run_all, BatchPlan};
use pipesim::engine::{RunSpec, Simulation};
use pipesim::metrics::MetricsReport;
use pipesim::output;
use pipesim::scenario::{builtin_scenarios, scenario_by_name, Scheme};
use pipesim::{Error, Result, SimConfig};

#[derive(Parser)]
#[command(name = "pipesim", version, about = "UAV swarm routing and coverage simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario/scheme over one or more seeds.
    Run(RunArgs),
    /// Sweep scenarios × schemes × densities × speeds × rates × failure levels.
    Batch(BatchArgs),
    /// Average a metrics CSV per configuration and print a summary table.
    Report(ReportArgs),
}

#[derive(Args)]
struct Common {
    /// Config file (TOML, flat keys); command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seeds: a count `N` (seeds 1..=N), a range `a-b`, or a list `a,b,c`.
    #[arg(long, default_value = "1")]
    seeds: String,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "C1")]
    scenario: String,
    /// AODV, Pipe, TC-Pipe or Relay.
    #[arg(long, default_value = "TC-Pipe")]
    scheme: String,
    #[arg(long)]
    uavs: Option<u32>,
    /// Cruise speed in m/s.
    #[arg(long)]
    speed: Option<f64>,
    /// Per-flow data rate in Mbit/s.
    #[arg(long)]
    rate: Option<f64>,
    /// Percentage of UAVs failing during the measurement window.
    #[arg(long, default_value_t = 0.0)]
    failures: f64,
    /// Also write per-tick trajectories and a final pheromone heatmap.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct BatchArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated scenario names.
    #[arg(long, default_value = "C1,C4")]
    scenario: String,
    #[arg(long, default_value = "AODV,Pipe,TC-Pipe,Relay")]
    scheme: String,
    #[arg(long, default_value = "30,50")]
    uavs: String,
    #[arg(long, default_value = "20,40")]
    speed: String,
    /// Mbit/s values.
    #[arg(long, default_value = "1,2,3")]
    rate: String,
    #[arg(long, default_value = "0")]
    failures: String,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct ReportArgs {
    /// Metrics CSV written by `run` or `batch`.
    #[arg(long)]
    input: PathBuf,
    /// Where to write the averaged CSV (defaults to printing only).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let bad = || Error::InvalidConfig(format!("cannot parse seeds {s:?}"));
    if let Some((a, b)) = s.split_once('-') {
        let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        return if a <= b { Ok((a..=b).collect()) } else { Err(bad()) };
    }
    if s.contains(',') {
        return s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect();
    }
    let n: u64 = s.trim().parse().map_err(|_| bad())?;
    Ok((1..=n).collect())
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|x| x.trim().parse::<T>().map_err(|_| Error::InvalidConfig(format!("cannot parse {what} {x:?}"))))
        .collect()
}

fn base_config(path: &Option<PathBuf>) -> Result<SimConfig> {
    match path {
        Some(p) => SimConfig::load(p),
        None => Ok(SimConfig::default()),
    }
}

fn mbps(x: f64) -> f64 {
    x * 1e6
}

fn print_table(reports: &[MetricsReport]) {
    println!(
        "{:<4} {:<8} {:>4} {:>5} {:>5} {:>5} {:>5} {:>7} {:>8} {:>7} {:>6} {:>6} {:>6}",
        "scen", "scheme", "n", "v", "Mbps", "fail%", "runs", "PDR", "R_b", "R_u%", "len", "C_v%", "F"
    );
    for r in reports {
        println!(
            "{:<4} {:<8} {:>4} {:>5} {:>5} {:>5} {:>5} {:>7} {:>8.2} {:>7.2} {:>6} {:>6.2} {:>6.3}",
            r.scenario,
            r.scheme,
            r.n_uavs,
            r.speed_mps,
            r.data_rate_bps / 1e6,
            r.failure_pct,
            r.runs,
            r.pdr.map_or("-".to_string(), |p| format!("{p:.3}")),
            r.r_b,
            r.r_u,
            r.route_length.map_or("-".to_string(), |l| format!("{l:.2}")),
            r.c_v,
            r.fairness
        );
    }
}

fn cmd_run(a: RunArgs) -> Result<()> {
    let mut cfg = base_config(&a.common.config)?;
    if let Some(n) = a.uavs {
        cfg.n_uavs = n;
    }
    if let Some(v) = a.speed {
        cfg.speed_mps = v;
    }
    if let Some(r) = a.rate {
        cfg.data_rate_bps = mbps(r);
    }
    let scenario = scenario_by_name(&a.scenario)?;
    let scheme: Scheme = a.scheme.parse()?;
    let out = &a.common.out_dir;
    fs::create_dir_all(out)?;
    let mut reports = Vec::new();
    let mut series = Vec::new();
    for seed in parse_seeds(&a.common.seeds)? {
        let spec = RunSpec {
            scenario: scenario.clone(),
            scheme,
            failure_pct: a.failures,
            config: SimConfig { seed, ..cfg.clone() },
            trace: a.trace,
        };
        let started = Instant::now();
        let mut sim = Simulation::new(&spec)?;
        sim.run_to_end();
        let report = sim.report();
        eprintln!(
            "{} {} seed {seed}: PDR {} R_b {:.1} R_u {:.1}% C_v {:.1}% ({:.2} s)",
            scenario.name,
            scheme,
            report.pdr.map_or("-".into(), |p| format!("{p:.3}")),
            report.r_b,
            report.r_u,
            report.c_v,
            started.elapsed().as_secs_f64()
        );
        let tag = format!("{}_{}_s{seed}", scenario.name, scheme.as_str().replace('-', ""));
        output::write_events_csv(&out.join(format!("events_{tag}.csv")), &scenario.name, scheme.as_str(), seed, sim.events())?;
        output::write_mask_csv(&out.join(format!("masks_{tag}.csv")), sim.mask_events())?;
        if let Some(trace) = sim.trace() {
            output::write_trace_csv(&out.join(format!("trace_{tag}.csv")), trace)?;
            output::write_heatmap_csv(&out.join(format!("heatmap_{tag}.csv")), sim.field())?;
        }
        series.extend(sim.series());
        reports.push(report);
    }
    output::write_metrics_csv(&out.join("metrics.csv"), &reports)?;
    output::write_series_csv(&out.join("series.csv"), &series)?;
    let avg = average_groups(&reports);
    output::write_metrics_csv(&out.join("metrics_avg.csv"), &avg)?;
    print_table(&avg);
    Ok(())
}

fn cmd_batch(a: BatchArgs) -> Result<()> {
    if let Some(t) = a.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    }
    let base = base_config(&a.common.config)?;
    let scenarios = if a.scenario.eq_ignore_ascii_case("all") {
        builtin_scenarios()
    } else {
        a.scenario.split(',').map(|s| scenario_by_name(s.trim())).collect::<Result<_>>()?
    };
    let plan = BatchPlan {
        base,
        scenarios,
        schemes: parse_list(&a.scheme, "scheme")?,
        n_uavs: parse_list(&a.uavs, "UAV count")?,
        speeds_mps: parse_list(&a.speed, "speed")?,
        rates_bps: parse_list::<f64>(&a.rate, "rate")?.into_iter().map(mbps).collect(),
        failure_pcts: parse_list(&a.failures, "failure percentage")?,
        seeds: parse_seeds(&a.common.seeds)?,
    };
    let specs = plan.specs();
    eprintln!("running {} simulations", specs.len());
    let started = Instant::now();
    let reports = run_all(&specs)?;
    eprintln!("done in {:.1} s", started.elapsed().as_secs_f64());
    fs::create_dir_all(&a.common.out_dir)?;
    output::write_metrics_csv(&a.common.out_dir.join("metrics.csv"), &reports)?;
    let avg = average_groups(&reports);
    output::write_metrics_csv(&a.common.out_dir.join("metrics_avg.csv"), &avg)?;
    print_table(&avg);
    Ok(())
}

fn cmd_report(a: ReportArgs) -> Result<()> {
    let reports = output::read_metrics_csv(Path::new(&a.input))?;
    let avg = average_groups(&reports);
    if let Some(out) = &a.out {
        output::write_metrics_csv(out, &avg)?;
    }
    print_table(&avg);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Batch(a) => cmd_batch(a),
        Command::Report(a) => cmd_report(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
