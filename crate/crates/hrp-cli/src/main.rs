//! Command-line front end: config ingestion, run/sweep dispatch, and report
//! serialization.
//!
//! Exit codes: 0 success, 1 infeasible-only results or runtime failure,
//! 2 usage or config error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use hrp_core::allocator::{self, AllocationProblem, ObjectiveKind};
use hrp_core::association::{associate, rate_matrix};
use hrp_core::channel::build_channel_set;
use hrp_core::experiments::{run_report, sweep, Report, SweepAxis, SweepSpec};
use hrp_core::scenario::generate_topology;
use hrp_core::NetworkConfig;

#[derive(Parser)]
#[command(name = "hrp", version, about = "Beyond-cell network planning and resource allocation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// TOML config file; defaults apply for missing keys, unknown keys are
    /// rejected.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Single seed (overrides the config's seed).
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Inclusive seed range A..B.
    #[arg(long)]
    seeds: Option<String>,
    /// Objective: sum-rate, max-min, min-ris, proportional, or all.
    #[arg(long, default_value = "all")]
    objective: String,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline for one config over one or more seeds.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Output directory for manifest.json, report.csv, report.json.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Worker threads for parallel cells.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Sweep one config parameter over a value range.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Swept parameter: bs-count, carrier-freq, n-max, r-min, p-cs-max.
        #[arg(long)]
        axis: String,
        /// Value range lo:hi:step (inclusive), or a comma-separated list.
        #[arg(long)]
        values: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Parse and validate a config, then print the fully resolved form.
    ValidateConfig {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print the transformed convex program for one scenario's allocation.
    DumpGp {
        #[command(flatten)]
        common: CommonArgs,
    },
}

/// Usage/config errors exit 2; everything else exits 1.
#[derive(Debug)]
enum CliError {
    Config(String),
    Runtime(anyhow::Error),
}

type CliResult<T> = Result<T, CliError>;

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn load_config(path: Option<&Path>) -> CliResult<NetworkConfig> {
    let config = match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| config_err(format!("cannot read {}: {e}", p.display())))?;
            toml::from_str::<NetworkConfig>(&text)
                .map_err(|e| config_err(format!("{}: {e}", p.display())))?
        }
        None => NetworkConfig::default(),
    };
    config
        .validate()
        .map_err(|e| config_err(e.to_string()))?;
    Ok(config)
}

fn parse_objectives(s: &str) -> CliResult<Vec<ObjectiveKind>> {
    match s {
        "all" => Ok(ObjectiveKind::ALL.to_vec()),
        "sum-rate" => Ok(vec![ObjectiveKind::SumRate]),
        "max-min" => Ok(vec![ObjectiveKind::MaxMin]),
        "min-ris" => Ok(vec![ObjectiveKind::MinRis]),
        "proportional" => Ok(vec![ObjectiveKind::Proportional]),
        other => Err(config_err(format!(
            "unknown objective '{other}' (expected sum-rate, max-min, min-ris, proportional, all)"
        ))),
    }
}

fn parse_axis(s: &str) -> CliResult<SweepAxis> {
    match s.replace('_', "-").as_str() {
        "bs-count" => Ok(SweepAxis::BsCount),
        "carrier-freq" => Ok(SweepAxis::CarrierFreq),
        "n-max" => Ok(SweepAxis::NMax),
        "r-min" => Ok(SweepAxis::RMin),
        "p-cs-max" => Ok(SweepAxis::PCsMax),
        other => Err(config_err(format!(
            "unknown axis '{other}' (expected bs-count, carrier-freq, n-max, r-min, p-cs-max)"
        ))),
    }
}

/// `lo:hi:step` expands to the inclusive arithmetic progression; otherwise a
/// comma-separated list.
fn parse_values(s: &str) -> CliResult<Vec<f64>> {
    let parse_one = |v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|_| config_err(format!("invalid number '{v}'")))
    };
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(config_err(format!("expected lo:hi:step, got '{s}'")));
        }
        let lo = parse_one(parts[0])?;
        let hi = parse_one(parts[1])?;
        let step = parse_one(parts[2])?;
        if step <= 0.0 || hi < lo {
            return Err(config_err(format!("bad range '{s}': need step > 0 and hi >= lo")));
        }
        let mut values = Vec::new();
        let mut i = 0u64;
        loop {
            let v = lo + i as f64 * step;
            if v > hi * (1.0 + 1e-12) + 1e-12 {
                break;
            }
            values.push(v);
            i += 1;
        }
        Ok(values)
    } else {
        s.split(',').map(parse_one).collect()
    }
}

fn parse_seeds(common: &CommonArgs, config: &NetworkConfig) -> CliResult<Vec<u64>> {
    if let Some(range) = &common.seeds {
        let (a, b) = range
            .split_once("..")
            .ok_or_else(|| config_err(format!("expected A..B, got '{range}'")))?;
        let a: u64 = a.trim().parse().map_err(|_| config_err(format!("bad seed '{a}'")))?;
        let b: u64 = b.trim().parse().map_err(|_| config_err(format!("bad seed '{b}'")))?;
        if b < a {
            return Err(config_err(format!("empty seed range '{range}'")));
        }
        Ok((a..=b).collect())
    } else {
        Ok(vec![common.seed.unwrap_or(config.seed)])
    }
}

#[derive(Serialize)]
struct RunManifest<'a> {
    tool_version: &'static str,
    timestamp_unix: u64,
    command: &'a str,
    config: &'a NetworkConfig,
    config_hash: String,
    seeds: &'a [u64],
    objectives: Vec<String>,
    axis: Option<String>,
    values: Option<&'a [f64]>,
    outputs: Vec<String>,
}

/// JSON report: the CSV rows plus the deterministic manifest fields (the
/// timestamp lives only in manifest.json so repeated runs are byte-identical).
#[derive(Serialize)]
struct ReportDoc<'a> {
    tool_version: &'static str,
    config: &'a NetworkConfig,
    config_hash: String,
    seeds: &'a [u64],
    objectives: Vec<String>,
    axis: Option<String>,
    #[serde(flatten)]
    report: &'a Report,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let tmp = path.with_extension("tmp");
    let write = || -> std::io::Result<()> {
        fs::write(&tmp, bytes)?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        CliError::Runtime(anyhow::anyhow!("cannot write {}: {e}", path.display()))
    })
}

fn csv_bytes(report: &Report) -> Vec<u8> {
    let mut out = String::from(
        "seed,axis_value,objective,k1_count,k2_count,coverage_pct,served_pct,sum_rate_bps,mean_rate_bps,worst_rate_bps,total_n_units,total_p_watts,solver_status,solver_iters\n",
    );
    for r in &report.rows {
        out.push_str(&format!(
            "{},{:e},{},{},{},{:e},{:e},{:e},{:e},{:e},{},{:e},{},{}\n",
            r.seed,
            r.axis_value,
            r.objective,
            r.k1_count,
            r.k2_count,
            r.coverage_pct,
            r.served_pct,
            r.sum_rate_bps,
            r.mean_rate_bps,
            r.worst_rate_bps,
            r.total_n_units,
            r.total_p_watts,
            r.solver_status,
            r.solver_iters,
        ));
    }
    out.into_bytes()
}

#[allow(clippy::too_many_arguments)]
fn emit(
    out_dir: &Path,
    command: &str,
    config: &NetworkConfig,
    seeds: &[u64],
    objectives: &[ObjectiveKind],
    axis: Option<SweepAxis>,
    values: Option<&[f64]>,
    report: &Report,
) -> CliResult<()> {
    fs::create_dir_all(out_dir).map_err(|e| {
        CliError::Runtime(anyhow::anyhow!("cannot create {}: {e}", out_dir.display()))
    })?;
    let objective_names: Vec<String> = objectives.iter().map(|o| o.to_string()).collect();
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION"),
        timestamp_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        command,
        config,
        config_hash: config.config_hash(),
        seeds,
        objectives: objective_names.clone(),
        axis: axis.map(|a| a.to_string()),
        values,
        outputs: vec!["report.csv".into(), "report.json".into()],
    };
    let mut manifest_json = serde_json::to_vec_pretty(&manifest)
        .map_err(|e| CliError::Runtime(e.into()))?;
    manifest_json.push(b'\n');
    write_atomic(&out_dir.join("manifest.json"), &manifest_json)?;

    write_atomic(&out_dir.join("report.csv"), &csv_bytes(report))?;

    let doc = ReportDoc {
        tool_version: env!("CARGO_PKG_VERSION"),
        config,
        config_hash: config.config_hash(),
        seeds,
        objectives: objective_names,
        axis: axis.map(|a| a.to_string()),
        report,
    };
    let mut json = serde_json::to_vec_pretty(&doc).map_err(|e| CliError::Runtime(e.into()))?;
    json.push(b'\n');
    write_atomic(&out_dir.join("report.json"), &json)?;
    Ok(())
}

/// Exit 1 when every solver row came back infeasible.
fn infeasible_only(report: &Report) -> bool {
    let mut any = false;
    for row in &report.rows {
        if row.solver_status != "infeasible" {
            return false;
        }
        any = true;
    }
    any
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match jobs {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Runtime(e.into()))?;
            Ok(pool.install(f))
        }
    }
}

fn cmd_run(common: CommonArgs, out: PathBuf, jobs: Option<usize>) -> CliResult<bool> {
    let config = load_config(common.config.as_deref())?;
    let seeds = parse_seeds(&common, &config)?;
    let objectives = parse_objectives(&common.objective)?;
    let report = with_pool(jobs, || run_report(&config, &seeds, &objectives))?
        .map_err(|e| CliError::Runtime(e.into()))?;
    emit(&out, "run", &config, &seeds, &objectives, None, None, &report)?;
    log::info!("run complete: {} rows -> {}", report.rows.len(), out.display());
    Ok(infeasible_only(&report))
}

fn cmd_sweep(
    common: CommonArgs,
    axis: String,
    values: String,
    out: PathBuf,
    jobs: Option<usize>,
) -> CliResult<bool> {
    let config = load_config(common.config.as_deref())?;
    let seeds = parse_seeds(&common, &config)?;
    let objectives = parse_objectives(&common.objective)?;
    let axis = parse_axis(&axis)?;
    let values = parse_values(&values)?;
    let spec = SweepSpec {
        axis,
        values: values.clone(),
        seeds: seeds.clone(),
        objectives: objectives.clone(),
    };
    spec.validate().map_err(|e| config_err(e.to_string()))?;
    let report = with_pool(jobs, || sweep(&spec, &config))?
        .map_err(|e| CliError::Runtime(e.into()))?;
    emit(&out, "sweep", &config, &seeds, &objectives, Some(axis), Some(&values), &report)?;
    log::info!("sweep complete: {} rows -> {}", report.rows.len(), out.display());
    Ok(infeasible_only(&report))
}

fn cmd_validate(config: Option<PathBuf>) -> CliResult<()> {
    let config = load_config(config.as_deref())?;
    let resolved = toml::to_string_pretty(&config)
        .map_err(|e| CliError::Runtime(e.into()))?;
    print!("{resolved}");
    Ok(())
}

fn cmd_dump_gp(common: CommonArgs) -> CliResult<()> {
    let config = load_config(common.config.as_deref())?;
    let seeds = parse_seeds(&common, &config)?;
    let objectives = parse_objectives(&common.objective)?;
    let seed = seeds[0];
    let topology = generate_topology(&config, seed).map_err(|e| CliError::Runtime(e.into()))?;
    let channels =
        build_channel_set(&topology, &config, seed).map_err(|e| CliError::Runtime(e.into()))?;
    let rates = rate_matrix(&channels, &config);
    let partition = associate(&rates, &channels, &config);
    let gains: Vec<f64> = partition
        .k2
        .iter()
        .map(|&ue| channels.beyond[ue].gain_lin)
        .collect();
    let problem = AllocationProblem::from_config(&config, gains);
    for objective in objectives {
        let program = match objective {
            ObjectiveKind::SumRate => allocator::build_sum_rate_problem(&problem),
            ObjectiveKind::MaxMin => allocator::build_max_min_problem(&problem),
            ObjectiveKind::MinRis => allocator::build_min_ris_problem(&problem),
            ObjectiveKind::Proportional => {
                println!("objective proportional: benchmark, no GP formulation");
                continue;
            }
        };
        println!("objective {objective}: seed {seed}, {} beyond-cell UEs", partition.k2.len());
        print!("{}", program.dump());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("HRP_LOG")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { common, out, jobs } => cmd_run(common, out, jobs),
        Command::Sweep { common, axis, values, out, jobs } => {
            cmd_sweep(common, axis, values, out, jobs)
        }
        Command::ValidateConfig { config } => cmd_validate(config).map(|()| false),
        Command::DumpGp { common } => cmd_dump_gp(common).map(|()| false),
    };
    match outcome {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("all allocation objectives were infeasible");
            ExitCode::from(1)
        }
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
