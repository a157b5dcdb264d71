//! `mapd`: run, benchmark, generate, and validate pickup-and-delivery
//! simulations.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use mapd_cli::config::{parse_config, RunConfig};
use mapd_cli::{bench_sweep, bench_table, resolve_out_dir, run_command, validate_command};
use mapd_core::grid::{GridMap, WarehouseProfile};
use mapd_core::task::generate_tasks;
use mapd_core::Setting;

#[derive(Parser)]
#[command(name = "mapd", version, about = "MAPD solver toolkit and simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write summary/table artifacts.
    Run {
        /// Key-value configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Inline `key=value` overrides (win over the file).
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
        /// Output directory (default: $MAPD_OUT_DIR or `.`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep (variant, f, M, seed) combinations and tabulate st/rt.
    Bench {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
        /// Comma-separated variants, e.g. `lns_pbs,lns_wpbs`.
        #[arg(long, default_value = "lns_pbs")]
        variants: String,
        /// Comma-separated task frequencies.
        #[arg(long, default_value = "2")]
        freqs: String,
        /// Comma-separated agent counts.
        #[arg(long, default_value = "10")]
        agents: String,
        /// Comma-separated seeds.
        #[arg(long, default_value = "0")]
        seeds: String,
        /// Concurrent runs.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a generated warehouse map.
    GenMap {
        /// small, medium, or large.
        profile: String,
        /// Output file (default: stdout).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write a generated task set.
    GenTasks {
        /// Map file or profile name the endpoints come from.
        #[arg(long, default_value = "small")]
        map: String,
        #[arg(long)]
        count: usize,
        /// Tasks per timestep.
        #[arg(long, default_value_t = 2.0)]
        freq: f64,
        /// Goal count range `lo-hi`.
        #[arg(long, default_value = "2-2")]
        goals: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Re-simulate a path log and report violations.
    Validate {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        tasks: PathBuf,
        #[arg(long)]
        log: PathBuf,
    },
}

fn load_config(config: Option<&PathBuf>, sets: &[String]) -> Result<RunConfig> {
    let document = match config {
        Some(path) => fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?,
        None => String::new(),
    };
    Ok(parse_config(&document, sets)?)
}

fn parse_profile(name: &str) -> Result<WarehouseProfile> {
    match name {
        "small" => Ok(WarehouseProfile::Small),
        "medium" => Ok(WarehouseProfile::Medium),
        "large" => Ok(WarehouseProfile::Large),
        _ => anyhow::bail!("unknown profile `{}` (expected small, medium, or large)", name),
    }
}

fn load_map(name: &str) -> Result<GridMap> {
    match parse_profile(name) {
        Ok(profile) => Ok(GridMap::warehouse(profile)),
        Err(_) => {
            let text = fs::read_to_string(name)
                .with_context(|| format!("reading map file {}", name))?;
            GridMap::parse(&text)
                .map_err(|e| anyhow::anyhow!("{}: line {}: {}", name, e.line, e.message))
        }
    }
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| anyhow::anyhow!("bad {} entry `{}`", what, s))
        })
        .collect()
}

fn emit(output: Option<&PathBuf>, content: &str) -> Result<()> {
    match output {
        Some(path) => {
            fs::write(path, content)
                .with_context(|| format!("writing {}", path.display()))?;
        }
        None => print!("{}", content),
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run { config, sets, out } => {
            let cfg = load_config(config.as_ref(), &sets)?;
            run_command(&cfg, &resolve_out_dir(out))
        }
        Command::Bench { config, sets, variants, freqs, agents, seeds, jobs, out } => {
            let cfg = load_config(config.as_ref(), &sets)?;
            let variants: Vec<String> = parse_list(&variants, "variant")?;
            let variant_refs: Vec<&'static str> = variants
                .iter()
                .map(|v| match v.as_str() {
                    "lns_pbs" => Ok("lns_pbs"),
                    "lns_wpbs" => Ok("lns_wpbs"),
                    other => anyhow::bail!("unknown variant `{}`", other),
                })
                .collect::<Result<_>>()?;
            let rows = bench_sweep(
                &cfg,
                &variant_refs,
                &parse_list(&freqs, "frequency")?,
                &parse_list(&agents, "agent count")?,
                &parse_list(&seeds, "seed")?,
                jobs,
            )?;
            let table = bench_table(&rows);
            let dir = resolve_out_dir(out);
            fs::create_dir_all(&dir)?;
            fs::write(dir.join("bench.csv"), &table)?;
            print!("{}", table);
            Ok(if rows.iter().any(|r| r.result.is_err()) { 2 } else { 0 })
        }
        Command::GenMap { profile, output } => {
            let map = GridMap::warehouse(parse_profile(&profile)?);
            emit(output.as_ref(), &map.serialize())?;
            Ok(0)
        }
        Command::GenTasks { map, count, freq, goals, seed, output } => {
            let map = load_map(&map)?;
            let (lo, hi) = match goals.split_once('-') {
                Some((lo, hi)) => (lo.parse()?, hi.parse()?),
                None => {
                    let k: usize = goals.parse()?;
                    (k, k)
                }
            };
            anyhow::ensure!(lo >= 1 && lo <= hi, "goal range must satisfy 1 <= lo <= hi");
            let stream = generate_tasks(&map, count, freq, (lo, hi), Setting::Online, seed)
                .map_err(|_| anyhow::anyhow!("map has no task endpoints"))?;
            emit(output.as_ref(), &stream.serialize())?;
            Ok(0)
        }
        Command::Validate { map, tasks, log } => validate_command(&map, &tasks, &log),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(1)
        }
    }
}
