//! Command-line layer over the solver core: configuration, instance
//! assembly, artifact writing, benchmarking, and validation.

pub mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mapd_core::grid::GridMap;
use mapd_core::sim::{run, verify_execution, ExecutionLog, Metrics, RunOutput, SimError};
use mapd_core::task::TaskStream;
use mapd_core::{Clock, Location};

use config::{MapSource, RunConfig, StartSource, TaskSource};

/// Milliseconds since process start (monotonic).
pub struct WallClock(Instant);

impl WallClock {
    pub fn new() -> Self {
        WallClock(Instant::now())
    }
}

impl Default for WallClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for WallClock {
    fn now_ms(&self) -> u64 {
        self.0.elapsed().as_millis() as u64
    }
}

/// Environment variable overriding the artifact output directory.
pub const OUT_DIR_ENV: &str = "MAPD_OUT_DIR";

/// Explicit flag, else the environment override, else the current dir.
pub fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

pub struct Instance {
    pub map: GridMap,
    pub stream: TaskStream,
    pub starts: Vec<Location>,
}

/// Materializes map, task stream, and agent start locations.
pub fn load_instance(cfg: &RunConfig) -> Result<Instance> {
    let map = match &cfg.map {
        MapSource::Profile(profile) => GridMap::warehouse(*profile),
        MapSource::File(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading map file {}", path.display()))?;
            GridMap::parse(&text)
                .map_err(|e| anyhow::anyhow!("{}: line {}: {}", path.display(), e.line, e.message))?
        }
    };
    let stream = match &cfg.tasks {
        TaskSource::File(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading task file {}", path.display()))?;
            TaskStream::parse(&text, cfg.setting)
                .map_err(|e| anyhow::anyhow!("{}: line {}: {}", path.display(), e.line, e.message))?
        }
        TaskSource::Generated { count, freq, goals } => {
            mapd_core::task::generate_tasks(&map, *count, *freq, *goals, cfg.setting, cfg.seed)
                .map_err(|_| anyhow::anyhow!("map has no task endpoints"))?
        }
    };
    let starts = match &cfg.starts {
        StartSource::Explicit(starts) => {
            for &s in starts {
                if !map.in_bounds(s) || map.is_blocked(s) {
                    bail!("agent start {} is blocked or out of bounds", s);
                }
            }
            starts.clone()
        }
        StartSource::Seeded => {
            let endpoints = map.non_task_endpoints();
            if endpoints.len() < cfg.agents {
                bail!(
                    "map has {} non-task endpoints but {} agents requested",
                    endpoints.len(),
                    cfg.agents
                );
            }
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            sample(&mut rng, endpoints.len(), cfg.agents)
                .iter()
                .map(|i| endpoints[i])
                .collect()
        }
    };
    Ok(Instance { map, stream, starts })
}

/// Key-value summary document (LF, fixed decimal formatting).
pub fn summary_text(metrics: &Metrics) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "st={:.6}", metrics.st);
    let _ = writeln!(out, "rt={:.6}", metrics.rt);
    let _ = writeln!(out, "makespan={}", metrics.makespan);
    let _ = writeln!(out, "completed={}", metrics.completed);
    let _ = writeln!(out, "deferred_events={}", metrics.deferred_events);
    let _ = writeln!(out, "expanded_pt_nodes_total={}", metrics.expanded_pt_nodes_total);
    out
}

/// CSV of per-task completions.
pub fn task_table(metrics: &Metrics) -> String {
    let mut out = String::from("task,release,completion,service\n");
    for r in &metrics.task_records {
        let _ = writeln!(out, "{},{},{},{}", r.id, r.release, r.completion, r.service);
    }
    out
}

/// CSV of per-timestep runtimes.
pub fn runtime_table(metrics: &Metrics) -> String {
    let mut out = String::from("t,assign_ms,path_ms\n");
    for &(t, a, p) in &metrics.timestep_runtimes {
        let _ = writeln!(out, "{},{},{}", t, a, p);
    }
    out
}

/// Process exit codes for the `run` command.
pub const EXIT_SOLVER_FAILURE: i32 = 2;
pub const EXIT_NONTERMINATION: i32 = 3;

/// Executes a configured run and writes `summary.txt`, `tasks.csv`,
/// `runtimes.csv`, and optionally `paths.log` into `out_dir`. Returns the
/// process exit code.
pub fn run_command(cfg: &RunConfig, out_dir: &Path) -> Result<i32> {
    let instance = load_instance(cfg)?;
    let clock = WallClock::new();
    let outcome = run(
        &instance.map,
        &instance.stream,
        &instance.starts,
        &cfg.sim_config(),
        &clock,
    );
    let output = match outcome {
        Ok(output) => output,
        Err(e @ SimError::TimestepLimit { .. }) => {
            eprintln!("error: {}", e);
            return Ok(EXIT_NONTERMINATION);
        }
        Err(e) => {
            eprintln!("error: {}", e);
            return Ok(EXIT_SOLVER_FAILURE);
        }
    };
    write_artifacts(&output, cfg.write_log, out_dir)?;
    println!("{}", summary_text(&output.metrics).trim_end());
    Ok(0)
}

pub fn write_artifacts(output: &RunOutput, write_log: bool, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output dir {}", out_dir.display()))?;
    fs::write(out_dir.join("summary.txt"), summary_text(&output.metrics))?;
    fs::write(out_dir.join("tasks.csv"), task_table(&output.metrics))?;
    fs::write(out_dir.join("runtimes.csv"), runtime_table(&output.metrics))?;
    if write_log {
        fs::write(out_dir.join("paths.log"), output.log.serialize())?;
    }
    Ok(())
}

/// One benchmark sweep cell.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub variant: &'static str,
    pub freq: f64,
    pub agents: usize,
    pub seed: u64,
    /// `Ok((st, rt))` or an error description.
    pub result: std::result::Result<(f64, f64), String>,
}

/// Runs the cross product of variants, frequencies, agent counts, and
/// seeds over the base config, dispatching runs across `jobs` threads.
/// Row order is deterministic regardless of scheduling.
pub fn bench_sweep(
    base: &RunConfig,
    variants: &[&'static str],
    freqs: &[f64],
    agent_counts: &[usize],
    seeds: &[u64],
    jobs: usize,
) -> Result<Vec<BenchRow>> {
    let mut cells: Vec<RunConfig> = Vec::new();
    let mut rows: Vec<BenchRow> = Vec::new();
    for &variant in variants {
        for &freq in freqs {
            for &agents in agent_counts {
                for &seed in seeds {
                    let mut cfg = base.clone();
                    cfg.agents = agents;
                    cfg.seed = seed;
                    match &mut cfg.tasks {
                        TaskSource::Generated { freq: f, .. } => *f = freq,
                        TaskSource::File(_) => bail!("bench requires generated tasks"),
                    }
                    cfg.variant = match variant {
                        "lns_pbs" => mapd_core::sim::Variant::LnsPbs,
                        // keep the base window if one was configured
                        "lns_wpbs" => match base.variant {
                            w @ mapd_core::sim::Variant::LnsWpbs { .. } => w,
                            _ => mapd_core::sim::Variant::LnsWpbs { window: 10 },
                        },
                        other => bail!("unknown variant `{}`", other),
                    };
                    cells.push(cfg);
                    rows.push(BenchRow {
                        variant,
                        freq,
                        agents,
                        seed,
                        result: Err(String::from("not run")),
                    });
                }
            }
        }
    }

    let next = Mutex::new(0usize);
    let results: Vec<Mutex<Option<std::result::Result<(f64, f64), String>>>> =
        cells.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..jobs.max(1) {
            scope.spawn(|| loop {
                let i = {
                    let mut guard = next.lock().unwrap();
                    let i = *guard;
                    if i >= cells.len() {
                        return;
                    }
                    *guard += 1;
                    i
                };
                let outcome = run_cell(&cells[i]);
                *results[i].lock().unwrap() = Some(outcome);
            });
        }
    });
    for (row, slot) in rows.iter_mut().zip(results) {
        row.result = slot.into_inner().unwrap().expect("bench cell not executed");
    }
    Ok(rows)
}

fn run_cell(cfg: &RunConfig) -> std::result::Result<(f64, f64), String> {
    let instance = load_instance(cfg).map_err(|e| e.to_string())?;
    let clock = WallClock::new();
    run(&instance.map, &instance.stream, &instance.starts, &cfg.sim_config(), &clock)
        .map(|out| (out.metrics.st, out.metrics.rt))
        .map_err(|e| e.to_string())
}

/// CSV with one row per sweep cell plus `mean` rows per (variant, f, M).
pub fn bench_table(rows: &[BenchRow]) -> String {
    let mut out = String::from("variant,f,M,seed,st,rt,status\n");
    for row in rows {
        match &row.result {
            Ok((st, rt)) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{:.6},{:.6},ok",
                    row.variant, row.freq, row.agents, row.seed, st, rt
                );
            }
            Err(msg) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},,,failed: {}",
                    row.variant, row.freq, row.agents, row.seed, msg
                );
            }
        }
    }
    // aggregate means over succeeding seeds, preserving first-seen order
    let mut groups: Vec<(&'static str, f64, usize, Vec<(f64, f64)>)> = Vec::new();
    for row in rows {
        if let Ok(pair) = row.result {
            match groups
                .iter_mut()
                .find(|g| g.0 == row.variant && g.1 == row.freq && g.2 == row.agents)
            {
                Some(g) => g.3.push(pair),
                None => groups.push((row.variant, row.freq, row.agents, vec![pair])),
            }
        }
    }
    for (variant, freq, agents, pairs) in groups {
        let n = pairs.len() as f64;
        let st = pairs.iter().map(|p| p.0).sum::<f64>() / n;
        let rt = pairs.iter().map(|p| p.1).sum::<f64>() / n;
        let _ = writeln!(out, "{},{},{},mean,{:.6},{:.6},ok", variant, freq, agents, st, rt);
    }
    out
}

/// Re-simulates a path log against its map and tasks. Returns the exit
/// code: 0 clean, 1 with the first violation printed.
pub fn validate_command(map_path: &Path, tasks_path: &Path, log_path: &Path) -> Result<i32> {
    let map_text = fs::read_to_string(map_path)
        .with_context(|| format!("reading map file {}", map_path.display()))?;
    let map = GridMap::parse(&map_text)
        .map_err(|e| anyhow::anyhow!("{}: line {}: {}", map_path.display(), e.line, e.message))?;
    let tasks_text = fs::read_to_string(tasks_path)
        .with_context(|| format!("reading task file {}", tasks_path.display()))?;
    let stream = TaskStream::parse(&tasks_text, mapd_core::Setting::Offline).map_err(|e| {
        anyhow::anyhow!("{}: line {}: {}", tasks_path.display(), e.line, e.message)
    })?;
    let log_text = fs::read_to_string(log_path)
        .with_context(|| format!("reading path log {}", log_path.display()))?;
    let log = ExecutionLog::parse(&log_text)
        .map_err(|e| anyhow::anyhow!("{}: line {}: {}", log_path.display(), e.line, e.message))?;

    let tasks: Vec<_> = stream.all_tasks().cloned().collect();
    let report = verify_execution(&map, &tasks, &log);
    if let Some(first) = report.violations.first() {
        eprintln!("invalid execution: {}", first);
        eprintln!("{} violation(s) total", report.violations.len());
        return Ok(1);
    }
    let n = report.task_records.len();
    let st = if n == 0 {
        0.0
    } else {
        report.task_records.iter().map(|r| r.service as f64).sum::<f64>() / n as f64
    };
    println!("valid execution: {} tasks completed, st={:.6}", n, st);
    Ok(0)
}
