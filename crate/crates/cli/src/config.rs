//! Key-value run configuration: file documents plus `--set` overrides.

use std::fmt;
use std::path::PathBuf;

use mapd_core::assign::LnsParams;
use mapd_core::grid::WarehouseProfile;
use mapd_core::sim::{SimConfig, Variant};
use mapd_core::task::{Setting, Timestep};
use mapd_core::{Budget, Location};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MapSource {
    Profile(WarehouseProfile),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StartSource {
    /// Sampled uniformly over distinct non-task endpoints from `seed`.
    Seeded,
    Explicit(Vec<Location>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum TaskSource {
    File(PathBuf),
    Generated { count: usize, freq: f64, goals: (usize, usize) },
}

/// Full description of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub map: MapSource,
    /// Agent count M.
    pub agents: usize,
    pub starts: StartSource,
    pub tasks: TaskSource,
    pub setting: Setting,
    pub variant: Variant,
    /// LNS neighborhood size N.
    pub neighborhood: usize,
    /// Sequence truncation C.
    pub truncation: usize,
    pub omega1: u64,
    pub omega2: u64,
    pub budget: Budget,
    pub seed: u64,
    pub max_timesteps: Option<Timestep>,
    /// Also write the full path log artifact.
    pub write_log: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            map: MapSource::Profile(WarehouseProfile::Small),
            agents: 10,
            starts: StartSource::Seeded,
            tasks: TaskSource::Generated { count: 50, freq: 2.0, goals: (2, 2) },
            setting: Setting::Online,
            variant: Variant::LnsPbs,
            neighborhood: 2,
            truncation: 2,
            omega1: 9,
            omega2: 3,
            budget: Budget::WallClockMs(1000),
            seed: 0,
            max_timesteps: None,
            write_log: false,
        }
    }
}

impl RunConfig {
    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            variant: self.variant,
            lns: LnsParams {
                neighborhood: self.neighborhood,
                omega1: self.omega1,
                omega2: self.omega2,
            },
            truncation: self.truncation,
            lns_budget: self.budget,
            seed: self.seed,
            max_timesteps: self.max_timesteps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config key `{}`: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError { key: key.into(), message: message.into() }
}

/// Window size, kept separate so `variant=lns_wpbs` and `w=` can appear
/// in either order.
#[derive(Debug, Clone, Default)]
pub struct ConfigBuilder {
    config: RunConfig,
    window: Option<Timestep>,
    windowed: bool,
}

impl ConfigBuilder {
    /// Parses a whole key-value document (`key=value` lines, `#` comments).
    pub fn apply_document(&mut self, text: &str) -> Result<(), ConfigError> {
        for raw in text.lines() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(line, "expected `key=value`"))?;
            self.apply(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let cfg = &mut self.config;
        match key {
            "map" => {
                cfg.map = match value {
                    "small" => MapSource::Profile(WarehouseProfile::Small),
                    "medium" => MapSource::Profile(WarehouseProfile::Medium),
                    "large" => MapSource::Profile(WarehouseProfile::Large),
                    path => MapSource::File(PathBuf::from(path)),
                };
            }
            "agents" => {
                cfg.agents = parse_num(key, value)?;
                if cfg.agents == 0 {
                    return Err(err(key, "must be >= 1"));
                }
            }
            "starts" => cfg.starts = StartSource::Explicit(parse_locations(key, value)?),
            "tasks" => cfg.tasks = TaskSource::File(PathBuf::from(value)),
            "task_count" => {
                let count = parse_num(key, value)?;
                match &mut cfg.tasks {
                    TaskSource::Generated { count: c, .. } => *c = count,
                    t @ TaskSource::File(_) => {
                        *t = TaskSource::Generated { count, freq: 2.0, goals: (2, 2) }
                    }
                }
            }
            "freq" => {
                let freq: f64 =
                    value.parse().map_err(|_| err(key, "expected a number"))?;
                if !(freq > 0.0) {
                    return Err(err(key, "must be > 0"));
                }
                if let TaskSource::Generated { freq: f, .. } = &mut cfg.tasks {
                    *f = freq;
                } else {
                    return Err(err(key, "requires generated tasks (set task_count)"));
                }
            }
            "goals" => {
                let goals = parse_range(key, value)?;
                if goals.0 < 1 || goals.0 > goals.1 {
                    return Err(err(key, "expected `lo-hi` with 1 <= lo <= hi"));
                }
                if let TaskSource::Generated { goals: g, .. } = &mut cfg.tasks {
                    *g = goals;
                } else {
                    return Err(err(key, "requires generated tasks (set task_count)"));
                }
            }
            "setting" => {
                cfg.setting = match value {
                    "offline" => Setting::Offline,
                    "online" => Setting::Online,
                    other => match other.strip_prefix("semi_online:") {
                        Some(h) => Setting::SemiOnline(parse_num(key, h)? as u32),
                        None => {
                            return Err(err(
                                key,
                                "expected offline, online, or semi_online:<h>",
                            ))
                        }
                    },
                };
            }
            "variant" => {
                self.windowed = match value {
                    "lns_pbs" => false,
                    "lns_wpbs" => true,
                    _ => return Err(err(key, "expected lns_pbs or lns_wpbs")),
                };
            }
            "N" => {
                cfg.neighborhood = parse_num(key, value)?;
                if cfg.neighborhood == 0 {
                    return Err(err(key, "must be >= 1"));
                }
            }
            "C" => {
                cfg.truncation = parse_num(key, value)?;
                if cfg.truncation == 0 {
                    return Err(err(key, "must be >= 1"));
                }
            }
            "w" => {
                let w = parse_num(key, value)? as Timestep;
                if w == 0 {
                    return Err(err(key, "must be >= 1"));
                }
                self.window = Some(w);
            }
            "omega1" => cfg.omega1 = parse_num(key, value)? as u64,
            "omega2" => cfg.omega2 = parse_num(key, value)? as u64,
            "budget_ms" => cfg.budget = Budget::WallClockMs(parse_num(key, value)? as u64),
            "budget_iters" => cfg.budget = Budget::Iterations(parse_num(key, value)? as u64),
            "seed" => cfg.seed = parse_num(key, value)? as u64,
            "max_timesteps" => {
                cfg.max_timesteps = Some(parse_num(key, value)? as Timestep)
            }
            "log" => {
                cfg.write_log = match value {
                    "true" | "1" => true,
                    "false" | "0" => false,
                    _ => return Err(err(key, "expected true or false")),
                };
            }
            _ => return Err(err(key, "unknown key")),
        }
        Ok(())
    }

    pub fn finish(mut self) -> RunConfig {
        self.config.variant = if self.windowed {
            Variant::LnsWpbs { window: self.window.unwrap_or(10) }
        } else {
            Variant::LnsPbs
        };
        self.config
    }
}

fn parse_num(key: &str, value: &str) -> Result<usize, ConfigError> {
    value.parse().map_err(|_| err(key, "expected a non-negative integer"))
}

fn parse_range(key: &str, value: &str) -> Result<(usize, usize), ConfigError> {
    match value.split_once('-') {
        Some((lo, hi)) => Ok((parse_num(key, lo)?, parse_num(key, hi)?)),
        None => {
            let k = parse_num(key, value)?;
            Ok((k, k))
        }
    }
}

/// `row,col` locations separated by `;`.
fn parse_locations(key: &str, value: &str) -> Result<Vec<Location>, ConfigError> {
    value
        .split(';')
        .map(|item| {
            let (r, c) = item
                .trim()
                .split_once(',')
                .ok_or_else(|| err(key, "expected `row,col` entries separated by `;`"))?;
            Ok(Location::new(
                parse_num(key, r.trim())? as u32,
                parse_num(key, c.trim())? as u32,
            ))
        })
        .collect()
}

/// Config document, then override pairs (overrides win).
pub fn parse_config(document: &str, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let mut builder = ConfigBuilder::default();
    builder.apply_document(document)?;
    for pair in overrides {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| err(pair, "override must be `key=value`"))?;
        builder.apply(key.trim(), value.trim())?;
    }
    Ok(builder.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_yields_defaults() {
        let cfg = parse_config("", &[]).unwrap();
        assert_eq!(cfg.neighborhood, 2);
        assert_eq!(cfg.truncation, 2);
        assert_eq!(cfg.omega1, 9);
        assert_eq!(cfg.omega2, 3);
        assert_eq!(cfg.budget, Budget::WallClockMs(1000));
        assert_eq!(cfg.variant, Variant::LnsPbs);
    }

    #[test]
    fn windowed_variant_defaults_to_w10() {
        let cfg = parse_config("variant=lns_wpbs\n", &[]).unwrap();
        assert_eq!(cfg.variant, Variant::LnsWpbs { window: 10 });
        let cfg = parse_config("w=7\nvariant=lns_wpbs\n", &[]).unwrap();
        assert_eq!(cfg.variant, Variant::LnsWpbs { window: 7 });
    }

    #[test]
    fn invalid_values_name_the_key() {
        assert_eq!(parse_config("N=0\n", &[]).unwrap_err().key, "N");
        assert_eq!(parse_config("bogus=1\n", &[]).unwrap_err().key, "bogus");
    }

    #[test]
    fn overrides_win() {
        let cfg = parse_config("agents=5\n", &["agents=9".into()]).unwrap();
        assert_eq!(cfg.agents, 9);
    }

    #[test]
    fn full_document_parses() {
        let doc = "\
# comment
map=medium
agents=30
task_count=100
freq=2
goals=1-5
setting=semi_online:1
variant=lns_wpbs
w=10
N=4
C=3
budget_iters=50
seed=11
log=true
";
        let cfg = parse_config(doc, &[]).unwrap();
        assert_eq!(cfg.agents, 30);
        assert_eq!(cfg.setting, Setting::SemiOnline(1));
        assert_eq!(
            cfg.tasks,
            TaskSource::Generated { count: 100, freq: 2.0, goals: (1, 5) }
        );
        assert_eq!(cfg.budget, Budget::Iterations(50));
        assert!(cfg.write_log);
    }
}
