//! Tasks, release batches, and visibility settings.
//!
//! A task is an ordered goal sequence plus a release time. Streams group
//! tasks into batches (one batch per release timestep) and carry the
//! visibility setting: offline (everything known), online (known at
//! release), or semi-online with a look-ahead horizon counted in batches.
//!
//! Task file format: header `tasks <count>`, then one task per line as
//! `id release k loc_1 ... loc_k` with locations as `row,col`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{GridMap, Location};

pub type TaskId = u32;
pub type Timestep = u64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Task {
    pub id: TaskId,
    pub release: Timestep,
    /// Nonempty; pickup-and-delivery is the two-goal special case.
    pub goals: Vec<Location>,
}

impl Task {
    /// First goal location (`s`).
    pub fn first_goal(&self) -> Location {
        self.goals[0]
    }

    /// Last goal location (`g`).
    pub fn last_goal(&self) -> Location {
        *self.goals.last().expect("task has at least one goal")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Setting {
    Offline,
    Online,
    /// Look-ahead horizon in batches known beyond the current timestep.
    SemiOnline(u32),
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Setting::Offline => write!(f, "offline"),
            Setting::Online => write!(f, "online"),
            Setting::SemiOnline(h) => write!(f, "semi_online:{}", h),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskStream {
    batches: BTreeMap<Timestep, Vec<Task>>,
    pub setting: Setting,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TaskGenError {
    NoTaskEndpoints,
}

impl fmt::Display for TaskGenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaskGenError::NoTaskEndpoints => write!(f, "map has no task endpoints"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for TaskParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "task parse error at line {}: {}", self.line, self.message)
    }
}

impl TaskStream {
    pub fn from_tasks(tasks: Vec<Task>, setting: Setting) -> Self {
        let mut batches: BTreeMap<Timestep, Vec<Task>> = BTreeMap::new();
        for t in tasks {
            batches.entry(t.release).or_default().push(t);
        }
        TaskStream { batches, setting }
    }

    pub fn batches(&self) -> &BTreeMap<Timestep, Vec<Task>> {
        &self.batches
    }

    pub fn task_count(&self) -> usize {
        self.batches.values().map(Vec::len).sum()
    }

    pub fn all_tasks(&self) -> impl Iterator<Item = &Task> {
        self.batches.values().flatten()
    }

    pub fn last_release(&self) -> Option<Timestep> {
        self.batches.keys().next_back().copied()
    }

    /// Tasks known to the planner at `now` under the stream's setting.
    pub fn visible_tasks(&self, now: Timestep) -> Vec<&Task> {
        match self.setting {
            Setting::Offline => self.all_tasks().collect(),
            Setting::Online => self
                .batches
                .range(..=now)
                .flat_map(|(_, b)| b.iter())
                .collect(),
            Setting::SemiOnline(h) => {
                let mut out: Vec<&Task> =
                    self.batches.range(..=now).flat_map(|(_, b)| b.iter()).collect();
                out.extend(
                    self.batches
                        .range(now + 1..)
                        .take(h as usize)
                        .flat_map(|(_, b)| b.iter()),
                );
                out
            }
        }
    }

    /// Serializes to the task file format.
    pub fn serialize(&self) -> String {
        let mut out = format!("tasks {}\n", self.task_count());
        for task in self.all_tasks() {
            out.push_str(&format!("{} {} {}", task.id, task.release, task.goals.len()));
            for g in &task.goals {
                out.push_str(&format!(" {}", g));
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str, setting: Setting) -> Result<TaskStream, TaskParseError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| TaskParseError {
            line: 1,
            message: String::from("missing header"),
        })?;
        let count: usize = header
            .strip_prefix("tasks ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| TaskParseError {
                line: 1,
                message: String::from("expected 'tasks <count>' header"),
            })?;
        let mut tasks = Vec::with_capacity(count);
        for (i, line) in lines {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut tok = line.split_whitespace();
            let parse_err = |m: &str| TaskParseError { line: line_no, message: String::from(m) };
            let id: TaskId =
                tok.next().and_then(|s| s.parse().ok()).ok_or_else(|| parse_err("bad id"))?;
            let release: Timestep = tok
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err("bad release time"))?;
            let k: usize = tok
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err("bad goal count"))?;
            if k == 0 {
                return Err(parse_err("task needs at least one goal"));
            }
            let mut goals = Vec::with_capacity(k);
            for _ in 0..k {
                let loc = tok
                    .next()
                    .and_then(|s| {
                        let (r, c) = s.split_once(',')?;
                        Some(Location::new(r.parse().ok()?, c.parse().ok()?))
                    })
                    .ok_or_else(|| parse_err("bad goal location"))?;
                goals.push(loc);
            }
            if tok.next().is_some() {
                return Err(parse_err("trailing tokens"));
            }
            tasks.push(Task { id, release, goals });
        }
        if tasks.len() != count {
            return Err(TaskParseError {
                line: 1,
                message: format!("header says {} tasks, found {}", count, tasks.len()),
            });
        }
        Ok(TaskStream::from_tasks(tasks, setting))
    }
}

/// Release timesteps for `count` tasks at `f` tasks per timestep.
///
/// `f >= 1`: floor/ceil alternation averaging `f` from t = 0 on;
/// `f < 1`: one task every `round(1/f)` timesteps.
fn release_schedule(count: usize, f: f64) -> Vec<Timestep> {
    let mut releases = Vec::with_capacity(count);
    if f >= 1.0 {
        let mut t = 0u64;
        while releases.len() < count {
            let upto = (((t + 1) as f64) * f) as u64;
            let so_far = ((t as f64) * f) as u64;
            for _ in so_far..upto {
                if releases.len() == count {
                    break;
                }
                releases.push(t);
            }
            t += 1;
        }
    } else {
        let period = (1.0 / f).round() as u64;
        for i in 0..count {
            releases.push(i as u64 * period.max(1));
        }
    }
    releases
}

/// Generates `count` tasks with goals drawn uniformly from the map's task
/// endpoints; deterministic in `seed`.
pub fn generate_tasks(
    map: &GridMap,
    count: usize,
    f: f64,
    goal_count_range: (usize, usize),
    setting: Setting,
    seed: u64,
) -> Result<TaskStream, TaskGenError> {
    let endpoints = map.task_endpoints();
    if endpoints.is_empty() && count > 0 {
        return Err(TaskGenError::NoTaskEndpoints);
    }
    let (lo, hi) = goal_count_range;
    debug_assert!(lo >= 1 && lo <= hi);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let releases = release_schedule(count, f);
    let tasks = releases
        .into_iter()
        .enumerate()
        .map(|(i, release)| {
            let k = rng.gen_range(lo..=hi);
            let goals =
                (0..k).map(|_| endpoints[rng.gen_range(0..endpoints.len())]).collect();
            Task { id: i as TaskId, release, goals }
        })
        .collect();
    Ok(TaskStream::from_tasks(tasks, setting))
}
