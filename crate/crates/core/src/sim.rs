//! Timestep simulation loop: triggers, task deferral, dummy-endpoint
//! assignment, variant wiring, execution, metrics, and an independent
//! execution validator.
//!
//! Each timestep releases tasks, re-runs assignment and planning when
//! there are new or deferred tasks or a task agent just became free (the
//! windowed variant additionally replans every `w` moved timesteps), then
//! advances every agent one step along its path.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

use hashbrown::HashSet;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::assign::{
    hungarian_insertion, lns_improve, truncate, AssignError, AssignmentState, LnsParams,
};
use crate::clock::{Budget, Clock};
use crate::grid::{DistanceOracle, GridMap, Location};
use crate::path::{detect_collisions, pbs, GoalSpec, Path, PbsAgent, PbsError, PbsMode};
use crate::task::{Task, TaskId, TaskStream, Timestep};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    LnsPbs,
    LnsWpbs { window: Timestep },
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub variant: Variant,
    pub lns: LnsParams,
    /// Maximum task-sequence length after truncation.
    pub truncation: usize,
    pub lns_budget: Budget,
    pub seed: u64,
    /// Abort threshold; `None` derives one from the instance.
    pub max_timesteps: Option<Timestep>,
}

impl SimConfig {
    pub fn new(variant: Variant) -> Self {
        SimConfig {
            variant,
            lns: LnsParams::default(),
            truncation: 2,
            lns_budget: Budget::Iterations(200),
            seed: 0,
            max_timesteps: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskRecord {
    pub id: TaskId,
    pub release: Timestep,
    pub completion: Timestep,
    pub service: Timestep,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    /// Completed tasks, sorted by id.
    pub task_records: Vec<TaskRecord>,
    /// Per timestep: (t, task-assignment ms, path-finding ms).
    pub timestep_runtimes: Vec<(Timestep, u64, u64)>,
    /// Mean service time over completed tasks.
    pub st: f64,
    /// Mean runtime (ms) per timestep.
    pub rt: f64,
    pub makespan: Timestep,
    pub completed: usize,
    pub deferred_events: u64,
    pub expanded_pt_nodes_total: u64,
}

/// One high-level planner invocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PbsCallRecord {
    pub time: Timestep,
    pub expanded_nodes: u64,
    pub pruned_nodes: u64,
    /// True for the periodic window replans of the windowed variant.
    pub window_replan: bool,
    /// Windowed variant: planned paths re-checked collision-free within
    /// the window.
    pub window_clean: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LnsCallRecord {
    pub time: Timestep,
    pub iterations: u64,
    pub elapsed_ms: u64,
}

/// Full-run trajectories plus which agent completed each task, in
/// completion order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionLog {
    /// `trajectories[agent][t]` = location at timestep `t`.
    pub trajectories: Vec<Vec<Location>>,
    pub assignments: Vec<(TaskId, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub metrics: Metrics,
    pub log: ExecutionLog,
    pub pbs_calls: Vec<PbsCallRecord>,
    pub lns_calls: Vec<LnsCallRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimError {
    Pbs(PbsError),
    Assign(AssignError),
    /// The nontermination guard tripped.
    TimestepLimit { limit: Timestep },
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::Pbs(e) => write!(f, "path planning failed: {}", e),
            SimError::Assign(_) => write!(f, "task assignment infeasible"),
            SimError::TimestepLimit { limit } => {
                write!(f, "no termination within {} timesteps", limit)
            }
        }
    }
}

struct AgentSim {
    start: Location,
    location: Location,
    dummy: Location,
    path: Path,
}

struct Sim<'a, C: Clock> {
    oracle: &'a DistanceOracle<'a>,
    stream: &'a TaskStream,
    config: &'a SimConfig,
    clock: &'a C,
    now: Timestep,
    agents: Vec<AgentSim>,
    state: AssignmentState,
    /// Truncation leftovers; reassigned at the next trigger without
    /// firing one themselves.
    backlog: Vec<Task>,
    /// Goal-overlaps-a-dummy holdbacks; their presence fires the trigger.
    deferred: Vec<Task>,
    incoming: Vec<Task>,
    seen: HashSet<TaskId>,
    freed: bool,
    moved_since_replan: Timestep,
    rng: ChaCha8Rng,
    // outputs
    trajectories: Vec<Vec<Location>>,
    assignments: Vec<(TaskId, usize)>,
    records: Vec<TaskRecord>,
    runtimes: Vec<(Timestep, u64, u64)>,
    pbs_calls: Vec<PbsCallRecord>,
    lns_calls: Vec<LnsCallRecord>,
    deferred_events: u64,
    expanded_total: u64,
}

/// Runs the simulation to completion: all tasks completed and every agent
/// parked at its dummy endpoint.
pub fn run<C: Clock>(
    map: &GridMap,
    stream: &TaskStream,
    starts: &[Location],
    config: &SimConfig,
    clock: &C,
) -> Result<RunOutput, SimError> {
    let oracle = DistanceOracle::new(map);
    let mut sim = Sim {
        oracle: &oracle,
        stream,
        config,
        clock,
        now: 0,
        agents: starts
            .iter()
            .map(|&s| AgentSim { start: s, location: s, dummy: s, path: Path::stay(0, s) })
            .collect(),
        state: AssignmentState::new(starts.len()),
        backlog: Vec::new(),
        deferred: Vec::new(),
        incoming: Vec::new(),
        seen: HashSet::new(),
        freed: false,
        moved_since_replan: 0,
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        trajectories: starts.iter().map(|&s| alloc::vec![s]).collect(),
        assignments: Vec::new(),
        records: Vec::new(),
        runtimes: Vec::new(),
        pbs_calls: Vec::new(),
        lns_calls: Vec::new(),
        deferred_events: 0,
        expanded_total: 0,
    };
    let limit = config
        .max_timesteps
        .unwrap_or_else(|| default_timestep_guard(&oracle, stream));
    loop {
        if sim.done() {
            break;
        }
        if sim.now >= limit {
            return Err(SimError::TimestepLimit { limit });
        }
        sim.step()?;
    }
    Ok(sim.finish())
}

/// Generous upper bound: 20x a serial-execution makespan bound.
fn default_timestep_guard(oracle: &DistanceOracle, stream: &TaskStream) -> Timestep {
    let map = oracle.map();
    let diameter = Timestep::from(map.width() + map.height());
    let mut serial = 0;
    for task in stream.all_tasks() {
        let mut chain = diameter;
        for pair in task.goals.windows(2) {
            chain += oracle.distance(pair[0], pair[1]).map_or(diameter, Timestep::from);
        }
        serial = serial.max(task.release) + chain;
    }
    20 * (serial + diameter + 10)
}

impl<C: Clock> Sim<'_, C> {
    fn done(&self) -> bool {
        self.records.len() == self.stream.task_count()
            && self.agents.iter().enumerate().all(|(k, a)| {
                self.state.sequences[k].is_empty()
                    && a.location == a.dummy
                    && self.now >= a.path.end_time()
            })
    }

    fn step(&mut self) -> Result<(), SimError> {
        // (a) tasks entering visibility
        for task in self.stream.visible_tasks(self.now) {
            if self.seen.insert(task.id) {
                self.incoming.push(task.clone());
            }
        }

        // (b) assignment trigger / (c) periodic window replan
        let trigger =
            !self.incoming.is_empty() || !self.deferred.is_empty() || self.freed;
        self.freed = false;
        let mut assign_ms = 0;
        let mut path_ms = 0;
        if trigger {
            assign_ms = self.reassign_tasks()?;
            self.assign_dummies();
            path_ms = self.plan_paths(false)?;
        } else if let Variant::LnsWpbs { window } = self.config.variant {
            if self.moved_since_replan >= window {
                self.assign_dummies();
                path_ms = self.plan_paths(true)?;
            }
        }
        self.runtimes.push((self.now, assign_ms, path_ms));

        // (d) everyone follows its path for one timestep
        let next = self.now + 1;
        for (k, agent) in self.agents.iter_mut().enumerate() {
            agent.location = agent.path.at(next);
            self.trajectories[k].push(agent.location);
        }
        self.now = next;
        self.moved_since_replan += 1;
        self.process_transitions();
        Ok(())
    }

    /// Advance goal progress for every agent at the current location/time.
    fn process_transitions(&mut self) {
        for k in 0..self.agents.len() {
            let loc = self.agents[k].location;
            loop {
                let seq = &mut self.state.sequences[k];
                let Some(task) = seq.tasks.first() else { break };
                let done = if seq.executing_prefix > 0 { seq.executing_goals_done } else { 0 };
                if task.goals[done] != loc || (done == 0 && self.now < task.release) {
                    break;
                }
                if done + 1 == task.goals.len() {
                    let task = seq.tasks.remove(0);
                    seq.executing_prefix = 0;
                    seq.executing_goals_done = 0;
                    self.records.push(TaskRecord {
                        id: task.id,
                        release: task.release,
                        completion: self.now,
                        service: self.now - task.release,
                    });
                    self.assignments.push((task.id, k));
                    if seq.tasks.is_empty() {
                        self.freed = true;
                    }
                } else {
                    seq.executing_prefix = 1;
                    seq.executing_goals_done = done + 1;
                }
            }
        }
    }

    /// Destroy + deferral filter + Hungarian insertion + LNS + truncation.
    /// Returns elapsed ms.
    fn reassign_tasks(&mut self) -> Result<u64, SimError> {
        let started = self.clock.now_ms();
        let mut candidates: Vec<Task> = Vec::new();
        for seq in &mut self.state.sequences {
            candidates.extend(seq.tasks.split_off(seq.executing_prefix));
        }
        candidates.append(&mut self.incoming);
        candidates.append(&mut self.deferred);
        candidates.append(&mut self.backlog);
        candidates.sort_unstable_by_key(|t| t.id);

        if self.config.variant == Variant::LnsPbs {
            // hold back tasks whose goals sit on a current dummy endpoint
            let dummies: Vec<Location> = self.agents.iter().map(|a| a.dummy).collect();
            let (held, eligible): (Vec<Task>, Vec<Task>) = candidates
                .into_iter()
                .partition(|t| t.goals.iter().any(|g| dummies.contains(g)));
            self.deferred_events += held.len() as u64;
            self.deferred = held;
            candidates = eligible;
        }

        self.state.pool = candidates;
        let locations: Vec<Location> = self.agents.iter().map(|a| a.location).collect();
        hungarian_insertion(&locations, self.now, &mut self.state, self.oracle)
            .map_err(SimError::Assign)?;
        let iterations = lns_improve(
            &locations,
            self.now,
            &mut self.state,
            self.config.lns_budget,
            &self.config.lns,
            self.oracle,
            &mut self.rng,
            self.clock,
        );
        self.backlog = truncate(&mut self.state, self.config.truncation);
        let elapsed = self.clock.now_ms().saturating_sub(started);
        self.lns_calls.push(LnsCallRecord { time: self.now, iterations, elapsed_ms: elapsed });
        Ok(elapsed)
    }

    fn assign_dummies(&mut self) {
        let previous: Vec<Location> = self.agents.iter().map(|a| a.dummy).collect();
        let strict = self.config.variant == Variant::LnsPbs;
        let mut blocked_goals: HashSet<Location> = HashSet::new();
        if strict {
            for seq in &self.state.sequences {
                for task in &seq.tasks {
                    blocked_goals.extend(task.goals.iter().copied());
                }
            }
            for task in self.backlog.iter().chain(&self.deferred) {
                blocked_goals.extend(task.goals.iter().copied());
            }
        }

        // task agents first, then free agents, each in id order
        let mut order: Vec<usize> = (0..self.agents.len())
            .filter(|&k| !self.state.sequences[k].is_empty())
            .collect();
        order.extend((0..self.agents.len()).filter(|&k| self.state.sequences[k].is_empty()));

        let mut taken: Vec<Location> = Vec::new();
        for k in order {
            let reference = self.state.sequences[k]
                .tasks
                .last()
                .map_or(self.agents[k].location, Task::last_goal);
            let mut ranked: Vec<(u32, usize)> = self
                .oracle
                .map()
                .task_endpoints()
                .iter()
                .enumerate()
                .filter_map(|(i, &e)| self.oracle.distance(e, reference).map(|d| (d, i)))
                .collect();
            ranked.sort_unstable();
            let chosen = ranked
                .into_iter()
                .map(|(_, i)| self.oracle.map().task_endpoints()[i])
                .find(|e| {
                    !taken.contains(e)
                        && (!strict
                            || (!blocked_goals.contains(e)
                                && !previous
                                    .iter()
                                    .enumerate()
                                    .any(|(j, p)| j != k && p == e)))
                })
                .unwrap_or(self.agents[k].start);
            taken.push(chosen);
            self.agents[k].dummy = chosen;
        }
    }

    /// Plan new paths for all agents from the current state. Returns
    /// elapsed ms.
    fn plan_paths(&mut self, window_replan: bool) -> Result<u64, SimError> {
        let started = self.clock.now_ms();
        let pbs_agents: Vec<PbsAgent> = (0..self.agents.len())
            .map(|k| PbsAgent { start: self.agents[k].location, goals: self.goal_spec(k) })
            .collect();
        let old: Vec<Path> = self.agents.iter().map(|a| a.path.clone()).collect();
        let (mode, horizon) = match self.config.variant {
            Variant::LnsPbs => (PbsMode::Modified, None),
            // +1: agents move `window` steps before the next replan, so
            // their positions at the replan boundary must be verified too
            Variant::LnsWpbs { window } => (PbsMode::Original, Some(self.now + window + 1)),
        };
        let outcome = pbs(self.oracle, &pbs_agents, self.now, &old, mode, horizon)
            .map_err(SimError::Pbs)?;
        let window_clean = match horizon {
            Some(h) => detect_collisions(&outcome.paths, Some(h)).is_empty(),
            None => true,
        };
        self.expanded_total += outcome.expanded_nodes;
        self.pbs_calls.push(PbsCallRecord {
            time: self.now,
            expanded_nodes: outcome.expanded_nodes,
            pruned_nodes: outcome.pruned_nodes,
            window_replan,
            window_clean,
        });
        for (agent, path) in self.agents.iter_mut().zip(outcome.paths) {
            agent.path = path;
        }
        self.moved_since_replan = 0;
        // a goal under the agent's feet is serviced at planning time
        self.process_transitions();
        Ok(self.clock.now_ms().saturating_sub(started))
    }

    /// Remaining goal chain of agent `k` plus its dummy endpoint. The
    /// first goal of each not-yet-started task carries its release time.
    fn goal_spec(&self, k: usize) -> GoalSpec {
        let seq = &self.state.sequences[k];
        let mut entries = Vec::new();
        for (i, task) in seq.tasks.iter().enumerate() {
            let done = if i < seq.executing_prefix { seq.executing_goals_done } else { 0 };
            for (j, &goal) in task.goals.iter().enumerate().skip(done) {
                let earliest = if j == 0 && done == 0 { task.release } else { 0 };
                entries.push((goal, earliest));
            }
        }
        entries.push((self.agents[k].dummy, 0));
        GoalSpec { entries }
    }

    fn finish(self) -> RunOutput {
        let mut records = self.records;
        records.sort_unstable_by_key(|r| r.id);
        let st = if records.is_empty() {
            0.0
        } else {
            records.iter().map(|r| r.service as f64).sum::<f64>() / records.len() as f64
        };
        let rt = if self.runtimes.is_empty() {
            0.0
        } else {
            self.runtimes.iter().map(|&(_, a, p)| (a + p) as f64).sum::<f64>()
                / self.runtimes.len() as f64
        };
        let completed = records.len();
        RunOutput {
            metrics: Metrics {
                task_records: records,
                timestep_runtimes: self.runtimes,
                st,
                rt,
                makespan: self.now,
                completed,
                deferred_events: self.deferred_events,
                expanded_pt_nodes_total: self.expanded_total,
            },
            log: ExecutionLog {
                trajectories: self.trajectories,
                assignments: self.assignments,
            },
            pbs_calls: self.pbs_calls,
            lns_calls: self.lns_calls,
        }
    }
}

impl ExecutionLog {
    /// Text form: per agent an `agent <id>:` block of `t row,col` lines,
    /// then `task <id> agent <aid>` lines in completion order.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (k, cells) in self.trajectories.iter().enumerate() {
            let _ = writeln!(out, "agent {}:", k);
            for (t, loc) in cells.iter().enumerate() {
                let _ = writeln!(out, "{} {}", t, loc);
            }
        }
        for &(task, agent) in &self.assignments {
            let _ = writeln!(out, "task {} agent {}", task, agent);
        }
        out
    }

    pub fn parse(text: &str) -> Result<ExecutionLog, LogParseError> {
        let mut log = ExecutionLog { trajectories: Vec::new(), assignments: Vec::new() };
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |message: &str| LogParseError {
                line,
                message: String::from(message),
            };
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            match fields.as_slice() {
                ["agent", id] => {
                    let id: usize = id
                        .strip_suffix(':')
                        .ok_or_else(|| err("expected `agent <id>:`"))?
                        .parse()
                        .map_err(|_| err("bad agent id"))?;
                    if id != log.trajectories.len() {
                        return Err(err("agent blocks must appear in id order"));
                    }
                    log.trajectories.push(Vec::new());
                }
                ["task", task, "agent", agent] => {
                    let task = task.parse().map_err(|_| err("bad task id"))?;
                    let agent = agent.parse().map_err(|_| err("bad agent id"))?;
                    log.assignments.push((task, agent));
                }
                [t, loc] => {
                    let cells = log
                        .trajectories
                        .last_mut()
                        .ok_or_else(|| err("location line before any agent block"))?;
                    let t: usize = t.parse().map_err(|_| err("bad timestep"))?;
                    if t != cells.len() {
                        return Err(err("timesteps must be consecutive from 0"));
                    }
                    let (row, col) = loc
                        .split_once(',')
                        .ok_or_else(|| err("expected `row,col`"))?;
                    let row = row.parse().map_err(|_| err("bad row"))?;
                    let col = col.parse().map_err(|_| err("bad col"))?;
                    cells.push(Location::new(row, col));
                }
                _ => return Err(err("unrecognized line")),
            }
        }
        Ok(log)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for LogParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExecutionViolation {
    BlockedCell { agent: usize, time: Timestep, location: Location },
    IllegalMove { agent: usize, time: Timestep },
    VertexCollision { agents: (usize, usize), time: Timestep, location: Location },
    EdgeCollision { agents: (usize, usize), time: Timestep },
    MissingAssignment { task: TaskId },
    DuplicateAssignment { task: TaskId },
    UnknownTask { task: TaskId },
    UnknownAgent { agent: usize },
    TaskIncomplete { task: TaskId },
    EmptyTrajectory { agent: usize },
}

impl fmt::Display for ExecutionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ExecutionViolation::*;
        match self {
            BlockedCell { agent, time, location } => {
                write!(f, "agent {} on blocked/out-of-bounds cell {} at t={}", agent, location, time)
            }
            IllegalMove { agent, time } => {
                write!(f, "agent {} made a non-adjacent move at t={}", agent, time)
            }
            VertexCollision { agents, time, location } => write!(
                f,
                "vertex collision between agents {} and {} at {} (t={})",
                agents.0, agents.1, location, time
            ),
            EdgeCollision { agents, time } => write!(
                f,
                "edge collision between agents {} and {} at t={}",
                agents.0, agents.1, time
            ),
            MissingAssignment { task } => write!(f, "task {} never assigned", task),
            DuplicateAssignment { task } => write!(f, "task {} assigned twice", task),
            UnknownTask { task } => write!(f, "log assigns unknown task {}", task),
            UnknownAgent { agent } => write!(f, "log references unknown agent {}", agent),
            TaskIncomplete { task } => write!(f, "task {} goals not completed in order", task),
            EmptyTrajectory { agent } => write!(f, "agent {} has no trajectory", agent),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionReport {
    pub violations: Vec<ExecutionViolation>,
    /// Independently recomputed completion records, sorted by id.
    pub task_records: Vec<TaskRecord>,
}

impl ExecutionReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Independent re-simulation of an execution log: move legality, vertex
/// and edge collisions, and in-order goal completion with release waits.
/// Service times are recomputed from the trajectories alone.
pub fn verify_execution(map: &GridMap, tasks: &[Task], log: &ExecutionLog) -> ExecutionReport {
    let mut violations = Vec::new();
    let n = log.trajectories.len();
    let span = log.trajectories.iter().map(Vec::len).max().unwrap_or(0);
    let at = |k: usize, t: usize| -> Location {
        let cells = &log.trajectories[k];
        cells[t.min(cells.len() - 1)]
    };

    for (k, cells) in log.trajectories.iter().enumerate() {
        if cells.is_empty() {
            violations.push(ExecutionViolation::EmptyTrajectory { agent: k });
            continue;
        }
        for (t, &loc) in cells.iter().enumerate() {
            if !map.in_bounds(loc) || map.is_blocked(loc) {
                violations.push(ExecutionViolation::BlockedCell {
                    agent: k,
                    time: t as Timestep,
                    location: loc,
                });
            }
        }
        for (t, pair) in cells.windows(2).enumerate() {
            let legal = pair[0] == pair[1]
                || map.neighbors(pair[0]).any(|nb| nb == pair[1]);
            if !legal {
                violations.push(ExecutionViolation::IllegalMove { agent: k, time: t as Timestep });
            }
        }
    }
    if log.trajectories.iter().any(Vec::is_empty) {
        return ExecutionReport { violations, task_records: Vec::new() };
    }

    for t in 0..span {
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (at(i, t), at(j, t));
                if a == b {
                    violations.push(ExecutionViolation::VertexCollision {
                        agents: (i, j),
                        time: t as Timestep,
                        location: a,
                    });
                } else if t + 1 < span && at(i, t + 1) == b && at(j, t + 1) == a {
                    violations.push(ExecutionViolation::EdgeCollision {
                        agents: (i, j),
                        time: t as Timestep,
                    });
                }
            }
        }
    }

    // Replay each agent's tasks, in logged completion order, as one goal
    // chain: a goal is serviced when the agent occupies it, the first
    // goal of each task no earlier than its release time.
    let mut task_records = Vec::new();
    let mut seen: HashSet<TaskId> = HashSet::new();
    let mut per_agent: Vec<Vec<&Task>> = alloc::vec![Vec::new(); n];
    for &(id, agent) in &log.assignments {
        if !seen.insert(id) {
            violations.push(ExecutionViolation::DuplicateAssignment { task: id });
            continue;
        }
        let Some(task) = tasks.iter().find(|t| t.id == id) else {
            violations.push(ExecutionViolation::UnknownTask { task: id });
            continue;
        };
        if agent >= n {
            violations.push(ExecutionViolation::UnknownAgent { agent });
            continue;
        }
        per_agent[agent].push(task);
    }
    for task in tasks {
        if !seen.contains(&task.id) {
            violations.push(ExecutionViolation::MissingAssignment { task: task.id });
        }
    }
    for (k, agent_tasks) in per_agent.iter().enumerate() {
        let cells = &log.trajectories[k];
        let mut cursor = agent_tasks.iter().peekable();
        let mut goal_idx = 0usize;
        for (t, &loc) in cells.iter().enumerate() {
            while let Some(task) = cursor.peek() {
                if task.goals[goal_idx] != loc
                    || (goal_idx == 0 && (t as Timestep) < task.release)
                {
                    break;
                }
                goal_idx += 1;
                if goal_idx == task.goals.len() {
                    task_records.push(TaskRecord {
                        id: task.id,
                        release: task.release,
                        completion: t as Timestep,
                        service: t as Timestep - task.release,
                    });
                    cursor.next();
                    goal_idx = 0;
                }
            }
        }
        for task in cursor {
            violations.push(ExecutionViolation::TaskIncomplete { task: task.id });
        }
    }
    task_records.sort_unstable_by_key(|r| r.id);
    ExecutionReport { violations, task_records }
}
