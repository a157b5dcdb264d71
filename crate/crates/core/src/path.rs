//! Multi-goal space-time search and priority-based collision resolution.
//!
//! Paths are timestep-indexed cell lists; an agent stays at the last cell
//! forever afterward. The low level is a space-time A* through an ordered
//! goal sequence with per-goal earliest service times; the high level is a
//! depth-first search over a priority tree, in two flavors: the modified
//! low level additionally avoids the old paths of agents without higher
//! priority (complete on well-formed instances), the original low level
//! only avoids higher-priority agents and may prune. Windowed search runs
//! the original flavor with a finite collision horizon.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use hashbrown::{HashMap, HashSet};

use crate::grid::{DistanceOracle, Location};
use crate::task::Timestep;

/// Timestep-indexed trajectory. `cells[k]` is the location at
/// `start_time + k`; after the last entry the agent rests there forever.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub start_time: Timestep,
    pub cells: Vec<Location>,
}

impl Path {
    /// A path that never moves from `loc`.
    pub fn stay(start_time: Timestep, loc: Location) -> Self {
        Path { start_time, cells: alloc::vec![loc] }
    }

    /// Last timestep with an explicit cell.
    pub fn end_time(&self) -> Timestep {
        self.start_time + self.cells.len() as Timestep - 1
    }

    /// Location at `t`, clamped to the endpoints.
    pub fn at(&self, t: Timestep) -> Location {
        if t <= self.start_time {
            self.cells[0]
        } else {
            let k = (t - self.start_time) as usize;
            self.cells[k.min(self.cells.len() - 1)]
        }
    }
}

/// Ordered goal sequence with per-goal earliest service times. The first
/// goal of each task carries its release time, every other entry zero;
/// the final entry is the agent's dummy endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GoalSpec {
    pub entries: Vec<(Location, Timestep)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollisionKind {
    Vertex,
    Edge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Collision {
    pub kind: CollisionKind,
    pub agents: (usize, usize),
    pub time: Timestep,
    /// Vertex: the shared cell. Edge: agent `agents.0`'s cell at `time`.
    pub location: Location,
    /// Edge collisions only: agent `agents.0`'s cell at `time + 1`.
    pub location2: Option<Location>,
}

/// All vertex and edge collisions at timesteps below `horizon` (`None` =
/// unbounded, checked through the last explicit cell plus resting tails),
/// sorted by (time, agent pair).
pub fn detect_collisions(paths: &[Path], horizon: Option<Timestep>) -> Vec<Collision> {
    let mut out = Vec::new();
    let Some(t_end) = effective_horizon(paths, horizon) else {
        return out;
    };
    let t0 = paths.iter().map(|p| p.start_time).min().unwrap_or(0);
    for t in t0..t_end {
        for i in 0..paths.len() {
            for j in i + 1..paths.len() {
                if let Some(c) = collision_at(&paths[i], &paths[j], i, j, t) {
                    out.push(c);
                }
            }
        }
    }
    out
}

/// Earliest collision below `horizon`, ties to the lower agent pair.
pub fn first_collision(paths: &[Path], horizon: Option<Timestep>) -> Option<Collision> {
    let t_end = effective_horizon(paths, horizon)?;
    let t0 = paths.iter().map(|p| p.start_time).min().unwrap_or(0);
    for t in t0..t_end {
        for i in 0..paths.len() {
            for j in i + 1..paths.len() {
                if let Some(c) = collision_at(&paths[i], &paths[j], i, j, t) {
                    return Some(c);
                }
            }
        }
    }
    None
}

fn effective_horizon(paths: &[Path], horizon: Option<Timestep>) -> Option<Timestep> {
    if paths.is_empty() {
        return None;
    }
    let max_end = paths.iter().map(Path::end_time).max().unwrap();
    Some(match horizon {
        Some(w) => w,
        // one step past the last move covers resting tails
        None => max_end + 1,
    })
}

fn collision_at(a: &Path, b: &Path, i: usize, j: usize, t: Timestep) -> Option<Collision> {
    let (ai, aj) = (a.at(t), b.at(t));
    if ai == aj {
        return Some(Collision {
            kind: CollisionKind::Vertex,
            agents: (i, j),
            time: t,
            location: ai,
            location2: None,
        });
    }
    let (ni, nj) = (a.at(t + 1), b.at(t + 1));
    if ai == nj && ni == aj {
        return Some(Collision {
            kind: CollisionKind::Edge,
            agents: (i, j),
            time: t,
            location: ai,
            location2: Some(ni),
        });
    }
    None
}

/// Hard constraints compiled from a set of reserved paths.
struct ReservationTable {
    /// `(cell, t)` occupied for `t < t_static`.
    vertex: HashSet<(usize, Timestep)>,
    /// `(from, to, t)`: a reserved path moved `from -> to` over `t -> t+1`.
    edge: HashSet<(usize, usize, Timestep)>,
    /// Cells permanently occupied from `t_static` on (unbounded horizon).
    static_blocked: HashSet<usize>,
    /// Latest reserved time per cell, for rest-safety checks.
    last_reserved: HashMap<usize, Timestep>,
    /// Constraints are time-invariant from this timestep on.
    t_static: Timestep,
}

impl ReservationTable {
    fn build(
        oracle: &DistanceOracle,
        hard_paths: &[&Path],
        horizon: Option<Timestep>,
        floor: Timestep,
    ) -> Self {
        let map = oracle.map();
        let t_static = match horizon {
            Some(w) => w,
            None => hard_paths.iter().map(|p| p.end_time() + 1).max().unwrap_or(0),
        };
        let mut table = ReservationTable {
            vertex: HashSet::new(),
            edge: HashSet::new(),
            static_blocked: HashSet::new(),
            last_reserved: HashMap::new(),
            t_static,
        };
        for path in hard_paths {
            // constraints before the searching agent's start time are
            // never queried
            let mut t = path.start_time.max(floor);
            while t < t_static {
                let cell = map.index(path.at(t));
                table.vertex.insert((cell, t));
                let e = table.last_reserved.entry(cell).or_insert(t);
                *e = (*e).max(t);
                let next = path.at(t + 1);
                if next != path.at(t) {
                    table.edge.insert((cell, map.index(next), t));
                }
                t += 1;
            }
            if horizon.is_none() {
                table.static_blocked.insert(map.index(path.at(t_static)));
            }
        }
        table
    }

    fn vertex_blocked(&self, cell: usize, t: Timestep) -> bool {
        if t < self.t_static {
            self.vertex.contains(&(cell, t))
        } else {
            self.static_blocked.contains(&cell)
        }
    }

    /// Would moving `from -> to` over `t -> t+1` swap with a reservation?
    fn edge_blocked(&self, from: usize, to: usize, t: Timestep) -> bool {
        t < self.t_static && self.edge.contains(&(to, from, t))
    }

    /// Can an agent arrive at `cell` at `t` and rest there forever?
    fn rest_safe(&self, cell: usize, t: Timestep) -> bool {
        if self.static_blocked.contains(&cell) {
            return false;
        }
        match self.last_reserved.get(&cell) {
            Some(&last) => last < t,
            None => true,
        }
    }
}

#[derive(Clone, Copy)]
struct OpenEntry {
    f: u64,
    goals_remaining: usize,
    time: Timestep,
    node: usize,
}

impl PartialEq for OpenEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for OpenEntry {}
impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OpenEntry {
    // max-heap: smaller f wins, then fewer remaining goals, then larger
    // elapsed time, then insertion order (for determinism).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .cmp(&self.f)
            .then(other.goals_remaining.cmp(&self.goals_remaining))
            .then(self.time.cmp(&other.time))
            .then(other.node.cmp(&self.node))
    }
}

struct Node {
    cell: usize,
    time: Timestep,
    goal_idx: usize,
    parent: usize,
}

/// Time-minimal path from `start` through `goals` in order, reaching each
/// goal no earlier than its earliest service time, avoiding all vertex and
/// edge conflicts with `hard_paths` below `horizon` (including their
/// resting tails), and resting collision-free at the final goal. Returns
/// `None` when no such path exists.
pub fn multi_goal_astar(
    oracle: &DistanceOracle,
    start: Location,
    start_time: Timestep,
    goals: &GoalSpec,
    hard_paths: &[&Path],
    horizon: Option<Timestep>,
) -> Option<Path> {
    let map = oracle.map();
    let n_goals = goals.entries.len();

    // Static reachability along the goal chain; also the heuristic tail.
    let mut suffix = alloc::vec![0u64; n_goals + 1];
    for g in (0..n_goals.saturating_sub(1)).rev() {
        let d = oracle.distance(goals.entries[g].0, goals.entries[g + 1].0)?;
        suffix[g] = suffix[g + 1] + u64::from(d);
    }
    if n_goals > 0 {
        oracle.distance(start, goals.entries[0].0)?;
    }

    let table = ReservationTable::build(oracle, hard_paths, horizon, start_time);
    let max_est = goals.entries.iter().map(|&(_, t)| t).max().unwrap_or(0);
    let t_cap = table.t_static.max(max_est).max(start_time) + 1;

    let advance = |mut g: usize, cell: usize, t: Timestep| -> usize {
        while g < n_goals
            && map.index(goals.entries[g].0) == cell
            && t >= goals.entries[g].1
        {
            g += 1;
        }
        g
    };
    // distance-to-go from the per-goal BFS tables (symmetric distances)
    let heuristic = |cell: usize, g: usize| -> Option<u64> {
        if g >= n_goals {
            return Some(0);
        }
        let d = oracle.distance(goals.entries[g].0, map.location_of(cell))?;
        Some(u64::from(d) + suffix[g])
    };

    let start_cell = map.index(start);
    let g0 = advance(0, start_cell, start_time);
    let mut nodes = alloc::vec![Node {
        cell: start_cell,
        time: start_time,
        goal_idx: g0,
        parent: usize::MAX,
    }];
    let mut open = alloc::collections::BinaryHeap::new();
    let mut closed: HashSet<(usize, usize, Timestep)> = HashSet::new();
    let h0 = heuristic(start_cell, g0)?;
    open.push(OpenEntry { f: start_time + h0, goals_remaining: n_goals - g0.min(n_goals), time: start_time, node: 0 });

    while let Some(entry) = open.pop() {
        let (cell, time, goal_idx, node_id) = {
            let n = &nodes[entry.node];
            (n.cell, n.time, n.goal_idx, entry.node)
        };
        let key = (cell, goal_idx, time.min(t_cap));
        if !closed.insert(key) {
            continue;
        }
        if goal_idx == n_goals && table.rest_safe(cell, time) {
            // reconstruct
            let mut rev = Vec::new();
            let mut cur = node_id;
            while cur != usize::MAX {
                rev.push(map.location_of(nodes[cur].cell));
                cur = nodes[cur].parent;
            }
            rev.reverse();
            return Some(Path { start_time, cells: rev });
        }

        let here = map.location_of(cell);
        let mut successors: Vec<usize> = alloc::vec![cell];
        successors.extend(map.neighbors(here).map(|n| map.index(n)));
        for next in successors {
            let t_next = time + 1;
            if table.vertex_blocked(next, t_next) {
                continue;
            }
            if next != cell && table.edge_blocked(cell, next, time) {
                continue;
            }
            let g_next = advance(goal_idx, next, t_next);
            if closed.contains(&(next, g_next, t_next.min(t_cap))) {
                continue;
            }
            let Some(h) = heuristic(next, g_next) else { continue };
            nodes.push(Node { cell: next, time: t_next, goal_idx: g_next, parent: node_id });
            open.push(OpenEntry {
                f: t_next + h,
                goals_remaining: n_goals - g_next,
                time: t_next,
                node: nodes.len() - 1,
            });
        }
    }
    None
}

/// Replays a path against its goal spec: visits in order, each no earlier
/// than its earliest service time, ending at the final goal.
pub fn path_serves_goals(path: &Path, goals: &GoalSpec) -> bool {
    let mut g = 0;
    for (k, &cell) in path.cells.iter().enumerate() {
        let t = path.start_time + k as Timestep;
        while g < goals.entries.len() && goals.entries[g].0 == cell && t >= goals.entries[g].1 {
            g += 1;
        }
    }
    g == goals.entries.len()
        && goals
            .entries
            .last()
            .map_or(true, |&(loc, _)| loc == *path.cells.last().unwrap())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PbsMode {
    /// Low level avoids new paths of higher-priority agents plus old
    /// paths of everyone else; never prunes on well-formed instances.
    Modified,
    /// Low level avoids new paths of higher-priority agents only; child
    /// nodes whose low level fails are pruned.
    Original,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PbsAgent {
    pub start: Location,
    pub goals: GoalSpec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PbsOutcome {
    pub paths: Vec<Path>,
    /// Priority-tree nodes expanded, root included.
    pub expanded_nodes: u64,
    /// Children pruned due to low-level failure (original mode only).
    pub pruned_nodes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PbsError {
    /// The priority tree was exhausted (original mode).
    Exhausted,
    /// The modified low level failed; cannot happen on well-formed input.
    LowLevelFailure { agent: usize },
}

impl fmt::Display for PbsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PbsError::Exhausted => write!(f, "priority tree exhausted without a solution"),
            PbsError::LowLevelFailure { agent } => {
                write!(f, "modified low level found no path for agent {}", agent)
            }
        }
    }
}

struct PtNode {
    /// Direct (higher, lower) priority edges; one added per tree level.
    relations: Vec<(usize, usize)>,
    paths: Vec<Path>,
}

/// Transitive higher-priority set of `agent`.
fn higher_set(relations: &[(usize, usize)], agent: usize, n: usize) -> Vec<bool> {
    let mut higher = alloc::vec![false; n];
    let mut stack = alloc::vec![agent];
    let mut seen = alloc::vec![false; n];
    seen[agent] = true;
    while let Some(a) = stack.pop() {
        for &(hi, lo) in relations {
            if lo == a && !seen[hi] {
                seen[hi] = true;
                higher[hi] = true;
                stack.push(hi);
            }
        }
    }
    higher
}

/// Agents in topological order of the priority DAG (higher first), ties
/// to lower ids.
fn topological_order(relations: &[(usize, usize)], n: usize) -> Vec<usize> {
    let mut indegree = alloc::vec![0usize; n];
    for &(_, lo) in relations {
        indegree[lo] += 1;
    }
    let mut order = Vec::with_capacity(n);
    let mut ready: Vec<usize> = (0..n).filter(|&a| indegree[a] == 0).collect();
    while !ready.is_empty() {
        ready.sort_unstable_by(|a, b| b.cmp(a));
        let a = ready.pop().unwrap();
        order.push(a);
        for &(hi, lo) in relations {
            if hi == a {
                indegree[lo] -= 1;
                if indegree[lo] == 0 {
                    ready.push(lo);
                }
            }
        }
    }
    order
}

fn plan_agent(
    oracle: &DistanceOracle,
    agents: &[PbsAgent],
    start_time: Timestep,
    i: usize,
    relations: &[(usize, usize)],
    new_paths: &[Path],
    old_paths: &[Path],
    mode: PbsMode,
    horizon: Option<Timestep>,
) -> Option<Path> {
    let higher = higher_set(relations, i, agents.len());
    let mut hard: Vec<&Path> = Vec::new();
    for j in 0..agents.len() {
        if j == i {
            continue;
        }
        if higher[j] {
            hard.push(&new_paths[j]);
        } else if mode == PbsMode::Modified {
            hard.push(&old_paths[j]);
        }
    }
    multi_goal_astar(oracle, agents[i].start, start_time, &agents[i].goals, &hard, horizon)
}

/// Priority-based search. Plans one path per agent, all starting at
/// `start_time`, resolving collisions below `horizon` by depth-first
/// search over priority orderings. `old_paths` must be collision-free
/// among themselves in modified mode (initially: stay-at-start paths).
pub fn pbs(
    oracle: &DistanceOracle,
    agents: &[PbsAgent],
    start_time: Timestep,
    old_paths: &[Path],
    mode: PbsMode,
    horizon: Option<Timestep>,
) -> Result<PbsOutcome, PbsError> {
    debug_assert_eq!(agents.len(), old_paths.len());
    let n = agents.len();
    let mut expanded = 0u64;
    let mut pruned = 0u64;

    // With no relations yet, the low level never reads new paths, so the
    // old paths can stand in for them.
    let mut root_paths = Vec::with_capacity(n);
    for i in 0..n {
        let path =
            plan_agent(oracle, agents, start_time, i, &[], old_paths, old_paths, mode, horizon);
        match path {
            Some(p) => root_paths.push(p),
            None => {
                if mode == PbsMode::Modified {
                    return Err(PbsError::LowLevelFailure { agent: i });
                }
                return Err(PbsError::Exhausted);
            }
        }
    }

    let mut stack = alloc::vec![PtNode { relations: Vec::new(), paths: root_paths }];
    while let Some(node) = stack.pop() {
        expanded += 1;
        let Some(collision) = first_collision(&node.paths, horizon) else {
            return Ok(PbsOutcome { paths: node.paths, expanded_nodes: expanded, pruned_nodes: pruned });
        };
        let (i, j) = collision.agents;
        // push the (j higher) child first so the (i higher) child is
        // explored first
        for &(hi, lo) in &[(j, i), (i, j)] {
            match expand_child(
                oracle, agents, start_time, &node, hi, lo, old_paths, mode, horizon,
            ) {
                Ok(child) => stack.push(child),
                Err(PbsError::Exhausted) => pruned += 1,
                Err(e @ PbsError::LowLevelFailure { .. }) => {
                    if mode == PbsMode::Modified {
                        return Err(e);
                    }
                    pruned += 1;
                }
            }
        }
    }
    Err(PbsError::Exhausted)
}

fn expand_child(
    oracle: &DistanceOracle,
    agents: &[PbsAgent],
    start_time: Timestep,
    parent: &PtNode,
    hi: usize,
    lo: usize,
    old_paths: &[Path],
    mode: PbsMode,
    horizon: Option<Timestep>,
) -> Result<PtNode, PbsError> {
    let n = agents.len();
    let mut relations = parent.relations.clone();
    debug_assert!(
        !parent.relations.contains(&(hi, lo)),
        "collision between an already-ordered pair"
    );
    relations.push((hi, lo));
    let mut paths = parent.paths.clone();

    let mut replanned = alloc::vec![false; n];
    match plan_agent(oracle, agents, start_time, lo, &relations, &paths, old_paths, mode, horizon)
    {
        Some(p) => paths[lo] = p,
        None => return Err(PbsError::LowLevelFailure { agent: lo }),
    }
    replanned[lo] = true;

    // Cascade: in topological order, replan any agent colliding with an
    // already-replanned higher-priority agent.
    for a in topological_order(&relations, n) {
        if replanned[a] {
            continue;
        }
        let higher = higher_set(&relations, a, n);
        let needs_replan = (0..n).any(|b| {
            replanned[b]
                && higher[b]
                && first_collision_pair(&paths[a], &paths[b], horizon)
        });
        if needs_replan {
            match plan_agent(
                oracle, agents, start_time, a, &relations, &paths, old_paths, mode, horizon,
            ) {
                Some(p) => paths[a] = p,
                None => return Err(PbsError::LowLevelFailure { agent: a }),
            }
            replanned[a] = true;
        }
    }
    Ok(PtNode { relations, paths })
}

fn first_collision_pair(a: &Path, b: &Path, horizon: Option<Timestep>) -> bool {
    let t_end = match horizon {
        Some(w) => w,
        None => a.end_time().max(b.end_time()) + 1,
    };
    let t0 = a.start_time.min(b.start_time);
    for t in t0..t_end {
        if collision_at(a, b, 0, 1, t).is_some() {
            return true;
        }
    }
    false
}

/// Windowed PBS: original-mode search that resolves collisions for the
/// first `window` timesteps only; paths still run through the full goal
/// sequences.
pub fn wpbs(
    oracle: &DistanceOracle,
    agents: &[PbsAgent],
    start_time: Timestep,
    window: Timestep,
) -> Result<PbsOutcome, PbsError> {
    let old = agents
        .iter()
        .map(|a| Path::stay(start_time, a.start))
        .collect::<Vec<_>>();
    pbs(oracle, agents, start_time, &old, PbsMode::Original, Some(start_time + window))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridMap;

    fn goals(entries: &[((u32, u32), Timestep)]) -> GoalSpec {
        GoalSpec {
            entries: entries
                .iter()
                .map(|&((r, c), t)| (Location::new(r, c), t))
                .collect(),
        }
    }

    #[test]
    fn astar_single_goal_distance() {
        let map = GridMap::parse("1 6\n......\n").unwrap();
        let oracle = DistanceOracle::new(&map);
        let p = multi_goal_astar(
            &oracle,
            Location::new(0, 0),
            0,
            &goals(&[((0, 4), 0)]),
            &[],
            None,
        )
        .unwrap();
        assert_eq!(p.end_time(), 4);
        assert_eq!(*p.cells.last().unwrap(), Location::new(0, 4));
    }

    #[test]
    fn astar_waits_for_service_time() {
        let map = GridMap::parse("1 6\n......\n").unwrap();
        let oracle = DistanceOracle::new(&map);
        let p = multi_goal_astar(
            &oracle,
            Location::new(0, 0),
            0,
            &goals(&[((0, 3), 7)]),
            &[],
            None,
        )
        .unwrap();
        assert_eq!(p.end_time(), 7);
        assert!(path_serves_goals(&p, &goals(&[((0, 3), 7)])));
    }

    #[test]
    fn astar_detours_around_hard_path() {
        // 3x5 grid; a hard path rests forever in the middle of the center
        // corridor, forcing a detour of cost 2.
        let map = GridMap::parse("3 5\n.....\n.....\n.....\n").unwrap();
        let oracle = DistanceOracle::new(&map);
        let blocker = Path::stay(0, Location::new(1, 2));
        let spec = goals(&[((1, 4), 0)]);
        let p = multi_goal_astar(&oracle, Location::new(1, 0), 0, &spec, &[&blocker], None)
            .unwrap();
        assert_eq!(p.end_time(), 6);
        assert!(detect_collisions(&[p, blocker], None).is_empty());
    }

    #[test]
    fn astar_multi_goal_in_order() {
        let map = GridMap::parse("1 9\n.........\n").unwrap();
        let oracle = DistanceOracle::new(&map);
        let spec = goals(&[((0, 4), 0), ((0, 1), 0), ((0, 6), 0)]);
        let p = multi_goal_astar(&oracle, Location::new(0, 0), 0, &spec, &[], None).unwrap();
        // 4 right + 3 left + 5 right
        assert_eq!(p.end_time(), 12);
        assert!(path_serves_goals(&p, &spec));
    }

    #[test]
    fn astar_matches_estimate_clock() {
        // unconstrained cost equals the schedule-estimate clock
        use crate::assign::{estimate_schedule, TaskSequence};
        use crate::task::Task;
        let map = GridMap::parse("2 9\neeeeeeeee\n.........\n").unwrap();
        let oracle = DistanceOracle::new(&map);
        let t1 = Task { id: 0, release: 4, goals: alloc::vec![Location::new(0, 2), Location::new(0, 7)] };
        let t2 = Task { id: 1, release: 0, goals: alloc::vec![Location::new(0, 1)] };
        let mut seq = TaskSequence::new(0);
        seq.tasks = alloc::vec![t1.clone(), t2.clone()];
        let est = estimate_schedule(Location::new(1, 0), 0, &seq, &oracle);
        let spec = goals(&[((0, 2), 4), ((0, 7), 0), ((0, 1), 0)]);
        let p = multi_goal_astar(&oracle, Location::new(1, 0), 0, &spec, &[], None).unwrap();
        assert_eq!(p.end_time(), est.times[1].1);
    }

    #[test]
    fn astar_unreachable_returns_none() {
        let map = GridMap::parse("1 5\n..@..\n").unwrap();
        let oracle = DistanceOracle::new(&map);
        let p = multi_goal_astar(
            &oracle,
            Location::new(0, 0),
            0,
            &goals(&[((0, 4), 0)]),
            &[],
            None,
        );
        assert!(p.is_none());
    }

    #[test]
    fn astar_start_time_offset() {
        let map = GridMap::parse("1 6\n......\n").unwrap();
        let oracle = DistanceOracle::new(&map);
        let p = multi_goal_astar(
            &oracle,
            Location::new(0, 1),
            10,
            &goals(&[((0, 5), 0)]),
            &[],
            None,
        )
        .unwrap();
        assert_eq!(p.start_time, 10);
        assert_eq!(p.end_time(), 14);
    }

    #[test]
    fn collisions_vertex_stay() {
        let a = Path::stay(0, Location::new(0, 0));
        let b = Path::stay(0, Location::new(0, 0));
        let cs = detect_collisions(&[a, b], None);
        assert_eq!(cs[0].kind, CollisionKind::Vertex);
        assert_eq!(cs[0].time, 0);
    }

    #[test]
    fn collisions_edge_swap() {
        // swap at t = 3
        let mk = |cells: Vec<(u32, u32)>| Path {
            start_time: 0,
            cells: cells.into_iter().map(|(r, c)| Location::new(r, c)).collect(),
        };
        let a = mk(alloc::vec![(0, 1), (0, 1), (0, 1), (0, 1), (0, 2)]);
        let b = mk(alloc::vec![(0, 2), (0, 2), (0, 2), (0, 2), (0, 1)]);
        let cs = detect_collisions(&[a, b], None);
        assert!(cs.iter().any(|c| c.kind == CollisionKind::Edge && c.time == 3));
    }

    #[test]
    fn collisions_disjoint_empty() {
        let a = Path::stay(0, Location::new(0, 0));
        let b = Path::stay(0, Location::new(5, 5));
        assert!(detect_collisions(&[a, b], None).is_empty());
    }

    #[test]
    fn collisions_respect_horizon() {
        let a = Path::stay(0, Location::new(0, 0));
        let mut cells = alloc::vec![Location::new(0, 3); 15];
        cells.push(Location::new(0, 2));
        cells.push(Location::new(0, 1));
        cells.push(Location::new(0, 0)); // vertex collision at t = 17
        let b = Path { start_time: 0, cells };
        assert!(!detect_collisions(&[a.clone(), b.clone()], None).is_empty());
        assert!(detect_collisions(&[a, b], Some(10)).is_empty());
    }

    #[test]
    fn pbs_single_agent_unconstrained() {
        let map = GridMap::parse("1 6\n......\n").unwrap();
        let oracle = DistanceOracle::new(&map);
        let agents = alloc::vec![PbsAgent {
            start: Location::new(0, 0),
            goals: goals(&[((0, 5), 0)]),
        }];
        let old = alloc::vec![Path::stay(0, Location::new(0, 0))];
        let out = pbs(&oracle, &agents, 0, &old, PbsMode::Modified, None).unwrap();
        assert_eq!(out.paths[0].end_time(), 5);
        assert_eq!(out.expanded_nodes, 1);
    }

    #[test]
    fn pbs_corridor_with_siding() {
        // Two agents crossing a corridor with one siding cell.
        let map = GridMap::parse("2 5\n.....\n..@..\n").unwrap();
        // row 1 is free at cols 0,1,3,4; agents cross along row 0 and
        // park at opposite row-1 corners, which no old path rests on
        let oracle = DistanceOracle::new(&map);
        let agents = alloc::vec![
            PbsAgent { start: Location::new(0, 0), goals: goals(&[((1, 4), 0)]) },
            PbsAgent { start: Location::new(0, 4), goals: goals(&[((1, 0), 0)]) },
        ];
        let old = alloc::vec![
            Path::stay(0, Location::new(0, 0)),
            Path::stay(0, Location::new(0, 4)),
        ];
        for mode in [PbsMode::Modified, PbsMode::Original] {
            let out = pbs(&oracle, &agents, 0, &old, mode, None).unwrap();
            assert!(detect_collisions(&out.paths, None).is_empty());
            assert!(out.expanded_nodes <= 3, "expanded {}", out.expanded_nodes);
            for (p, a) in out.paths.iter().zip(&agents) {
                assert!(path_serves_goals(p, &a.goals));
            }
        }
    }

    #[test]
    fn pbs_modified_respects_old_paths() {
        // Agent 1's old path crosses agent 0's corridor; the root plan for
        // agent 0 must already avoid it.
        let map = GridMap::parse("3 5\n.....\n.....\n.....\n").unwrap();
        let oracle = DistanceOracle::new(&map);
        // agent 1's old path sweeps row 1 left to right, then parks at
        // (2,4); agent 0's root plan must already dodge it
        let mut old1_cells: Vec<Location> = (0..5).map(|c| Location::new(1, c)).collect();
        old1_cells.push(Location::new(2, 4));
        let old1 = Path { start_time: 0, cells: old1_cells };
        let agents = alloc::vec![
            PbsAgent { start: Location::new(0, 4), goals: goals(&[((1, 0), 0)]) },
            PbsAgent { start: Location::new(1, 0), goals: goals(&[((2, 4), 0)]) },
        ];
        let old = alloc::vec![Path::stay(0, Location::new(0, 4)), old1];
        let out = pbs(&oracle, &agents, 0, &old, PbsMode::Modified, None).unwrap();
        assert!(detect_collisions(&out.paths, None).is_empty());
    }

    #[test]
    fn wpbs_ignores_collisions_beyond_window() {
        // Agents far apart whose shortest paths meet only after t = 10.
        let map = GridMap::parse("1 40\n........................................\n").unwrap();
        let oracle = DistanceOracle::new(&map);
        let agents = alloc::vec![
            PbsAgent { start: Location::new(0, 0), goals: goals(&[((0, 30), 0)]) },
            PbsAgent { start: Location::new(0, 30), goals: goals(&[((0, 0), 0)]) },
        ];
        let out = wpbs(&oracle, &agents, 0, 10).unwrap();
        // both keep their unchanged shortest paths
        assert_eq!(out.paths[0].end_time(), 30);
        assert_eq!(out.paths[1].end_time(), 30);
        assert_eq!(out.expanded_nodes, 1);
        assert!(detect_collisions(&out.paths, Some(10)).is_empty());
        assert!(!detect_collisions(&out.paths, None).is_empty());
    }

    #[test]
    fn wpbs_infinite_window_equals_pbs_original() {
        let map = GridMap::parse("2 5\n.....\n..@..\n").unwrap();
        let oracle = DistanceOracle::new(&map);
        let agents = alloc::vec![
            PbsAgent { start: Location::new(0, 0), goals: goals(&[((0, 4), 0)]) },
            PbsAgent { start: Location::new(0, 4), goals: goals(&[((0, 0), 0)]) },
        ];
        let old: Vec<Path> = agents.iter().map(|a| Path::stay(0, a.start)).collect();
        let full = pbs(&oracle, &agents, 0, &old, PbsMode::Original, None).unwrap();
        let windowed = pbs(&oracle, &agents, 0, &old, PbsMode::Original, Some(1000)).unwrap();
        assert_eq!(full.paths, windowed.paths);
    }
}
