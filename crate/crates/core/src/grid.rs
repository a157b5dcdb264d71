//! Grid maps, warehouse layouts, exact distances, and well-formedness.
//!
//! A map is an undirected 4-neighbor grid. Cells are free, blocked, task
//! endpoints (possible task goals), or non-task endpoints (agent rest
//! cells). The text format is line oriented: a `height width` header, then
//! one row per line over `{'.', '@', 'e', 'r'}`.

use alloc::boxed::Box;
use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::fmt;

use hashbrown::HashMap;

/// A cell position, `(row, col)`, both 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Location {
    pub row: u32,
    pub col: u32,
}

impl Location {
    pub const fn new(row: u32, col: u32) -> Self {
        Location { row, col }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.row, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cell {
    Free,
    Blocked,
    TaskEndpoint,
    NonTaskEndpoint,
}

impl Cell {
    fn to_char(self) -> char {
        match self {
            Cell::Free => '.',
            Cell::Blocked => '@',
            Cell::TaskEndpoint => 'e',
            Cell::NonTaskEndpoint => 'r',
        }
    }
}

/// Map parse failure, with the 1-based line it occurred on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for MapParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "map parse error at line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WarehouseProfile {
    Small,
    Medium,
    Large,
}

impl WarehouseProfile {
    pub fn name(self) -> &'static str {
        match self {
            WarehouseProfile::Small => "small",
            WarehouseProfile::Medium => "medium",
            WarehouseProfile::Large => "large",
        }
    }
}

/// Immutable 4-neighbor grid with endpoint annotations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    width: u32,
    height: u32,
    cells: Vec<Cell>,
    task_endpoints: Vec<Location>,
    non_task_endpoints: Vec<Location>,
}

impl GridMap {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn index(&self, loc: Location) -> usize {
        loc.row as usize * self.width as usize + loc.col as usize
    }

    pub fn location_of(&self, index: usize) -> Location {
        Location::new((index / self.width as usize) as u32, (index % self.width as usize) as u32)
    }

    pub fn in_bounds(&self, loc: Location) -> bool {
        loc.row < self.height && loc.col < self.width
    }

    pub fn is_blocked(&self, loc: Location) -> bool {
        self.cells[self.index(loc)] == Cell::Blocked
    }

    pub fn is_task_endpoint(&self, loc: Location) -> bool {
        self.cells[self.index(loc)] == Cell::TaskEndpoint
    }

    pub fn is_non_task_endpoint(&self, loc: Location) -> bool {
        self.cells[self.index(loc)] == Cell::NonTaskEndpoint
    }

    /// Task endpoints in row-major order.
    pub fn task_endpoints(&self) -> &[Location] {
        &self.task_endpoints
    }

    /// Non-task endpoints in row-major order.
    pub fn non_task_endpoints(&self) -> &[Location] {
        &self.non_task_endpoints
    }

    pub fn free_cell_count(&self) -> usize {
        self.cells.iter().filter(|c| **c != Cell::Blocked).count()
    }

    /// Unblocked 4-neighbors of `loc`.
    pub fn neighbors(&self, loc: Location) -> impl Iterator<Item = Location> + '_ {
        let (r, c) = (loc.row as i64, loc.col as i64);
        [(r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)]
            .into_iter()
            .filter_map(move |(nr, nc)| {
                if nr < 0 || nc < 0 {
                    return None;
                }
                let n = Location::new(nr as u32, nc as u32);
                if self.in_bounds(n) && !self.is_blocked(n) {
                    Some(n)
                } else {
                    None
                }
            })
    }

    fn from_cells(width: u32, height: u32, cells: Vec<Cell>) -> Self {
        let mut task_endpoints = Vec::new();
        let mut non_task_endpoints = Vec::new();
        for (i, cell) in cells.iter().enumerate() {
            let loc = Location::new((i / width as usize) as u32, (i % width as usize) as u32);
            match cell {
                Cell::TaskEndpoint => task_endpoints.push(loc),
                Cell::NonTaskEndpoint => non_task_endpoints.push(loc),
                _ => {}
            }
        }
        GridMap { width, height, cells, task_endpoints, non_task_endpoints }
    }

    /// Parses the line-oriented map format.
    pub fn parse(text: &str) -> Result<GridMap, MapParseError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| MapParseError {
            line: 1,
            message: String::from("missing header"),
        })?;
        let mut parts = header.split_whitespace();
        let height: u32 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| MapParseError { line: 1, message: String::from("bad height") })?;
        let width: u32 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| MapParseError { line: 1, message: String::from("bad width") })?;
        if parts.next().is_some() {
            return Err(MapParseError { line: 1, message: String::from("trailing header tokens") });
        }
        if width == 0 || height == 0 {
            return Err(MapParseError { line: 1, message: String::from("zero dimension") });
        }

        let mut cells = Vec::with_capacity(width as usize * height as usize);
        for row in 0..height {
            let line_no = row as usize + 2;
            let line = lines.next().ok_or_else(|| MapParseError {
                line: line_no,
                message: format!("expected {} rows, found {}", height, row),
            })?;
            if line.chars().count() != width as usize {
                return Err(MapParseError {
                    line: line_no,
                    message: format!("row has {} cells, expected {}", line.chars().count(), width),
                });
            }
            for ch in line.chars() {
                cells.push(match ch {
                    '.' => Cell::Free,
                    '@' => Cell::Blocked,
                    'e' => Cell::TaskEndpoint,
                    'r' => Cell::NonTaskEndpoint,
                    other => {
                        return Err(MapParseError {
                            line: line_no,
                            message: format!("unknown cell character '{}'", other),
                        })
                    }
                });
            }
        }
        if let Some(extra) = lines.next() {
            if !extra.trim().is_empty() {
                return Err(MapParseError {
                    line: height as usize + 2,
                    message: String::from("trailing content after map rows"),
                });
            }
        }
        Ok(GridMap::from_cells(width, height, cells))
    }

    /// Emits the exact format accepted by [`GridMap::parse`].
    pub fn serialize(&self) -> String {
        let mut out = format!("{} {}\n", self.height, self.width);
        for row in 0..self.height {
            for col in 0..self.width {
                out.push(self.cells[self.index(Location::new(row, col))].to_char());
            }
            out.push('\n');
        }
        out
    }

    /// Generates one of the canonical warehouse layouts.
    ///
    /// The layout is deterministic: `n` shelf strips of 10x1 cells per
    /// shelf row, task endpoints directly above and below every shelf
    /// cell, and non-task endpoints on every other row of the four
    /// outermost columns on each side. Leftover inner columns are spread
    /// over the margins and inter-strip gaps, widest slots first.
    pub fn warehouse(profile: WarehouseProfile) -> GridMap {
        let (width, height, strips_per_row, shelf_rows) = match profile {
            WarehouseProfile::Small => (35u32, 21u32, 2u32, 5u32),
            WarehouseProfile::Medium => (101, 81, 8, 40),
            WarehouseProfile::Large => (187, 153, 15, 76),
        };
        const STRIP_W: u32 = 10;
        const SIDE_COLS: u32 = 4;

        let inner = width - 2 * SIDE_COLS;
        let leftover = inner - STRIP_W * strips_per_row;
        let slots = strips_per_row + 1; // left margin, gaps, right margin
        let base = leftover / slots;
        let extra = leftover % slots;

        // Strip start columns.
        let mut strip_cols = Vec::new();
        let mut col = SIDE_COLS;
        for slot in 0..strips_per_row {
            col += base + if slot < extra { 1 } else { 0 };
            strip_cols.push(col);
            col += STRIP_W;
        }

        // Shelf rows: evenly spaced so each has endpoint rows above/below.
        let spacing = (height - 1) / shelf_rows;
        let shelf_row = |k: u32| spacing * (k + 1) - spacing / 2;

        let mut cells = alloc::vec![Cell::Free; width as usize * height as usize];
        let idx = |r: u32, c: u32| r as usize * width as usize + c as usize;

        for k in 0..shelf_rows {
            let r = shelf_row(k);
            for &start in &strip_cols {
                for c in start..start + STRIP_W {
                    cells[idx(r, c)] = Cell::Blocked;
                    cells[idx(r - 1, c)] = Cell::TaskEndpoint;
                    cells[idx(r + 1, c)] = Cell::TaskEndpoint;
                }
            }
        }

        // Agent rest cells: every other row keeps them mutually escapable.
        for r in (0..height).step_by(2) {
            for c in 0..SIDE_COLS {
                cells[idx(r, c)] = Cell::NonTaskEndpoint;
                cells[idx(r, width - 1 - c)] = Cell::NonTaskEndpoint;
            }
        }

        GridMap::from_cells(width, height, cells)
    }
}

/// Exact BFS distances with a lazily filled per-source cache.
///
/// The cache fill is idempotent, so clones of a fresh oracle can be handed
/// to concurrent runs; a single oracle is not `Sync`.
#[derive(Debug, Clone)]
pub struct DistanceOracle<'a> {
    map: &'a GridMap,
    cache: RefCell<HashMap<usize, Box<[u32]>>>,
}

pub const UNREACHABLE: u32 = u32::MAX;

impl<'a> DistanceOracle<'a> {
    pub fn new(map: &'a GridMap) -> Self {
        DistanceOracle { map, cache: RefCell::new(HashMap::new()) }
    }

    pub fn map(&self) -> &'a GridMap {
        self.map
    }

    /// Shortest-path distance in timesteps, or `None` when disconnected.
    ///
    /// Panics if either argument is blocked; that is a usage error.
    pub fn distance(&self, u: Location, v: Location) -> Option<u32> {
        assert!(
            !self.map.is_blocked(u) && !self.map.is_blocked(v),
            "distance queried on a blocked cell"
        );
        let src = self.map.index(u);
        let tgt = self.map.index(v);
        {
            let cache = self.cache.borrow();
            if let Some(table) = cache.get(&src) {
                let d = table[tgt];
                return if d == UNREACHABLE { None } else { Some(d) };
            }
        }
        let table = bfs_distances(self.map, u);
        let d = table[tgt];
        self.cache.borrow_mut().insert(src, table);
        if d == UNREACHABLE {
            None
        } else {
            Some(d)
        }
    }
}

/// Single-source BFS over unblocked cells; `UNREACHABLE` marks disconnected
/// cells. This is also the independent oracle used by tests.
pub fn bfs_distances(map: &GridMap, source: Location) -> Box<[u32]> {
    let mut dist = alloc::vec![UNREACHABLE; map.width as usize * map.height as usize];
    let mut queue = VecDeque::new();
    dist[map.index(source)] = 0;
    queue.push_back(source);
    while let Some(loc) = queue.pop_front() {
        let d = dist[map.index(loc)];
        for n in map.neighbors(loc) {
            let ni = map.index(n);
            if dist[ni] == UNREACHABLE {
                dist[ni] = d + 1;
                queue.push_back(n);
            }
        }
    }
    dist.into_boxed_slice()
}

/// A well-formedness violation; violations are data, not errors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WellFormedViolation {
    /// An agent start coincides with a goal location of some task.
    StartOnTaskGoal { agent: usize, location: Location },
    /// No path between the two endpoints avoids all other endpoints.
    DisconnectedPair { a: Location, b: Location },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WellFormedReport {
    pub violations: Vec<WellFormedViolation>,
}

impl WellFormedReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the well-formedness conditions for an instance: agent starts
/// distinct from all task goals, and every endpoint pair (task goals plus
/// starts) connected by a path traversing no other endpoint.
///
/// Pair connectivity is decided via the connected components of the grid
/// with all endpoints removed: two endpoints are linked iff they are
/// adjacent or border a common component.
pub fn check_well_formed(
    map: &GridMap,
    agent_starts: &[Location],
    goal_locations: &[Location],
) -> WellFormedReport {
    let mut violations = Vec::new();

    let mut endpoints: Vec<Location> = Vec::new();
    for &g in goal_locations {
        if !endpoints.contains(&g) {
            endpoints.push(g);
        }
    }
    for (agent, &s) in agent_starts.iter().enumerate() {
        if goal_locations.contains(&s) {
            violations.push(WellFormedViolation::StartOnTaskGoal { agent, location: s });
        }
        if !endpoints.contains(&s) {
            endpoints.push(s);
        }
    }
    endpoints.sort();

    let size = map.width as usize * map.height as usize;
    let mut is_endpoint = alloc::vec![false; size];
    for &e in &endpoints {
        is_endpoint[map.index(e)] = true;
    }

    // Components of (unblocked minus endpoints).
    let mut component = alloc::vec![usize::MAX; size];
    let mut next_component = 0usize;
    for start_idx in 0..size {
        let loc = map.location_of(start_idx);
        if map.is_blocked(loc) || is_endpoint[start_idx] || component[start_idx] != usize::MAX {
            continue;
        }
        component[start_idx] = next_component;
        let mut queue = VecDeque::new();
        queue.push_back(loc);
        while let Some(cur) = queue.pop_front() {
            for n in map.neighbors(cur) {
                let ni = map.index(n);
                if !is_endpoint[ni] && component[ni] == usize::MAX {
                    component[ni] = next_component;
                    queue.push_back(n);
                }
            }
        }
        next_component += 1;
    }

    // Components adjacent to each endpoint (at most 4).
    let adjacent: Vec<Vec<usize>> = endpoints
        .iter()
        .map(|&e| {
            let mut comps: Vec<usize> = map
                .neighbors(e)
                .filter_map(|n| {
                    let c = component[map.index(n)];
                    if c == usize::MAX {
                        None
                    } else {
                        Some(c)
                    }
                })
                .collect();
            comps.sort_unstable();
            comps.dedup();
            comps
        })
        .collect();

    let touching = |a: Location, b: Location| -> bool {
        a.row.abs_diff(b.row) + a.col.abs_diff(b.col) == 1
    };

    for i in 0..endpoints.len() {
        for j in i + 1..endpoints.len() {
            let (a, b) = (endpoints[i], endpoints[j]);
            let connected = touching(a, b)
                || adjacent[i].iter().any(|c| adjacent[j].contains(c));
            if !connected {
                violations.push(WellFormedViolation::DisconnectedPair { a, b });
            }
        }
    }

    WellFormedReport { violations }
}
