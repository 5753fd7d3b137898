//! Four Rooms gridworld and its eight hallway GVFs.
//!
//! The geometry lives in `assets/four_rooms.txt`: `#` wall, `.` free,
//! `H` hallway, `S` behavior start, and digits `1`-`4` for the high-variance
//! states. Each digit gets a trailing line `<digit> <U|D|L|R>` naming the
//! action the high-variance behavior favors in that state.
//!
//! States are the free cells numbered in row-major order.

use std::collections::VecDeque;
use std::sync::Arc;

use super::tiles::TileCoder;
use super::{Dynamics, Problem, ProblemKind};
use crate::domain::{FeatureVector, GvfSpec, TabularPolicy};
use crate::error::{Error, Result};

pub const STANDARD_MAP: &str = include_str!("../../assets/four_rooms.txt");
pub const GAMMA: f64 = 0.9;
pub const N_ACTIONS: usize = 4;
pub const FAVORED_PROB: f64 = 0.97;
pub const UNFAVORED_PROB: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Action {
    Up = 0,
    Down = 1,
    Left = 2,
    Right = 3,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::Up, Action::Down, Action::Left, Action::Right];

    pub fn from_index(a: usize) -> Option<Action> {
        Self::ALL.get(a).copied()
    }

    fn from_letter(c: &str) -> Option<Action> {
        match c {
            "U" => Some(Action::Up),
            "D" => Some(Action::Down),
            "L" => Some(Action::Left),
            "R" => Some(Action::Right),
            _ => None,
        }
    }

    fn delta(self) -> (isize, isize) {
        match self {
            Action::Up => (-1, 0),
            Action::Down => (1, 0),
            Action::Left => (0, -1),
            Action::Right => (0, 1),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Layout {
    rows: usize,
    cols: usize,
    /// Free-cell state id per grid cell, `None` for walls.
    cell_state: Vec<Option<usize>>,
    positions: Vec<(usize, usize)>,
    hallways: Vec<usize>,
    start: usize,
    /// `(state, favored action)` for the high-variance behavior.
    marked: Vec<(usize, Action)>,
    /// Room index per state, `None` for hallways.
    room_of: Vec<Option<usize>>,
    n_rooms: usize,
}

impl Layout {
    pub fn parse(text: &str) -> Result<Self> {
        let mut grid: Vec<Vec<char>> = Vec::new();
        let mut marks: Vec<(char, Action)> = Vec::new();
        for line in text.lines().map(str::trim_end).filter(|l| !l.is_empty()) {
            if line.chars().all(|c| "#.HS1234".contains(c)) {
                grid.push(line.chars().collect());
            } else {
                let mut parts = line.split_whitespace();
                let (Some(d), Some(a), None) = (parts.next(), parts.next(), parts.next()) else {
                    return Err(Error::InvalidLayout(format!("unrecognised line `{line}`")));
                };
                let digit = d.chars().next().filter(|c| d.len() == 1 && "1234".contains(*c));
                let (Some(digit), Some(action)) = (digit, Action::from_letter(a)) else {
                    return Err(Error::InvalidLayout(format!("bad action line `{line}`")));
                };
                marks.push((digit, action));
            }
        }
        let rows = grid.len();
        let cols = grid.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 || grid.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidLayout("grid must be a non-empty rectangle".into()));
        }

        let mut cell_state = vec![None; rows * cols];
        let mut positions = Vec::new();
        let mut hallways = Vec::new();
        let mut start = None;
        let mut marked = Vec::new();
        for (r, row) in grid.iter().enumerate() {
            for (c, &ch) in row.iter().enumerate() {
                if ch == '#' {
                    continue;
                }
                let id = positions.len();
                cell_state[r * cols + c] = Some(id);
                positions.push((r, c));
                match ch {
                    'H' => hallways.push(id),
                    'S' => {
                        if start.replace(id).is_some() {
                            return Err(Error::InvalidLayout("more than one start cell".into()));
                        }
                    }
                    '1'..='4' => {
                        let action = marks
                            .iter()
                            .find(|(d, _)| *d == ch)
                            .map(|&(_, a)| a)
                            .ok_or_else(|| Error::InvalidLayout(format!("no action line for `{ch}`")))?;
                        marked.push((id, action));
                    }
                    _ => {}
                }
            }
        }
        let start = start.ok_or_else(|| Error::InvalidLayout("missing start cell".into()))?;

        let mut layout = Self {
            rows,
            cols,
            cell_state,
            positions,
            hallways,
            start,
            marked,
            room_of: Vec::new(),
            n_rooms: 0,
        };
        layout.label_rooms();
        Ok(layout)
    }

    pub fn standard() -> Result<Self> {
        Self::parse(STANDARD_MAP)
    }

    fn label_rooms(&mut self) {
        let n = self.n_states();
        let mut room_of = vec![None; n];
        let mut n_rooms = 0;
        for seed in 0..n {
            if room_of[seed].is_some() || self.hallways.contains(&seed) {
                continue;
            }
            room_of[seed] = Some(n_rooms);
            let mut queue = VecDeque::from([seed]);
            while let Some(s) = queue.pop_front() {
                for a in Action::ALL {
                    let t = self.step(s, a).expect("valid state");
                    if room_of[t].is_none() && !self.hallways.contains(&t) {
                        room_of[t] = Some(n_rooms);
                        queue.push_back(t);
                    }
                }
            }
            n_rooms += 1;
        }
        self.room_of = room_of;
        self.n_rooms = n_rooms;
    }

    pub fn n_states(&self) -> usize {
        self.positions.len()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn position(&self, s: usize) -> (usize, usize) {
        self.positions[s]
    }

    pub fn state_at(&self, row: usize, col: usize) -> Option<usize> {
        if row >= self.rows || col >= self.cols {
            return None;
        }
        self.cell_state[row * self.cols + col]
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn hallways(&self) -> &[usize] {
        &self.hallways
    }

    pub fn marked_states(&self) -> &[(usize, Action)] {
        &self.marked
    }

    pub fn n_rooms(&self) -> usize {
        self.n_rooms
    }

    pub fn room_of(&self, s: usize) -> Option<usize> {
        self.room_of[s]
    }

    /// Hallways bordering `room`, in state-id order.
    pub fn room_hallways(&self, room: usize) -> Vec<usize> {
        self.hallways
            .iter()
            .copied()
            .filter(|&h| {
                Action::ALL
                    .iter()
                    .any(|&a| self.room_of[self.step(h, a).expect("valid")] == Some(room))
            })
            .collect()
    }

    /// Deterministic move; walls and the grid boundary leave the state unchanged.
    pub fn step(&self, s: usize, action: Action) -> Result<usize> {
        let &(r, c) = self.positions.get(s).ok_or(Error::InvalidState(s))?;
        let (dr, dc) = action.delta();
        let (nr, nc) = (r as isize + dr, c as isize + dc);
        if nr < 0 || nc < 0 {
            return Ok(s);
        }
        Ok(self.state_at(nr as usize, nc as usize).unwrap_or(s))
    }

    /// BFS step counts to `target` over free cells; `None` where unreachable.
    pub fn distances_to(&self, target: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n_states()];
        dist[target] = Some(0);
        let mut queue = VecDeque::from([target]);
        while let Some(s) = queue.pop_front() {
            let d = dist[s].expect("queued states have a distance");
            // Moves are reversible, so neighbours of `s` are exactly the states that can step into it.
            for a in Action::ALL {
                let t = self.step(s, a).expect("valid");
                if dist[t].is_none() {
                    dist[t] = Some(d + 1);
                    queue.push_back(t);
                }
            }
        }
        dist
    }
}

/// Uniform over actions that strictly shorten the BFS distance to `hallway`.
///
/// The hallway itself (where the prediction terminates) and any cell that
/// cannot reach it get a uniform row; no learner consults those rows.
pub fn target_shortest_path_policy(layout: &Layout, hallway: usize) -> Result<TabularPolicy> {
    if hallway >= layout.n_states() {
        return Err(Error::InvalidState(hallway));
    }
    let dist = layout.distances_to(hallway);
    for room in 0..layout.n_rooms() {
        if layout.room_hallways(room).contains(&hallway) {
            let unreachable = (0..layout.n_states())
                .any(|s| layout.room_of(s) == Some(room) && dist[s].is_none());
            if unreachable {
                return Err(Error::UnreachableHallway(hallway));
            }
        }
    }
    let rows = (0..layout.n_states())
        .map(|s| match dist[s] {
            Some(d) if d > 0 => {
                let good: Vec<bool> = Action::ALL
                    .iter()
                    .map(|&a| dist[layout.step(s, a).expect("valid")] == Some(d - 1))
                    .collect();
                let k = good.iter().filter(|&&g| g).count() as f64;
                good.iter().map(|&g| if g { 1.0 / k } else { 0.0 }).collect()
            }
            _ => vec![0.25; N_ACTIONS],
        })
        .collect();
    TabularPolicy::new(rows)
}

#[derive(Clone, Debug)]
pub struct FourRooms {
    pub layout: Layout,
    pub coder: TileCoder,
}

impl FourRooms {
    pub fn standard() -> Result<Self> {
        let layout = Layout::standard()?;
        let coder = TileCoder::new(layout.rows(), layout.cols(), 4, 2)?;
        Ok(Self { layout, coder })
    }

    pub fn tile_encode(&self, state: usize) -> Result<FeatureVector> {
        if state >= self.layout.n_states() {
            return Err(Error::InvalidState(state));
        }
        let (r, c) = self.layout.position(state);
        self.coder.encode_position(r, c)
    }

    /// Encodes a grid cell, rejecting walls.
    pub fn tile_encode_cell(&self, row: usize, col: usize) -> Result<FeatureVector> {
        let s = self
            .layout
            .state_at(row, col)
            .ok_or_else(|| Error::InvalidLayout(format!("({row},{col}) is a wall or off-grid")))?;
        self.tile_encode(s)
    }

    pub fn dynamics(&self) -> Dynamics {
        let next = (0..self.layout.n_states())
            .map(|s| {
                Action::ALL
                    .iter()
                    .map(|&a| vec![(self.layout.step(s, a).expect("valid"), 1.0)])
                    .collect()
            })
            .collect();
        Dynamics::new(next).expect("deterministic dynamics")
    }

    pub fn behavior(&self) -> TabularPolicy {
        TabularPolicy::uniform(self.layout.n_states(), N_ACTIONS)
    }

    /// Equiprobable behavior except in the marked states, where the favored
    /// action has probability 0.97 and each other action 0.01.
    pub fn high_variance_behavior(&self) -> TabularPolicy {
        let mut rows: Vec<Vec<f64>> = (0..self.layout.n_states()).map(|_| vec![0.25; N_ACTIONS]).collect();
        for &(s, favored) in self.layout.marked_states() {
            rows[s] = (0..N_ACTIONS)
                .map(|a| if a == favored as usize { FAVORED_PROB } else { UNFAVORED_PROB })
                .collect();
        }
        TabularPolicy::new(rows).expect("rows sum to one")
    }

    /// Two GVFs per room, one per bordering hallway, ordered by room then hallway.
    pub fn gvfs(&self) -> Result<Vec<GvfSpec>> {
        let layout = &self.layout;
        let mut out = Vec::new();
        for room in 0..layout.n_rooms() {
            let room_hallways = layout.room_hallways(room);
            if room_hallways.len() != 2 {
                return Err(Error::InvalidLayout(format!(
                    "room {room} borders {} hallways, expected 2",
                    room_hallways.len()
                )));
            }
            for hallway in room_hallways {
                let target = target_shortest_path_policy(layout, hallway)?;
                let in_room: Arc<Vec<bool>> =
                    Arc::new((0..layout.n_states()).map(|s| layout.room_of(s) == Some(room)).collect());
                let (r1, r2, r3) = (in_room.clone(), in_room.clone(), in_room);
                let (hr, hc) = layout.position(hallway);
                out.push(GvfSpec::new(
                    format!("room{room}->hallway({hr},{hc})"),
                    target,
                    move |s, _, s2| if r1[s] && s2 == hallway { 1.0 } else { 0.0 },
                    move |s, _, s2| if !r2[s] || !r2[s2] || s2 == hallway { 0.0 } else { GAMMA },
                    move |s| if r3[s] { 1.0 } else { 0.0 },
                )?);
            }
        }
        Ok(out)
    }

    pub fn problem(&self, high_variance: bool) -> Result<Problem> {
        let features = (0..self.layout.n_states())
            .map(|s| self.tile_encode(s).map(Arc::new))
            .collect::<Result<Vec<_>>>()?;
        let mut start = vec![0.0; self.layout.n_states()];
        start[self.layout.start()] = 1.0;
        Ok(Problem {
            kind: if high_variance { ProblemKind::HighVarianceFourRooms } else { ProblemKind::FourRooms },
            dynamics: self.dynamics(),
            behavior: if high_variance { self.high_variance_behavior() } else { self.behavior() },
            gvfs: self.gvfs()?,
            features,
            start,
        })
    }
}
