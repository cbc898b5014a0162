//! Driving gridworld: a car on an ASCII track with a heading and a speed.
//!
//! Turning rotates the heading in place. Every other action first sets the
//! speed (accelerate, brake or keep it) and then moves the car `speed` cells
//! forward, one cell at a time. Entering a wall crashes the car; entering a
//! finish cell ends the lap. With probability
//! `slip` the executed action is drawn uniformly from all five actions instead
//! of the chosen one.
//!
//! Layout characters: `#` wall, `.` free, `S` start, digits are waypoints and
//! the cells carrying the highest digit form the finish line. Cells outside the
//! drawn grid count as walls.

use std::collections::{BTreeMap, VecDeque};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Action, DiscreteEnvironment, EnvConfig, EnvError, Environment, FiniteMDP};
use crate::trace::StateSample;

pub const MAX_SPEED: usize = 2;
const SPEEDS: usize = MAX_SPEED + 1;
const HEADINGS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Heading {
    N,
    E,
    S,
    W,
}

impl Heading {
    const ALL: [Heading; 4] = [Heading::N, Heading::E, Heading::S, Heading::W];

    fn index(self) -> usize {
        self as usize
    }

    fn left(self) -> Self {
        Self::ALL[(self.index() + 3) % 4]
    }

    fn right(self) -> Self {
        Self::ALL[(self.index() + 1) % 4]
    }

    fn delta(self) -> (isize, isize) {
        match self {
            Heading::N => (-1, 0),
            Heading::E => (0, 1),
            Heading::S => (1, 0),
            Heading::W => (0, -1),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "N" => Heading::N,
            "E" => Heading::E,
            "S" => Heading::S,
            "W" => Heading::W,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridAction {
    Accelerate,
    Brake,
    TurnLeft,
    TurnRight,
    Coast,
}

impl GridAction {
    pub const ALL: [GridAction; 5] = [
        GridAction::Accelerate,
        GridAction::Brake,
        GridAction::TurnLeft,
        GridAction::TurnRight,
        GridAction::Coast,
    ];
}

/// Decoded state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cell {
    Live {
        cell: usize,
        heading: Heading,
        speed: usize,
    },
    Crashed,
    Finished {
        speed: usize,
    },
}

#[derive(Debug, Clone)]
pub struct GridDriveEnv {
    width: usize,
    height: usize,
    wall: Vec<bool>,
    finish: Vec<bool>,
    start: usize,
    start_heading: Heading,
    slip: f64,
    horizon: usize,
    /// Live (non-wall, non-finish) cells in row-major order.
    live: Vec<usize>,
    live_index: Vec<Option<usize>>,
    progress: Vec<f64>,
    clearance: Vec<f64>,
    finish_clearance: f64,
    current: Option<usize>,
    rng: ChaCha8Rng,
}

impl GridDriveEnv {
    pub fn new(
        rows: &[String],
        start_heading: Heading,
        slip: f64,
        horizon: usize,
    ) -> Result<Self, EnvError> {
        if !(0.0..=1.0).contains(&slip) {
            return Err(EnvError::Layout(format!("slip {slip} outside [0, 1]")));
        }
        if horizon == 0 {
            return Err(EnvError::Layout("horizon must be positive".into()));
        }
        let height = rows.len();
        let width = rows.iter().map(|r| r.chars().count()).max().unwrap_or(0);
        if height == 0 || width == 0 {
            return Err(EnvError::Layout("empty layout".into()));
        }
        let n = width * height;
        let mut wall = vec![true; n];
        let mut digit = vec![None; n];
        let mut start = None;
        for (r, row) in rows.iter().enumerate() {
            for (c, ch) in row.chars().enumerate() {
                let id = r * width + c;
                match ch {
                    '#' => {}
                    '.' => wall[id] = false,
                    'S' => {
                        if start.replace(id).is_some() {
                            return Err(EnvError::Layout("more than one start cell".into()));
                        }
                        wall[id] = false;
                    }
                    '0'..='9' => {
                        wall[id] = false;
                        digit[id] = ch.to_digit(10);
                    }
                    other => {
                        return Err(EnvError::Layout(format!(
                            "unexpected character `{other}` at row {}, column {}",
                            r + 1,
                            c + 1
                        )))
                    }
                }
            }
        }
        let start = start.ok_or_else(|| EnvError::Layout("no start cell `S`".into()))?;
        let top = digit
            .iter()
            .flatten()
            .max()
            .copied()
            .ok_or_else(|| EnvError::Layout("no waypoint digits".into()))?;
        let finish: Vec<bool> = digit.iter().map(|d| *d == Some(top)).collect();

        let dist = bfs_from(&finish, &wall, width, height);
        let start_dist = dist[start]
            .ok_or_else(|| EnvError::Layout("finish is unreachable from the start".into()))?;
        let progress = dist
            .iter()
            .map(|d| match d {
                Some(d) => (1.0 - *d as f64 / start_dist as f64).clamp(0.0, 1.0),
                None => 0.0,
            })
            .collect();
        let clearance: Vec<f64> = (0..n)
            .map(|id| nearest_wall(id, &wall, width, height) - 0.5)
            .map(|d| d.min(2.0))
            .collect();
        let finish_clearance = (0..n)
            .filter(|&id| finish[id])
            .map(|id| clearance[id])
            .fold(f64::INFINITY, f64::min);

        let live: Vec<usize> = (0..n).filter(|&id| !wall[id] && !finish[id]).collect();
        let mut live_index = vec![None; n];
        for (i, &id) in live.iter().enumerate() {
            live_index[id] = Some(i);
        }
        Ok(Self {
            width,
            height,
            wall,
            finish,
            start,
            start_heading,
            slip,
            horizon,
            live,
            live_index,
            progress,
            clearance,
            finish_clearance,
            current: None,
            rng: ChaCha8Rng::seed_from_u64(0),
        })
    }

    /// Builds from a parsed configuration with keys `slip` (default 0.1),
    /// `horizon` (default 40) and `heading` (default `E`).
    pub fn from_config(cfg: &EnvConfig) -> Result<Self, EnvError> {
        cfg.check_keys(&["slip", "horizon", "heading"])?;
        let heading: String = cfg.get_or("heading", "E".to_string())?;
        let heading = Heading::parse(&heading)
            .ok_or_else(|| EnvError::Layout(format!("heading `{heading}` is not N, E, S or W")))?;
        let rows = cfg
            .layout()
            .ok_or_else(|| EnvError::Layout("missing `layout:` section".into()))?;
        Self::new(
            rows,
            heading,
            cfg.get_or("slip", 0.1)?,
            cfg.get_or("horizon", 40)?,
        )
    }

    pub fn parse(text: &str) -> Result<Self, EnvError> {
        Self::from_config(&EnvConfig::parse(text)?)
    }

    pub fn slip(&self) -> f64 {
        self.slip
    }

    pub fn set_slip(&mut self, slip: f64) {
        self.slip = slip.clamp(0.0, 1.0);
    }

    fn crash_index(&self) -> usize {
        self.live.len() * HEADINGS * SPEEDS
    }

    fn encode(&self, c: Cell) -> usize {
        match c {
            Cell::Live {
                cell,
                heading,
                speed,
            } => {
                let li = self.live_index[cell].expect("live cell");
                (li * HEADINGS + heading.index()) * SPEEDS + speed
            }
            Cell::Crashed => self.crash_index(),
            Cell::Finished { speed } => self.crash_index() + speed,
        }
    }

    fn decode(&self, s: usize) -> Cell {
        let crash = self.crash_index();
        if s < crash {
            let speed = s % SPEEDS;
            let heading = Heading::ALL[(s / SPEEDS) % HEADINGS];
            let cell = self.live[s / (SPEEDS * HEADINGS)];
            Cell::Live {
                cell,
                heading,
                speed,
            }
        } else if s == crash {
            Cell::Crashed
        } else {
            Cell::Finished { speed: s - crash }
        }
    }

    /// Deterministic successor when `action` is executed.
    fn successor(&self, s: usize, action: GridAction) -> usize {
        let Cell::Live {
            cell,
            mut heading,
            mut speed,
        } = self.decode(s)
        else {
            return s;
        };
        match action {
            GridAction::Accelerate => speed = (speed + 1).min(MAX_SPEED),
            GridAction::Brake => speed = speed.saturating_sub(1),
            GridAction::TurnLeft | GridAction::TurnRight => {
                heading = if action == GridAction::TurnLeft {
                    heading.left()
                } else {
                    heading.right()
                };
                return self.encode(Cell::Live {
                    cell,
                    heading,
                    speed,
                });
            }
            GridAction::Coast => {}
        }
        let (dr, dc) = heading.delta();
        let (mut r, mut c) = ((cell / self.width) as isize, (cell % self.width) as isize);
        for _ in 0..speed {
            r += dr;
            c += dc;
            if r < 0 || c < 0 || r >= self.height as isize || c >= self.width as isize {
                return self.encode(Cell::Crashed);
            }
            let id = r as usize * self.width + c as usize;
            if self.wall[id] {
                return self.encode(Cell::Crashed);
            }
            if self.finish[id] {
                return self.encode(Cell::Finished { speed });
            }
        }
        self.encode(Cell::Live {
            cell: r as usize * self.width + c as usize,
            heading,
            speed,
        })
    }

    fn start_state(&self) -> usize {
        self.encode(Cell::Live {
            cell: self.start,
            heading: self.start_heading,
            speed: 0,
        })
    }
}

fn bfs_from(sources: &[bool], wall: &[bool], width: usize, height: usize) -> Vec<Option<u32>> {
    let mut dist = vec![None; sources.len()];
    let mut queue = VecDeque::new();
    for (id, &src) in sources.iter().enumerate() {
        if src {
            dist[id] = Some(0);
            queue.push_back(id);
        }
    }
    while let Some(id) = queue.pop_front() {
        let d = dist[id].expect("queued cells have a distance");
        let (r, c) = (id / width, id % width);
        let mut neighbours = Vec::with_capacity(4);
        if r > 0 {
            neighbours.push(id - width);
        }
        if r + 1 < height {
            neighbours.push(id + width);
        }
        if c > 0 {
            neighbours.push(id - 1);
        }
        if c + 1 < width {
            neighbours.push(id + 1);
        }
        for nb in neighbours {
            if !wall[nb] && dist[nb].is_none() {
                dist[nb] = Some(d + 1);
                queue.push_back(nb);
            }
        }
    }
    dist
}

/// Euclidean distance between cell centres to the nearest wall, counting the
/// ring of cells just outside the grid as walls.
fn nearest_wall(id: usize, wall: &[bool], width: usize, height: usize) -> f64 {
    let (r, c) = ((id / width) as f64, (id % width) as f64);
    let mut best = (r + 1.0)
        .min(c + 1.0)
        .min(height as f64 - r)
        .min(width as f64 - c);
    for (other, &w) in wall.iter().enumerate() {
        if w {
            let (r2, c2) = ((other / width) as f64, (other % width) as f64);
            best = best.min(((r - r2).powi(2) + (c - c2).powi(2)).sqrt());
        }
    }
    best
}

impl Environment for GridDriveEnv {
    fn name(&self) -> &str {
        "grid"
    }

    fn reset(&mut self, seed: u64) -> StateSample {
        let s = self.reset_index(seed);
        self.features(s)
    }

    fn step(&mut self, action: &Action) -> Result<StateSample, EnvError> {
        let a = match action {
            Action::Discrete(a) => *a,
            Action::Continuous(_) => {
                return Err(EnvError::InvalidAction(
                    "gridworld takes discrete actions".into(),
                ))
            }
        };
        let s = self.step_index(a)?;
        Ok(self.features(s))
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn random_action(&self, rng: &mut dyn RngCore) -> Action {
        Action::Discrete(rng.gen_range(0..GridAction::ALL.len()))
    }

    fn as_discrete(&mut self) -> Option<&mut dyn DiscreteEnvironment> {
        Some(self)
    }
}

impl DiscreteEnvironment for GridDriveEnv {
    /// Live states plus one crash state and one finish state per arrival speed.
    fn n_states(&self) -> usize {
        self.crash_index() + SPEEDS
    }

    fn n_actions(&self) -> usize {
        GridAction::ALL.len()
    }

    fn reset_index(&mut self, seed: u64) -> usize {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        let s = self.start_state();
        self.current = Some(s);
        s
    }

    fn step_index(&mut self, action: usize) -> Result<usize, EnvError> {
        if action >= GridAction::ALL.len() {
            return Err(EnvError::InvalidAction(format!(
                "action {action} out of range 0..{}",
                GridAction::ALL.len()
            )));
        }
        let s = self.current.ok_or(EnvError::NotReset)?;
        let executed = if self.rng.gen::<f64>() < self.slip {
            self.rng.gen_range(0..GridAction::ALL.len())
        } else {
            action
        };
        let next = self.successor(s, GridAction::ALL[executed]);
        self.current = Some(next);
        Ok(next)
    }

    fn features(&self, state: usize) -> StateSample {
        let (l, d, v) = match self.decode(state) {
            Cell::Live { cell, speed, .. } => {
                (self.progress[cell], self.clearance[cell], speed as f64)
            }
            Cell::Crashed => (0.0, -0.5, 0.0),
            Cell::Finished { speed } => (1.0, self.finish_clearance, speed as f64),
        };
        StateSample::from_pairs([("L", l), ("d_walls", d), ("v", v)])
    }

    fn is_terminal(&self, state: usize) -> bool {
        state >= self.crash_index()
    }

    fn transition_matrix(&self) -> FiniteMDP {
        let n = self.n_states();
        let m = self.n_actions();
        let uniform = self.slip / m as f64;
        let mut transitions = Vec::with_capacity(n);
        for s in 0..n {
            let mut per_action = Vec::with_capacity(m);
            for intended in 0..m {
                let mut row: BTreeMap<usize, f64> = BTreeMap::new();
                for (executed, &act) in GridAction::ALL.iter().enumerate() {
                    let p = uniform + if executed == intended { 1.0 - self.slip } else { 0.0 };
                    if p > 0.0 {
                        *row.entry(self.successor(s, act)).or_default() += p;
                    }
                }
                // absorbing states collect every outcome; keep the mass at exactly one
                per_action.push(row.into_iter().map(|(t, p)| (t, p.min(1.0))).collect());
            }
            transitions.push(per_action);
        }
        let mut initial = vec![0.0; n];
        initial[self.start_state()] = 1.0;
        FiniteMDP {
            n_states: n,
            n_actions: m,
            transitions,
            initial,
            horizon: self.horizon,
            features: (0..n).map(|s| self.features(s)).collect(),
            terminal: (0..n).map(|s| self.is_terminal(s)).collect(),
        }
    }
}
