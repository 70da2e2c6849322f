//! Deterministic tick-based forward model.
//!
//! Units are tiles and ticks. `x` grows to the right, `y` grows downwards in
//! the same orientation as level rows. Actor positions are the top-left
//! corner of their bounding box.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::agents::{self, AgentConfig, Persona, SearchLimit, SearchStats};
use crate::error::SimError;
use crate::level::{Cell, Level, TileKind};

pub const WALK_ACCEL: f64 = 0.05;
pub const RUN_ACCEL: f64 = 0.09;
pub const MAX_WALK_SPEED: f64 = 0.45;
pub const MAX_RUN_SPEED: f64 = 0.75;
pub const GRAVITY: f64 = 0.56;
pub const JUMP_IMPULSE: f64 = 1.45;
pub const JUMP_BOOST: f64 = 0.25;
pub const JUMP_BOOST_TICKS: u32 = 4;
pub const TERMINAL_FALL_SPEED: f64 = 2.5;
/// Horizontal speed retained per tick with no directional input.
pub const FRICTION: f64 = 0.8;
pub const STOMP_BOUNCE: f64 = 1.2;
pub const ENEMY_SPEED: f64 = 0.2;
pub const MARIO_WIDTH: f64 = 0.8;
pub const MARIO_HEIGHT: f64 = 1.0;
pub const ENEMY_WIDTH: f64 = 0.8;
pub const ENEMY_HEIGHT: f64 = 1.0;
/// Ticks per reported second.
pub const TICKS_PER_SECOND: u32 = 24;
pub const DEFAULT_MAX_TICKS: u32 = 2400;

const EPS: f64 = 1e-9;
/// Largest displacement per collision substep.
const SUBSTEP: f64 = 0.4;
/// How far below an enemy's top a falling Mario's feet may already be and
/// still count as landing on it.
const STOMP_TOLERANCE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Action {
    pub left: bool,
    pub right: bool,
    pub jump: bool,
    pub run: bool,
}

impl Action {
    pub const NONE: Action = Action::new(false, false, false, false);

    pub const fn new(left: bool, right: bool, jump: bool, run: bool) -> Self {
        Action { left, right, jump, run }
    }

    /// Clears both directions when both are pressed.
    pub const fn normalized(self) -> Self {
        if self.left && self.right {
            Action {
                left: false,
                right: false,
                ..self
            }
        } else {
            self
        }
    }

    fn direction(self) -> f64 {
        match (self.left, self.right) {
            (true, false) => -1.0,
            (false, true) => 1.0,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Enemy {
    pub x: f64,
    pub y: f64,
    pub vel_x: f64,
    pub vel_y: f64,
    pub alive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub mario_x: f64,
    pub mario_y: f64,
    pub vel_x: f64,
    pub vel_y: f64,
    pub on_ground: bool,
    pub tick: u32,
    pub alive: bool,
    pub won: bool,
    /// Sorted row-major.
    pub coins_remaining: Vec<Cell>,
    pub enemies: Vec<Enemy>,
    pub jump_held_ticks: u32,
    /// Jump must be released before it can trigger again.
    pub jump_released: bool,
    pub max_x: f64,
    pub kills: u32,
    pub initial_coins: u32,
    pub initial_enemies: u32,
}

impl SimState {
    pub fn is_terminal(&self) -> bool {
        self.won || !self.alive
    }

    pub fn coins_collected(&self) -> u32 {
        self.initial_coins - self.coins_remaining.len() as u32
    }

    pub fn enemies_alive(&self) -> u32 {
        self.enemies.iter().filter(|e| e.alive).count() as u32
    }

    /// Stomped over initial enemies, 1 when the level has none.
    pub fn kill_rate(&self) -> f64 {
        vacuous_ratio(self.kills, self.initial_enemies)
    }

    /// Collected over initial coins, 1 when the level has none.
    pub fn collect_rate(&self) -> f64 {
        vacuous_ratio(self.coins_collected(), self.initial_coins)
    }

    /// Completion fraction of the level so far.
    pub fn progress(&self, level: &Level) -> f64 {
        if self.won {
            return 1.0;
        }
        let span = (level.cols() as f64 - 1.0).max(1.0);
        (self.max_x / span).clamp(0.0, 1.0)
    }
}

fn vacuous_ratio(num: u32, den: u32) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EventType {
    Stomp,
    Fall,
    Jump,
    Land,
    Collect,
    Lose,
    Win,
}

impl EventType {
    pub const ALL: [EventType; 7] = [
        EventType::Stomp,
        EventType::Fall,
        EventType::Jump,
        EventType::Land,
        EventType::Collect,
        EventType::Lose,
        EventType::Win,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            EventType::Stomp => "stomp",
            EventType::Fall => "fall",
            EventType::Jump => "jump",
            EventType::Land => "land",
            EventType::Collect => "collect",
            EventType::Lose => "lose",
            EventType::Win => "win",
        }
    }

    pub fn from_name(name: &str) -> Option<EventType> {
        EventType::ALL.into_iter().find(|e| e.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub kind: EventType,
    pub x: f64,
    pub y: f64,
    pub tick: u32,
    /// Tile the event happened in: the coin for Collect, otherwise the cell
    /// under the position.
    pub cell: Cell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaythroughResult {
    pub persona: Persona,
    pub blind: bool,
    pub p: f64,
    pub win: bool,
    pub ticks: u32,
    pub n_jumps: u32,
    pub events: Vec<EventRecord>,
    pub kill_rate: f64,
    pub collect_rate: f64,
    /// Percent of searched nodes that ended in a loss.
    pub fail_rate: f64,
    pub search_stats: SearchStats,
    pub n_enemies: u32,
    pub n_coins: u32,
    pub kills: u32,
    pub coins_collected: u32,
    pub enemies_fallen: u32,
}

impl PlaythroughResult {
    /// Ticks converted to whole seconds, or -1 when the level was not finished.
    pub fn completion_seconds(&self) -> i64 {
        if self.win {
            ((self.ticks as f64) / TICKS_PER_SECOND as f64 + 0.5) as i64
        } else {
            -1
        }
    }

    pub fn count(&self, kind: EventType) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    /// Number of distinct event types seen.
    pub fn event_types(&self) -> usize {
        EventType::ALL.iter().filter(|k| self.count(**k) > 0).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub max_ticks: u32,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_ticks: DEFAULT_MAX_TICKS,
        }
    }
}

pub fn initial_state(level: &Level) -> Result<SimState, SimError> {
    let spawn_row = level.spawn_row().ok_or(crate::error::LevelError::NoSpawn)?;
    let coins: Vec<Cell> = level.cells_of(TileKind::Coin).collect();
    let enemies: Vec<Enemy> = level
        .cells_of(TileKind::Enemy)
        .map(|c| Enemy {
            x: c.col as f64 + (1.0 - ENEMY_WIDTH) / 2.0,
            y: c.row as f64 + 1.0 - ENEMY_HEIGHT,
            vel_x: -ENEMY_SPEED,
            vel_y: 0.0,
            alive: true,
        })
        .collect();
    let x = (1.0 - MARIO_WIDTH) / 2.0;
    Ok(SimState {
        mario_x: x,
        mario_y: spawn_row as f64 - MARIO_HEIGHT,
        vel_x: 0.0,
        vel_y: 0.0,
        on_ground: true,
        tick: 0,
        alive: true,
        won: false,
        initial_coins: coins.len() as u32,
        initial_enemies: enemies.len() as u32,
        coins_remaining: coins,
        enemies,
        jump_held_ticks: JUMP_BOOST_TICKS,
        jump_released: true,
        max_x: x,
        kills: 0,
    })
}

/// Advances one tick, returning the new state and the events it produced.
pub fn step(state: &SimState, level: &Level, action: Action) -> Result<(SimState, Vec<EventRecord>), SimError> {
    if state.is_terminal() {
        return Err(SimError::SteppedTerminalState);
    }
    let mut next = state.clone();
    let mut events = Vec::new();
    advance(&mut next, level, action, &mut events);
    Ok((next, events))
}

/// Event sink for [`advance`]; the planner only needs counters, so it can
/// skip recording.
pub trait EventSink {
    fn push(&mut self, event: EventRecord);
}

impl EventSink for Vec<EventRecord> {
    fn push(&mut self, event: EventRecord) {
        Vec::push(self, event);
    }
}

/// Discards events.
pub struct NoEvents;

impl EventSink for NoEvents {
    fn push(&mut self, _: EventRecord) {}
}

fn cell_at(x: f64, y: f64) -> Cell {
    Cell::new(libm::floor(y.max(0.0)) as usize, libm::floor(x.max(0.0)) as usize)
}

fn span(lo: f64, len: f64) -> (i32, i32) {
    (libm::floor(lo) as i32, libm::floor(lo + len - EPS) as i32)
}

fn any_tile(level: &Level, rows: (i32, i32), cols: (i32, i32), pred: impl Fn(TileKind) -> bool) -> bool {
    (rows.0..=rows.1).any(|r| (cols.0..=cols.1).any(|c| pred(level.tile_at(r, c))))
}

/// Axis-aligned box moving through the tile grid.
struct Body {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
}

enum Hit {
    None,
    Floor,
    Ceiling,
}

impl Body {
    /// Moves horizontally and stops at Solid tiles. Returns true on a wall hit.
    fn move_x(&mut self, level: &Level, dx: f64) -> bool {
        if dx == 0.0 {
            return false;
        }
        self.x += dx;
        let rows = span(self.y, self.h);
        if dx > 0.0 {
            let col = libm::floor(self.x + self.w - EPS) as i32;
            if any_tile(level, rows, (col, col), |t| t == TileKind::Solid) {
                self.x = col as f64 - self.w;
                return true;
            }
        } else {
            if self.x < 0.0 {
                self.x = 0.0;
                return true;
            }
            let col = libm::floor(self.x) as i32;
            if any_tile(level, rows, (col, col), |t| t == TileKind::Solid) {
                self.x = col as f64 + 1.0;
                return true;
            }
        }
        false
    }

    /// Moves vertically; Platforms only stop downward motion from above.
    fn move_y(&mut self, level: &Level, dy: f64) -> Hit {
        if dy == 0.0 {
            return Hit::None;
        }
        let prev_bottom = self.y + self.h;
        self.y += dy;
        let cols = span(self.x, self.w);
        if dy > 0.0 {
            let row = libm::floor(self.y + self.h - EPS) as i32;
            let solid = any_tile(level, (row, row), cols, |t| t == TileKind::Solid);
            let platform = prev_bottom <= row as f64 + EPS
                && any_tile(level, (row, row), cols, |t| t == TileKind::Platform);
            if solid || platform {
                self.y = row as f64 - self.h;
                return Hit::Floor;
            }
        } else {
            let row = libm::floor(self.y) as i32;
            if any_tile(level, (row, row), cols, |t| t == TileKind::Solid) {
                self.y = row as f64 + 1.0;
                return Hit::Ceiling;
            }
        }
        Hit::None
    }

    fn supported(&self, level: &Level) -> bool {
        let bottom = self.y + self.h;
        let row = libm::round(bottom);
        if libm::fabs(bottom - row) > 1e-6 {
            return false;
        }
        any_tile(level, (row as i32, row as i32), span(self.x, self.w), TileKind::supports)
    }

    fn overlaps(&self, ox: f64, oy: f64, ow: f64, oh: f64) -> bool {
        self.x < ox + ow && ox < self.x + self.w && self.y < oy + oh && oy < self.y + self.h
    }
}

fn record(sink: &mut impl EventSink, level: &Level, tick: u32, kind: EventType, x: f64, y: f64, cell: Cell) {
    sink.push(EventRecord {
        kind,
        x: x.clamp(0.0, level.cols() as f64),
        y,
        tick,
        // Actors leaving the grid keep their last cell on it.
        cell: Cell::new(cell.row.min(level.rows() - 1), cell.col.min(level.cols() - 1)),
    });
}

fn substeps(vx: f64, vy: f64) -> u32 {
    let m = libm::fabs(vx).max(libm::fabs(vy));
    (libm::ceil(m / SUBSTEP) as u32).max(1)
}

/// In-place tick used by both [`step`] and the planner.
pub fn advance(state: &mut SimState, level: &Level, action: Action, sink: &mut impl EventSink) {
    debug_assert!(!state.is_terminal());
    let action = action.normalized();
    let tick = state.tick + 1;

    // Horizontal input.
    let dir = action.direction();
    if dir != 0.0 {
        let (accel, top) = if action.run {
            (RUN_ACCEL, MAX_RUN_SPEED)
        } else {
            (WALK_ACCEL, MAX_WALK_SPEED)
        };
        state.vel_x = (state.vel_x + dir * accel).clamp(-top, top);
    } else {
        state.vel_x *= FRICTION;
        if libm::fabs(state.vel_x) < 0.01 {
            state.vel_x = 0.0;
        }
    }

    // Vertical input and gravity.
    let was_airborne = !state.on_ground;
    if action.jump && state.on_ground && state.jump_released {
        state.vel_y = -JUMP_IMPULSE;
        state.jump_held_ticks = 0;
        state.on_ground = false;
        record(sink, level, tick, EventType::Jump, state.mario_x, state.mario_y, cell_at(state.mario_x, state.mario_y));
    } else if !state.on_ground {
        if action.jump && state.jump_held_ticks < JUMP_BOOST_TICKS && state.vel_y < 0.0 {
            state.vel_y -= JUMP_BOOST;
            state.jump_held_ticks += 1;
        } else {
            state.jump_held_ticks = JUMP_BOOST_TICKS;
        }
        state.vel_y = (state.vel_y + GRAVITY).min(TERMINAL_FALL_SPEED);
    } else {
        state.vel_y = 0.0;
    }
    state.jump_released = !action.jump;

    // Mario movement.
    let prev_bottom = state.mario_y + MARIO_HEIGHT;
    let falling = state.vel_y > 0.0;
    let mut body = Body {
        x: state.mario_x,
        y: state.mario_y,
        w: MARIO_WIDTH,
        h: MARIO_HEIGHT,
    };
    let n = substeps(state.vel_x, state.vel_y);
    let (dx, mut dy) = (state.vel_x / n as f64, state.vel_y / n as f64);
    for _ in 0..n {
        if body.move_x(level, dx) {
            state.vel_x = 0.0;
        }
        match body.move_y(level, dy) {
            Hit::None => {}
            Hit::Floor | Hit::Ceiling => {
                state.vel_y = 0.0;
                dy = 0.0;
            }
        }
    }
    state.mario_x = body.x;
    state.mario_y = body.y;
    state.on_ground = state.vel_y >= 0.0 && body.supported(level);
    if state.on_ground {
        state.vel_y = 0.0;
        if was_airborne {
            record(sink, level, tick, EventType::Land, state.mario_x, state.mario_y, cell_at(state.mario_x, state.mario_y));
        }
    }

    // Enemies.
    let bottom_edge = level.rows() as f64;
    for enemy in state.enemies.iter_mut().filter(|e| e.alive) {
        let mut eb = Body {
            x: enemy.x,
            y: enemy.y,
            w: ENEMY_WIDTH,
            h: ENEMY_HEIGHT,
        };
        enemy.vel_y = (enemy.vel_y + GRAVITY).min(TERMINAL_FALL_SPEED);
        let n = substeps(enemy.vel_x, enemy.vel_y);
        let (ex, mut ey) = (enemy.vel_x / n as f64, enemy.vel_y / n as f64);
        let mut reversed = false;
        for _ in 0..n {
            if !reversed && eb.move_x(level, ex) {
                reversed = true;
            }
            if let Hit::Floor | Hit::Ceiling = eb.move_y(level, ey) {
                enemy.vel_y = 0.0;
                ey = 0.0;
            }
        }
        if reversed {
            enemy.vel_x = -enemy.vel_x;
        }
        enemy.x = eb.x;
        enemy.y = eb.y;
        if enemy.y >= bottom_edge {
            enemy.alive = false;
            record(sink, level, tick, EventType::Fall, enemy.x, enemy.y, cell_at(enemy.x, bottom_edge - 1.0));
        }
    }

    // Coins.
    let rows = span(state.mario_y, MARIO_HEIGHT);
    let cols = span(state.mario_x, MARIO_WIDTH);
    for r in rows.0.max(0)..=rows.1 {
        for c in cols.0.max(0)..=cols.1 {
            if level.tile_at(r, c) != TileKind::Coin {
                continue;
            }
            let cell = Cell::new(r as usize, c as usize);
            if let Ok(i) = state.coins_remaining.binary_search(&cell) {
                state.coins_remaining.remove(i);
                record(sink, level, tick, EventType::Collect, state.mario_x, state.mario_y, cell);
            }
        }
    }

    // Enemy contact.
    let mario = Body {
        x: state.mario_x,
        y: state.mario_y,
        w: MARIO_WIDTH,
        h: MARIO_HEIGHT,
    };
    for enemy in state.enemies.iter_mut().filter(|e| e.alive) {
        if !mario.overlaps(enemy.x, enemy.y, ENEMY_WIDTH, ENEMY_HEIGHT) {
            continue;
        }
        if falling && prev_bottom <= enemy.y + STOMP_TOLERANCE {
            enemy.alive = false;
            state.kills += 1;
            state.vel_y = -STOMP_BOUNCE;
            state.on_ground = false;
            state.jump_held_ticks = 0;
            record(sink, level, tick, EventType::Stomp, state.mario_x, state.mario_y, cell_at(enemy.x, enemy.y));
        } else if state.alive {
            state.alive = false;
            record(sink, level, tick, EventType::Lose, state.mario_x, state.mario_y, cell_at(state.mario_x, state.mario_y));
        }
    }

    if state.alive && state.mario_y >= bottom_edge {
        state.alive = false;
        record(sink, level, tick, EventType::Lose, state.mario_x, state.mario_y, cell_at(state.mario_x, bottom_edge - 1.0));
    }

    state.max_x = state.max_x.max(state.mario_x);
    if state.alive && state.mario_x >= level.cols() as f64 - 1.0 {
        state.won = true;
        let y = state.mario_y.max(0.0);
        record(sink, level, tick, EventType::Win, state.mario_x, y, cell_at(level.cols() as f64 - 1.0, y));
    }
    state.tick = tick;
}

/// Plays a level to completion, death, or the tick limit.
pub fn run_playthrough(level: &Level, agent: &AgentConfig, limits: Limits) -> Result<PlaythroughResult, SimError> {
    run_playthrough_with(level, agent, limits, &mut agents::NodeBudget)
}

/// Same as [`run_playthrough`] with a caller-provided search limit, such as a
/// wall clock.
pub fn run_playthrough_with(
    level: &Level,
    agent: &AgentConfig,
    limits: Limits,
    limit: &mut dyn SearchLimit,
) -> Result<PlaythroughResult, SimError> {
    if limits.max_ticks == 0 {
        return Err(SimError::ZeroTickLimit);
    }
    let mut state = initial_state(level)?;
    let mut events = Vec::new();
    let mut stats = SearchStats::default();
    let repeat = agent.action_repeat.max(1);
    let mut pursuit = agents::Pursuit::default();
    'outer: while !state.is_terminal() && state.tick < limits.max_ticks {
        let (action, s, target) = agents::plan(&state, level, agent, limit, &pursuit.ignored)?;
        pursuit.observe(target, &state);
        stats.absorb(s);
        for _ in 0..repeat {
            advance(&mut state, level, action, &mut events);
            if state.is_terminal() || state.tick >= limits.max_ticks {
                break 'outer;
            }
        }
    }
    let n_jumps = events.iter().filter(|e| e.kind == EventType::Jump).count() as u32;
    let enemies_fallen = events.iter().filter(|e| e.kind == EventType::Fall).count() as u32;
    Ok(PlaythroughResult {
        persona: agent.persona,
        blind: agent.blind,
        p: state.progress(level),
        win: state.won,
        ticks: state.tick,
        n_jumps,
        events,
        kill_rate: state.kill_rate(),
        collect_rate: state.collect_rate(),
        fail_rate: agents::aggregate_fail_rate(&[stats]),
        search_stats: stats,
        n_enemies: state.initial_enemies,
        n_coins: state.initial_coins,
        kills: state.kills,
        coins_collected: state.coins_collected(),
        enemies_fallen,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::level::parse_level;

    fn flat() -> Level {
        Level::flat(14, 28, 2).unwrap()
    }

    const RIGHT: Action = Action::new(false, true, false, false);
    const JUMP: Action = Action::new(false, false, true, false);

    #[test]
    fn spawn_on_flat_ground() {
        let s = initial_state(&flat()).unwrap();
        assert_eq!(s.mario_y, 11.0);
        assert_eq!((s.vel_x, s.vel_y), (0.0, 0.0));
        assert!(s.on_ground && s.alive && !s.won);
        assert_eq!(s.tick, 0);
    }

    #[test]
    fn coins_counted_at_start() {
        let level = flat().with_tile(5, 3, TileKind::Coin).with_tile(5, 4, TileKind::Coin).with_tile(6, 9, TileKind::Coin);
        assert_eq!(initial_state(&level).unwrap().coins_remaining.len(), 3);
    }

    #[test]
    fn no_spawn_is_an_error() {
        let level = Level::filled(3, 3, TileKind::Empty).unwrap();
        assert!(matches!(initial_state(&level), Err(SimError::Level(_))));
    }

    #[test]
    fn jump_emits_event_and_impulse() {
        let level = flat();
        let s = initial_state(&level).unwrap();
        let (next, events) = step(&s, &level, JUMP).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].kind, EventType::Jump);
        assert_eq!(next.vel_y, -JUMP_IMPULSE);
        assert!(!next.on_ground);
    }

    #[test]
    fn held_jump_does_not_retrigger() {
        let level = flat();
        let mut s = initial_state(&level).unwrap();
        let mut jumps = 0;
        for _ in 0..60 {
            let (next, ev) = step(&s, &level, JUMP).unwrap();
            jumps += ev.iter().filter(|e| e.kind == EventType::Jump).count();
            s = next;
        }
        assert_eq!(jumps, 1);
        assert!(s.on_ground);
    }

    #[test]
    fn collects_coin_once() {
        let level = flat().with_tile(11, 2, TileKind::Coin);
        let mut s = initial_state(&level).unwrap();
        let mut collects = 0;
        for _ in 0..20 {
            let (next, ev) = step(&s, &level, RIGHT).unwrap();
            collects += ev.iter().filter(|e| e.kind == EventType::Collect).count();
            s = next;
        }
        assert_eq!(collects, 1);
        assert!(s.coins_remaining.is_empty());
    }

    #[test]
    fn stomp_from_above() {
        let level = flat().with_tile(11, 4, TileKind::Enemy);
        let mut s = initial_state(&level).unwrap();
        // Put Mario right above the enemy, falling.
        s.enemies[0].vel_x = 0.0;
        s.mario_x = s.enemies[0].x;
        s.mario_y = s.enemies[0].y - 1.3;
        s.on_ground = false;
        s.vel_y = 0.5;
        let (next, ev) = step(&s, &level, Action::NONE).unwrap();
        assert!(ev.iter().any(|e| e.kind == EventType::Stomp));
        assert!(!ev.iter().any(|e| e.kind == EventType::Lose));
        assert!(!next.enemies[0].alive && next.alive);
        assert_eq!(next.kills, 1);
    }

    #[test]
    fn side_contact_kills() {
        let level = flat().with_tile(11, 2, TileKind::Enemy);
        let mut s = initial_state(&level).unwrap();
        let mut lost = false;
        for _ in 0..30 {
            let (next, ev) = step(&s, &level, RIGHT).unwrap();
            lost |= ev.iter().any(|e| e.kind == EventType::Lose);
            s = next;
            if s.is_terminal() {
                break;
            }
        }
        assert!(lost && !s.alive);
        assert_eq!(step(&s, &level, RIGHT), Err(SimError::SteppedTerminalState));
    }

    #[test]
    fn enemy_walks_off_ledge_and_falls() {
        let level = parse_level("------\n------\n--E---\nXXXX--").unwrap();
        let mut s = initial_state(&level).unwrap();
        s.enemies[0].vel_x = ENEMY_SPEED;
        let mut falls = 0;
        for _ in 0..40 {
            let mut ev = Vec::new();
            advance(&mut s, &level, Action::NONE, &mut ev);
            falls += ev.iter().filter(|e| e.kind == EventType::Fall).count();
        }
        assert_eq!(falls, 1);
        assert!(!s.enemies[0].alive);
    }

    #[test]
    fn enemy_reverses_at_wall() {
        let level = parse_level("------\nX-E---\nXXXXXX").unwrap();
        let mut s = initial_state(&level).unwrap();
        for _ in 0..10 {
            advance(&mut s, &level, Action::NONE, &mut NoEvents);
        }
        assert!(s.enemies[0].vel_x > 0.0);
        assert!(s.enemies[0].x >= 1.0);
    }

    #[test]
    fn falling_below_grid_loses() {
        let level = parse_level("------\nXX----").unwrap();
        let mut s = initial_state(&level).unwrap();
        let mut ev = Vec::new();
        while !s.is_terminal() && s.tick < 100 {
            advance(&mut s, &level, RIGHT, &mut ev);
        }
        assert!(!s.alive);
        assert_eq!(ev.iter().filter(|e| e.kind == EventType::Lose).count(), 1);
    }

    #[test]
    fn walking_to_the_end_wins() {
        let level = flat();
        let mut s = initial_state(&level).unwrap();
        let mut ev = Vec::new();
        while !s.is_terminal() {
            advance(&mut s, &level, Action::new(false, true, false, true), &mut ev);
            assert!(s.tick < 200);
        }
        assert!(s.won && s.alive);
        assert_eq!(s.progress(&level), 1.0);
        assert_eq!(ev.last().unwrap().kind, EventType::Win);
    }

    #[test]
    fn platform_is_one_way() {
        // Platform two rows above ground at columns 1..3.
        let level = parse_level("-------\n-------\n-------\n-~~~---\n-------\n-------\nXXXXXXX").unwrap();
        let mut s = initial_state(&level).unwrap();
        s.mario_x = 1.5;
        let mut ev = Vec::new();
        advance(&mut s, &level, JUMP, &mut ev);
        let mut peak = s.mario_y;
        for _ in 0..30 {
            advance(&mut s, &level, JUMP, &mut ev);
            peak = peak.min(s.mario_y);
        }
        // Passed up through the platform, came down on top of it.
        assert!(peak < 2.0);
        assert!(s.on_ground);
        assert_eq!(s.mario_y, 2.0);
    }

    #[test]
    fn jump_envelope() {
        // Apex of a fully held standing jump, in tiles.
        let level = Level::flat(20, 10, 1).unwrap();
        let mut s = initial_state(&level).unwrap();
        let start = s.mario_y;
        let mut apex: f64 = 0.0;
        for _ in 0..40 {
            advance(&mut s, &level, JUMP, &mut NoEvents);
            apex = apex.max(start - s.mario_y);
        }
        assert!((4.0..4.5).contains(&apex), "apex {apex}");
    }

    #[test]
    fn running_gap_envelope() {
        // Longest gap cleared from a full-speed run-up, all at the same height.
        let cross = |gap: usize| {
            let cols = 12 + gap + 6;
            let mut tiles = alloc::vec![TileKind::Empty; 8 * cols];
            for c in (0..12).chain(12 + gap..cols) {
                tiles[7 * cols + c] = TileKind::Solid;
            }
            let level = Level::new(8, cols, tiles).unwrap();
            let mut s = initial_state(&level).unwrap();
            let run = Action::new(false, true, false, true);
            let jump = Action::new(false, true, true, true);
            while !s.is_terminal() && s.tick < 300 {
                let a = if s.mario_x + MARIO_WIDTH > 12.0 - 0.3 && s.mario_x < 12.0 { jump } else if s.on_ground { run } else { jump };
                advance(&mut s, &level, a, &mut NoEvents);
            }
            s.won
        };
        assert!(cross(6));
        assert!(!cross(9));
    }
}
