//! Persona planners: best-first search over the forward model.
//!
//! Every decision runs a fresh search from the current state. Children are
//! produced by holding one of six composite actions for `action_repeat`
//! ticks. Nodes are ordered by the persona's cost, then by distance to the
//! persona's target (the nearest enemy or coin ahead, fixed at the root),
//! then by the Runner's time cost, then by insertion order. A node is a goal once it has won or
//! looked `horizon` ticks ahead of the root; dead nodes are counted and
//! discarded.

use alloc::collections::{BTreeSet, BinaryHeap};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::level::{Cell, Level};
use crate::sim::{advance, Action, Enemy, NoEvents, SimState, ENEMY_HEIGHT, ENEMY_WIDTH, MARIO_HEIGHT, MARIO_WIDTH, MAX_RUN_SPEED};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Persona {
    Runner,
    Killer,
    Collector,
}

impl Persona {
    pub const ALL: [Persona; 3] = [Persona::Runner, Persona::Killer, Persona::Collector];

    pub const fn name(self) -> &'static str {
        match self {
            Persona::Runner => "runner",
            Persona::Killer => "killer",
            Persona::Collector => "collector",
        }
    }
}

impl fmt::Display for Persona {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Persona {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Persona::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or(UnknownName)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnknownName;

impl fmt::Display for UnknownName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("unknown name")
    }
}

impl core::error::Error for UnknownName {}

pub const DEFAULT_NODE_BUDGET: usize = 1000;
pub const DEFAULT_HORIZON_TICKS: u32 = 16;
pub const DEFAULT_ACTION_REPEAT: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentConfig {
    pub persona: Persona,
    pub blind: bool,
    /// Node expansions allowed per decision.
    pub node_budget: usize,
    pub horizon_ticks: u32,
    /// Ticks each search edge holds its action for.
    pub action_repeat: u32,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig::new(Persona::Runner)
    }
}

impl AgentConfig {
    pub const fn new(persona: Persona) -> Self {
        AgentConfig {
            persona,
            blind: false,
            node_budget: DEFAULT_NODE_BUDGET,
            horizon_ticks: DEFAULT_HORIZON_TICKS,
            action_repeat: DEFAULT_ACTION_REPEAT,
        }
    }

    pub const fn blind(self) -> Self {
        AgentConfig { blind: true, ..self }
    }

    pub const fn perfect(self) -> Self {
        AgentConfig { blind: false, ..self }
    }

    /// Lookahead actually used: half of `horizon_ticks` for blind agents.
    pub const fn effective_horizon(&self) -> u32 {
        if self.blind {
            self.horizon_ticks / 2
        } else {
            self.horizon_ticks
        }
    }

    pub fn validate(&self) -> Result<(), &'static str> {
        if self.node_budget == 0 {
            return Err("node_budget must be at least 1");
        }
        if self.action_repeat == 0 {
            return Err("action_repeat must be at least 1");
        }
        if self.horizon_ticks < self.action_repeat {
            return Err("horizon_ticks must be at least action_repeat");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeuristicTerms {
    /// Estimated ticks left to reach the end column.
    pub remaining_time: f64,
    pub time_elapsed: f64,
    pub kill_rate: f64,
    pub collect_rate: f64,
    pub game_state: i32,
}

impl HeuristicTerms {
    pub fn of(state: &SimState, level: &Level) -> Self {
        let remaining = (level.cols() as f64 - 1.0 - state.mario_x).max(0.0);
        HeuristicTerms {
            remaining_time: if state.won { 0.0 } else { remaining / MAX_RUN_SPEED },
            time_elapsed: state.tick as f64,
            kill_rate: state.kill_rate(),
            collect_rate: state.collect_rate(),
            game_state: game_state_term(state),
        }
    }
}

/// Lower is better.
pub fn heuristic_cost(persona: Persona, terms: &HeuristicTerms) -> f64 {
    match persona {
        Persona::Runner => terms.remaining_time + terms.time_elapsed * 0.9,
        Persona::Killer => -terms.kill_rate - terms.game_state as f64,
        Persona::Collector => -terms.collect_rate - terms.game_state as f64,
    }
}

pub fn game_state_term(state: &SimState) -> i32 {
    if state.won {
        1
    } else if !state.alive {
        -1
    } else {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes_total: u64,
    pub nodes_lose: u64,
}

impl SearchStats {
    pub fn absorb(&mut self, other: SearchStats) {
        self.nodes_total += other.nodes_total;
        self.nodes_lose += other.nodes_lose;
    }
}

/// Percentage of losing nodes over all searched nodes, from summed counters.
pub fn aggregate_fail_rate(stats: &[SearchStats]) -> f64 {
    let (total, lose) = stats
        .iter()
        .fold((0u64, 0u64), |(t, l), s| (t + s.nodes_total, l + s.nodes_lose));
    if total == 0 {
        0.0
    } else {
        100.0 * lose as f64 / total as f64
    }
}

/// The six composite actions, in expansion order.
pub const CANONICAL_ACTIONS: [Action; 6] = [
    Action::new(false, true, false, false),
    Action::new(false, true, false, true),
    Action::new(false, true, true, false),
    Action::new(false, true, true, true),
    Action::new(true, false, false, false),
    Action::new(false, false, true, false),
];

/// Decides when a search must stop early.
pub trait SearchLimit {
    /// Called before each expansion with the number done so far.
    fn exhausted(&mut self, config: &AgentConfig, expansions: usize) -> bool;
}

/// Stops after `node_budget` expansions.
pub struct NodeBudget;

impl SearchLimit for NodeBudget {
    fn exhausted(&mut self, config: &AgentConfig, expansions: usize) -> bool {
        expansions >= config.node_budget
    }
}

/// Priority of a node: persona cost, then distance to the persona's target,
/// then time cost, then insertion index.
#[derive(Debug, Clone, Copy)]
struct Priority {
    persona: f64,
    approach: f64,
    time: f64,
    index: usize,
}

impl Priority {
    fn cmp_key(&self, other: &Self) -> Ordering {
        self.persona
            .total_cmp(&other.persona)
            .then(self.approach.total_cmp(&other.approach))
            .then(self.time.total_cmp(&other.time))
            .then(self.index.cmp(&other.index))
    }
}

/// How far ahead of the root a target may be, in tiles.
const TARGET_AHEAD: f64 = 12.0;
/// How far behind the root a target may be, in tiles.
const TARGET_BEHIND: f64 = 4.0;

/// What a Killer or Collector steers towards during one search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Target {
    None,
    Enemy(usize),
    Coin(f64, f64),
}

impl Target {
    /// Nearest live enemy (Killer) or remaining coin (Collector) in the
    /// window around the root.
    fn pick(persona: Persona, root: &SimState, level: &Level, ignored: &[Target]) -> Target {
        let (cx, cy) = mario_centre(root);
        let in_window = |x: f64| x >= cx - TARGET_BEHIND && x <= cx + TARGET_AHEAD;
        let nearest = |points: &mut dyn Iterator<Item = (f64, f64)>| {
            points
                .filter(|&(x, _)| in_window(x))
                .map(|(x, y)| (libm::fabs(x - cx) + libm::fabs(y - cy), x, y))
                .min_by(|a, b| a.0.total_cmp(&b.0))
        };
        match persona {
            Persona::Runner => Target::None,
            Persona::Killer => root
                .enemies
                .iter()
                .enumerate()
                .filter(|&(i, e)| e.alive && !ignored.contains(&Target::Enemy(i)))
                .map(|(i, e)| (i, enemy_centre(e)))
                .filter(|&(_, (x, _))| in_window(x))
                .min_by(|a, b| {
                    let da = libm::fabs(a.1 .0 - cx) + libm::fabs(a.1 .1 - cy);
                    let db = libm::fabs(b.1 .0 - cx) + libm::fabs(b.1 .1 - cy);
                    da.total_cmp(&db)
                })
                .map_or(Target::None, |(i, _)| Target::Enemy(i)),
            Persona::Collector => {
                let mut coins = root
                    .coins_remaining
                    .iter()
                    .filter(|c| coin_reachable(level, **c))
                    .map(|c| (c.col as f64 + 0.5, c.row as f64 + 0.5))
                    .filter(|&(x, y)| !ignored.iter().any(|t| t.covers_coin(x, y)));
                nearest(&mut coins).map_or(Target::None, |(_, x, y)| Target::Coin(x, y))
            }
        }
    }

    /// Giving up on a coin gives up on its row neighbours too.
    fn covers_coin(&self, x: f64, y: f64) -> bool {
        match *self {
            Target::Coin(tx, ty) => ty == y && libm::fabs(tx - x) <= CLUSTER_COLS,
            _ => false,
        }
    }

    fn distance(self, state: &SimState) -> f64 {
        let (cx, cy) = mario_centre(state);
        let (tx, ty) = match self {
            Target::None => return 0.0,
            // Enemies pull towards the point a stomp passes through.
            Target::Enemy(i) => match state.enemies.get(i) {
                Some(e) if e.alive => (enemy_centre(e).0, e.y - MARIO_HEIGHT / 2.0),
                _ => return 0.0,
            },
            Target::Coin(x, y) => (x, y),
        };
        libm::fabs(tx - cx) + libm::fabs(ty - cy)
    }
}

/// Rows above a support's tile row that a standing jump still touches.
pub(crate) const JUMP_REACH_ROWS: usize = 6;
/// Columns either side of a coin searched for a support to jump from.
const REACH_COLS: usize = 3;

/// Whether some support near the coin lies at most [`JUMP_REACH_ROWS`]
/// below it with open space on top.
fn coin_reachable(level: &Level, coin: Cell) -> bool {
    let lo = coin.col.saturating_sub(REACH_COLS);
    let hi = (coin.col + REACH_COLS).min(level.cols() - 1);
    (lo..=hi).any(|col| {
        (coin.row + 1..=(coin.row + JUMP_REACH_ROWS).min(level.rows() - 1))
            .any(|row| level.get(row, col).supports() && !level.get(row - 1, col).supports())
    })
}

/// Ticks a playthrough keeps chasing a target without getting closer.
pub(crate) const TARGET_PATIENCE: u32 = 16;
/// Horizontal reach of a coin cluster, in tiles.
const CLUSTER_COLS: f64 = 2.0;
/// Smallest distance gain that counts as getting closer, in tiles.
const PROGRESS_EPS: f64 = 0.1;

/// Targets a playthrough has given up on, and the current chase.
#[derive(Debug, Default)]
pub(crate) struct Pursuit {
    pub(crate) ignored: Vec<Target>,
    /// Target, its closest distance so far, and the tick of the last
    /// progress: a kill, a collect or a closer approach.
    current: Option<(Target, f64, u32)>,
    rewards: u32,
}

impl Pursuit {
    /// Records the target chosen at `state`. After [`TARGET_PATIENCE`] ticks
    /// without progress the current target is ignored from then on.
    pub(crate) fn observe(&mut self, target: Target, state: &SimState) {
        let rewards = state.kills + state.coins_collected();
        let rewarded = rewards > self.rewards;
        self.rewards = rewards;
        if target == Target::None {
            self.current = None;
            return;
        }
        let d = target.distance(state);
        match &mut self.current {
            Some((t, best, since)) if !rewarded => {
                if *t != target {
                    *t = target;
                    *best = d;
                } else if d < *best - PROGRESS_EPS {
                    *best = d;
                    *since = state.tick;
                }
                if state.tick - *since >= TARGET_PATIENCE {
                    self.ignored.push(target);
                    self.current = None;
                }
            }
            _ => self.current = Some((target, d, state.tick)),
        }
    }
}

fn mario_centre(s: &SimState) -> (f64, f64) {
    (s.mario_x + MARIO_WIDTH / 2.0, s.mario_y + MARIO_HEIGHT / 2.0)
}

fn enemy_centre(e: &Enemy) -> (f64, f64) {
    (e.x + ENEMY_WIDTH / 2.0, e.y + ENEMY_HEIGHT / 2.0)
}

/// Reversed so the max-heap pops the lowest priority.
struct Open(Priority);

impl PartialEq for Open {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Open {}
impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.cmp_key(&self.0)
    }
}

struct Node {
    state: SimState,
    first_action: u8,
}

/// Quantised state used to skip revisits within one search.
type VisitKey = (i32, i32, i32, i32, u8, u32, u32, u64);

fn visit_key(s: &SimState) -> VisitKey {
    let mut alive_mask = 0u64;
    for (i, e) in s.enemies.iter().enumerate().take(64) {
        if e.alive {
            alive_mask |= 1 << i;
        }
    }
    (
        libm::round(s.mario_x * 10.0) as i32,
        libm::round(s.mario_y * 10.0) as i32,
        libm::round(s.vel_x * 20.0) as i32,
        libm::round(s.vel_y * 20.0) as i32,
        (s.on_ground as u8) | ((s.jump_released as u8) << 1),
        s.kills,
        s.coins_remaining.len() as u32,
        alive_mask,
    )
}

fn priority(persona: Persona, target: Target, state: &SimState, level: &Level, index: usize) -> Priority {
    let terms = HeuristicTerms::of(state, level);
    let time = heuristic_cost(Persona::Runner, &terms);
    let persona_cost = match persona {
        Persona::Runner => time,
        other => heuristic_cost(other, &terms),
    };
    Priority {
        persona: persona_cost,
        approach: target.distance(state),
        time,
        index,
    }
}

pub fn plan_action(state: &SimState, level: &Level, config: &AgentConfig) -> Result<(Action, SearchStats), SimError> {
    plan_action_with(state, level, config, &mut NodeBudget)
}

struct Search<'a> {
    level: &'a Level,
    config: &'a AgentConfig,
    target: Target,
    repeat: u32,
    nodes: Vec<Node>,
    open: BinaryHeap<Open>,
    seen: BTreeSet<VisitKey>,
    stats: SearchStats,
    /// Longest-surviving dead node, used only when every line dies.
    last_resort: Option<(u32, usize)>,
}

impl Search<'_> {
    fn expand(&mut self, parent: &SimState, first: Option<u8>) {
        for (i, action) in CANONICAL_ACTIONS.iter().enumerate() {
            let mut child = parent.clone();
            for _ in 0..self.repeat {
                advance(&mut child, self.level, *action, &mut NoEvents);
                if child.is_terminal() {
                    break;
                }
            }
            let first_action = first.unwrap_or(i as u8);
            let index = self.nodes.len();
            if !child.alive {
                self.stats.nodes_total += 1;
                self.stats.nodes_lose += 1;
                if self.last_resort.is_none_or(|(tick, _)| child.tick > tick) {
                    self.last_resort = Some((child.tick, index));
                }
            } else {
                if !self.seen.insert(visit_key(&child)) {
                    continue;
                }
                self.stats.nodes_total += 1;
                self.open.push(Open(priority(self.config.persona, self.target, &child, self.level, index)));
            }
            self.nodes.push(Node {
                state: child,
                first_action,
            });
        }
    }
}

pub fn plan_action_with(
    state: &SimState,
    level: &Level,
    config: &AgentConfig,
    limit: &mut dyn SearchLimit,
) -> Result<(Action, SearchStats), SimError> {
    plan(state, level, config, limit, &[]).map(|(a, s, _)| (a, s))
}

/// One search steering away from `ignored` targets; also returns the target.
pub(crate) fn plan(
    state: &SimState,
    level: &Level,
    config: &AgentConfig,
    limit: &mut dyn SearchLimit,
    ignored: &[Target],
) -> Result<(Action, SearchStats, Target), SimError> {
    if state.is_terminal() {
        return Err(SimError::PlanOnTerminalState);
    }
    let horizon = config.effective_horizon().max(1);
    let mut search = Search {
        level,
        config,
        target: Target::pick(config.persona, state, level, ignored),
        repeat: config.action_repeat.clamp(1, horizon),
        nodes: Vec::new(),
        open: BinaryHeap::new(),
        seen: BTreeSet::new(),
        stats: SearchStats::default(),
        last_resort: None,
    };
    search.seen.insert(visit_key(state));
    search.expand(state, None);
    let mut expansions = 1;
    let chosen = loop {
        let Some(Open(best)) = search.open.pop() else {
            break search.last_resort.map(|(_, i)| i);
        };
        let node = &search.nodes[best.index];
        let goal = node.state.won || node.state.tick - state.tick >= horizon;
        if goal || limit.exhausted(config, expansions) {
            break Some(best.index);
        }
        let parent = node.state.clone();
        let first = node.first_action;
        search.expand(&parent, Some(first));
        expansions += 1;
    };
    let action = chosen.map_or(CANONICAL_ACTIONS[0], |i| CANONICAL_ACTIONS[search.nodes[i].first_action as usize]);
    Ok((action, search.stats, search.target))
}
