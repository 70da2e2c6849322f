use levelgen_core::sim::{advance, initial_state, NoEvents, SimState};
use levelgen_core::{run_playthrough, Action, AgentConfig, EventType, Level, Limits, Persona, TileKind};

/// Ticks to reach the last column holding right+run from rest, by plain kinematics.
fn flat_dash_ticks(cols: usize) -> u32 {
    let (mut x, mut v, mut t) = ((1.0 - 0.8) / 2.0, 0.0f64, 0);
    while x < cols as f64 - 1.0 {
        v = (v + 0.09).min(0.75);
        x += v;
        t += 1;
    }
    t
}

#[test]
fn runner_dashes_flat_ground_optimally() {
    for cols in [10, 28, 47, 60] {
        let level = Level::flat(14, cols, 2).unwrap();
        let r = run_playthrough(&level, &AgentConfig::new(Persona::Runner), Limits::default()).unwrap();
        assert!(r.win);
        assert_eq!(r.ticks, flat_dash_ticks(cols), "cols {cols}");
    }
}

const ACTIONS: [Action; 6] = [
    Action::new(false, true, false, true),
    Action::new(false, true, true, true),
    Action::new(false, true, false, false),
    Action::new(false, false, false, false),
    Action::new(true, false, false, false),
    Action::new(false, false, true, false),
];

/// Earliest tick of a stomp over every action sequence of `depth` decisions
/// held for two ticks each.
fn earliest_stomp(state: &SimState, level: &Level, depth: usize) -> Option<u32> {
    if depth == 0 || state.is_terminal() {
        return None;
    }
    let mut best: Option<u32> = None;
    for a in ACTIONS {
        let mut s = state.clone();
        for _ in 0..2 {
            advance(&mut s, level, a, &mut NoEvents);
            if s.kills > 0 {
                return Some(best.map_or(s.tick, |b| b.min(s.tick)));
            }
            if s.is_terminal() {
                break;
            }
        }
        if s.kills > 0 {
            best = Some(best.map_or(s.tick, |b| b.min(s.tick)));
        } else if let Some(t) = earliest_stomp(&s, level, depth - 1) {
            best = Some(best.map_or(t, |b| b.min(t)));
        }
    }
    best
}

#[test]
fn killer_stomps_lone_enemies_others_do_not() {
    let mut stomped = 0;
    let cols = 3..16;
    for col in cols.clone() {
        let level = Level::flat(14, 30, 2).unwrap().with_tile(11, col, TileKind::Enemy);
        let play = |p| run_playthrough(&level, &AgentConfig::new(p), Limits::default()).unwrap();
        let killer = play(Persona::Killer);
        assert!(killer.win);
        if let Some(stomp) = killer.events.iter().find(|e| e.kind == EventType::Stomp) {
            stomped += 1;
            let depth = (stomp.tick as usize).div_ceil(2);
            let oracle = earliest_stomp(&initial_state(&level).unwrap(), &level, depth.min(8));
            if let Some(t) = oracle {
                assert!(stomp.tick >= t, "enemy at {col}: stomp at {} before the earliest possible {t}", stomp.tick);
            }
        }
        assert_eq!(play(Persona::Runner).kills, 0, "enemy at {col}");
        assert_eq!(play(Persona::Collector).kills, 0, "enemy at {col}");
    }
    assert!(2 * stomped >= cols.len(), "killer stomped {stomped} of {}", cols.len());
}

#[test]
fn brute_force_finds_the_head_on_stomp() {
    let level = Level::flat(14, 30, 2).unwrap().with_tile(11, 5, TileKind::Enemy);
    assert!(earliest_stomp(&initial_state(&level).unwrap(), &level, 7).is_some());
    let empty = Level::flat(14, 30, 2).unwrap();
    assert_eq!(earliest_stomp(&initial_state(&empty).unwrap(), &empty, 4), None);
}
