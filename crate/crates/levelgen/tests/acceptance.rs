//! One line per acceptance criterion, written to stderr so it shows without
//! `--nocapture`. Every criterion runs; the test fails at the end if any did.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use levelgen::harness::{behaviour_test, content_analysis, evolve_group, validate_agents, ExperimentConfig, GroupResult};
use levelgen::io::read_corpus;
use levelgen_core::agents::AgentConfig;
use levelgen_core::cmaes::{minimize, CmaConfig, GenerationRecord};
use levelgen_core::metrics::{
    ability_metric, coefficient_of_variation, event_metric, fail_rate_metric, jump_metric, variance_metric,
};
use levelgen_core::stats::Direction;
use levelgen_core::{
    run_playthrough, wilcoxon_rank_sum, Cell, EventRecord, EventType, Level, Limits, MetricId, Persona,
    PlaythroughResult, SearchStats, TileKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;

type Outcome = Result<String, String>;

fn corpus() -> Vec<(String, Level)> {
    read_corpus(Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/corpus"))).unwrap()
}

fn result(p: f64, n_jumps: u32, fail_rate: f64, events: &[(f64, f64)]) -> PlaythroughResult {
    PlaythroughResult {
        persona: Persona::Runner,
        blind: false,
        p,
        win: p >= 1.0,
        ticks: 100,
        n_jumps,
        events: events
            .iter()
            .map(|&(x, y)| EventRecord {
                kind: EventType::Land,
                x,
                y,
                tick: 1,
                cell: Cell::new(0, 0),
            })
            .collect(),
        kill_rate: 0.0,
        collect_rate: 0.0,
        fail_rate,
        search_stats: SearchStats::default(),
        n_enemies: 0,
        n_coins: 0,
        kills: 0,
        coins_collected: 0,
        enemies_fallen: 0,
    }
}

fn pair(p_perfect: f64, p_blind: f64) -> (PlaythroughResult, PlaythroughResult) {
    let perfect = result(p_perfect, 0, 0.0, &[]);
    let blind = PlaythroughResult { blind: true, ..result(p_blind, 0, 0.0, &[]) };
    (perfect, blind)
}

fn expect(name: &str, got: f64, want: f64) -> Result<(), String> {
    if (got - want).abs() <= TOL {
        Ok(())
    } else {
        Err(format!("{name}: got {got}, want {want}"))
    }
}

fn metric_formulas() -> Outcome {
    let start = Instant::now();
    let at = |n: usize| vec![(3.0, 4.0); n];
    expect("jump p=0.5", jump_metric(&result(0.5, 10, 0.0, &[])).value, -0.5)?;
    expect("jump 7 jumps", jump_metric(&result(1.0, 7, 0.0, &[])).value, -8.0)?;
    expect("jump 0 jumps", jump_metric(&result(1.0, 0, 0.0, &[])).value, -1.0)?;
    expect("event p=0.9", event_metric(&result(0.9, 0, 0.0, &at(50))).value, -0.9)?;
    let mut win_only = result(1.0, 0, 0.0, &at(1));
    win_only.events[0].kind = EventType::Win;
    expect("event win only", event_metric(&win_only).value, -2.0)?;
    expect("event 21", event_metric(&result(1.0, 0, 0.0, &at(21))).value, -22.0)?;
    expect("fail rate 0", fail_rate_metric(&result(1.0, 0, 0.0, &[])).value, -1.0)?;
    expect("fail rate 0.25", fail_rate_metric(&result(1.0, 0, 25.0, &[])).value, -1.25)?;
    expect("fail rate p=0.3", fail_rate_metric(&result(0.3, 0, 90.0, &[])).value, -0.3)?;
    for (pp, pb, want) in [(1.0, 0.5, -1.0), (1.0, 1.0, 0.0), (0.8, 0.9, 0.1)] {
        let (perfect, blind) = pair(pp, pb);
        expect("ability", ability_metric(&perfect, &blind).unwrap().value, want)?;
    }
    let cv = |v: &[f64]| coefficient_of_variation(v).unwrap();
    expect("cv flat", cv(&[5.0, 5.0, 5.0]), 0.0)?;
    expect("cv pair", cv(&[1.0, 3.0]), 0.5)?;
    expect("cv four", cv(&[2.0, 4.0, 6.0, 8.0]), 5f64.sqrt() / 5.0)?;
    expect("variance one point", variance_metric(&result(1.0, 0, 0.0, &at(4))).value, -1.0)?;
    expect("variance p=0.2", variance_metric(&result(0.2, 0, 0.0, &[(1.0, 2.0), (9.0, 5.0)])).value, -0.2)?;
    expect("variance spread", variance_metric(&result(1.0, 0, 0.0, &[(1.0, 2.0), (3.0, 2.0)])).value, -1.5)?;

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..1000 {
        let p = rng.random_range(0.0..1.0);
        let events: Vec<(f64, f64)> = (0..rng.random_range(0..30))
            .map(|_| (rng.random_range(0.0..60.0), rng.random_range(0.0..14.0)))
            .collect();
        let r = result(p, rng.random_range(0..40), rng.random_range(0.0..100.0), &events);
        for (name, score) in [
            ("jump", jump_metric(&r).value),
            ("event", event_metric(&r).value),
            ("fail rate", fail_rate_metric(&r).value),
            ("variance", variance_metric(&r).value),
        ] {
            expect(&format!("{name} gate #{i}"), score, -p)?;
        }
        let (perfect, blind) = pair(p, rng.random_range(0.0..=1.0));
        expect(&format!("ability #{i}"), ability_metric(&perfect, &blind).unwrap().value, blind.p - p)?;
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(1) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok("18 examples exact, gate holds on 1000 random results per metric".into())
}

fn persona_differentiation() -> Outcome {
    let table = validate_agents(&corpus(), &ExperimentConfig::default()).map_err(|e| e.to_string())?;
    let avg = |p| table.average(p).cloned().ok_or(format!("no {p} average"));
    let (r, k, c) = (avg(Persona::Runner)?, avg(Persona::Killer)?, avg(Persona::Collector)?);
    let test = table.killer_vs_runner_kill.ok_or("no kill comparison")?;
    let detail = format!(
        "kill K {:.2} > C {:.2} > R {:.2}; collect C {:.2} vs K {:.2} R {:.2}; time R {:.1} vs K {:.1} C {:.1}; kill p={:.4}",
        k.kill, c.kill, r.kill, c.collect, k.collect, r.collect, r.time, k.time, c.time, test.p_value
    );
    let ok = k.kill > c.kill
        && c.kill > r.kill
        && c.collect > k.collect
        && c.collect > r.collect
        && r.time >= 0.0
        && (k.time < 0.0 || r.time < k.time)
        && (c.time < 0.0 || r.time < c.time)
        && test.p_value < 0.05;
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

struct Groups {
    by_name: BTreeMap<String, GroupResult>,
    config: ExperimentConfig,
}

impl Groups {
    fn get(&self, metric: MetricId, persona: Persona) -> &GroupResult {
        &self.by_name[&format!("{}-{}", metric.name(), persona.name())]
    }
}

fn evolve(config: ExperimentConfig) -> Result<(Groups, Duration), String> {
    let start = Instant::now();
    let mut by_name = BTreeMap::new();
    for (metric, persona) in [
        (MetricId::Event, Persona::Runner),
        (MetricId::Event, Persona::Collector),
        (MetricId::Event, Persona::Killer),
        (MetricId::Ability, Persona::Runner),
    ] {
        let group = evolve_group(metric, persona, &config).map_err(|e| e.to_string())?;
        by_name.insert(group.name(), group);
    }
    Ok((Groups { by_name, config }, start.elapsed()))
}

fn generation_adaptivity(groups: &Groups, elapsed: Duration) -> Outcome {
    let event = [
        groups.get(MetricId::Event, Persona::Runner).clone(),
        groups.get(MetricId::Event, Persona::Collector).clone(),
        groups.get(MetricId::Event, Persona::Killer).clone(),
    ];
    let table = content_analysis(&event).map_err(|e| e.to_string())?;
    let row = |p: Persona| table.rows.iter().find(|r| r.persona == p).expect("row");
    let compare = |p: Persona, column: &str| {
        let own = row(p).column(column);
        let base = row(Persona::Runner).column(column);
        let test = own.test.expect("compared against the runner group");
        let ok = own.mean > base.mean && test.p_value < 0.05 && test.direction == Direction::Greater;
        (ok, format!("{column} {:.2} vs {:.2} p={:.4}", own.mean, base.mean, test.p_value))
    };
    let (coins_ok, coins) = compare(Persona::Collector, "coins");
    let (monsters_ok, monsters) = compare(Persona::Killer, "monsters");
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get()) as u64;
    let allowed = Duration::from_secs(30 * 60 * 8 / cores.min(8));
    let time_ok = elapsed <= allowed;
    let detail = format!("{coins}; {monsters}; generation {elapsed:.0?} of {allowed:.0?} on {cores} cores");
    if coins_ok && monsters_ok && time_ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn behaviour_engagement(groups: &Groups) -> Outcome {
    let start = Instant::now();
    let group = groups.get(MetricId::Event, Persona::Collector).clone();
    let table = behaviour_test(&[group], &Persona::ALL, &groups.config).map_err(|e| e.to_string())?;
    let row = |p: Persona| table.rows.iter().find(|r| r.test_persona == p).expect("row").column("events");
    let collector = row(Persona::Collector).mean;
    let (runner, killer) = (row(Persona::Runner), row(Persona::Killer));
    let p_min = [runner.p_value(), killer.p_value()].into_iter().flatten().fold(1.0, f64::min);
    let elapsed = start.elapsed();
    let detail = format!(
        "events C {collector:.2} vs R {:.2} K {:.2}; best p={p_min:.4}",
        runner.mean, killer.mean
    );
    if collector > runner.mean && collector > killer.mean && p_min < 0.05 && elapsed <= Duration::from_secs(600) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ability_efficacy(groups: &Groups) -> Outcome {
    let runs = &groups.get(MetricId::Ability, Persona::Runner).runs;
    let hits = runs
        .iter()
        .filter(|r| r.score.component("p_perfect") == Some(1.0) && r.score.component("p_blind").is_some_and(|b| b < 1.0))
        .count();
    let detail = format!("{hits}/{} levels take the -1 branch", runs.len());
    if 2 * hits >= runs.len() {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn history_bits(history: &[GenerationRecord]) -> Vec<u64> {
    history
        .iter()
        .flat_map(|g| {
            [g.best, g.generation_best, g.mean, g.worst]
                .map(f64::to_bits)
                .into_iter()
                .chain([g.generation as u64, g.evals as u64])
        })
        .collect()
}

fn cmaes_sanity() -> Outcome {
    let start = Instant::now();
    let sphere = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
    let run = |seed| minimize(sphere, CmaConfig::new(10, 5000, seed)).map_err(|e| e.to_string());
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let m = run(seed)?;
        worst = worst.max(m.best.fitness);
        if m.history.windows(2).any(|w| w[1].best > w[0].best) {
            return Err(format!("seed {seed}: best-so-far rose"));
        }
    }
    if history_bits(&run(7)?.history) != history_bits(&run(7)?.history) {
        return Err("fixed seed history differs".into());
    }
    let elapsed = start.elapsed();
    let detail = format!("worst best {worst:.2e} over 5 seeds, history reproducible");
    if worst < 1e-6 && elapsed < Duration::from_secs(10) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn midranks(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .map(|v| {
            let below = values.iter().filter(|w| *w < v).count() as f64;
            let equal = values.iter().filter(|w| *w == v).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

fn brute_force_p(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    let observed: f64 = ranks[..a.len()].iter().sum();
    let (mut total, mut lower, mut upper) = (0u64, 0u64, 0u64);
    for mask in 0u32..(1 << pooled.len()) {
        if mask.count_ones() as usize != a.len() {
            continue;
        }
        let sum: f64 = (0..pooled.len()).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        total += 1;
        lower += (sum <= observed) as u64;
        upper += (sum >= observed) as u64;
    }
    (2.0 * lower.min(upper) as f64 / total as f64).min(1.0)
}

fn rank_sum_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut cases = 0;
    for n in 1..12 {
        for m in 1..=12 - n {
            for _ in 0..3 {
                let a: Vec<f64> = (0..n).map(|_| rng.random_range(0..6) as f64).collect();
                let b: Vec<f64> = (0..m).map(|_| rng.random_range(0..6) as f64).collect();
                let p = wilcoxon_rank_sum(&a, &b).map_err(|e| e.to_string())?.p_value;
                let want = brute_force_p(&a, &b);
                if (p - want).abs() > TOL {
                    return Err(format!("{a:?} vs {b:?}: {p} vs {want}"));
                }
                cases += 1;
            }
        }
    }
    let p = wilcoxon_rank_sum(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).map_err(|e| e.to_string())?.p_value;
    expect("separated triples", p, 0.1)?;
    Ok(format!("{cases} tied samples match enumeration, triples p={p}"))
}

fn files(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = tmp.path().join("config.json");
    std::fs::write(&config, r#"{"levels_per_group": 3, "budget_per_level": 84, "seed": 5}"#).unwrap();
    let generate = |out: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_levelgen"))
            .args(["generate", "--metric", "event", "--persona", "killer", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(tmp.path().join(out))
            .output()
            .map_err(|e| e.to_string())?;
        if status.status.success() {
            Ok(files(&tmp.path().join(out)))
        } else {
            Err(String::from_utf8_lossy(&status.stderr).into_owned())
        }
    };
    let (a, b) = (generate("a")?, generate("b")?);
    if a.is_empty() || a != b {
        return Err(format!("{} vs {} files, contents differ", a.len(), b.len()));
    }
    Ok(format!("{} files byte-identical across two runs", a.len()))
}

fn accounting(level: &Level, r: &PlaythroughResult) -> Result<(), String> {
    let count = |k| r.count(k) as u32;
    let removed_coins = level.count(TileKind::Coin) as u32 - (r.n_coins - r.coins_collected);
    let removed_enemies = r.kills + r.enemies_fallen;
    if count(EventType::Jump) != r.n_jumps {
        return Err(format!("jumps {} vs n_jumps {}", count(EventType::Jump), r.n_jumps));
    }
    if count(EventType::Collect) != removed_coins {
        return Err(format!("collects {} vs removed coins {removed_coins}", count(EventType::Collect)));
    }
    if count(EventType::Stomp) + count(EventType::Fall) != removed_enemies || removed_enemies > r.n_enemies {
        return Err(format!("stomps and falls {} vs removed enemies {removed_enemies}", count(EventType::Stomp) + count(EventType::Fall)));
    }
    Ok(())
}

fn event_accounting() -> Outcome {
    let mut plays = 0;
    for (name, level) in corpus() {
        for persona in Persona::ALL {
            for blind in [false, true] {
                let agent = AgentConfig { blind, ..AgentConfig::new(persona) };
                let r = run_playthrough(&level, &agent, Limits::default()).map_err(|e| e.to_string())?;
                accounting(&level, &r).map_err(|e| format!("{name} {persona} blind={blind}: {e}"))?;
                plays += 1;
            }
        }
    }
    Ok(format!("{plays} corpus playthroughs balance"))
}

#[test]
fn acceptance_criteria() {
    let mut failed = Vec::new();
    let mut report = |n: usize, name: &str, run: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = run();
        let (status, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        let line = format!("criterion {n} {name}: {status} {detail} ({:.1?})", start.elapsed());
        writeln!(std::io::stderr(), "{line}").unwrap();
        if outcome.is_err() {
            failed.push(line);
        }
    };

    report(1, "metric formulas", &mut metric_formulas);
    report(2, "persona differentiation", &mut persona_differentiation);
    let config = ExperimentConfig {
        levels_per_group: 30,
        budget_per_level: 1000,
        ..ExperimentConfig::default()
    };
    match evolve(config) {
        Ok((groups, elapsed)) => {
            report(3, "generation adaptivity", &mut || generation_adaptivity(&groups, elapsed));
            report(4, "behaviour engagement", &mut || behaviour_engagement(&groups));
            report(5, "ability efficacy", &mut || ability_efficacy(&groups));
        }
        Err(e) => {
            for (n, name) in [(3, "generation adaptivity"), (4, "behaviour engagement"), (5, "ability efficacy")] {
                report(n, name, &mut || Err(e.clone()));
            }
        }
    }
    report(6, "cmaes sanity", &mut cmaes_sanity);
    report(7, "rank-sum oracle", &mut rank_sum_oracle);
    report(8, "determinism", &mut determinism);
    report(9, "event accounting", &mut event_accounting);

    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
}
