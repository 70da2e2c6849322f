//! Experiment protocol: agent validation, group generation, content
//! analysis and cross-persona behaviour tests.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use levelgen_core::agents::{SearchLimit, DEFAULT_ACTION_REPEAT, DEFAULT_HORIZON_TICKS, DEFAULT_NODE_BUDGET};
use levelgen_core::cmaes::{CmaConfig, CmaState, GenerationRecord};
use levelgen_core::genspace::{clamp, GeneratorSpec, LevelGenerator, LATENT_DIM};
use levelgen_core::sim::{run_playthrough_with, DEFAULT_MAX_TICKS};
use levelgen_core::stats::{self, wilcoxon_rank_sum};
use levelgen_core::{
    content_stats, evaluate_with, AgentConfig, Evaluation, LatentVector, Level, Limits, MetricId, MetricScore, Persona,
    PlaythroughResult, RankSumResult,
};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Planner settings shared by every agent in an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchSettings {
    pub node_budget: usize,
    pub horizon_ticks: u32,
    pub action_repeat: u32,
    /// Per-decision wall-clock limit; replaces the node budget when set.
    pub wall_clock_ms: Option<u64>,
}

impl Default for SearchSettings {
    fn default() -> Self {
        SearchSettings {
            node_budget: DEFAULT_NODE_BUDGET,
            horizon_ticks: DEFAULT_HORIZON_TICKS,
            action_repeat: DEFAULT_ACTION_REPEAT,
            wall_clock_ms: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub metrics: Vec<MetricId>,
    pub eval_personas: Vec<Persona>,
    pub levels_per_group: usize,
    /// Simulations per CMA-ES run for one-simulation metrics; Ability runs
    /// get twice as many so the candidate count matches.
    pub budget_per_level: usize,
    /// Plays per (level, persona); only differs from one play in wall-clock mode.
    pub repetitions: usize,
    pub test_personas: Vec<Persona>,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub search: SearchSettings,
    pub max_ticks: u32,
    pub sigma0: f64,
    /// Population size; the CMA-ES default for the latent dimension when absent.
    pub lambda: Option<usize>,
    pub generator: GeneratorSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            metrics: MetricId::ALL.to_vec(),
            eval_personas: Persona::ALL.to_vec(),
            levels_per_group: 30,
            budget_per_level: 1000,
            repetitions: 5,
            test_personas: Persona::ALL.to_vec(),
            seed: 0,
            output_dir: PathBuf::from("results"),
            search: SearchSettings::default(),
            max_ticks: DEFAULT_MAX_TICKS,
            sigma0: 0.5,
            lambda: None,
            generator: GeneratorSpec::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn lambda(&self) -> usize {
        self.lambda.unwrap_or_else(|| CmaConfig::default_lambda(LATENT_DIM))
    }

    /// Simulation budget of one run optimising `metric`.
    pub fn budget_for(&self, metric: MetricId) -> usize {
        self.budget_per_level * metric.simulations()
    }

    pub fn agent(&self, persona: Persona) -> AgentConfig {
        AgentConfig {
            persona,
            blind: false,
            node_budget: self.search.node_budget,
            horizon_ticks: self.search.horizon_ticks,
            action_repeat: self.search.action_repeat,
        }
    }

    pub fn limits(&self) -> Limits {
        Limits { max_ticks: self.max_ticks }
    }

    pub fn deterministic(&self) -> bool {
        self.search.wall_clock_ms.is_none()
    }

    /// Plays actually run per (level, persona).
    pub fn plays(&self) -> usize {
        if self.deterministic() {
            1
        } else {
            self.repetitions.max(1)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.levels_per_group == 0 {
            return bad("levels_per_group must be at least 1");
        }
        if self.budget_per_level < self.lambda() {
            return bad("budget_per_level must cover one generation of lambda candidates");
        }
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1");
        }
        if self.max_ticks == 0 {
            return bad("max_ticks must be positive");
        }
        if self.generator.rows < 2 || self.generator.cols < 4 * self.generator.zone_count.min(7) {
            return bad("generator grid too small for its zones");
        }
        self.agent(Persona::Runner).validate().map_err(|m| Error::Config(m.to_string()))?;
        CmaConfig {
            dim: LATENT_DIM,
            lambda: self.lambda(),
            sigma0: self.sigma0,
            budget: self.budget_per_level,
            cost_per_eval: 1,
            seed: 0,
            initial_mean: None,
        }
        .validate()?;
        Ok(())
    }

    fn search_limit(&self) -> Box<dyn SearchLimit> {
        match self.search.wall_clock_ms {
            Some(ms) => Box::new(WallClock::new(Duration::from_millis(ms))),
            None => Box::new(levelgen_core::agents::NodeBudget),
        }
    }

    pub fn play(&self, level: &Level, agent: &AgentConfig) -> Result<PlaythroughResult> {
        Ok(run_playthrough_with(level, agent, self.limits(), self.search_limit().as_mut())?)
    }

    pub fn evaluate(&self, metric: MetricId, level: &Level, persona: Persona) -> Result<Evaluation> {
        Ok(evaluate_with(metric, level, &self.agent(persona), self.limits(), self.search_limit().as_mut())?)
    }
}

/// Search limit that stops each decision after a fixed wall-clock time.
pub struct WallClock {
    budget: Duration,
    started: Instant,
}

impl WallClock {
    pub fn new(budget: Duration) -> Self {
        WallClock {
            budget,
            started: Instant::now(),
        }
    }
}

impl SearchLimit for WallClock {
    fn exhausted(&mut self, _config: &AgentConfig, expansions: usize) -> bool {
        // The planner asks first after the root expansion.
        if expansions <= 1 {
            self.started = Instant::now();
        }
        self.started.elapsed() >= self.budget
    }
}

/// Seed of run `run` in group (`metric`, `persona`); independent of the
/// order groups are listed in.
pub fn run_seed(seed: u64, metric: MetricId, persona: Persona, run: usize) -> u64 {
    let group = metric as u64 * Persona::ALL.len() as u64 + persona as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(group << 32 | run as u64);
    rng.next_u64()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub run: usize,
    pub seed: u64,
    pub latent: LatentVector,
    #[serde(with = "crate::io::level_text")]
    pub level: Level,
    pub score: MetricScore,
    pub history: Vec<GenerationRecord>,
    /// Simulations charged against the budget.
    pub simulations: usize,
    pub candidates: usize,
    /// Candidates that decoded to a level not seen before in this run.
    pub distinct_levels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupResult {
    pub metric: MetricId,
    pub eval_persona: Persona,
    pub runs: Vec<RunResult>,
}

impl GroupResult {
    pub fn name(&self) -> String {
        group_name(self.metric, self.eval_persona)
    }

    pub fn levels(&self) -> impl Iterator<Item = &Level> {
        self.runs.iter().map(|r| &r.level)
    }
}

pub fn group_name(metric: MetricId, persona: Persona) -> String {
    format!("{}-{}", metric.name(), persona.name())
}

/// One CMA-ES run: seeded start, clamped decoding, fitness memoised by
/// decoded level. Cached fitnesses still count against the budget.
pub fn evolve_run(metric: MetricId, persona: Persona, run: usize, config: &ExperimentConfig) -> Result<RunResult> {
    let seed = run_seed(config.seed, metric, persona, run);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let initial_mean: Vec<f64> = (0..LATENT_DIM).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let cma = CmaConfig {
        dim: LATENT_DIM,
        lambda: config.lambda(),
        sigma0: config.sigma0,
        budget: config.budget_for(metric),
        cost_per_eval: metric.simulations(),
        seed: rng.next_u64(),
        initial_mean: Some(initial_mean),
    };
    let mut state = CmaState::new(cma)?;
    let mut cache: HashMap<Level, MetricScore> = HashMap::new();
    let mut history = Vec::new();
    let mut candidates_seen = 0;

    while state.remaining_candidates() > 0 {
        let full = state.remaining_candidates() >= state.config().lambda;
        let candidates = if full { state.ask()? } else { state.ask_remainder() };
        let levels: Vec<Level> = candidates
            .iter()
            .map(|c| clamp(c).map(|z| config.generator.decode(&z)))
            .collect::<Result<_, _>>()?;
        let mut fresh = HashSet::new();
        let todo: Vec<&Level> = levels.iter().filter(|l| !cache.contains_key(*l) && fresh.insert(*l)).collect();
        let scored: Vec<(Level, MetricScore)> = todo
            .into_par_iter()
            .map(|l| Ok((l.clone(), config.evaluate(metric, l, persona)?.score)))
            .collect::<Result<_>>()?;
        cache.extend(scored);
        let fitnesses: Vec<f64> = levels.iter().map(|l| cache[l].value).collect();
        candidates_seen += candidates.len();
        let record = if full {
            state.tell(&candidates, &fitnesses)?
        } else {
            state.observe(&candidates, &fitnesses)?
        };
        history.push(record);
    }

    let best = state.best().expect("budget covers a generation");
    let latent = clamp(&best.x)?;
    let level = config.generator.decode(&latent);
    let score = cache[&level].clone();
    Ok(RunResult {
        run,
        seed,
        latent,
        level,
        score,
        history,
        simulations: state.evals_used(),
        candidates: candidates_seen,
        distinct_levels: cache.len(),
    })
}

/// `levels_per_group` independent runs, evaluated in parallel.
pub fn evolve_group(metric: MetricId, persona: Persona, config: &ExperimentConfig) -> Result<GroupResult> {
    config.validate()?;
    let runs = (0..config.levels_per_group)
        .into_par_iter()
        .map(|run| evolve_run(metric, persona, run, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(GroupResult {
        metric,
        eval_persona: persona,
        runs,
    })
}

/// Mean, population deviation and an optional comparison against a
/// reference sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
    pub test: Option<RankSumResult>,
}

impl Column {
    fn of(values: &[f64], reference: Option<&[f64]>) -> Result<Column> {
        let test = match reference {
            Some(r) if !values.is_empty() && !r.is_empty() => Some(wilcoxon_rank_sum(values, r)?),
            _ => None,
        };
        Ok(Column {
            mean: stats::mean(values),
            std: stats::std_dev(values),
            n: values.len(),
            test,
        })
    }

    pub fn mark(&self) -> &'static str {
        self.test.as_ref().map_or("", |t| t.mark())
    }

    pub fn p_value(&self) -> Option<f64> {
        self.test.as_ref().map(|t| t.p_value)
    }
}

pub const CONTENT_COLUMNS: [&str; 4] = ["monsters", "coins", "gaps", "max_gap_width"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContentRow {
    pub metric: MetricId,
    pub persona: Persona,
    pub levels: usize,
    /// Levels with no enemies, coins or gaps at all.
    pub degenerate: usize,
    pub columns: BTreeMap<String, Column>,
    pub samples: BTreeMap<String, Vec<f64>>,
}

impl ContentRow {
    pub fn column(&self, name: &str) -> &Column {
        &self.columns[name]
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ContentTable {
    pub rows: Vec<ContentRow>,
}

fn content_samples(group: &GroupResult) -> BTreeMap<String, Vec<f64>> {
    let mut samples: BTreeMap<String, Vec<f64>> = CONTENT_COLUMNS.iter().map(|c| (c.to_string(), Vec::new())).collect();
    for level in group.levels() {
        let s = content_stats(level);
        let values = [s.n_monsters, s.n_coins, s.n_gaps, s.max_gap_width];
        for (name, v) in CONTENT_COLUMNS.iter().zip(values) {
            samples.get_mut(*name).expect("column").push(v as f64);
        }
    }
    samples
}

/// Content statistics per group, marked against the Runner group of the
/// same metric.
pub fn content_analysis(groups: &[GroupResult]) -> Result<ContentTable> {
    if let Some(g) = groups.iter().find(|g| g.runs.is_empty()) {
        return Err(Error::EmptyGroup(g.name()));
    }
    let samples: Vec<_> = groups.iter().map(content_samples).collect();
    let mut rows = Vec::new();
    for (group, own) in groups.iter().zip(&samples) {
        let reference = groups
            .iter()
            .position(|g| g.metric == group.metric && g.eval_persona == Persona::Runner)
            .filter(|_| group.eval_persona != Persona::Runner)
            .map(|i| &samples[i]);
        let columns = CONTENT_COLUMNS
            .iter()
            .map(|c| Ok((c.to_string(), Column::of(&own[*c], reference.map(|r| r[*c].as_slice()))?)))
            .collect::<Result<_>>()?;
        let degenerate = group
            .levels()
            .filter(|l| {
                let s = content_stats(l);
                s.n_monsters == 0 && s.n_coins == 0 && s.n_gaps == 0
            })
            .count();
        rows.push(ContentRow {
            metric: group.metric,
            persona: group.eval_persona,
            levels: group.runs.len(),
            degenerate,
            columns,
            samples: own.clone(),
        });
    }
    Ok(ContentTable { rows })
}

pub const BEHAVIOUR_COLUMNS: [&str; 8] = [
    "kill",
    "collect",
    "fail_rate",
    "time",
    "jumps",
    "event_types",
    "events",
    "completion",
];

/// Per-level measurements of one persona, averaged over its plays. Time is
/// absent when no play completed the level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelMeasures {
    pub kill: f64,
    pub collect: f64,
    pub fail_rate: f64,
    pub time: Option<f64>,
    pub jumps: f64,
    pub event_types: f64,
    pub events: f64,
    pub completion: f64,
}

impl LevelMeasures {
    pub fn of(plays: &[PlaythroughResult]) -> LevelMeasures {
        let avg = |f: &dyn Fn(&PlaythroughResult) -> f64| plays.iter().map(f).sum::<f64>() / plays.len() as f64;
        let times: Vec<f64> = plays.iter().filter(|r| r.win).map(|r| r.completion_seconds() as f64).collect();
        LevelMeasures {
            kill: avg(&|r| r.kill_rate),
            collect: avg(&|r| r.collect_rate),
            fail_rate: avg(&|r| r.fail_rate),
            time: (!times.is_empty()).then(|| stats::mean(&times)),
            jumps: avg(&|r| r.n_jumps as f64),
            event_types: avg(&|r| r.event_types() as f64),
            events: avg(&|r| r.events.len() as f64),
            completion: avg(&|r| r.p),
        }
    }

    pub fn get(&self, column: &str) -> Option<f64> {
        match column {
            "kill" => Some(self.kill),
            "collect" => Some(self.collect),
            "fail_rate" => Some(self.fail_rate),
            "time" => self.time,
            "jumps" => Some(self.jumps),
            "event_types" => Some(self.event_types),
            "events" => Some(self.events),
            "completion" => Some(self.completion),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviourRow {
    pub metric: MetricId,
    pub eval_persona: Persona,
    pub test_persona: Persona,
    /// Test persona equals the evaluation persona; other rows are marked
    /// against this one.
    pub baseline: bool,
    pub columns: BTreeMap<String, Column>,
    pub levels: Vec<LevelMeasures>,
}

impl BehaviourRow {
    pub fn column(&self, name: &str) -> &Column {
        &self.columns[name]
    }

    fn samples(levels: &[LevelMeasures], column: &str) -> Vec<f64> {
        levels.iter().filter_map(|m| m.get(column)).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BehaviourTable {
    pub rows: Vec<BehaviourRow>,
}

/// Test personas in order, with the evaluation persona added when missing.
fn personas_for(group: &GroupResult, test_personas: &[Persona]) -> Vec<Persona> {
    let mut out: Vec<Persona> = Vec::new();
    for &p in test_personas {
        if !out.contains(&p) {
            out.push(p);
        }
    }
    if !out.contains(&group.eval_persona) {
        out.push(group.eval_persona);
    }
    out
}

/// Every test persona plays every level of every group.
pub fn behaviour_test(groups: &[GroupResult], test_personas: &[Persona], config: &ExperimentConfig) -> Result<BehaviourTable> {
    let mut rows = Vec::new();
    for group in groups {
        if group.runs.is_empty() {
            return Err(Error::EmptyGroup(group.name()));
        }
        let personas = personas_for(group, test_personas);
        let mut measured = Vec::new();
        for &persona in &personas {
            let agent = config.agent(persona);
            let levels: Vec<LevelMeasures> = group
                .runs
                .par_iter()
                .map(|run| {
                    let plays = (0..config.plays()).map(|_| config.play(&run.level, &agent)).collect::<Result<Vec<_>>>()?;
                    Ok(LevelMeasures::of(&plays))
                })
                .collect::<Result<_>>()?;
            measured.push((persona, levels));
        }
        let baseline = measured
            .iter()
            .find(|(p, _)| *p == group.eval_persona)
            .map(|(_, l)| l.clone())
            .expect("baseline persona is always played");
        for (persona, levels) in measured {
            let is_baseline = persona == group.eval_persona;
            let columns = BEHAVIOUR_COLUMNS
                .iter()
                .map(|c| {
                    let own = BehaviourRow::samples(&levels, c);
                    let reference = (!is_baseline).then(|| BehaviourRow::samples(&baseline, c));
                    Ok((c.to_string(), Column::of(&own, reference.as_deref())?))
                })
                .collect::<Result<_>>()?;
            rows.push(BehaviourRow {
                metric: group.metric,
                eval_persona: group.eval_persona,
                test_persona: persona,
                baseline: is_baseline,
                columns,
                levels,
            });
        }
    }
    Ok(BehaviourTable { rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub level: String,
    pub persona: Persona,
    pub completion: f64,
    pub kill: f64,
    pub collect: f64,
    /// Mean completion seconds over completed plays; -1 when none completed.
    pub time: f64,
    pub plays: usize,
    /// All plays produced the same result.
    pub identical: bool,
    pub vacuous_kill: bool,
    pub vacuous_collect: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationSummary {
    pub persona: Persona,
    pub completion: f64,
    pub kill: f64,
    pub collect: f64,
    /// Mean over completed levels; -1 when none completed.
    pub time: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationTable {
    pub rows: Vec<ValidationRow>,
    pub averages: Vec<ValidationSummary>,
    /// Killer against Runner per-level kill ratios.
    pub killer_vs_runner_kill: Option<RankSumResult>,
    pub notes: Vec<String>,
}

impl ValidationTable {
    pub fn average(&self, persona: Persona) -> Option<&ValidationSummary> {
        self.averages.iter().find(|a| a.persona == persona)
    }

    pub fn per_level(&self, persona: Persona, pick: impl Fn(&ValidationRow) -> f64) -> Vec<f64> {
        self.rows.iter().filter(|r| r.persona == persona).map(pick).collect()
    }
}

/// Each persona plays each corpus level `repetitions` times.
pub fn validate_agents(corpus: &[(String, Level)], config: &ExperimentConfig) -> Result<ValidationTable> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus(PathBuf::new()));
    }
    let reps = config.repetitions.max(1);
    let jobs: Vec<(usize, Persona)> = (0..corpus.len()).flat_map(|i| Persona::ALL.map(|p| (i, p))).collect();
    let rows: Vec<ValidationRow> = jobs
        .par_iter()
        .map(|&(i, persona)| {
            let (name, level) = &corpus[i];
            let agent = config.agent(persona);
            // Deterministic agents repeat exactly, so one play stands for all.
            let plays = if config.deterministic() {
                let one = config.play(level, &agent)?;
                vec![one; reps]
            } else {
                (0..reps).map(|_| config.play(level, &agent)).collect::<Result<Vec<_>>>()?
            };
            let identical = plays.windows(2).all(|w| w[0] == w[1]);
            let m = LevelMeasures::of(&plays);
            Ok(ValidationRow {
                level: name.clone(),
                persona,
                completion: m.completion,
                kill: m.kill,
                collect: m.collect,
                time: m.time.unwrap_or(-1.0),
                plays: reps,
                identical,
                vacuous_kill: plays[0].n_enemies == 0,
                vacuous_collect: plays[0].n_coins == 0,
            })
        })
        .collect::<Result<_>>()?;

    let averages = Persona::ALL
        .iter()
        .map(|&persona| {
            let mine: Vec<&ValidationRow> = rows.iter().filter(|r| r.persona == persona).collect();
            let avg = |f: &dyn Fn(&ValidationRow) -> f64| stats::mean(&mine.iter().map(|r| f(r)).collect::<Vec<_>>());
            let times: Vec<f64> = mine.iter().filter(|r| r.time >= 0.0).map(|r| r.time).collect();
            ValidationSummary {
                persona,
                completion: avg(&|r| r.completion),
                kill: avg(&|r| r.kill),
                collect: avg(&|r| r.collect),
                time: if times.is_empty() { -1.0 } else { stats::mean(&times) },
            }
        })
        .collect();

    let kills = |p: Persona| rows.iter().filter(|r| r.persona == p).map(|r| r.kill).collect::<Vec<_>>();
    let killer_vs_runner_kill = Some(wilcoxon_rank_sum(&kills(Persona::Killer), &kills(Persona::Runner))?);

    let mut notes = Vec::new();
    if config.deterministic() && reps > 1 {
        notes.push(format!("deterministic agents: {reps} identical plays collapsed to one per row"));
    }
    for (name, _) in corpus {
        if rows.iter().any(|r| &r.level == name && r.vacuous_kill) {
            notes.push(format!("{name}: no enemies, kill ratio reported as 1"));
        }
        if rows.iter().any(|r| &r.level == name && r.vacuous_collect) {
            notes.push(format!("{name}: no coins, collect ratio reported as 1"));
        }
    }
    Ok(ValidationTable {
        rows,
        averages,
        killer_vs_runner_kill,
        notes,
    })
}

/// Everything one experiment produces.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResults {
    pub validation: Option<ValidationTable>,
    pub groups: Vec<GroupResult>,
    pub content: Option<ContentTable>,
    pub behaviour: Option<BehaviourTable>,
}

/// The full protocol: optional validation, one group per (metric, eval
/// persona), content analysis and behaviour tests.
pub fn run_experiment(config: &ExperimentConfig, corpus: Option<&[(String, Level)]>) -> Result<ExperimentResults> {
    config.validate()?;
    let validation = corpus.map(|c| validate_agents(c, config)).transpose()?;
    let mut groups = Vec::new();
    for &metric in &config.metrics {
        for &persona in &config.eval_personas {
            groups.push(evolve_group(metric, persona, config)?);
        }
    }
    let content = Some(content_analysis(&groups)?);
    let behaviour = Some(behaviour_test(&groups, &config.test_personas, config)?);
    Ok(ExperimentResults {
        validation,
        groups,
        content,
        behaviour,
    })
}
