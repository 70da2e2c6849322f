use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use levelgen::error::Result;
use levelgen::harness::{behaviour_test, content_analysis, evolve_group, run_experiment, validate_agents, ExperimentConfig};
use levelgen::{io, report};
use levelgen_core::cmaes::{minimize, CmaConfig};
use levelgen_core::level::{render_text, OverlayMark};
use levelgen_core::{decode, MetricId, Persona};

#[derive(Parser)]
#[command(name = "levelgen", version, about = "Persona-driven search-based level generation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// JSON file with ExperimentConfig fields; missing fields take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ConfigArg {
    fn load(&self) -> Result<ExperimentConfig> {
        match &self.config {
            Some(path) => io::read_json(path),
            None => Ok(ExperimentConfig::default()),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one group of levels for a (metric, persona) pair.
    Generate {
        #[arg(long)]
        metric: MetricId,
        #[arg(long)]
        persona: Persona,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Directory receiving the group folder; defaults to the config's output_dir.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Run the whole protocol from a config and write every report.
    Experiment {
        #[command(flatten)]
        config: ConfigArg,
        /// Corpus for agent validation; skipped when absent.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Play every persona on a corpus of level files.
    ValidateAgents {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Play every test persona on generated groups.
    BehaviourTest {
        #[arg(long)]
        groups: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Content statistics of generated groups against their Runner group.
    ContentAnalysis {
        #[arg(long)]
        groups: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decode a latent JSON array into level text.
    Decode {
        #[arg(long)]
        latent: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a level, optionally with event glyphs drawn over it.
    Render {
        #[arg(long)]
        level: PathBuf,
        /// Event CSV (tick,kind,x,y[,row,col]) to overlay.
        #[arg(long)]
        events: Option<PathBuf>,
        /// Play the level with this persona and overlay its events.
        #[arg(long)]
        play: Option<Persona>,
        /// Where to write the played events as CSV.
        #[arg(long, requires = "play")]
        events_out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// CMA-ES on the sphere function.
    CmaesBench {
        #[arg(long, default_value_t = 10)]
        dim: usize,
        #[arg(long, default_value_t = 5000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where to write the convergence CSV.
        #[arg(long)]
        history: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn write_or_print(out: Option<&Path>, name: &str, csv: &str, text: &str) -> Result<()> {
    if let Some(dir) = out {
        io::write_text(&dir.join(name), csv)?;
    }
    print!("{text}");
    Ok(())
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Generate {
            metric,
            persona,
            levels,
            budget,
            seed,
            out,
            config,
        } => {
            let mut config = config.load()?;
            if let Some(n) = levels {
                config.levels_per_group = n;
            }
            if let Some(b) = budget {
                config.budget_per_level = b;
            }
            if let Some(s) = seed {
                config.seed = s;
            }
            config.validate()?;
            let group = evolve_group(metric, persona, &config)?;
            let root = out.unwrap_or_else(|| config.output_dir.clone());
            let dir = report::write_group(&root, &group)?;
            let content = content_analysis(std::slice::from_ref(&group))?;
            print!("{}", report::content_text(&content));
            println!("wrote {}", dir.display());
        }
        Command::Experiment { config, corpus, out } => {
            let config = config.load()?;
            let corpus = corpus.map(|dir| io::read_corpus(&dir)).transpose()?;
            let results = run_experiment(&config, corpus.as_deref())?;
            let dir = out.unwrap_or_else(|| config.output_dir.clone());
            levelgen::emit_reports(&results, &dir)?;
            if let Some(v) = &results.validation {
                print!("{}", report::validation_text(v));
            }
            if let Some(c) = &results.content {
                print!("{}", report::content_text(c));
            }
            if let Some(b) = &results.behaviour {
                print!("{}", report::behaviour_text(b));
            }
            println!("wrote {}", dir.display());
        }
        Command::ValidateAgents { corpus, out, config } => {
            let config = config.load()?;
            let table = validate_agents(&io::read_corpus(&corpus)?, &config)?;
            write_or_print(
                out.as_deref(),
                "validation.csv",
                &report::validation_csv(Some(&table)),
                &report::validation_text(&table),
            )?;
        }
        Command::BehaviourTest { groups, out, config } => {
            let config = config.load()?;
            let groups = report::read_groups(&groups)?;
            let table = behaviour_test(&groups, &config.test_personas, &config)?;
            write_or_print(
                out.as_deref(),
                "behaviour.csv",
                &report::behaviour_csv(Some(&table)),
                &report::behaviour_text(&table),
            )?;
        }
        Command::ContentAnalysis { groups, out } => {
            let groups = report::read_groups(&groups)?;
            let table = content_analysis(&groups)?;
            write_or_print(
                out.as_deref(),
                "content.csv",
                &report::content_table_csv(Some(&table)),
                &report::content_text(&table),
            )?;
        }
        Command::Decode { latent, out } => {
            let level = decode(&io::read_latent(&latent)?, &ExperimentConfig::default().generator);
            match out {
                Some(path) => io::write_level(&path, &level)?,
                None => println!("{}", levelgen_core::serialize_level(&level)),
            }
        }
        Command::Render {
            level,
            events,
            play,
            events_out,
            config,
        } => {
            let config = config.load()?;
            let level = io::read_level(&level)?;
            let mut log = match events {
                Some(path) => io::read_events(&path, Some((level.rows(), level.cols())))?,
                None => Vec::new(),
            };
            if let Some(persona) = play {
                let result = config.play(&level, &config.agent(persona))?;
                if let Some(path) = events_out {
                    io::write_text(&path, &io::events_csv(&result.events))?;
                }
                println!(
                    "{persona}: win={} p={:.3} ticks={} kills={}/{} coins={}/{} jumps={}",
                    result.win,
                    result.p,
                    result.ticks,
                    result.kills,
                    result.n_enemies,
                    result.coins_collected,
                    result.n_coins,
                    result.n_jumps
                );
                log.extend(result.events);
            }
            let overlay: Vec<OverlayMark> = log.iter().map(|e| OverlayMark { cell: e.cell, kind: e.kind }).collect();
            println!("{}", render_text(&level, &overlay)?);
        }
        Command::CmaesBench {
            dim,
            budget,
            seed,
            history,
        } => {
            let config = CmaConfig::new(dim, budget, seed);
            let sphere = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
            let result = minimize(sphere, config)?;
            if let Some(path) = history {
                io::write_text(&path, &io::history_csv(&result.history))?;
            }
            println!(
                "sphere dim={dim} budget={budget} seed={seed}: best={:.3e} generations={} evals={}",
                result.best.fitness,
                result.history.len(),
                result.evals_used
            );
        }
    }
    Ok(())
}
