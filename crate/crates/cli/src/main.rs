use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use kgshape::agent::Agent;
use kgshape::game::GameMode;
use kgshape::harness::{self, Loaded, RunConfig};

#[derive(Parser)]
#[command(name = "kgshape", about = "Story-shaped reinforcement learning for text games")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train an agent, evaluate it greedily, and write a checkpoint.
    Train {
        /// Shipped config id (e.g. `905_shaped`) or a TOML path.
        #[arg(long)]
        config: String,
        /// Override the game (id or path).
        #[arg(long)]
        game: Option<String>,
        /// Override the story (id or path); `none` disables shaping.
        #[arg(long)]
        story: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, default_value = "checkpoint.json")]
        out: PathBuf,
        /// Metrics CSV for the evaluation.
        #[arg(long)]
        metrics: Option<PathBuf>,
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Evaluate a checkpoint with greedy decoding.
    Eval {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        config: String,
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(long, default_value = "test")]
        mode: GameMode,
        #[arg(long)]
        metrics: Option<PathBuf>,
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Difference (second minus first) between two metrics CSVs.
    Compare { a: PathBuf, b: PathBuf },
    /// Print the story graph of a story.
    Story { story: String },
}

fn print_row(r: &harness::MetricsRow) {
    println!(
        "{} [{}{}]: win {:.0}%  steps {:.1}  CS avg {:.2} max {:.0}  score avg {:.2} max {:.0}",
        r.run,
        r.game,
        if r.persona.is_empty() { String::new() } else { format!(", {}", r.persona) },
        r.win_rate,
        r.avg_steps,
        r.avg_cs,
        r.max_cs,
        r.avg_game_score,
        r.max_game_score
    );
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Train {
            config,
            game,
            story,
            seed,
            dim,
            lr,
            steps,
            out,
            metrics,
            transcript,
        } => {
            let mut cfg = RunConfig::resolve(&config).with_context(|| format!("loading config {config}"))?;
            if let Some(g) = game {
                cfg.game = g;
            }
            if let Some(s) = story {
                cfg.story = (s != "none").then_some(s);
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(d) = dim {
                cfg.hyper.dim = d;
            }
            if let Some(l) = lr {
                cfg.hyper.lr = l;
            }
            if let Some(s) = steps {
                cfg.train_steps = s;
            }
            let start = Instant::now();
            let mut last = 0;
            let res = harness::run(&cfg, |log| {
                if log.env_steps / 2000 > last {
                    last = log.env_steps / 2000;
                    let tail = &log.episodes[log.episodes.len().saturating_sub(50)..];
                    let n = tail.len().max(1) as f64;
                    eprintln!(
                        "{:>7} steps  {:>5} episodes  win {:.2}  return {:.2}  story {:.2}  entropy {:.2}  {:.0}s",
                        log.env_steps,
                        log.episodes.len(),
                        log.recent_win_rate(50),
                        tail.iter().map(|e| e.shaped_return).sum::<f64>() / n,
                        tail.iter().map(|e| e.story_matches as f64).sum::<f64>() / n,
                        log.losses.last().map_or(0.0, |l| l.entropy),
                        start.elapsed().as_secs_f64()
                    );
                }
            })?;
            res.agent.save(&out)?;
            print_row(&res.metrics);
            if let Some(p) = metrics {
                harness::write_csv(p, &[res.metrics])?;
            }
            if let Some(p) = transcript {
                harness::write_jsonl(p, &res.episodes)?;
            }
        }
        Cmd::Eval {
            ckpt,
            config,
            seeds,
            mode,
            metrics,
            transcript,
        } => {
            let cfg = RunConfig::resolve(&config)?;
            let loaded = Loaded::from_config(&cfg)?;
            let mut agent = Agent::load(&ckpt).with_context(|| format!("loading {}", ckpt.display()))?;
            let episodes = harness::evaluate(&mut agent, &loaded.eval_setup(&cfg, mode), 0..seeds)?;
            let row = harness::summarize(&cfg.name, &loaded.spec.game.id, loaded.persona.as_deref(), &episodes);
            print_row(&row);
            if let Some(p) = metrics {
                harness::write_csv(p, &[row])?;
            }
            if let Some(p) = transcript {
                harness::write_jsonl(p, &episodes)?;
            }
        }
        Cmd::Compare { a, b } => {
            let deltas = harness::compare(&harness::read_csv(a)?, &harness::read_csv(b)?)?;
            for d in deltas {
                println!(
                    "{}: win {:+.1}  steps {:+.2}  CS avg {:+.2} max {:+.0}  score avg {:+.2} max {:+.0}",
                    if d.persona.is_empty() { "-" } else { &d.persona },
                    d.win_rate,
                    d.avg_steps,
                    d.avg_cs,
                    d.max_cs,
                    d.avg_game_score,
                    d.max_game_score
                );
            }
        }
        Cmd::Story { story } => {
            let doc = kgshape::story::resolve_story(&story)?;
            let g = kgshape::story::story_to_kg(&doc, &kgshape::story::FrameLexicon::builtin())?;
            print!("{}", g.to_tsv());
        }
    }
    Ok(())
}
