//! The `evaluate`, `train`, `generate` and `report` verbs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use harvest_core::baselines::{run_episode, ModPolicy, NolModel, NolPolicy, Policy, PprPolicy, RandomPolicy};
use harvest_core::embeddings::{rank, Algorithm, EmbedConfig};
use harvest_core::generators::{load_edgelist, presets, BackgroundSpec, InstanceSpec, TargetSpec};
use harvest_core::metrics::{accuracy_index, boundary_entropy};
use harvest_core::{seeds, EpisodeConfig, Error, GroundTruth, ObservedState, Result, TraceRecord};
use harvest_nac::{evaluate_online, train_offline, Checkpoint, EpochLog, TrainOutcome};
use serde::Serialize;

use crate::config::{AgentKind, Config, EMBED_GRID};
use crate::output::{
    aggregate, files_with_extension, read_csv, reset_dir, write_csv, write_text, AggregateRow, Manifest, RunRecord,
    StepRow,
};

/// Seed streams of the evaluation protocol, kept apart from the training
/// streams so evaluation instances are held out.
pub mod streams {
    pub const INSTANCE: u64 = 0x10;
    pub const EPISODE: u64 = 0x11;
    pub const AGENT: u64 = 0x12;
    pub const METRICS: u64 = 0x13;
}

/// Where evaluation instances come from.
pub enum Source {
    Family(InstanceSpec),
    Fixed(GroundTruth),
}

impl Source {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let e = &cfg.experiment;
        match (&e.dataset, &e.labels) {
            (Some(edges), Some(labels)) => Ok(Source::Fixed(load_edgelist(
                edges,
                &TargetSpec::LabelFile(labels.clone()),
            )?)),
            (Some(edges), None) => Ok(Source::Family(InstanceSpec {
                background: BackgroundSpec::EdgeList { path: edges.clone() },
                foreground: presets::by_name(&e.preset)?.foreground,
            })),
            (None, _) => Ok(Source::Family(presets::by_name(&e.preset)?)),
        }
    }

    pub fn instance(&self, seed: u64) -> Result<GroundTruth> {
        match self {
            Source::Family(spec) => spec.generate(seed),
            Source::Fixed(gt) => Ok(gt.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RepetitionSeeds {
    pub instance: u64,
    pub episode: u64,
    pub agent: u64,
    pub metrics: u64,
}

impl RepetitionSeeds {
    pub fn new(base: u64, id: usize) -> Self {
        let s = |stream| seeds::derive(seeds::derive(base, stream), id as u64);
        RepetitionSeeds {
            instance: s(streams::INSTANCE),
            episode: s(streams::EPISODE),
            agent: s(streams::AGENT),
            metrics: s(streams::METRICS),
        }
    }
}

pub struct Repetition {
    pub id: usize,
    pub seeds: RepetitionSeeds,
    pub ground_truth: GroundTruth,
    pub episode: EpisodeConfig,
    pub trace: Vec<TraceRecord>,
    pub rows: Vec<StepRow>,
}

/// Plays `agent` on one instance to the budget.
pub fn play(
    agent: AgentKind,
    gt: &GroundTruth,
    episode: &EpisodeConfig,
    cfg: &Config,
    checkpoint: Option<&Checkpoint>,
    seed: u64,
) -> Result<Vec<TraceRecord>> {
    let ppr = EmbedConfig {
        algorithm: Algorithm::Ppr,
        ..cfg.embed.clone()
    };
    let mut policy: Box<dyn Policy> = match agent {
        AgentKind::Nac => {
            let ckpt = checkpoint.ok_or_else(|| Error::Config("the nac agent needs experiment.checkpoint".into()))?;
            return evaluate_online(ckpt, gt, episode, &cfg.embed, &cfg.online, seed);
        }
        AgentKind::Mod => Box::new(ModPolicy),
        AgentKind::Ppr => Box::new(PprPolicy(ppr)),
        AgentKind::Nol => Box::new(NolPolicy::new(NolModel::default(), ppr, seed)),
        AgentKind::Random => Box::new(RandomPolicy::new(seed)),
    };
    run_episode(gt, episode, policy.as_mut())
}

/// Replays a trace and records the embedding metrics before every probe.
pub fn replay_metrics(
    gt: &GroundTruth,
    episode: &EpisodeConfig,
    trace: &[TraceRecord],
    embed: Option<&EmbedConfig>,
    seed: u64,
    instance_id: usize,
) -> Result<Vec<StepRow>> {
    let mut state = ObservedState::reset(gt, episode)?;
    trace
        .iter()
        .enumerate()
        .map(|(t, rec)| {
            let (accuracy, entropy) = match embed {
                Some(cfg) => {
                    let ranking = rank(&state, cfg, seeds::derive(seed, t as u64))?;
                    (
                        Some(accuracy_index(&ranking, &state, gt)),
                        boundary_entropy(&ranking, &state, gt),
                    )
                }
                None => (None, None),
            };
            let reward = state.probe(gt, rec.action)?;
            if reward != rec.reward || state.targets_found() != rec.targets_found {
                return Err(Error::Contract(format!("trace diverged from replay at step {}", rec.step)));
            }
            Ok(StepRow {
                instance_id,
                step: rec.step,
                accuracy,
                entropy,
                reward,
                targets_found: rec.targets_found,
            })
        })
        .collect()
}

pub fn run_repetition(
    cfg: &Config,
    source: &Source,
    checkpoint: Option<&Checkpoint>,
    id: usize,
) -> Result<Repetition> {
    let seeds = RepetitionSeeds::new(cfg.experiment.seed, id);
    let gt = source.instance(seeds.instance)?;
    let episode = EpisodeConfig::sample(&gt, cfg.experiment.budget, seeds.episode)?;
    let trace = play(cfg.experiment.agent, &gt, &episode, cfg, checkpoint, seeds.agent)?;
    let embed = cfg.experiment.metrics.then_some(&cfg.embed);
    let rows = replay_metrics(&gt, &episode, &trace, embed, seeds.metrics, id)?;
    Ok(Repetition {
        id,
        seeds,
        ground_truth: gt,
        episode,
        trace,
        rows,
    })
}

pub fn load_checkpoint(cfg: &Config) -> Result<Option<Checkpoint>> {
    match (cfg.experiment.agent, &cfg.experiment.checkpoint) {
        (AgentKind::Nac, Some(dir)) => Checkpoint::load(dir).map(Some),
        (AgentKind::Nac, None) => Err(Error::Config("the nac agent needs experiment.checkpoint".into())),
        _ => Ok(None),
    }
}

fn run_file(dir: &Path, id: usize) -> PathBuf {
    dir.join("runs").join(format!("rep_{id:04}.csv"))
}

pub struct Evaluation {
    pub repetitions: Vec<Repetition>,
    pub aggregate: Vec<AggregateRow>,
    pub manifest: Manifest,
}

/// Runs every repetition, writing one CSV each, then merges them into
/// `aggregate.csv`. A failed repetition is recorded in the manifest; the
/// verb fails only when every repetition does.
pub fn evaluate(cfg: &Config) -> Result<Evaluation> {
    let out = &cfg.output;
    write_text(&out.join("config.toml"), &cfg.to_toml())?;
    let source = Source::from_config(cfg)?;
    let checkpoint = load_checkpoint(cfg)?;
    reset_dir(&out.join("runs"))?;
    let mut repetitions = Vec::new();
    let mut records = Vec::new();
    let mut first_error = None;
    for id in 0..cfg.experiment.repetitions {
        let seeds = RepetitionSeeds::new(cfg.experiment.seed, id);
        let mut record = RunRecord {
            id,
            name: format!("rep_{id:04}"),
            instance_seed: seeds.instance,
            episode_seed: seeds.episode,
            agent_seed: seeds.agent,
            steps: 0,
            targets_found: 0,
            error: None,
        };
        match run_repetition(cfg, &source, checkpoint.as_ref(), id) {
            Ok(rep) => {
                write_csv(&run_file(out, id), &rep.rows)?;
                record.steps = rep.trace.len();
                record.targets_found = rep.trace.last().map_or(0, |r| r.targets_found);
                log::info!(
                    "{} repetition {id}: {} targets in {} probes",
                    cfg.experiment.agent,
                    record.targets_found,
                    record.steps
                );
                repetitions.push(rep);
            }
            Err(e) => {
                log::warn!("repetition {id} failed: {e}");
                record.error = Some(e.to_string());
                first_error.get_or_insert(e);
            }
        }
        records.push(record);
    }
    if repetitions.is_empty() {
        return Err(first_error.expect("at least one repetition ran"));
    }
    let aggregate = report(out)?;
    let manifest = Manifest::new("evaluate", cfg.hash(), cfg.experiment.seed, records);
    manifest.write(out)?;
    Ok(Evaluation {
        repetitions,
        aggregate,
        manifest,
    })
}

/// Merges `runs/*.csv` under `dir` into `aggregate.csv`.
pub fn report(dir: &Path) -> Result<Vec<AggregateRow>> {
    let runs_dir = dir.join("runs");
    let files = files_with_extension(&runs_dir, "csv")?;
    if files.is_empty() {
        return Err(Error::Config(format!("no run files in {}", runs_dir.display())));
    }
    let runs = files
        .iter()
        .map(|f| read_csv::<StepRow>(f))
        .collect::<Result<Vec<_>>>()?;
    let rows = aggregate(&runs);
    write_csv(&dir.join("aggregate.csv"), &rows)?;
    Ok(rows)
}

#[derive(Serialize)]
struct LogRow {
    epoch: usize,
    mean_return: f64,
    mean_targets_found: f64,
    policy_entropy: f64,
    value_loss: f64,
}

impl From<&EpochLog> for LogRow {
    fn from(l: &EpochLog) -> Self {
        LogRow {
            epoch: l.epoch,
            mean_return: l.mean_return,
            mean_targets_found: l.mean_targets_found,
            policy_entropy: l.policy_entropy,
            value_loss: l.value_loss,
        }
    }
}

/// Offline training: writes `checkpoint/` and `training_log.csv`.
pub fn train(cfg: &Config) -> Result<TrainOutcome> {
    let out = &cfg.output;
    write_text(&out.join("config.toml"), &cfg.to_toml())?;
    let outcome = train_offline(&cfg.train, |row| {
        log::info!(
            "epoch {}: targets {:.2} entropy {:.3} value loss {:.3e}",
            row.epoch,
            row.mean_targets_found,
            row.policy_entropy,
            row.value_loss
        );
    })?;
    outcome.checkpoint.save(&out.join("checkpoint"))?;
    let rows: Vec<LogRow> = outcome.log.iter().map(LogRow::from).collect();
    write_csv(&out.join("training_log.csv"), &rows)?;
    Manifest::new("train", cfg.hash(), cfg.train.seed, Vec::new()).write(out)?;
    Ok(outcome)
}

/// One instance to generate.
#[derive(Debug, Clone, PartialEq)]
pub struct InstancePlan {
    pub name: String,
    pub spec: InstanceSpec,
    pub seed: u64,
    /// `(r, p_t, index)` for benchmark grid instances.
    pub cell: Option<(f64, f64, usize)>,
}

/// Seed of instance `i` in grid cell `(r, p_t)`. It depends on the cell
/// values, not their position, so sub-grids reuse the same instances.
pub fn grid_instance_seed(base: u64, r: f64, p_t: f64, i: usize) -> u64 {
    let cell = seeds::derive(seeds::derive(base, r.to_bits()), p_t.to_bits());
    seeds::derive(cell, i as u64)
}

pub fn grid_plan(cfg: &Config) -> Vec<InstancePlan> {
    let b = &cfg.embedbench;
    let mut plan = Vec::new();
    for &r in &b.r {
        for &p_t in &b.p_t {
            for i in 0..b.instances {
                plan.push(InstancePlan {
                    name: format!("r{r}_pt{p_t}_i{i:02}"),
                    spec: presets::embed_grid_cell(r, p_t),
                    seed: grid_instance_seed(b.seed, r, p_t, i),
                    cell: Some((r, p_t, i)),
                });
            }
        }
    }
    plan
}

/// The instances the `generate` verb emits.
pub fn generation_plan(cfg: &Config) -> Result<Vec<InstancePlan>> {
    let g = &cfg.generate;
    if g.preset == EMBED_GRID {
        return Ok(grid_plan(cfg));
    }
    let spec = presets::by_name(&g.preset)?;
    Ok((0..g.count)
        .map(|i| InstancePlan {
            name: format!("{}_{i:04}", g.preset),
            spec: spec.clone(),
            seed: seeds::derive(g.seed, i as u64),
            cell: None,
        })
        .collect())
}

/// Edge list (`u v` per line) and target list (one id per line) in the
/// formats `load_edgelist` reads back.
pub fn instance_files(gt: &GroundTruth) -> (String, String) {
    let mut edges = String::new();
    for (u, v) in gt.graph.edges() {
        writeln!(edges, "{u} {v}").expect("string write");
    }
    let mut targets = String::new();
    for t in gt.targets() {
        writeln!(targets, "{t}").expect("string write");
    }
    (edges, targets)
}

/// Writes every planned instance under `instances/`.
pub fn generate(cfg: &Config) -> Result<Vec<InstancePlan>> {
    let out = &cfg.output;
    write_text(&out.join("config.toml"), &cfg.to_toml())?;
    let plan = generation_plan(cfg)?;
    reset_dir(&out.join("instances"))?;
    let mut records = Vec::with_capacity(plan.len());
    for (id, item) in plan.iter().enumerate() {
        let gt = item.spec.generate(item.seed)?;
        let (edges, targets) = instance_files(&gt);
        let dir = out.join("instances");
        write_text(&dir.join(format!("{}.edges", item.name)), &edges)?;
        write_text(&dir.join(format!("{}.targets", item.name)), &targets)?;
        records.push(RunRecord {
            id,
            name: item.name.clone(),
            instance_seed: item.seed,
            episode_seed: 0,
            agent_seed: 0,
            steps: 0,
            targets_found: gt.target_count(),
            error: None,
        });
    }
    Manifest::new("generate", cfg.hash(), cfg.generate.seed, records).write(out)?;
    Ok(plan)
}
