//! The `embedbench` verb: optimal traversals of the benchmark grid, scoring
//! every embedding before each probe.

use std::path::Path;

use harvest_core::embeddings::{Algorithm, EmbedConfig};
use harvest_core::metrics::{optimal_traversal, MetricSeries};
use harvest_core::{seeds, EpisodeConfig, Result};
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::experiment::{grid_instance_seed, grid_plan};
use crate::output::{files_with_extension, mean_std, read_csv, reset_dir, write_csv, write_text, Manifest, RunRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRun {
    pub algorithm: Algorithm,
    pub r: f64,
    pub p_t: f64,
    pub instance: usize,
    pub series: MetricSeries,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub algorithm: Algorithm,
    pub r: f64,
    pub p_t: f64,
    pub instance_id: usize,
    pub step: usize,
    pub accuracy: f64,
    pub entropy: Option<f64>,
    pub reward: u8,
    pub targets_found: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchStepRow {
    pub algorithm: Algorithm,
    pub r: f64,
    pub p_t: f64,
    pub step: usize,
    pub accuracy_n: usize,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub entropy_n: usize,
    pub entropy_mean: Option<f64>,
    pub entropy_std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummaryRow {
    pub algorithm: Algorithm,
    pub r: f64,
    pub p_t: f64,
    pub n: usize,
    pub auc_mean: f64,
    pub auc_std: f64,
    pub steps_mean: f64,
}

fn rows_of(run: &BenchRun) -> Vec<BenchRow> {
    let s = &run.series;
    (0..s.len())
        .map(|t| BenchRow {
            algorithm: run.algorithm,
            r: run.r,
            p_t: run.p_t,
            instance_id: run.instance,
            step: t + 1,
            accuracy: s.accuracy[t],
            entropy: s.entropy[t],
            reward: s.rewards[t],
            targets_found: s.targets_found[t],
        })
        .collect()
}

fn group_key(row: &BenchRow) -> (Algorithm, u64, u64) {
    (row.algorithm, row.r.to_bits(), row.p_t.to_bits())
}

/// Per-step means across instances, one block per (algorithm, cell).
pub fn step_table(rows: &[BenchRow]) -> Vec<BenchStepRow> {
    let mut groups: Vec<((Algorithm, u64, u64), Vec<&BenchRow>)> = Vec::new();
    for row in rows {
        match groups.iter_mut().find(|(k, _)| *k == group_key(row)) {
            Some((_, g)) => g.push(row),
            None => groups.push((group_key(row), vec![row])),
        }
    }
    let mut out = Vec::new();
    for (_, group) in groups {
        let steps = group.iter().map(|r| r.step).max().unwrap_or(0);
        for step in 1..=steps {
            let at: Vec<&&BenchRow> = group.iter().filter(|r| r.step == step).collect();
            let acc: Vec<f64> = at.iter().map(|r| r.accuracy).collect();
            let ent: Vec<f64> = at.iter().filter_map(|r| r.entropy).collect();
            let (am, asd) = mean_std(&acc).unwrap_or((0.0, 0.0));
            let e = mean_std(&ent);
            out.push(BenchStepRow {
                algorithm: group[0].algorithm,
                r: group[0].r,
                p_t: group[0].p_t,
                step,
                accuracy_n: acc.len(),
                accuracy_mean: am,
                accuracy_std: asd,
                entropy_n: ent.len(),
                entropy_mean: e.map(|x| x.0),
                entropy_std: e.map(|x| x.1),
            });
        }
    }
    out
}

/// AUC (summed accuracy) per (algorithm, cell) across instances.
pub fn summary_table(rows: &[BenchRow]) -> Vec<BenchSummaryRow> {
    let mut runs: Vec<((Algorithm, u64, u64, usize), (f64, usize))> = Vec::new();
    for row in rows {
        let (a, r, p) = group_key(row);
        let key = (a, r, p, row.instance_id);
        match runs.iter_mut().find(|(k, _)| *k == key) {
            Some((_, (auc, steps))) => {
                *auc += row.accuracy;
                *steps += 1;
            }
            None => runs.push((key, (row.accuracy, 1))),
        }
    }
    let mut out: Vec<BenchSummaryRow> = Vec::new();
    let mut cells: Vec<(Algorithm, u64, u64)> = Vec::new();
    for ((a, r, p, _), _) in &runs {
        if !cells.contains(&(*a, *r, *p)) {
            cells.push((*a, *r, *p));
        }
    }
    for (a, r, p) in cells {
        let of_cell: Vec<&(f64, usize)> = runs
            .iter()
            .filter(|((ka, kr, kp, _), _)| (*ka, *kr, *kp) == (a, r, p))
            .map(|(_, v)| v)
            .collect();
        let aucs: Vec<f64> = of_cell.iter().map(|v| v.0).collect();
        let (auc_mean, auc_std) = mean_std(&aucs).expect("cell has runs");
        out.push(BenchSummaryRow {
            algorithm: a,
            r: f64::from_bits(r),
            p_t: f64::from_bits(p),
            n: aucs.len(),
            auc_mean,
            auc_std,
            steps_mean: of_cell.iter().map(|v| v.1 as f64).sum::<f64>() / aucs.len() as f64,
        });
    }
    out
}

/// Traverses every grid instance once per algorithm. Every algorithm sees
/// the same instance, seed node and route.
pub fn run_embedbench(cfg: &Config, mut on_run: impl FnMut(&BenchRun)) -> Result<Vec<BenchRun>> {
    let b = &cfg.embedbench;
    let mut runs = Vec::new();
    for item in grid_plan(cfg) {
        let (r, p_t, instance) = item.cell.expect("grid plans carry their cell");
        let gt = item.spec.generate(item.seed)?;
        let seed = EpisodeConfig::sample(&gt, usize::MAX, seeds::derive(item.seed, 1))?.seed_node;
        for &algorithm in &b.algorithms {
            let embed = EmbedConfig {
                algorithm,
                ..cfg.embed.clone()
            };
            let series = optimal_traversal(&gt, seed, &embed, seeds::derive(item.seed, 2), b.step_cap(algorithm))?;
            let run = BenchRun {
                algorithm,
                r,
                p_t,
                instance,
                series,
            };
            on_run(&run);
            runs.push(run);
        }
    }
    Ok(runs)
}

/// Runs the benchmark, writing one CSV per grid instance under `runs/`,
/// then the merged `embedbench.csv`, `embedbench_steps.csv` and
/// `embedbench_summary.csv`.
pub fn embedbench(cfg: &Config) -> Result<Vec<BenchRun>> {
    let out = &cfg.output;
    write_text(&out.join("config.toml"), &cfg.to_toml())?;
    let last = *cfg.embedbench.algorithms.last().expect("validated non-empty");
    reset_dir(&out.join("runs"))?;
    let mut pending: Vec<BenchRow> = Vec::new();
    let mut records = Vec::new();
    let mut write_error = None;
    let runs = run_embedbench(cfg, |run| {
        log::info!(
            "{} r={} p_t={} instance {}: auc {:.2} over {} steps",
            run.algorithm,
            run.r,
            run.p_t,
            run.instance,
            run.series.auc(),
            run.series.len()
        );
        pending.extend(rows_of(run));
        if run.algorithm != last {
            return;
        }
        let name = format!("r{}_pt{}_i{:02}", run.r, run.p_t, run.instance);
        if let Err(e) = write_csv(&out.join("runs").join(format!("{name}.csv")), &pending) {
            write_error.get_or_insert(e);
        }
        pending.clear();
        records.push(RunRecord {
            id: records.len(),
            name,
            instance_seed: grid_instance_seed(cfg.embedbench.seed, run.r, run.p_t, run.instance),
            episode_seed: 0,
            agent_seed: 0,
            steps: run.series.len(),
            targets_found: run.series.targets_found.last().copied().unwrap_or(0),
            error: None,
        });
    })?;
    if let Some(e) = write_error {
        return Err(e);
    }
    bench_report(out)?;
    Manifest::new("embedbench", cfg.hash(), cfg.embedbench.seed, records).write(out)?;
    Ok(runs)
}

/// Merges the per-instance benchmark files under `dir/runs`.
pub fn bench_report(dir: &Path) -> Result<Vec<BenchSummaryRow>> {
    let mut rows: Vec<BenchRow> = Vec::new();
    for f in files_with_extension(&dir.join("runs"), "csv")? {
        rows.extend(read_csv::<BenchRow>(&f)?);
    }
    rows.sort_by(|a, b| {
        a.algorithm
            .cmp(&b.algorithm)
            .then(a.r.total_cmp(&b.r))
            .then(a.p_t.total_cmp(&b.p_t))
            .then(a.instance_id.cmp(&b.instance_id))
            .then(a.step.cmp(&b.step))
    });
    write_csv(&dir.join("embedbench.csv"), &rows)?;
    write_csv(&dir.join("embedbench_steps.csv"), &step_table(&rows))?;
    let summary = summary_table(&rows);
    write_csv(&dir.join("embedbench_summary.csv"), &summary)?;
    Ok(summary)
}
