//! CSV rows, aggregation and run manifests. Everything written here is a
//! pure function of the configuration, so reruns are byte-identical.

use std::fs;
use std::path::{Path, PathBuf};

use harvest_core::{Error, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// One probe of one repetition. Accuracy and entropy describe the state
/// just before the probe; entropy is empty when fewer than two boundary
/// targets exist.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRow {
    pub instance_id: usize,
    pub step: usize,
    pub accuracy: Option<f64>,
    pub entropy: Option<f64>,
    pub reward: u8,
    pub targets_found: usize,
}

/// Mean and population standard deviation per step across repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub step: usize,
    /// Repetitions contributing to `targets_found`; shorter runs carry their
    /// final count forward.
    pub n: usize,
    pub targets_found_mean: f64,
    pub targets_found_std: f64,
    pub accuracy_n: usize,
    pub accuracy_mean: Option<f64>,
    pub accuracy_std: Option<f64>,
    pub entropy_n: usize,
    pub entropy_mean: Option<f64>,
    pub entropy_std: Option<f64>,
}

pub fn mean_std(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

/// Aggregates per-repetition series (each sorted by step, starting at 1).
pub fn aggregate(runs: &[Vec<StepRow>]) -> Vec<AggregateRow> {
    let steps = runs.iter().map(Vec::len).max().unwrap_or(0);
    (0..steps)
        .map(|t| {
            let found: Vec<f64> = runs
                .iter()
                .filter_map(|r| r.get(t).or(r.last()))
                .map(|row| row.targets_found as f64)
                .collect();
            let acc: Vec<f64> = runs.iter().filter_map(|r| r.get(t)?.accuracy).collect();
            let ent: Vec<f64> = runs.iter().filter_map(|r| r.get(t)?.entropy).collect();
            let (fm, fs) = mean_std(&found).unwrap_or((0.0, 0.0));
            let a = mean_std(&acc);
            let e = mean_std(&ent);
            AggregateRow {
                step: t + 1,
                n: found.len(),
                targets_found_mean: fm,
                targets_found_std: fs,
                accuracy_n: acc.len(),
                accuracy_mean: a.map(|x| x.0),
                accuracy_std: a.map(|x| x.1),
                entropy_n: ent.len(),
                entropy_mean: e.map(|x| x.0),
                entropy_std: e.map(|x| x.1),
            }
        })
        .collect()
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: format!("{other:?}"),
        },
    }
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    if let Some(dir) = path.parent() {
        create_dir(dir)?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    r.deserialize()
        .enumerate()
        .map(|(i, row)| {
            row.map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: i + 2,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Empties `dir` so files of an earlier run are never merged into this one.
pub fn reset_dir(dir: &Path) -> Result<()> {
    if dir.exists() {
        fs::remove_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    create_dir(dir)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        create_dir(dir)?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Files in `dir` with extension `ext`, sorted by name.
pub fn files_with_extension(dir: &Path, ext: &str) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == ext))
        .collect();
    out.sort();
    Ok(out)
}

/// Provenance of one repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub id: usize,
    pub name: String,
    pub instance_seed: u64,
    pub episode_seed: u64,
    pub agent_seed: u64,
    pub steps: usize,
    pub targets_found: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub verb: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub failures: usize,
    pub runs: Vec<RunRecord>,
}

impl Manifest {
    pub fn new(verb: &str, config_hash: String, seed: u64, runs: Vec<RunRecord>) -> Self {
        Manifest {
            verb: verb.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_hash,
            seed,
            failures: runs.iter().filter(|r| r.error.is_some()).count(),
            runs,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let text = toml::to_string(self).expect("manifest serializes");
        write_text(&dir.join("manifest.toml"), &text)
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join("manifest.toml");
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        toml::from_str(&text).map_err(|e| Error::Parse {
            path,
            line: 0,
            message: e.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(step: usize, found: usize, ent: Option<f64>) -> StepRow {
        StepRow {
            instance_id: 0,
            step,
            accuracy: Some(0.5),
            entropy: ent,
            reward: 0,
            targets_found: found,
        }
    }

    #[test]
    fn short_runs_carry_their_count_forward() {
        let runs = vec![
            vec![row(1, 1, Some(1.0)), row(2, 2, None), row(3, 4, None)],
            vec![row(1, 0, Some(3.0))],
        ];
        let agg = aggregate(&runs);
        assert_eq!(agg.len(), 3);
        assert_eq!(agg[0].targets_found_mean, 0.5);
        assert_eq!(agg[0].targets_found_std, 0.5);
        assert_eq!(agg[0].entropy_mean, Some(2.0));
        assert_eq!(agg[2].n, 2);
        assert_eq!(agg[2].targets_found_mean, 2.0);
        assert_eq!(agg[2].accuracy_n, 1);
        assert_eq!(agg[1].entropy_n, 0);
        assert_eq!(agg[1].entropy_mean, None);
    }
}
