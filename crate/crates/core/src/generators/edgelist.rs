use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::foreground::{implant_foreground, ForegroundParams};
use crate::error::{Error, Result};
use crate::graph::{Graph, GroundTruth};

/// Where the target labels of a loaded network come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSpec {
    /// One node id per line; listed nodes are targets.
    LabelFile(PathBuf),
    /// Implant synthetic anomalies into the loaded background.
    Implant {
        foreground: ForegroundParams,
        rng_seed: u64,
    },
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim();
        (!line.is_empty() && !line.starts_with('#')).then_some((i + 1, line))
    })
}

/// Parses an edge list: one `u v` pair per line, separated by whitespace or a
/// comma, `#` starting a comment line. Node ids are arbitrary tokens,
/// re-indexed contiguously in order of first appearance.
pub fn parse_edgelist(text: &str, path: &Path) -> Result<GroundTruth> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut names = Vec::new();
    let mut edges = Vec::new();
    let mut id_of = |tok: &str| -> usize {
        if let Some(&i) = index.get(tok) {
            return i;
        }
        let i = names.len();
        names.push(tok.to_string());
        index.insert(tok.to_string(), i);
        i
    };
    for (lineno, line) in data_lines(text) {
        let toks: Vec<&str> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .collect();
        if toks.len() != 2 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: lineno,
                message: format!("expected two node ids, found {} fields", toks.len()),
            });
        }
        let u = id_of(toks[0]);
        let v = id_of(toks[1]);
        edges.push((u, v));
    }
    let n = names.len();
    let mut gt = GroundTruth::unlabeled(Graph::from_edges(n, edges)?);
    gt.id_map = Some(names);
    Ok(gt)
}

fn apply_label_file(gt: &mut GroundTruth, path: &Path) -> Result<()> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let names = gt.id_map.as_ref().expect("loaded graphs carry an id map");
    let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    for (lineno, line) in data_lines(&text) {
        let &v = index.get(line).ok_or_else(|| {
            Error::Config(format!(
                "{}:{lineno}: target id {line:?} does not appear in the edge list",
                path.display()
            ))
        })?;
        gt.labels[v] = true;
    }
    Ok(())
}

pub fn load_edgelist(path: &Path, target: &TargetSpec) -> Result<GroundTruth> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut gt = parse_edgelist(&text, path)?;
    match target {
        TargetSpec::LabelFile(labels) => {
            apply_label_file(&mut gt, labels)?;
            Ok(gt)
        }
        TargetSpec::Implant { foreground, rng_seed } => {
            implant_foreground(&gt, foreground, *rng_seed)
        }
    }
}
