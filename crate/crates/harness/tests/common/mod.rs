#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use harvest_harness::Config;

/// Every file under `dir` with its bytes, keyed by relative path.
pub fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_path_buf();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    out
}

/// A configuration with `overrides` applied on top of the defaults.
pub fn config(out: &Path, overrides: &[&str]) -> Config {
    let owned: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    let mut cfg = Config::load(None, &owned).unwrap();
    cfg.output = out.to_path_buf();
    cfg
}

/// A training setup small enough for a few seconds of work.
pub const TINY_TRAIN: &[&str] = &[
    "train.preset=trivial-clique",
    "train.k=8",
    "train.channels=2",
    "train.layers=1",
    "train.epochs=2",
    "train.agents=2",
    "train.window=4",
    "train.budget=8",
];
