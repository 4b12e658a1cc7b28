//! Golden files: one JSON file per suite mapping a run key to the expected
//! `details` of that result.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::report::{Status, SuiteResult};

pub const GOLDEN_SCHEMA: u32 = 1;
const MAX_DIFFS: usize = 8;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GoldenFile {
    pub schema: u32,
    pub suite: String,
    pub entries: BTreeMap<String, Value>,
}

/// Key of a result inside its suite's golden file. Details depend on the
/// weight window and the evaluation points as well as on the grid point.
pub fn key(r: &SuiteResult, max_weight: u64, eval: &[i64]) -> String {
    let eval: Vec<String> = eval.iter().map(i64::to_string).collect();
    format!("{};w={};eval={}", r.point.label(), max_weight, eval.join(","))
}

pub fn path(dir: &Path, suite: &str) -> PathBuf {
    dir.join(format!("{suite}.json"))
}

pub fn load(dir: &Path, suite: &str) -> Result<Option<GoldenFile>, String> {
    let p = path(dir, suite);
    let text = match std::fs::read_to_string(&p) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(format!("cannot read {}: {e}", p.display())),
    };
    let g: GoldenFile = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", p.display()))?;
    if g.schema != GOLDEN_SCHEMA || g.suite != suite {
        return Err(format!("{}: schema {} for suite {:?}", p.display(), g.schema, g.suite));
    }
    Ok(Some(g))
}

/// JSON-pointer paths at which `want` and `got` differ, with both values.
pub fn diff(want: &Value, got: &Value) -> Vec<String> {
    let mut out = Vec::new();
    diff_into("", want, got, &mut out);
    out
}

fn diff_into(path: &str, want: &Value, got: &Value, out: &mut Vec<String>) {
    if out.len() >= MAX_DIFFS {
        return;
    }
    match (want, got) {
        (Value::Object(a), Value::Object(b)) => {
            let mut keys: Vec<&String> = a.keys().chain(b.keys()).collect();
            keys.sort();
            keys.dedup();
            for k in keys {
                let sub = format!("{path}/{k}");
                match (a.get(k), b.get(k)) {
                    (Some(x), Some(y)) => diff_into(&sub, x, y, out),
                    (Some(x), None) => out.push(format!("{sub}: expected {x}, missing")),
                    (None, Some(y)) => out.push(format!("{sub}: unexpected {y}")),
                    (None, None) => unreachable!(),
                }
            }
        }
        (Value::Array(a), Value::Array(b)) if a.len() == b.len() => {
            for (i, (x, y)) in a.iter().zip(b).enumerate() {
                diff_into(&format!("{path}/{i}"), x, y, out);
            }
        }
        _ if want != got => out.push(format!("{}: expected {want}, got {got}", if path.is_empty() { "/" } else { path })),
        _ => {}
    }
}

/// Compares each result with its golden entry. A mismatch marks the result
/// failed and records the diff; a missing entry is noted but not a failure.
pub fn compare(dir: &Path, results: &mut [SuiteResult], max_weight: u64, eval: &[i64]) {
    let mut files: BTreeMap<String, Result<Option<GoldenFile>, String>> = BTreeMap::new();
    for r in results.iter_mut() {
        let file = files.entry(r.suite.clone()).or_insert_with(|| load(dir, &r.suite));
        let g = match file {
            Ok(Some(g)) => g,
            Ok(None) => continue,
            Err(e) => {
                r.status = Status::Fail;
                r.diagnostics.push(format!("golden: {e}"));
                continue;
            }
        };
        let k = key(r, max_weight, eval);
        match g.entries.get(&k) {
            None => r.diagnostics.push(format!("golden: no entry for {k}")),
            Some(want) => {
                let d = diff(want, &r.details);
                if !d.is_empty() {
                    r.status = Status::Fail;
                    r.diagnostics.push(format!("golden mismatch for {k}"));
                    r.diagnostics.extend(d.into_iter().map(|x| format!("golden diff {x}")));
                }
            }
        }
    }
}

/// Merges the results into the golden files, replacing entries with the same key.
pub fn bless(dir: &Path, results: &[SuiteResult], max_weight: u64, eval: &[i64]) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut files: BTreeMap<&str, GoldenFile> = BTreeMap::new();
    for r in results {
        let g = files.entry(r.suite.as_str()).or_insert_with(|| {
            load(dir, &r.suite).ok().flatten().unwrap_or_else(|| GoldenFile {
                schema: GOLDEN_SCHEMA,
                suite: r.suite.clone(),
                entries: BTreeMap::new(),
            })
        });
        g.entries.insert(key(r, max_weight, eval), r.details.clone());
    }
    for (suite, g) in files {
        let mut bytes = serde_json::to_vec_pretty(&g)?;
        bytes.push(b'\n');
        std::fs::write(path(dir, suite), bytes)?;
    }
    Ok(())
}
