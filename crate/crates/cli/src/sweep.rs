//! Run every `*.cfg` file of a directory and merge the reports.

use crate::config::{load, render};
use crate::output::write_json;
use crate::tasks::{config_hash, execute};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::thread;

/// Config files directly inside `dir`, sorted by name.
pub fn config_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "cfg"))
        .collect();
    files.sort();
    Ok(files)
}

struct Child {
    key: String,
    code: i32,
    entry: Value,
}

fn run_child(path: &Path, out_root: &Path) -> Child {
    let stem = path
        .file_stem()
        .map_or("config".into(), |s| s.to_string_lossy().into_owned());
    let file = path
        .file_name()
        .map_or(String::new(), |s| s.to_string_lossy().into_owned());
    match load(path) {
        Ok(cfg) => {
            let base = path.parent().unwrap_or(Path::new("."));
            let (code, report) = execute(&cfg, base, &out_root.join(&stem));
            Child {
                key: config_hash(&cfg),
                code,
                entry: json!({ "file": file, "dir": stem, "exit_code": code, "config": render(&cfg), "report": report }),
            }
        }
        Err(e) => {
            // Unparsable configs are keyed by the hash of their raw text.
            let raw = std::fs::read(path).unwrap_or_default();
            let key = Sha256::digest(&raw).iter().map(|b| format!("{b:02x}")).collect();
            Child {
                key,
                code: 1,
                entry: json!({ "file": file, "dir": stem, "exit_code": 1, "error": e.to_string() }),
            }
        }
    }
}

/// Run the children concurrently, each in `out_root/<stem>`, and write
/// `out_root/sweep.json`. Returns the largest child exit code.
pub fn sweep(dir: &Path, out_root: &Path) -> std::io::Result<(i32, Value)> {
    let files = config_files(dir)?;
    std::fs::create_dir_all(out_root)?;
    let children: Vec<Child> = thread::scope(|s| {
        let handles: Vec<_> = files.iter().map(|f| s.spawn(move || run_child(f, out_root))).collect();
        handles
            .into_iter()
            .zip(&files)
            .map(|(h, f)| {
                h.join().unwrap_or_else(|_| Child {
                    key: f.display().to_string(),
                    code: 2,
                    entry: json!({ "file": f.display().to_string(), "exit_code": 2, "error": "task panicked" }),
                })
            })
            .collect()
    });
    let code = children.iter().map(|c| c.code).max().unwrap_or(0);
    // serde_json maps are ordered by key, which fixes the merge order.
    let mut merged = Map::new();
    for c in children {
        let key = if merged.contains_key(&c.key) {
            format!("{}-{}", c.key, c.entry["dir"].as_str().unwrap_or(""))
        } else {
            c.key
        };
        merged.insert(key, c.entry);
    }
    let merged = Value::Object(merged);
    write_json(&out_root.join("sweep.json"), &merged)?;
    Ok((code, merged))
}
