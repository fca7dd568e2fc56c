//! Determinism gate for the shipped configuration corpus.
//!
//! Every config under `configs/` is executed twice with the subcommand it is
//! named for (`certify_*` -> `certify-kernel`, `eval_*` -> `eval`, everything
//! else -> `run`). Both invocations must succeed and every output file —
//! CSV tables and JSON reports alike — must be byte-identical between runs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_fraclab")
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run_once(args: &[&str], out_dir: &Path) {
    let output = Command::new(bin())
        .args(args)
        .arg("--out")
        .arg(out_dir)
        .output()
        .expect("spawn CLI");
    assert!(
        output.status.success(),
        "command {:?} failed\nstdout:\n{}\nstderr:\n{}",
        args,
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr),
    );
}

fn collect_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    for entry in std::fs::read_dir(dir).expect("read output dir") {
        let entry = entry.expect("dir entry");
        let name = entry.file_name().into_string().expect("utf-8 file name");
        let bytes = std::fs::read(entry.path()).expect("read output file");
        files.insert(name, bytes);
    }
    files
}

/// Every invocation a config supports, as argument lists without `--out`.
fn invocations(config: &Path) -> Vec<Vec<String>> {
    let stem = config
        .file_stem()
        .and_then(|s| s.to_str())
        .expect("config stem");
    let cfg = config.to_str().expect("utf-8 config path").to_string();
    if stem.starts_with("certify_") {
        vec![vec!["certify-kernel".into(), "--config".into(), cfg]]
    } else if stem.starts_with("eval_") {
        ["operator", "norms", "maximal"]
            .iter()
            .map(|what| {
                vec![
                    "eval".into(),
                    "--config".into(),
                    cfg.clone(),
                    "--what".into(),
                    (*what).into(),
                ]
            })
            .collect()
    } else {
        vec![vec!["run".into(), "--config".into(), cfg]]
    }
}

#[test]
fn shipped_configs_succeed_and_are_byte_deterministic() {
    let mut configs: Vec<PathBuf> = std::fs::read_dir(configs_dir())
        .expect("configs directory ships with the workspace")
        .map(|e| e.expect("dir entry").path())
        .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
        .collect();
    configs.sort();
    assert!(
        !configs.is_empty(),
        "no shipped configs found next to the workspace root"
    );

    let mut files_compared = 0usize;
    for config in &configs {
        for args in invocations(config) {
            let args: Vec<&str> = args.iter().map(String::as_str).collect();
            let first = tempfile::tempdir().expect("tempdir");
            let second = tempfile::tempdir().expect("tempdir");
            run_once(&args, first.path());
            run_once(&args, second.path());

            let a = collect_files(first.path());
            let b = collect_files(second.path());
            assert!(!a.is_empty(), "{args:?} wrote no output files");
            assert_eq!(
                a.keys().collect::<Vec<_>>(),
                b.keys().collect::<Vec<_>>(),
                "{args:?} produced different file sets across runs"
            );
            for (name, bytes) in &a {
                assert_eq!(
                    Some(bytes),
                    b.get(name),
                    "{args:?}: output `{name}` differs between identical runs"
                );
                files_compared += 1;
            }
        }
    }

    println!(
        "acceptance determinism: PASS — {} shipped configs replayed twice, \
         {} output files byte-identical",
        configs.len(),
        files_compared
    );
}
