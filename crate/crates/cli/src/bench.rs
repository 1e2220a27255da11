use std::path::{Path, PathBuf};
use std::time::Instant;

use linsplit::smtlib::{parse_sexps, tokenize, Sexp, Token};
use rayon::prelude::*;
use serde::Serialize;

use crate::run::solve_text;
use crate::{Options, EXIT_INPUT, EXIT_SAT};

#[derive(Clone, Debug, Serialize)]
pub struct Record {
    pub file: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<String>,
    pub time_ms: u128,
    pub iterations: usize,
    /// Status announced by `(set-info :status ...)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Record {
    fn mismatch(&self) -> bool {
        self.expected.as_deref().is_some_and(|e| e != "unknown" && e != self.status)
    }
}

fn collect(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "smt2") {
            out.push(path);
        }
    }
    Ok(())
}

pub fn expected_status(text: &str) -> Option<String> {
    let sexps = parse_sexps(tokenize(text).ok()?).ok()?;
    sexps.iter().find_map(|s| match s.list()? {
        [head, Sexp::Atom(Token::Keyword(k), _), value] if head.symbol() == Some("set-info") && k == "status" => {
            value.symbol().map(str::to_string)
        }
        _ => None,
    })
}

fn solve_file(path: &Path, root: &Path, opts: &Options) -> Option<Record> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("warning: skipping {}: {e}", path.display());
            return None;
        }
    };
    let file = path.strip_prefix(root).unwrap_or(path).display().to_string();
    let expected = expected_status(&text);
    let start = Instant::now();
    Some(match solve_text(&text, opts) {
        Ok(out) => Record {
            file,
            status: out.status.to_string(),
            objective: out.objective.map(|q| q.to_string()),
            time_ms: out.time_ms,
            iterations: out.iterations,
            expected,
            error: out.oracle_disagrees.then(|| out.oracle_note.unwrap_or_default()),
        },
        Err(f) => Record {
            file,
            status: "error".into(),
            objective: None,
            time_ms: start.elapsed().as_millis(),
            iterations: 0,
            expected,
            error: Some(f.message),
        },
    })
}

pub fn bench(dir: &Path, opts: &Options, jobs: usize) -> std::io::Result<Vec<Record>> {
    let mut files = Vec::new();
    collect(dir, &mut files)?;
    files.sort();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool");
    Ok(pool.install(|| files.par_iter().filter_map(|p| solve_file(p, dir, opts)).collect()))
}

fn table(records: &[Record]) -> String {
    let width = records.iter().map(|r| r.file.len()).max().unwrap_or(4).max(4);
    let mut out = format!("{:<width$}  {:<8} {:>10} {:>6} {:>10}\n", "file", "status", "objective", "iters", "time-ms");
    for r in records {
        out.push_str(&format!(
            "{:<width$}  {:<8} {:>10} {:>6} {:>10}{}\n",
            r.file,
            r.status,
            r.objective.as_deref().unwrap_or("-"),
            r.iterations,
            r.time_ms,
            if r.mismatch() { format!("  (expected {})", r.expected.as_deref().unwrap()) } else { String::new() }
        ));
    }
    let count = |s: &str| records.iter().filter(|r| r.status == s).count();
    let total: u128 = records.iter().map(|r| r.time_ms).sum();
    out.push_str(&format!(
        "{} files: {} sat, {} unsat, {} unknown, {} error; {} unexpected; {total} ms total\n",
        records.len(),
        count("sat"),
        count("unsat"),
        count("unknown"),
        count("error"),
        records.iter().filter(|r| r.mismatch()).count(),
    ));
    out
}

/// JSON lines on standard output, the table on standard error.
pub fn run_bench(dir: &Path, opts: &Options, jobs: usize) -> u8 {
    let records = match bench(dir, opts, jobs) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}: {e}", dir.display());
            return EXIT_INPUT;
        }
    };
    for r in &records {
        println!("{}", serde_json::to_string(r).expect("record serializes"));
    }
    if !records.is_empty() {
        eprint!("{}", table(&records));
    }
    EXIT_SAT
}
