//! CSV documents with `#` configuration comments.

use std::fs;
use std::io::Write;
use std::path::Path;

use gpal_core::trainer::Evaluation;

use crate::CliError;

pub const RESULT_HEADER: [&str; 7] = ["graph", "method", "budget", "run", "seed", "micro_f1", "macro_f1"];

/// Header comments describing the command that produced a file.
#[derive(Debug, Clone, Default)]
pub struct Provenance {
    lines: Vec<String>,
}

impl Provenance {
    pub fn new(command: &str) -> Self {
        Self {
            lines: vec![format!("gpal {command}")],
        }
    }

    pub fn with(mut self, key: &str, value: impl std::fmt::Display) -> Self {
        self.lines.push(format!("{key}: {value}"));
        self
    }

    pub fn push(&mut self, key: &str, value: impl std::fmt::Display) {
        self.lines.push(format!("{key}: {value}"));
    }
}

pub fn csv_document(provenance: &Provenance, header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    for line in &provenance.lines {
        writeln!(buf, "# {line}").expect("writing to memory");
    }
    let mut w = csv::Writer::from_writer(buf);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.into_inner().map_err(|e| CliError::Usage(format!("csv buffer: {e}")))
}

/// Writes to `path`, or stdout when `None`.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| CliError::Io {
            path: p.display().to_string(),
            source: e,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| CliError::Io {
                path: "<stdout>".into(),
                source: e,
            })
        }
    }
}

pub fn result_rows(graph: &str, method: &str, budget: usize, eval: &Evaluation) -> Vec<Vec<String>> {
    eval.runs
        .iter()
        .map(|r| {
            vec![
                graph.to_string(),
                method.to_string(),
                budget.to_string(),
                r.run.to_string(),
                r.seed.to_string(),
                r.micro_f1.to_string(),
                r.macro_f1.to_string(),
            ]
        })
        .collect()
}

/// `mean` and `std` rows in the result schema; the seed column is empty.
pub fn summary_rows(graph: &str, method: &str, budget: usize, eval: &Evaluation) -> Result<Vec<Vec<String>>, CliError> {
    let s = eval.summary()?;
    let row = |label: &str, micro: f64, macro_: f64| {
        vec![
            graph.to_string(),
            method.to_string(),
            budget.to_string(),
            label.to_string(),
            String::new(),
            micro.to_string(),
            macro_.to_string(),
        ]
    };
    Ok(vec![
        row("mean", s.mean_micro_f1, s.mean_macro_f1),
        row("std", s.std_micro_f1, s.std_macro_f1),
    ])
}

pub const SEQUENCE_HEADER: [&str; 6] = ["graph", "method", "budget", "run", "step", "node"];

pub fn sequence_rows(graph: &str, method: &str, budget: usize, eval: &Evaluation) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for r in &eval.runs {
        for (step, v) in r.sequence.iter().enumerate() {
            rows.push(vec![
                graph.to_string(),
                method.to_string(),
                budget.to_string(),
                r.run.to_string(),
                step.to_string(),
                v.to_string(),
            ]);
        }
    }
    rows
}
