use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, ErrorCode, Result};
use crate::graph::{Graph, Split};
use crate::numerics::DenseMatrix;

use super::locate::{line_of, Seg};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    name: String,
    num_nodes: usize,
    num_classes: usize,
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
    edges: Vec<[usize; 2]>,
    splits: SplitsFile,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SplitsFile {
    train: Vec<usize>,
    valid: Vec<usize>,
    test: Vec<usize>,
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_graph(&text, &path.display().to_string())
}

/// Parses and validates a graph document. Errors name `source` and the
/// line of the offending element.
pub fn parse_graph(text: &str, source: &str) -> Result<Graph> {
    let file: GraphFile = serde_json::from_str(text).map_err(|e| {
        Error::data(ErrorCode::Malformed, format!("{source}:{}: {e}", e.line()))
    })?;
    let fail = |code: ErrorCode, path: &[Seg<'_>], msg: String| -> Error {
        match line_of(text, path) {
            Some(line) => Error::data(code, format!("{source}:{line}: {msg}")),
            None => Error::data(code, format!("{source}: {msg}")),
        }
    };

    let n = file.num_nodes;
    if file.features.len() != n {
        return Err(fail(
            ErrorCode::FeatureLength,
            &[Seg::Key("features")],
            format!("{} feature rows for {n} nodes", file.features.len()),
        ));
    }
    let dim = file.features.first().map_or(0, Vec::len);
    for (i, row) in file.features.iter().enumerate() {
        if row.len() != dim {
            return Err(fail(
                ErrorCode::FeatureLength,
                &[Seg::Key("features"), Seg::Index(i)],
                format!("feature row {i} has length {}, expected {dim}", row.len()),
            ));
        }
    }
    if file.labels.len() != n {
        return Err(fail(
            ErrorCode::Malformed,
            &[Seg::Key("labels")],
            format!("{} labels for {n} nodes", file.labels.len()),
        ));
    }
    if let Some(i) = file.labels.iter().position(|&l| l >= file.num_classes) {
        return Err(fail(
            ErrorCode::LabelRange,
            &[Seg::Key("labels"), Seg::Index(i)],
            format!("label {} of node {i} is not below num_classes {}", file.labels[i], file.num_classes),
        ));
    }

    let mut seen = HashSet::with_capacity(file.edges.len());
    for (k, &[u, v]) in file.edges.iter().enumerate() {
        let at = [Seg::Key("edges"), Seg::Index(k)];
        if u >= n || v >= n {
            return Err(fail(ErrorCode::NodeRange, &at, format!("edge {k} [{u}, {v}] has a node outside 0..{n}")));
        }
        if u == v {
            return Err(fail(ErrorCode::SelfLoop, &at, format!("edge {k} [{u}, {v}] is a self-loop")));
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(fail(ErrorCode::DuplicateEdge, &at, format!("edge {k} [{u}, {v}] is a duplicate")));
        }
    }

    let mut owner: Vec<Option<&str>> = vec![None; n];
    for (name, set) in [
        ("train", &file.splits.train),
        ("valid", &file.splits.valid),
        ("test", &file.splits.test),
    ] {
        for (i, &v) in set.iter().enumerate() {
            let at = [Seg::Key("splits"), Seg::Key(name), Seg::Index(i)];
            if v >= n {
                return Err(fail(ErrorCode::NodeRange, &at, format!("{name} split node {v} outside 0..{n}")));
            }
            if let Some(prev) = owner[v] {
                return Err(fail(
                    ErrorCode::SplitOverlap,
                    &at,
                    format!("node {v} is in both the {prev} and {name} splits"),
                ));
            }
            owner[v] = Some(name);
        }
    }

    let features = DenseMatrix::from_vec(n, dim, file.features.into_iter().flatten().collect());
    let edges = file.edges.into_iter().map(|[u, v]| (u, v)).collect();
    let split = Split {
        train: file.splits.train,
        valid: file.splits.valid,
        test: file.splits.test,
    };
    Graph::new(file.name, file.num_classes, features, file.labels, edges, split)
        .map_err(|e| match e {
            Error::Data { code, message } => Error::data(code, format!("{source}: {message}")),
            other => other,
        })
}

/// Serializes `graph` with one feature row and one edge per line.
pub fn write_graph(graph: &Graph) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"name\": {},", json(graph.name()));
    let _ = writeln!(out, "  \"num_nodes\": {},", graph.num_nodes());
    let _ = writeln!(out, "  \"num_classes\": {},", graph.num_classes());
    out.push_str("  \"features\": [");
    for v in 0..graph.num_nodes() {
        let sep = if v == 0 { "\n" } else { ",\n" };
        let _ = write!(out, "{sep}    {}", json(graph.features().row(v)));
    }
    out.push_str(if graph.num_nodes() == 0 { "],\n" } else { "\n  ],\n" });
    let _ = writeln!(out, "  \"labels\": {},", json(graph.labels()));
    out.push_str("  \"edges\": [");
    for (k, &(u, v)) in graph.edges().iter().enumerate() {
        let sep = if k == 0 { "\n" } else { ",\n" };
        let _ = write!(out, "{sep}    [{u}, {v}]");
    }
    out.push_str(if graph.edges().is_empty() { "],\n" } else { "\n  ],\n" });
    let split = graph.split();
    out.push_str("  \"splits\": {\n");
    let _ = writeln!(out, "    \"train\": {},", json(&split.train));
    let _ = writeln!(out, "    \"valid\": {},", json(&split.valid));
    let _ = writeln!(out, "    \"test\": {}", json(&split.test));
    out.push_str("  }\n}\n");
    out
}

fn json<T: serde::Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string(value).expect("plain data serializes")
}

pub fn save_graph(graph: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_graph(graph)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_sbm, SbmConfig};

    fn small() -> Graph {
        generate_sbm(&SbmConfig {
            num_nodes: 12,
            num_classes: 3,
            p_in: 0.6,
            p_out: 0.1,
            feat_dim: 3,
            seed: 4,
            ..SbmConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn round_trip_is_identity() {
        let g = small();
        let text = write_graph(&g);
        let back = parse_graph(&text, "mem").unwrap();
        assert_eq!(back, g);
        assert_eq!(write_graph(&back), text);
    }

    #[test]
    fn round_trip_through_a_file() {
        let g = small();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.json");
        save_graph(&g, &path).unwrap();
        assert_eq!(load_graph(&path).unwrap(), g);
        assert!(load_graph(dir.path().join("missing.json")).is_err());
    }

    fn doc(edges: &str, labels: &str, splits: &str) -> String {
        format!(
            "{{\n\"name\": \"t\",\n\"num_nodes\": 3,\n\"num_classes\": 2,\n\"features\": [[0.0], [1.0], [2.0]],\n\"labels\": {labels},\n\"edges\": [\n[0, 1],\n{edges}\n],\n\"splits\": {splits}\n}}"
        )
    }

    const SPLITS: &str = "{\"train\": [0, 1], \"valid\": [2], \"test\": []}";

    fn code_and_message(text: &str) -> (ErrorCode, String) {
        let err = parse_graph(text, "f.json").unwrap_err();
        (err.code().unwrap(), err.to_string())
    }

    #[test]
    fn each_violation_has_its_own_code_and_line() {
        let (code, msg) = code_and_message(&doc("[2, 2]", "[0, 1, 0]", SPLITS));
        assert_eq!(code, ErrorCode::SelfLoop);
        assert!(msg.contains("f.json:9:"), "{msg}");

        let (code, msg) = code_and_message(&doc("[1, 0]", "[0, 1, 0]", SPLITS));
        assert_eq!(code, ErrorCode::DuplicateEdge);
        assert!(msg.contains("f.json:9:"), "{msg}");

        let (code, msg) = code_and_message(&doc("[1, 2]", "[0, 2, 0]", SPLITS));
        assert_eq!(code, ErrorCode::LabelRange);
        assert!(msg.contains("f.json:6:"), "{msg}");

        let overlap = "{\"train\": [0, 1], \"valid\": [1], \"test\": []}";
        assert_eq!(code_and_message(&doc("[1, 2]", "[0, 1, 0]", overlap)).0, ErrorCode::SplitOverlap);

        let (code, _) = code_and_message(&doc("[1, 5]", "[0, 1, 0]", SPLITS));
        assert_eq!(code, ErrorCode::NodeRange);

        let ragged = doc("[1, 2]", "[0, 1, 0]", SPLITS).replace("[[0.0], [1.0], [2.0]]", "[[0.0], [1.0, 3.0], [2.0]]");
        assert_eq!(code_and_message(&ragged).0, ErrorCode::FeatureLength);
        let short = doc("[1, 2]", "[0, 1, 0]", SPLITS).replace("[[0.0], [1.0], [2.0]]", "[[0.0], [1.0]]");
        assert_eq!(code_and_message(&short).0, ErrorCode::FeatureLength);
    }

    #[test]
    fn syntax_errors_are_malformed() {
        let text = doc("[1, 2]", "[0, 1, 0]", SPLITS);
        assert!(parse_graph(&text, "ok").is_ok());
        let (code, msg) = code_and_message(&text[..text.len() / 2]);
        assert_eq!(code, ErrorCode::Malformed);
        assert!(msg.contains("f.json:"), "{msg}");
        assert_eq!(code_and_message(&text.replace("\"labels\"", "\"labelz\"")).0, ErrorCode::Malformed);
    }
}
