use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{ExperimentConfig, HarnessError};
use crate::graph::{DynamicGraph, Interner};
use crate::oracle::Edge;

/// Edges in file order with their labels interned densely in order of first
/// appearance.
#[derive(Clone, Debug, Default)]
pub struct EdgeStream {
    pub labels: Interner,
    pub edges: Vec<Edge>,
    /// Third column when present; kept verbatim.
    pub timestamps: Vec<Option<String>>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_owned(),
        source,
    }
}

/// Reads `u v [timestamp]` lines. Blank lines and lines starting with `#` are
/// skipped; duplicates and self-loops are kept for the engine to reject.
pub fn load_edge_stream(path: &Path) -> Result<EdgeStream, HarnessError> {
    let file = File::open(path).map_err(io_err(path))?;
    parse_edge_stream(BufReader::new(file), path)
}

pub fn parse_edge_stream<R: BufRead>(reader: R, path: &Path) -> Result<EdgeStream, HarnessError> {
    let mut out = EdgeStream::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = body.split_whitespace().collect();
        let parse_err = |message: String| HarnessError::Parse {
            path: path.to_owned(),
            line: i + 1,
            message,
        };
        match tokens.as_slice() {
            [u, v] | [u, v, _] => {
                let a = out.labels.intern(u);
                let b = out.labels.intern(v);
                out.edges.push((a, b));
                out.timestamps.push(tokens.get(2).map(|t| t.to_string()));
            }
            [_] => return Err(parse_err("expected two endpoints".into())),
            _ => {
                return Err(parse_err(format!(
                    "expected `u v [timestamp]`, found {} fields",
                    tokens.len()
                )))
            }
        }
    }
    Ok(out)
}

/// Writes one `u v` line per edge.
pub fn write_edge_list(g: &DynamicGraph, path: &Path) -> Result<(), HarnessError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    writeln!(
        w,
        "# {} vertices, {} edges{}",
        g.vertex_count(),
        g.edge_count(),
        if g.is_directed() { ", directed" } else { "" }
    )
    .map_err(io_err(path))?;
    for (u, v) in g.edges() {
        writeln!(w, "{u} {v}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// A CSV table with a fixed header.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn write_to<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for r in &self.rows {
            out.write_record(r)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf)
            .expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), HarnessError> {
        let file = File::create(path).map_err(io_err(path))?;
        self.write_to(BufWriter::new(file))
            .map_err(|e| HarnessError::Io {
                path: path.to_owned(),
                source: e.into(),
            })
    }
}

/// `out.csv` -> `out.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| HarnessError::Io {
        path: path.to_owned(),
        source: e.into(),
    })?;
    writeln!(w).and_then(|_| w.flush()).map_err(io_err(path))
}

#[derive(Serialize)]
struct Sidecar<'a, R: Serialize> {
    command: &'a str,
    config: &'a ExperimentConfig,
    report: &'a R,
}

/// Writes the config and full report next to `csv`; returns the path written.
pub fn write_sidecar<R: Serialize>(
    csv: &Path,
    command: &str,
    config: &ExperimentConfig,
    report: &R,
) -> Result<PathBuf, HarnessError> {
    let path = sidecar_path(csv);
    write_json(
        &path,
        &Sidecar {
            command,
            config,
            report,
        },
    )?;
    Ok(path)
}

/// Vertex and edge counts of a generated graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GraphSummary {
    pub vertices: usize,
    pub edges: usize,
    pub directed: bool,
}

impl GraphSummary {
    pub fn of(g: &DynamicGraph) -> Self {
        Self {
            vertices: g.vertex_count(),
            edges: g.edge_count(),
            directed: g.is_directed(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::VertexId;

    fn parse(text: &str) -> Result<EdgeStream, HarnessError> {
        parse_edge_stream(text.as_bytes(), Path::new("mem"))
    }

    #[test]
    fn labels_in_file_order() {
        let s = parse("a b\nb c").unwrap();
        assert_eq!(
            s.edges,
            vec![(VertexId(0), VertexId(1)), (VertexId(1), VertexId(2))]
        );
        assert_eq!(s.labels.label(VertexId(2)), Some("c"));
    }

    #[test]
    fn comments_timestamps_and_duplicates() {
        let s = parse("# header\n\n1 2 100\n2 1 101\n1 2\n").unwrap();
        assert_eq!(s.edges.len(), 3);
        assert_eq!(s.timestamps[0].as_deref(), Some("100"));
        assert_eq!(s.timestamps[2], None);
    }

    #[test]
    fn malformed_lines_report_location() {
        match parse("1 2\n# ok\n3\n") {
            Err(HarnessError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse("1 2 3 4"),
            Err(HarnessError::Parse { line: 1, .. })
        ));
        let missing = load_edge_stream(Path::new("/nonexistent/edges.txt")).unwrap_err();
        assert_eq!(missing.exit_code(), 2);
    }

    #[test]
    fn csv_quotes_fields() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), "x,y".into()]);
        assert_eq!(t.to_csv_string(), "a,b\n1,\"x,y\"\n");
        assert_eq!(
            sidecar_path(Path::new("out/run.csv")),
            PathBuf::from("out/run.json")
        );
    }
}
