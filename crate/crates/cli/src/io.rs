//! Plain-text graph and feature formats.
//!
//! Edge lists hold one edge per line as two whitespace-separated integer ids;
//! `#` starts a comment line. Feature files hold `node_id<TAB>i1,i2,...` per
//! line, listing the positions of 1-valued binary features, with an optional
//! `#d=<int>` header fixing the dimension.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use im_meta::{FeatureMatrix, UndirectedGraph};

use crate::{Error, Result};

/// A graph read from an edge list, with its original ids.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedGraph {
    pub graph: UndirectedGraph,
    /// `ids[dense] = original`.
    pub ids: Vec<u64>,
    pub duplicates: usize,
    pub self_loops: usize,
}

impl LoadedGraph {
    /// `original → dense` lookup.
    pub fn index(&self) -> HashMap<u64, usize> {
        self.ids
            .iter()
            .enumerate()
            .map(|(i, &id)| (id, i))
            .collect()
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Reads an edge list. Ids are assigned dense indices in order of first
/// appearance; duplicate edges and self-loops are dropped and counted.
pub fn read_edge_list<R: BufRead>(reader: R) -> Result<LoadedGraph> {
    let mut index: HashMap<u64, usize> = HashMap::new();
    let mut ids = Vec::new();
    let mut edges = Vec::new();
    let mut self_loops = 0;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let mut fields = text.split_whitespace();
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(parse_err(
                line_no,
                format!("expected two ids, got {text:?}"),
            ));
        };
        let mut id = |s: &str| -> Result<usize> {
            let raw: u64 = s
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad node id {s:?}")))?;
            Ok(*index.entry(raw).or_insert_with(|| {
                ids.push(raw);
                ids.len() - 1
            }))
        };
        let (u, v) = (id(a)?, id(b)?);
        if u == v {
            self_loops += 1;
        } else {
            edges.push((u, v));
        }
    }
    let mut graph = UndirectedGraph::new(ids.len());
    let mut duplicates = 0;
    for (u, v) in edges {
        if !graph.add_edge(u, v)? {
            duplicates += 1;
        }
    }
    Ok(LoadedGraph {
        graph,
        ids,
        duplicates,
        self_loops,
    })
}

pub fn load_edge_list(path: impl AsRef<Path>) -> Result<LoadedGraph> {
    let loaded = read_edge_list(BufReader::new(File::open(path.as_ref())?))?;
    if loaded.duplicates + loaded.self_loops > 0 {
        log::warn!(
            "{}: dropped {} duplicate edges and {} self-loops",
            path.as_ref().display(),
            loaded.duplicates,
            loaded.self_loops
        );
    }
    Ok(loaded)
}

/// Writes `graph` as an edge list, mapping dense indices through `ids` when
/// given.
pub fn write_edge_list<W: Write>(
    mut out: W,
    graph: &UndirectedGraph,
    ids: Option<&[u64]>,
) -> Result<()> {
    for (u, v) in graph.edges() {
        match ids {
            Some(ids) => writeln!(out, "{} {}", ids[u], ids[v])?,
            None => writeln!(out, "{u} {v}")?,
        }
    }
    Ok(())
}

/// Reads a feature file for `n` nodes. Node ids go through `index` when
/// given (ids absent from it are skipped) and are used as dense indices
/// otherwise. Nodes missing from the file get empty rows.
pub fn read_features<R: BufRead>(
    reader: R,
    n: usize,
    index: Option<&HashMap<u64, usize>>,
) -> Result<FeatureMatrix> {
    let mut declared: Option<usize> = None;
    let mut rows: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut max_seen: Option<u32> = None;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        let text = line.trim_end();
        if text.trim().is_empty() {
            continue;
        }
        if let Some(rest) = text.strip_prefix('#') {
            if let Some(d) = rest.trim().strip_prefix("d=") {
                declared =
                    Some(d.trim().parse().map_err(|_| {
                        parse_err(line_no, format!("bad dimension header {text:?}"))
                    })?);
            }
            continue;
        }
        let (node, list) = text.split_once('\t').unwrap_or((text, ""));
        let raw: u64 = node
            .trim()
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad node id {node:?}")))?;
        let mut indices = Vec::new();
        for tok in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let x: u32 = tok
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad feature index {tok:?}")))?;
            if let Some(d) = declared {
                if x as usize >= d {
                    return Err(parse_err(
                        line_no,
                        format!("feature index {x} not below declared d={d}"),
                    ));
                }
            }
            max_seen = max_seen.max(Some(x));
            indices.push(x);
        }
        let dense = match index {
            Some(map) => match map.get(&raw) {
                Some(&u) => u,
                None => continue,
            },
            None => raw as usize,
        };
        if dense >= n {
            return Err(parse_err(
                line_no,
                format!("node {raw} outside the {n}-node graph"),
            ));
        }
        rows[dense].extend(indices);
    }
    let dim = declared.unwrap_or_else(|| max_seen.map_or(0, |m| m as usize + 1));
    Ok(FeatureMatrix::new(dim, rows)?)
}

pub fn load_features(
    path: impl AsRef<Path>,
    n: usize,
    index: Option<&HashMap<u64, usize>>,
) -> Result<FeatureMatrix> {
    read_features(BufReader::new(File::open(path)?), n, index)
}

/// Writes `features` with a `#d=` header, one line per node.
pub fn write_features<W: Write>(
    mut out: W,
    features: &FeatureMatrix,
    ids: Option<&[u64]>,
) -> Result<()> {
    writeln!(out, "#d={}", features.dim())?;
    for (u, row) in features.rows().iter().enumerate() {
        let id = ids.map_or(u as u64, |ids| ids[u]);
        let list: Vec<String> = row.iter().map(u32::to_string).collect();
        writeln!(out, "{id}\t{}", list.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_examples() {
        let g = read_edge_list("0 1\n1 2\n".as_bytes()).unwrap();
        assert_eq!((g.graph.node_count(), g.graph.edge_count()), (3, 2));
        let dup = read_edge_list("# c\n0 1\n1 0\n0 1\n".as_bytes()).unwrap();
        assert_eq!((dup.graph.edge_count(), dup.duplicates), (1, 2));
        let lp = read_edge_list("0 0\n0 1\n".as_bytes()).unwrap();
        assert_eq!((lp.self_loops, lp.graph.edge_count()), (1, 1));
    }

    #[test]
    fn edge_list_remaps_sparse_ids() {
        let g = read_edge_list("100 7\n7 42\n".as_bytes()).unwrap();
        assert_eq!(g.ids, vec![100, 7, 42]);
        assert!(g.graph.has_edge(0, 1) && g.graph.has_edge(1, 2));
    }

    #[test]
    fn edge_list_errors_name_the_line() {
        let err = read_edge_list("0 1\n\n1 x\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        assert!(matches!(
            read_edge_list("1 2 3\n".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn feature_examples() {
        let f = read_features("#d=4\n0\t1,3\n2\t\n".as_bytes(), 3, None).unwrap();
        assert_eq!(f.dense_row(0), vec![0.0, 1.0, 0.0, 1.0]);
        assert!(f.row(1).is_empty());
        assert!(f.row(2).is_empty());
        let inferred = read_features("0\t5\n".as_bytes(), 1, None).unwrap();
        assert_eq!(inferred.dim(), 6);
        assert!(matches!(
            read_features("#d=4\n0\t4\n".as_bytes(), 1, None),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn features_follow_id_map() {
        let g = read_edge_list("10 20\n".as_bytes()).unwrap();
        let f = read_features("#d=3\n20\t2\n99\t1\n".as_bytes(), 2, Some(&g.index())).unwrap();
        assert_eq!(f.row(1), &[2]);
        assert!(f.row(0).is_empty());
    }
}
