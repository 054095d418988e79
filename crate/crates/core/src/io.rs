//! Matrix Market I/O for graphs and operators, plus the JSON sidecar formats
//! (vertex labels, basis manifests).
//!
//! Graphs travel as `coordinate pattern symmetric` files with the lower
//! triangle stored; a `% labels-scheme:` comment records the vertex-label
//! scheme version when labels exist. Structured labels themselves go in a
//! JSON sidecar.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Labels};
use crate::linalg::Csr;

pub fn write_graph_mtx<W: Write>(g: &Graph, w: &mut W) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate pattern symmetric")?;
    if let Some(labels) = g.labels() {
        writeln!(w, "% labels-scheme: {}", labels.scheme)?;
    }
    let entries = g.upper_entries();
    writeln!(
        w,
        "{} {} {}",
        g.num_vertices(),
        g.num_vertices(),
        entries.len()
    )?;
    for (i, j) in entries {
        // lower triangle: row >= column
        writeln!(w, "{} {}", j + 1, i + 1)?;
    }
    Ok(())
}

pub fn read_graph_mtx<R: BufRead>(r: R) -> Result<Graph> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty Matrix Market file".into()))??;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 || !fields[0].starts_with("%%MatrixMarket") {
        return Err(Error::Parse(format!("bad Matrix Market header: {header}")));
    }
    let (object, format, field, symmetry) = (fields[1], fields[2], fields[3], fields[4]);
    if object != "matrix" || format != "coordinate" {
        return Err(Error::Parse(format!(
            "unsupported Matrix Market type: {object} {format}"
        )));
    }
    let has_values = match field {
        "pattern" => false,
        "integer" | "real" => true,
        other => return Err(Error::Parse(format!("unsupported field type: {other}"))),
    };
    let symmetric = match symmetry {
        "symmetric" => true,
        "general" => false,
        other => return Err(Error::Parse(format!("unsupported symmetry: {other}"))),
    };

    let mut size_line = None;
    for line in lines.by_ref() {
        let line = line?;
        if line.starts_with('%') || line.trim().is_empty() {
            continue;
        }
        size_line = Some(line);
        break;
    }
    let size_line = size_line.ok_or_else(|| Error::Parse("missing size line".into()))?;
    let dims: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse(format!("bad size line '{size_line}': {e}")))?;
    if dims.len() != 3 {
        return Err(Error::Parse(format!("bad size line: {size_line}")));
    }
    let (nrows, ncols, nnz) = (dims[0], dims[1], dims[2]);
    if nrows != ncols {
        return Err(Error::DimensionMismatch {
            expected: nrows,
            found: ncols,
        });
    }

    let mut entries: Vec<(usize, usize)> = Vec::with_capacity(nnz);
    let mut count = 0usize;
    for line in lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        let expect = if has_values { 3 } else { 2 };
        if toks.len() != expect {
            return Err(Error::Parse(format!("bad entry line: {trimmed}")));
        }
        let i: usize = toks[0]
            .parse()
            .map_err(|e| Error::Parse(format!("bad row index '{}': {e}", toks[0])))?;
        let j: usize = toks[1]
            .parse()
            .map_err(|e| Error::Parse(format!("bad column index '{}': {e}", toks[1])))?;
        if i == 0 || j == 0 || i > nrows || j > ncols {
            return Err(Error::Parse(format!("entry ({i}, {j}) outside matrix")));
        }
        if has_values {
            let v: f64 = toks[2]
                .parse()
                .map_err(|e| Error::Parse(format!("bad value '{}': {e}", toks[2])))?;
            if v != 1.0 {
                return Err(Error::NonBinaryEntry {
                    row: i - 1,
                    col: j - 1,
                    value: v,
                });
            }
        }
        entries.push((i - 1, j - 1));
        count += 1;
    }
    if count != nnz {
        return Err(Error::Parse(format!(
            "expected {nnz} entries, found {count}"
        )));
    }
    if !symmetric {
        // a general file must still describe a symmetric matrix
        let set: std::collections::BTreeSet<(usize, usize)> = entries.iter().copied().collect();
        for &(i, j) in &set {
            if !set.contains(&(j, i)) {
                return Err(Error::NotSymmetric { row: i, col: j });
            }
        }
    }
    Graph::from_entries(nrows, &entries)
}

pub fn read_graph_file(path: &Path) -> Result<Graph> {
    let file = std::fs::File::open(path)?;
    read_graph_mtx(std::io::BufReader::new(file))
}

pub fn write_graph_file(g: &Graph, path: &Path) -> Result<()> {
    let mut out = Vec::new();
    write_graph_mtx(g, &mut out)?;
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_labels_json<W: Write>(labels: &Labels, w: &mut W) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, labels)?;
    writeln!(w)?;
    Ok(())
}

pub fn read_labels_json<R: BufRead>(r: R) -> Result<Labels> {
    Ok(serde_json::from_reader(r)?)
}

pub fn read_labels_file(path: &Path) -> Result<Labels> {
    let file = std::fs::File::open(path)?;
    read_labels_json(std::io::BufReader::new(file))
}

pub fn write_labels_file(labels: &Labels, path: &Path) -> Result<()> {
    let mut out = Vec::new();
    write_labels_json(labels, &mut out)?;
    std::fs::write(path, out)?;
    Ok(())
}

/// Export a symmetric operator as `coordinate real symmetric`, lower triangle.
pub fn write_operator_mtx<W: Write>(csr: &Csr, w: &mut W) -> Result<()> {
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..csr.n {
        for idx in csr.row_ptr[i]..csr.row_ptr[i + 1] {
            let j = csr.col_idx[idx];
            let v = csr.values[idx];
            if j <= i && v != 0.0 {
                entries.push((i, j, v));
            }
        }
    }
    writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(w, "{} {} {}", csr.n, csr.n, entries.len())?;
    for (i, j, v) in entries {
        writeln!(w, "{} {} {:.17e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

/// Companion metadata for an enumerated sector basis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisManifest {
    pub k: usize,
    pub n: usize,
    pub ordering: String,
    pub count: usize,
}

pub fn write_basis_manifest<W: Write>(manifest: &BasisManifest, w: &mut W) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, manifest)?;
    writeln!(w)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete_graph, path_graph};

    #[test]
    fn graph_roundtrip_through_mtx() {
        let g = complete_graph(4).add_all_self_loops();
        let mut buf = Vec::new();
        write_graph_mtx(&g, &mut buf).unwrap();
        let back = read_graph_mtx(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn scheme_comment_is_written() {
        let g = path_graph(2)
            .with_labels(Labels {
                scheme: "ztj/1".into(),
                tuples: vec![vec![0, 1, 0], vec![1, 1, 0]],
            })
            .unwrap();
        let mut buf = Vec::new();
        write_graph_mtx(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("% labels-scheme: ztj/1"));
    }

    #[test]
    fn rejects_bad_headers_and_values() {
        let bad = "%%MatrixMarket matrix array real general\n2 2 1\n1 1\n";
        assert!(read_graph_mtx(std::io::Cursor::new(bad)).is_err());
        let nonbinary = "%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n2 1 3.0\n";
        assert!(matches!(
            read_graph_mtx(std::io::Cursor::new(nonbinary)).unwrap_err(),
            Error::NonBinaryEntry { .. }
        ));
        let asym = "%%MatrixMarket matrix coordinate pattern general\n2 2 1\n2 1\n";
        assert!(matches!(
            read_graph_mtx(std::io::Cursor::new(asym)).unwrap_err(),
            Error::NotSymmetric { .. }
        ));
    }

    #[test]
    fn operator_export_has_lower_triangle() {
        let csr = Csr::from_triplets(
            2,
            vec![(0, 0, 2.0), (0, 1, -1.5), (1, 0, -1.5), (1, 1, 0.5)],
        );
        let mut buf = Vec::new();
        write_operator_mtx(&csr, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("real symmetric"));
        assert_eq!(text.lines().count(), 2 + 3);
    }
}
