//! Plain-text graph files and atomic writes.
//!
//! - edge list: two whitespace-separated node ids per line, `#` starts a comment line
//! - features: CSV of reals, row `i` is node `i`
//! - labels: one class index per line, `-1` for unknown
//! - mask: one `0`/`1` per line, `1` marks a labeled node

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use delta_core::graph::Graph;
use delta_core::numerics::DenseMatrix;

use crate::error::{HarnessError, Result};

/// Paths of the four files describing one graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphFiles {
    pub edges: PathBuf,
    pub features: PathBuf,
    pub labels: PathBuf,
    pub mask: PathBuf,
}

impl GraphFiles {
    /// `<dir>/<prefix>.edges`, `.features.csv`, `.labels`, `.mask`.
    pub fn in_dir(dir: &Path, prefix: &str) -> Self {
        Self {
            edges: dir.join(format!("{prefix}.edges")),
            features: dir.join(format!("{prefix}.features.csv")),
            labels: dir.join(format!("{prefix}.labels")),
            mask: dir.join(format!("{prefix}.mask")),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> HarnessError {
    HarnessError::Parse {
        path: path.to_owned(),
        line,
        message: message.into(),
    }
}

/// Content lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_edge_list(path: &Path, text: &str) -> Result<Vec<(usize, usize)>> {
    content_lines(text)
        .map(|(n, line)| {
            let mut fields = line.split_whitespace();
            let mut id = || -> Result<usize> {
                let tok = fields.next().ok_or_else(|| parse_error(path, n, "expected two node ids"))?;
                tok.parse().map_err(|_| parse_error(path, n, format!("invalid node id `{tok}`")))
            };
            let edge = (id()?, id()?);
            if fields.next().is_some() {
                return Err(parse_error(path, n, "expected exactly two node ids"));
            }
            Ok(edge)
        })
        .collect()
}

pub fn parse_features(path: &Path, text: &str) -> Result<DenseMatrix> {
    let mut data = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for (n, line) in content_lines(text) {
        let before = data.len();
        for tok in line.split(',') {
            let v: f64 = tok
                .trim()
                .parse()
                .map_err(|_| parse_error(path, n, format!("invalid number `{}`", tok.trim())))?;
            if !v.is_finite() {
                return Err(parse_error(path, n, "non-finite feature value"));
            }
            data.push(v);
        }
        let w = data.len() - before;
        match width {
            None => width = Some(w),
            Some(expected) if expected != w => {
                return Err(parse_error(path, n, format!("{w} columns, expected {expected}")));
            }
            _ => {}
        }
        rows += 1;
    }
    Ok(DenseMatrix::from_vec(rows, width.unwrap_or(0), data)?)
}

pub fn parse_labels(path: &Path, text: &str) -> Result<Vec<Option<usize>>> {
    content_lines(text)
        .map(|(n, line)| match line.parse::<i64>() {
            Ok(-1) => Ok(None),
            Ok(v) if v >= 0 => Ok(Some(v as usize)),
            _ => Err(parse_error(path, n, format!("invalid label `{line}`"))),
        })
        .collect()
}

pub fn parse_mask(path: &Path, text: &str) -> Result<Vec<bool>> {
    content_lines(text)
        .map(|(n, line)| match line {
            "0" => Ok(false),
            "1" => Ok(true),
            _ => Err(parse_error(path, n, format!("mask entries are 0 or 1, got `{line}`"))),
        })
        .collect()
}

/// Loads a graph; node count comes from the feature file.
pub fn load_graph(files: &GraphFiles, num_classes: usize) -> Result<Graph> {
    let edges = parse_edge_list(&files.edges, &read(&files.edges)?)?;
    let features = parse_features(&files.features, &read(&files.features)?)?;
    let labels = parse_labels(&files.labels, &read(&files.labels)?)?;
    let mask = parse_mask(&files.mask, &read(&files.mask)?)?;
    let n = features.rows();
    for (path, len) in [(&files.labels, labels.len()), (&files.mask, mask.len())] {
        if len != n {
            return Err(HarnessError::validation(format!(
                "{}: {len} entries for {n} nodes",
                path.display()
            )));
        }
    }
    if let Some(&(a, b)) = edges.iter().find(|&&(a, b)| a >= n || b >= n) {
        return Err(HarnessError::validation(format!(
            "{}: edge ({a}, {b}) references a node beyond {n}",
            files.edges.display()
        )));
    }
    if let Some(i) = (0..n).find(|&i| mask[i] && labels[i].is_none()) {
        return Err(HarnessError::validation(format!(
            "{}: node {i} is marked labeled but has label -1",
            files.mask.display()
        )));
    }
    if let Some(i) = (0..n).find(|&i| labels[i].is_some_and(|c| c >= num_classes)) {
        return Err(HarnessError::validation(format!(
            "{}: node {i} has a label outside 0..{num_classes}",
            files.labels.display()
        )));
    }
    Ok(Graph::from_edges(&edges, features, labels, mask, num_classes)?)
}

pub fn format_edge_list(g: &Graph) -> String {
    let mut out = String::from("# undirected edges, one per line\n");
    for i in 0..g.num_nodes() {
        for &j in g.neighbors(i).iter().filter(|&&j| j > i) {
            let _ = writeln!(out, "{i} {j}");
        }
    }
    out
}

pub fn format_features(x: &DenseMatrix) -> String {
    let mut out = String::new();
    for r in 0..x.rows() {
        for (c, v) in x.row(r).iter().enumerate() {
            if c > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v:?}");
        }
        out.push('\n');
    }
    out
}

pub fn format_labels(labels: &[Option<usize>]) -> String {
    labels
        .iter()
        .map(|l| match l {
            Some(c) => format!("{c}\n"),
            None => "-1\n".to_owned(),
        })
        .collect()
}

pub fn format_mask(mask: &[bool]) -> String {
    mask.iter().map(|&m| if m { "1\n" } else { "0\n" }).collect()
}

pub fn save_graph(g: &Graph, files: &GraphFiles) -> Result<()> {
    write_atomic(&files.edges, format_edge_list(g).as_bytes())?;
    write_atomic(&files.features, format_features(g.features()).as_bytes())?;
    write_atomic(&files.labels, format_labels(g.labels()).as_bytes())?;
    write_atomic(&files.mask, format_mask(g.labeled_mask()).as_bytes())
}

/// Writes into a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| HarnessError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| HarnessError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| HarnessError::io(path, e))?;
    tmp.persist(path).map_err(|e| HarnessError::io(path, e.error))?;
    Ok(())
}

pub fn read_to_string(path: &Path) -> Result<String> {
    read(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("t")
    }

    #[test]
    fn edge_list_comments_and_errors() {
        let edges = parse_edge_list(p(), "# header\n0 1\n\n  2\t3 \n").unwrap();
        assert_eq!(edges, vec![(0, 1), (2, 3)]);
        let err = parse_edge_list(p(), "0 1\n0\n").unwrap_err();
        assert!(err.to_string().contains("t:2"), "{err}");
        assert!(parse_edge_list(p(), "0 1 2\n").is_err());
        assert!(parse_edge_list(p(), "0 -1\n").is_err());
    }

    #[test]
    fn features_need_constant_width() {
        let x = parse_features(p(), "1,2\n3.5, -4\n").unwrap();
        assert_eq!(x.shape(), (2, 2));
        assert_eq!(x.get(1, 1), -4.0);
        assert!(parse_features(p(), "1,2\n3\n").is_err());
        assert!(parse_features(p(), "1,nan\n").is_err());
    }

    #[test]
    fn labels_and_masks() {
        assert_eq!(parse_labels(p(), "0\n-1\n3\n").unwrap(), vec![Some(0), None, Some(3)]);
        assert!(parse_labels(p(), "-2\n").is_err());
        assert_eq!(parse_mask(p(), "1\n0\n").unwrap(), vec![true, false]);
        assert!(parse_mask(p(), "2\n").is_err());
    }

    #[test]
    fn features_round_trip_exactly() {
        let x = DenseMatrix::from_rows(&[[0.1, -1e-300], [1.0 / 3.0, 12345.678]]).unwrap();
        assert_eq!(parse_features(p(), &format_features(&x)).unwrap(), x);
    }
}
