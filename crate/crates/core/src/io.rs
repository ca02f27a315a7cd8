//! Text formats for embeddings and analysis outputs.
//!
//! Embedding files are TSV: one header line
//! `# signed-poincare-embedding<TAB>dim=K<TAB>eps=E<TAB>virtual_rows=V`
//! followed by one `label<TAB>x_1 ... x_K` row per node. Coordinates carry 17
//! significant digits so a write/read cycle is exact. Virtual rows, when
//! present, come last.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::analysis::{BandSummary, ProfileRow};
use crate::eval::EdgeOperator;
use crate::graph::{EdgeRecord, Sign};
use crate::manifold::{EmbeddingStore, GeometryError};

const MAGIC: &str = "# signed-poincare-embedding";
pub const VIRTUAL_POSITIVE_LABEL: &str = "__virtual_positive__";
pub const VIRTUAL_NEGATIVE_LABEL: &str = "__virtual_negative__";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("embedding header missing or malformed: {0}")]
    Header(String),
    #[error("line {line}: {message}")]
    Row { line: usize, message: String },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// An embedding together with the node labels of its rows.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingFile {
    pub labels: Vec<String>,
    pub store: EmbeddingStore,
}

impl EmbeddingFile {
    /// Pairs node labels with a store that may carry trailing virtual rows.
    pub fn new(node_labels: &[String], store: EmbeddingStore) -> Self {
        let mut labels = node_labels.to_vec();
        match store.virtual_rows() {
            0 => {}
            2 => {
                labels.push(VIRTUAL_POSITIVE_LABEL.into());
                labels.push(VIRTUAL_NEGATIVE_LABEL.into());
            }
            v => labels.extend((0..v).map(|i| format!("__virtual_{i}__"))),
        }
        assert_eq!(labels.len(), store.rows());
        Self { labels, store }
    }

    pub fn node_labels(&self) -> &[String] {
        &self.labels[..self.store.node_rows()]
    }

    pub fn index(&self) -> HashMap<&str, usize> {
        self.node_labels().iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect()
    }

    /// Same embedding with the virtual rows dropped.
    pub fn without_virtual(&self) -> Self {
        Self { labels: self.node_labels().to_vec(), store: self.store.without_virtual() }
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let s = &self.store;
        writeln!(out, "{MAGIC}\tdim={}\teps={:e}\tvirtual_rows={}", s.dim(), s.eps(), s.virtual_rows())?;
        for (i, label) in self.labels.iter().enumerate() {
            out.write_all(label.as_bytes())?;
            for x in s.row(i) {
                write!(out, "\t{x:.16e}")?;
            }
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self, FormatError> {
        let mut lines = input.lines();
        let header = lines.next().ok_or_else(|| FormatError::Header("empty file".into()))??;
        let mut fields = header.split('\t');
        if fields.next() != Some(MAGIC) {
            return Err(FormatError::Header(header.clone()));
        }
        let mut meta: HashMap<&str, &str> = HashMap::new();
        for f in fields {
            let (k, v) = f.split_once('=').ok_or_else(|| FormatError::Header(header.clone()))?;
            meta.insert(k, v);
        }
        let get = |key: &str| meta.get(key).copied().ok_or_else(|| FormatError::Header(format!("missing `{key}`")));
        let bad = |key: &str| FormatError::Header(format!("bad `{key}` value"));
        let dim: usize = get("dim")?.parse().map_err(|_| bad("dim"))?;
        let eps: f64 = get("eps")?.parse().map_err(|_| bad("eps"))?;
        let virtual_rows: usize = get("virtual_rows")?.parse().map_err(|_| bad("virtual_rows"))?;

        let mut labels = Vec::new();
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate() {
            let line = line?;
            let lineno = n + 2;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            let label = parts.next().unwrap_or_default().to_owned();
            let coords: Vec<f64> = parts
                .map(|p| p.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| FormatError::Row { line: lineno, message: e.to_string() })?;
            if coords.len() != dim {
                return Err(FormatError::Row {
                    line: lineno,
                    message: format!("expected {dim} coordinates, found {}", coords.len()),
                });
            }
            labels.push(label);
            rows.push(coords);
        }
        let mut store = EmbeddingStore::from_rows(&rows, dim, eps)?;
        if virtual_rows > store.rows() {
            return Err(FormatError::Header(format!("virtual_rows={virtual_rows} exceeds row count")));
        }
        store.set_virtual_rows(virtual_rows);
        Ok(Self { labels, store })
    }
}

fn fmt_ratio(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x}")
    }
}

pub fn write_bands<W: Write>(mut out: W, bands: &[BandSummary]) -> std::io::Result<()> {
    writeln!(out, "band\tsize\td_pos\td_neg\tratio\tmean_norm")?;
    for b in bands {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            b.band,
            b.nodes.len(),
            b.mean_positive_degree,
            b.mean_negative_degree,
            fmt_ratio(b.degree_ratio),
            b.mean_norm
        )?;
    }
    Ok(())
}

pub fn write_profile<W: Write>(mut out: W, labels: &[String], rows: &[ProfileRow]) -> std::io::Result<()> {
    writeln!(out, "label\tnorm\tmean_distance")?;
    for r in rows {
        writeln!(out, "{}\t{}\t{}", labels[r.node], r.norm, r.mean_distance)?;
    }
    Ok(())
}

pub fn write_predictions<W: Write>(
    mut out: W,
    labels: &[String],
    edges: &[EdgeRecord],
    scores: &[f64],
    predicted: &[Sign],
) -> std::io::Result<()> {
    writeln!(out, "src\tdst\ttrue_sign\tscore\tpredicted_sign")?;
    for ((e, s), p) in edges.iter().zip(scores).zip(predicted) {
        writeln!(out, "{}\t{}\t{}\t{}\t{}", labels[e.src], labels[e.dst], e.sign.value(), s, p.value())?;
    }
    Ok(())
}

pub fn write_features<W: Write>(
    mut out: W,
    store: &EmbeddingStore,
    labels: &[String],
    edges: &[EdgeRecord],
    op: EdgeOperator,
) -> std::io::Result<()> {
    let width = op.output_dim(store.dim());
    write!(out, "# operator={op}\nsrc\tdst\tsign")?;
    for i in 0..width {
        write!(out, "\tf{i}")?;
    }
    out.write_all(b"\n")?;
    for e in edges {
        write!(out, "{}\t{}\t{}", labels[e.src], labels[e.dst], e.sign.value())?;
        for x in op.apply(store.row(e.src), store.row(e.dst)) {
            write!(out, "\t{x}")?;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}
