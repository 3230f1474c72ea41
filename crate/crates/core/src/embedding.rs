//! Embedding coordinates and the CSV files that carry embeddings and
//! partitions between tools.

use std::collections::HashMap;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Low-dimensional coordinates, one row per sample, with the eigenvalues
/// that produced each column.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub y: Matrix,
    pub eigenvalues: Vec<f64>,
}

impl Embedding {
    pub fn n(&self) -> usize {
        self.y.rows()
    }

    pub fn dim(&self) -> usize {
        self.y.cols()
    }
}

/// Embedding rows as read back from `index,y1,...,yp[,label]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub index: Vec<usize>,
    pub y: Matrix,
    pub labels: Option<Vec<String>>,
}

/// Writes `index,y1,...,yp[,label]`. Floats use the shortest representation
/// that round-trips exactly.
pub fn write_embedding_csv<W: Write>(
    mut out: W,
    index: &[usize],
    y: &Matrix,
    labels: Option<&[String]>,
) -> Result<()> {
    if index.len() != y.rows() || labels.is_some_and(|l| l.len() != y.rows()) {
        return Err(Error::InvalidInput(
            "embedding rows, indices and labels differ in length".into(),
        ));
    }
    let mut header = String::from("index");
    for j in 1..=y.cols() {
        header.push_str(&format!(",y{j}"));
    }
    if labels.is_some() {
        header.push_str(",label");
    }
    writeln!(out, "{header}")?;
    for (r, &idx) in index.iter().enumerate() {
        let mut line = idx.to_string();
        for v in y.row(r) {
            line.push(',');
            line.push_str(&v.to_string());
        }
        if let Some(l) = labels {
            line.push(',');
            line.push_str(&l[r]);
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn parse_embedding_csv<R: Read>(reader: R) -> Result<EmbeddingTable> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| parse_err(1, 0, e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if headers.first().map(String::as_str) != Some("index") {
        return Err(parse_err(1, 1, "first column must be 'index'".into()));
    }
    let has_label = headers.last().map(String::as_str) == Some("label");
    let p = headers.len() - 1 - usize::from(has_label);
    if p == 0 {
        return Err(parse_err(1, 2, "no coordinate columns".into()));
    }
    for (j, h) in headers[1..=p].iter().enumerate() {
        if *h != format!("y{}", j + 1) {
            return Err(parse_err(
                1,
                j + 2,
                format!("expected column 'y{}', found '{h}'", j + 1),
            ));
        }
    }

    let mut index = Vec::new();
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(r + 2, 0, e.to_string()))?;
        let row = rec.position().map_or(r + 2, |p| p.line() as usize);
        if rec.len() != headers.len() {
            return Err(parse_err(
                row,
                rec.len().min(headers.len()) + 1,
                format!("expected {} cells, found {}", headers.len(), rec.len()),
            ));
        }
        let idx = rec[0]
            .trim()
            .parse::<usize>()
            .map_err(|_| parse_err(row, 1, format!("'{}' is not a row index", &rec[0])))?;
        index.push(idx);
        for c in 1..=p {
            let cell = rec[c].trim();
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| parse_err(row, c + 1, format!("'{cell}' is not a finite number")))?;
            values.push(v);
        }
        if has_label {
            labels.push(rec[p + 1].trim().to_string());
        }
    }
    if index.is_empty() {
        return Err(parse_err(2, 1, "no data rows".into()));
    }
    let y = Matrix::from_vec(index.len(), p, values)?;
    Ok(EmbeddingTable {
        index,
        y,
        labels: has_label.then_some(labels),
    })
}

/// Cluster or class assignments keyed by sample index, read from
/// `index,label`. Labels are arbitrary strings (noise markers such as `-1`
/// are kept as their own group).
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionFile {
    pub index: Vec<usize>,
    pub labels: Vec<String>,
}

impl PartitionFile {
    /// Factor-encodes labels in first-appearance order.
    pub fn codes(&self) -> Vec<usize> {
        let mut seen: HashMap<&str, usize> = HashMap::new();
        self.labels
            .iter()
            .map(|l| {
                let next = seen.len();
                *seen.entry(l.as_str()).or_insert(next)
            })
            .collect()
    }
}

pub fn parse_partition_csv<R: Read>(reader: R) -> Result<PartitionFile> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| parse_err(1, 0, e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if headers.len() != 2 || headers[0] != "index" {
        return Err(parse_err(
            1,
            1,
            "partition header must be 'index,<label>'".into(),
        ));
    }
    let mut out = PartitionFile {
        index: Vec::new(),
        labels: Vec::new(),
    };
    let mut seen = std::collections::HashSet::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(r + 2, 0, e.to_string()))?;
        let row = rec.position().map_or(r + 2, |p| p.line() as usize);
        if rec.len() != 2 {
            return Err(parse_err(
                row,
                rec.len().min(2) + 1,
                format!("expected 2 cells, found {}", rec.len()),
            ));
        }
        let idx = rec[0]
            .trim()
            .parse::<usize>()
            .map_err(|_| parse_err(row, 1, format!("'{}' is not a row index", &rec[0])))?;
        if !seen.insert(idx) {
            return Err(parse_err(row, 1, format!("duplicate index {idx}")));
        }
        out.index.push(idx);
        out.labels.push(rec[1].trim().to_string());
    }
    Ok(out)
}

pub fn write_partition_csv<W: Write>(mut out: W, index: &[usize], labels: &[usize]) -> Result<()> {
    writeln!(out, "index,label")?;
    for (i, l) in index.iter().zip(labels) {
        writeln!(out, "{i},{l}")?;
    }
    Ok(())
}

fn parse_err(row: usize, column: usize, message: String) -> Error {
    Error::Parse {
        row,
        column,
        message,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedding_round_trip_with_labels() {
        let y = Matrix::from_rows(&[[0.1, -2.5], [1e-17, 3.0]]).unwrap();
        let labels = vec!["a".to_string(), "b".to_string()];
        let mut buf = Vec::new();
        write_embedding_csv(&mut buf, &[4, 9], &y, Some(&labels)).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "index,y1,y2,label\n4,0.1,-2.5,a\n9,0.00000000000000001,3,b\n"
        );
        let back = parse_embedding_csv(buf.as_slice()).unwrap();
        assert_eq!(back.index, vec![4, 9]);
        assert_eq!(back.y, y);
        assert_eq!(back.labels, Some(labels));
    }

    #[test]
    fn embedding_errors() {
        assert!(parse_embedding_csv("idx,y1\n0,1\n".as_bytes()).is_err());
        assert!(matches!(
            parse_embedding_csv("index,y1\n0,inf\n".as_bytes()),
            Err(Error::Parse {
                row: 2,
                column: 2,
                ..
            })
        ));
        assert!(parse_embedding_csv("index,y1\n".as_bytes()).is_err());
    }

    #[test]
    fn partition_codes_follow_first_appearance() {
        let p = parse_partition_csv("index,cluster\n0,-1\n1,7\n2,-1\n".as_bytes()).unwrap();
        assert_eq!(p.codes(), vec![0, 1, 0]);
        assert!(parse_partition_csv("index,c\n0,1\n0,2\n".as_bytes()).is_err());
        assert!(parse_partition_csv("index\n0\n".as_bytes()).is_err());
    }
}
