//! File formats: point-cloud and edge-list CSV, filtered-complex JSON,
//! MatrixMarket boundary matrices, dense CSV matrices and JSON reports.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::complex::{ComplexExport, PointCloud, SimplicialComplex, WeightedGraph};
use crate::error::{Error, Result};
use crate::homology::BoundaryMatrix;

fn parse_row(record: &csv::StringRecord) -> Option<Vec<f64>> {
    record.iter().map(|f| f.trim().parse::<f64>().ok()).collect()
}

fn numeric_rows(reader: impl Read) -> Result<Vec<Vec<f64>>> {
    let mut csv = csv::ReaderBuilder::new().has_headers(false).flexible(true).comment(Some(b'#')).from_reader(reader);
    let mut rows = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let record = record?;
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        match parse_row(&record) {
            Some(r) => rows.push(r),
            // a non-numeric first line is a header
            None if i == 0 => {}
            None => return Err(Error::Input(format!("line {}: non-numeric field in {:?}", i + 1, record.iter().collect::<Vec<_>>().join(",")))),
        }
    }
    Ok(rows)
}

/// One point per row; an optional non-numeric header line is skipped.
pub fn read_point_cloud(reader: impl Read) -> Result<PointCloud> {
    let rows = numeric_rows(reader)?;
    if rows.is_empty() {
        return Err(Error::Input("point cloud has no rows".into()));
    }
    PointCloud::new(rows)
}

/// Rows `u,v,weight` with 0-based vertex indices. The vertex count is one
/// more than the largest index unless `n` is given.
pub fn read_edge_list(reader: impl Read, n: Option<usize>) -> Result<WeightedGraph> {
    let rows = numeric_rows(reader)?;
    let mut edges = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        if r.len() != 3 {
            return Err(Error::Input(format!("edge row {} has {} fields, expected 3", i + 1, r.len())));
        }
        let index = |x: f64| {
            if x >= 0.0 && x.fract() == 0.0 {
                Ok(x as usize)
            } else {
                Err(Error::Input(format!("edge row {}: {x} is not a vertex index", i + 1)))
            }
        };
        edges.push((index(r[0])?, index(r[1])?, r[2]));
    }
    let n = n.unwrap_or_else(|| edges.iter().map(|&(u, v, _)| u.max(v) + 1).max().unwrap_or(0));
    WeightedGraph::from_edges(n, &edges)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilteredSimplex {
    pub vertices: Vec<usize>,
    pub value: f64,
}

/// Simplices with filtration values; `at(t)` keeps those with value `<= t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilteredComplex {
    pub n: usize,
    pub simplices: Vec<FilteredSimplex>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ComplexFile {
    Filtered(FilteredComplex),
    Export(ComplexExport),
}

impl FilteredComplex {
    /// Every face must enter no later than the simplices containing it.
    pub fn validate(&self) -> Result<()> {
        let mut values = std::collections::HashMap::new();
        for s in &self.simplices {
            let mut v = s.vertices.clone();
            v.sort_unstable();
            if let Some(&bad) = v.iter().find(|&&x| x >= self.n) {
                return Err(Error::Input(format!("vertex {bad} out of range for {} vertices", self.n)));
            }
            if !s.value.is_finite() {
                return Err(Error::Input(format!("simplex {v:?} has a non-finite value")));
            }
            values.insert(v, s.value);
        }
        for (v, &value) in &values {
            for i in 0..v.len() {
                if v.len() < 2 {
                    break;
                }
                let mut face = v.clone();
                face.remove(i);
                if let Some(&fv) = values.get(&face) {
                    if fv > value {
                        return Err(Error::Input(format!(
                            "face {face:?} enters at {fv}, after its coface {v:?} at {value}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Downward closure of the simplices with value `<= t`.
    pub fn at(&self, t: f64) -> Result<SimplicialComplex> {
        SimplicialComplex::from_simplices(
            self.n,
            self.simplices.iter().filter(|s| s.value <= t).map(|s| s.vertices.clone()),
        )
    }
}

/// Reads either `{n, simplices: [{vertices, value}]}` or a complex export
/// (all simplices at value 0).
pub fn read_complex(reader: impl Read) -> Result<FilteredComplex> {
    let parsed: ComplexFile = serde_json::from_reader(reader)?;
    let fc = match parsed {
        ComplexFile::Filtered(f) => f,
        ComplexFile::Export(e) => FilteredComplex {
            n: e.n_vertices,
            simplices: e
                .simplices
                .into_iter()
                .flatten()
                .map(|vertices| FilteredSimplex { vertices, value: 0.0 })
                .collect(),
        },
    };
    fc.validate()?;
    Ok(fc)
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(mut writer: impl Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut writer, value)?;
    writer.write_all(b"\n")?;
    Ok(())
}

pub fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_json(std::io::BufWriter::new(std::fs::File::create(path)?), value)
}

/// MatrixMarket coordinate format with 1-based indices.
pub fn write_matrix_market(mut writer: impl Write, b: &BoundaryMatrix) -> Result<()> {
    writeln!(writer, "%%MatrixMarket matrix coordinate integer general")?;
    writeln!(writer, "% boundary matrix of dimension {}", b.dimension())?;
    writeln!(writer, "{} {} {}", b.nrows(), b.ncols(), b.nnz())?;
    for (i, j, v) in b.triplets() {
        writeln!(writer, "{} {} {v}", i + 1, j + 1)?;
    }
    Ok(())
}

/// Reads back `(rows, cols, triplets)` with 0-based indices.
pub fn read_matrix_market(reader: impl Read) -> Result<(usize, usize, Vec<(usize, usize, f64)>)> {
    let mut text = String::new();
    let mut reader = reader;
    reader.read_to_string(&mut text)?;
    let mut lines = text.lines().filter(|l| !l.starts_with('%') && !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Input("empty MatrixMarket file".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|x| x.parse().map_err(|_| Error::Input(format!("bad size line {header:?}"))))
        .collect::<Result<_>>()?;
    if dims.len() != 3 {
        return Err(Error::Input(format!("bad size line {header:?}")));
    }
    let mut entries = Vec::with_capacity(dims[2]);
    for line in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        let bad = || Error::Input(format!("bad entry line {line:?}"));
        if f.len() != 3 {
            return Err(bad());
        }
        let i: usize = f[0].parse().map_err(|_| bad())?;
        let j: usize = f[1].parse().map_err(|_| bad())?;
        let v: f64 = f[2].parse().map_err(|_| bad())?;
        if i == 0 || j == 0 || i > dims[0] || j > dims[1] {
            return Err(bad());
        }
        entries.push((i - 1, j - 1, v));
    }
    if entries.len() != dims[2] {
        return Err(Error::Input(format!("expected {} entries, found {}", dims[2], entries.len())));
    }
    Ok((dims[0], dims[1], entries))
}

/// One matrix row per CSV line, full precision.
pub fn write_dense_csv(writer: impl Write, m: &DMatrix<f64>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for i in 0..m.nrows() {
        w.write_record(m.row(i).iter().map(|v| format!("{v:?}")))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dense_csv(reader: impl Read) -> Result<DMatrix<f64>> {
    let rows = numeric_rows(reader)?;
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Input("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_row_iterator(rows.len(), cols, rows.into_iter().flatten()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homology::boundary_matrix;

    #[test]
    fn point_cloud_with_header() {
        let c = read_point_cloud("x,y\n0,0\n1,0.5\n".as_bytes()).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.points()[1], vec![1.0, 0.5]);
    }

    #[test]
    fn malformed_point_cloud() {
        assert!(matches!(read_point_cloud("0,0\n1,abc\n".as_bytes()), Err(Error::Input(_))));
        assert!(read_point_cloud("0,0\n1\n".as_bytes()).is_err());
        assert!(read_point_cloud("".as_bytes()).is_err());
    }

    #[test]
    fn edge_list() {
        let g = read_edge_list("u,v,w\n0,1,1.0\n1,2,2.0\n".as_bytes(), None).unwrap();
        assert_eq!(g.n_vertices(), 3);
        assert_eq!(g.weight(2, 1), Some(2.0));
        assert!(read_edge_list("0,1\n".as_bytes(), None).is_err());
    }

    #[test]
    fn filtered_complex_levels() {
        let json = r#"{"n": 3, "simplices": [
            {"vertices": [0,1], "value": 0}, {"vertices": [1,2], "value": 0},
            {"vertices": [0,2], "value": 0}, {"vertices": [0,1,2], "value": 1}]}"#;
        let fc = read_complex(json.as_bytes()).unwrap();
        assert_eq!(fc.at(0.0).unwrap().count(2).unwrap(), 0);
        assert_eq!(fc.at(1.0).unwrap().count(2).unwrap(), 1);
    }

    #[test]
    fn filtration_order_enforced() {
        let json = r#"{"n": 2, "simplices": [{"vertices": [0], "value": 2}, {"vertices": [0,1], "value": 1}]}"#;
        assert!(read_complex(json.as_bytes()).is_err());
    }

    #[test]
    fn export_round_trip() {
        let c = SimplicialComplex::from_simplices(3, [vec![0, 1], vec![2]]).unwrap();
        let mut buf = Vec::new();
        write_json(&mut buf, &c.export()).unwrap();
        let back = read_complex(buf.as_slice()).unwrap().at(0.0).unwrap();
        assert_eq!(back.export().simplices, c.export().simplices);
    }

    #[test]
    fn matrix_market_round_trip() {
        let c = SimplicialComplex::from_simplices(3, [vec![0, 1, 2]]).unwrap();
        let b = boundary_matrix(&c, 1).unwrap();
        let mut buf = Vec::new();
        write_matrix_market(&mut buf, &b).unwrap();
        let (r, k, e) = read_matrix_market(buf.as_slice()).unwrap();
        let mut m = DMatrix::zeros(r, k);
        for (i, j, v) in e {
            m[(i, j)] = v;
        }
        assert_eq!(m, b.to_dense());
    }

    #[test]
    fn dense_csv_round_trip() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0 / 3.0, -2.0, 0.0, 1e-17]);
        let mut buf = Vec::new();
        write_dense_csv(&mut buf, &m).unwrap();
        assert_eq!(read_dense_csv(buf.as_slice()).unwrap(), m);
    }
}
