use std::path::Path;

use ndarray::Array2;

use super::layout::{Dataset, FeatureVector};
use super::plv::ConnMatrix;
use crate::error::{Error, Result};
use crate::sigproc::Band;

const META_COLS: [&str; 3] = ["subject_id", "label", "epoch"];

pub(crate) fn parse_cell(path: &Path, row: usize, col: usize, cell: &str) -> Result<f64> {
    cell.trim().parse::<f64>().map_err(|_| Error::NonNumeric {
        path: path.to_path_buf(),
        row,
        col,
        cell: cell.to_string(),
    })
}

pub(crate) fn open(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    Ok(csv::ReaderBuilder::new().has_headers(true).from_path(path)?)
}

/// Writes one row per epoch: `subject_id,label,epoch,<features...>`.
pub fn write_dataset(ds: &Dataset, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let header: Vec<&str> = META_COLS
        .iter()
        .copied()
        .chain(ds.names.iter().map(String::as_str))
        .collect();
    w.write_record(&header)?;
    for r in &ds.rows {
        let mut rec = vec![r.subject_id.clone(), r.label.to_string(), r.epoch_index.to_string()];
        rec.extend(r.values.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let mut rdr = open(path)?;
    let header = rdr.headers()?.clone();
    if header.len() < META_COLS.len() || header.iter().take(3).ne(META_COLS.iter().copied()) {
        return Err(Error::Data(format!(
            "{}: header must start with {}",
            path.display(),
            META_COLS.join(",")
        )));
    }
    let names: Vec<String> = header.iter().skip(3).map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        let label = rec[1].parse()?;
        let epoch_index = rec[2].trim().parse::<usize>().map_err(|_| Error::NonNumeric {
            path: path.to_path_buf(),
            row,
            col: 3,
            cell: rec[2].to_string(),
        })?;
        let values = rec
            .iter()
            .enumerate()
            .skip(3)
            .map(|(c, cell)| parse_cell(path, row, c + 1, cell))
            .collect::<Result<Vec<_>>>()?;
        rows.push(FeatureVector {
            values,
            label,
            subject_id: rec[0].to_string(),
            epoch_index,
        });
    }
    Ok(Dataset { names, rows })
}

/// Square CSV with a label header row and a label first column.
pub fn write_conn_matrix(m: &ConnMatrix, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec![String::new()];
    header.extend(m.labels.iter().cloned());
    w.write_record(&header)?;
    for (i, l) in m.labels.iter().enumerate() {
        let mut rec = vec![l.clone()];
        rec.extend(m.values.row(i).iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_conn_matrix(path: &Path, band: Band, subject_id: &str) -> Result<ConnMatrix> {
    let mut rdr = open(path)?;
    let labels: Vec<String> = rdr.headers()?.iter().skip(1).map(str::to_string).collect();
    let n = labels.len();
    let mut values = Array2::zeros((n, n));
    let mut n_rows = 0;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if i >= n || rec.len() != n + 1 {
            return Err(Error::ChannelMismatch {
                path: path.to_path_buf(),
                expected: n,
                found: if i >= n { i + 1 } else { rec.len().saturating_sub(1) },
            });
        }
        for j in 0..n {
            values[[i, j]] = parse_cell(path, i + 2, j + 2, &rec[j + 1])?;
        }
        n_rows += 1;
    }
    if n_rows != n {
        return Err(Error::ChannelMismatch {
            path: path.to_path_buf(),
            expected: n,
            found: n_rows,
        });
    }
    ConnMatrix::new(values, band, subject_id.to_string(), labels)
}
