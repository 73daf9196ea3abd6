use std::path::Path;

use crate::error::{Error, Result};
use crate::features::io::{open, parse_cell};
use crate::sigproc::Spectrum;

/// Two columns, `freq_hz,relative_power`.
pub fn write_spectrum_csv(spec: &Spectrum, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["freq_hz", "relative_power"])?;
    for (f, p) in spec.freqs_hz.iter().zip(&spec.power) {
        w.write_record([f.to_string(), p.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_spectrum_csv(path: &Path) -> Result<Spectrum> {
    let mut rdr = open(path)?;
    let mut freqs = Vec::new();
    let mut power = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(Error::Data(format!(
                "{}: row {} has {} columns, expected 2",
                path.display(),
                i + 2,
                rec.len()
            )));
        }
        freqs.push(parse_cell(path, i + 2, 1, &rec[0])?);
        power.push(parse_cell(path, i + 2, 2, &rec[1])?);
    }
    let normalized = (power.iter().sum::<f64>() - 1.0).abs() < 1e-9;
    Spectrum::new(freqs, power, normalized)
}
