use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::config::PreprocessConfig;
use crate::error::{Error, Result};
use crate::features::epochs;
use crate::features::io::{open, parse_cell};
use crate::group::Group;
use crate::sigproc::{bandpass, TimeSeries};

/// One manifest row. `labels` is `;`-separated in the CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectRecord {
    pub subject_id: String,
    pub group: Group,
    /// Relative paths resolve against the manifest's directory.
    pub path: PathBuf,
    pub fs: f64,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub subjects: Vec<SubjectRecord>,
    /// Directory relative paths resolve against.
    pub root: PathBuf,
}

const HEADER: [&str; 5] = ["subject_id", "group", "path", "fs", "labels"];

impl Manifest {
    pub fn read(path: &Path) -> Result<Self> {
        let mut rdr = open(path)?;
        let header = rdr.headers()?.clone();
        if header.iter().ne(HEADER.iter().copied()) {
            return Err(Error::Data(format!(
                "{}: manifest header must be {}",
                path.display(),
                HEADER.join(",")
            )));
        }
        let mut subjects = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            subjects.push(SubjectRecord {
                subject_id: rec[0].trim().to_string(),
                group: rec[1].parse()?,
                path: PathBuf::from(rec[2].trim()),
                fs: parse_cell(path, i + 2, 4, &rec[3])?,
                labels: rec[4].split(';').map(|l| l.trim().to_string()).collect(),
            });
        }
        let m = Manifest {
            subjects,
            root: path.parent().map(Path::to_path_buf).unwrap_or_default(),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(HEADER)?;
        for s in &self.subjects {
            w.write_record([
                s.subject_id.clone(),
                s.group.to_string(),
                s.path.to_string_lossy().into_owned(),
                s.fs.to_string(),
                s.labels.join(";"),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Unique ids, one sampling rate, existing files.
    pub fn validate(&self) -> Result<()> {
        if self.subjects.is_empty() {
            return Err(Error::Data("manifest lists no subjects".into()));
        }
        let mut seen = BTreeSet::new();
        for s in &self.subjects {
            if !seen.insert(s.subject_id.as_str()) {
                return Err(Error::Data(format!("duplicate subject_id {:?}", s.subject_id)));
            }
            if !(s.fs > 0.0) {
                return Err(Error::Data(format!("subject {}: fs must be > 0", s.subject_id)));
            }
            if s.fs != self.subjects[0].fs {
                return Err(Error::Data(format!(
                    "subject {}: fs {} differs from {}",
                    s.subject_id, s.fs, self.subjects[0].fs
                )));
            }
            let p = self.resolve(s);
            if !p.exists() {
                return Err(Error::MissingFile(p));
            }
        }
        Ok(())
    }

    pub fn resolve(&self, s: &SubjectRecord) -> PathBuf {
        if s.path.is_absolute() {
            s.path.clone()
        } else {
            self.root.join(&s.path)
        }
    }
}

/// Reads a recording CSV: one row per channel, `label,sample,sample,...`.
pub fn read_recording(path: &Path, labels: &[String], fs: f64) -> Result<TimeSeries> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if let Some(want) = labels.get(i) {
            if rec[0].trim() != want {
                return Err(Error::Data(format!(
                    "{}: row {} is channel {:?}, manifest expects {want:?}",
                    path.display(),
                    i + 1,
                    rec[0].trim()
                )));
            }
        }
        let values = rec
            .iter()
            .enumerate()
            .skip(1)
            .map(|(c, cell)| parse_cell(path, i + 1, c + 1, cell))
            .collect::<Result<Vec<_>>>()?;
        rows.push(values);
    }
    if rows.len() != labels.len() {
        return Err(Error::ChannelMismatch {
            path: path.to_path_buf(),
            expected: labels.len(),
            found: rows.len(),
        });
    }
    let n = rows[0].len();
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::Data(format!(
            "{}: channel {} has {} samples, channel 1 has {n}",
            path.display(),
            i + 1,
            r.len()
        )));
    }
    let samples = Array2::from_shape_fn((rows.len(), n), |(c, t)| rows[c][t]);
    TimeSeries::new(samples, fs)?.with_labels(labels.to_vec())
}

pub fn write_recording(ts: &TimeSeries, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for c in 0..ts.n_channels() {
        let mut rec = vec![ts.label(c)];
        rec.extend(ts.channel(c).iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// A band-passed recording and its epochs.
#[derive(Debug, Clone)]
pub struct LoadedSubject {
    pub record: SubjectRecord,
    pub recording: TimeSeries,
    pub epochs: Vec<TimeSeries>,
}

/// Loads, filters and epochs every subject of a manifest, in manifest order.
pub fn load_dataset(manifest_path: &Path, pre: &PreprocessConfig, epoch_len: usize) -> Result<Vec<LoadedSubject>> {
    let m = Manifest::read(manifest_path)?;
    m.subjects
        .iter()
        .map(|s| {
            let raw = read_recording(&m.resolve(s), &s.labels, s.fs)?;
            let recording = bandpass(&raw, pre.lo_hz, pre.hi_hz, pre.order)?;
            let epochs = epochs(&recording, epoch_len)?;
            Ok(LoadedSubject {
                record: s.clone(),
                recording,
                epochs,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::MONTAGE_10_20;

    fn labels(n: usize) -> Vec<String> {
        MONTAGE_10_20.iter().take(n).map(|s| s.to_string()).collect()
    }

    fn write_raw(path: &Path, n_ch: usize, n: usize) {
        let chans: Vec<Vec<f64>> = (0..n_ch)
            .map(|c| (0..n).map(|t| ((t * (c + 2)) as f64 * 0.05).sin()).collect())
            .collect();
        let ts = TimeSeries::from_channels(&chans, 500.0)
            .unwrap()
            .with_labels(labels(n_ch))
            .unwrap();
        write_recording(&ts, path).unwrap();
    }

    fn manifest(dir: &Path, file: &str) -> PathBuf {
        let m = Manifest {
            subjects: vec![SubjectRecord {
                subject_id: "s01".into(),
                group: Group::Ad,
                path: PathBuf::from(file),
                fs: 500.0,
                labels: labels(19),
            }],
            root: dir.to_path_buf(),
        };
        let p = dir.join("manifest.csv");
        m.write(&p).unwrap();
        p
    }

    #[test]
    fn well_formed_file_gives_floor_epochs() {
        let dir = tempfile::tempdir().unwrap();
        write_raw(&dir.path().join("s01.csv"), 19, 2750);
        let subs = load_dataset(&manifest(dir.path(), "s01.csv"), &PreprocessConfig::default(), 500).unwrap();
        assert_eq!(subs.len(), 1);
        assert_eq!(subs[0].epochs.len(), 5);
        assert_eq!(subs[0].recording.channel_labels().unwrap()[18], "O2");
    }

    #[test]
    fn missing_file_names_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let err = load_dataset(&manifest(dir.path(), "gone.csv"), &PreprocessConfig::default(), 500).unwrap_err();
        match err {
            Error::MissingFile(p) => assert!(p.ends_with("gone.csv")),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn eighteen_channels_under_nineteen_labels() {
        let dir = tempfile::tempdir().unwrap();
        write_raw(&dir.path().join("s01.csv"), 18, 1000);
        let err = load_dataset(&manifest(dir.path(), "s01.csv"), &PreprocessConfig::default(), 500).unwrap_err();
        assert!(
            matches!(
                err,
                Error::ChannelMismatch {
                    expected: 19,
                    found: 18,
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn non_numeric_cell_located() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s01.csv");
        write_raw(&p, 19, 600);
        let text = std::fs::read_to_string(&p).unwrap();
        let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
        lines[2] = lines[2].replacen(",", ",abc,", 1);
        std::fs::write(&p, lines.join("\n")).unwrap();
        let err = load_dataset(&manifest(dir.path(), "s01.csv"), &PreprocessConfig::default(), 500).unwrap_err();
        match err {
            Error::NonNumeric { row, col, cell, .. } => {
                assert_eq!((row, col, cell.as_str()), (3, 2, "abc"));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn duplicate_ids_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write_raw(&dir.path().join("s01.csv"), 19, 600);
        let p = manifest(dir.path(), "s01.csv");
        let mut m = Manifest::read(&p).unwrap();
        m.subjects.push(m.subjects[0].clone());
        assert!(matches!(m.validate(), Err(Error::Data(_))));
    }
}
