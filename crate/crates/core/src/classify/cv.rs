use std::collections::BTreeMap;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ann::train_ann;
use super::encode::MinMaxScaler;
use super::importance::{feature_importance, AttributionReport, ImportanceMethod};
use super::metrics::{roc_auc, roc_curve};
use super::snn::train_snn;
use super::{Classifier, TrainConfig};
use crate::error::{Error, Result};
use crate::features::Dataset;
use crate::group::Group;
use crate::seed::{self, streams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Snn,
    Ann,
}

impl ModelKind {
    pub fn train(self, x: &Array2<f64>, y: &[usize], cfg: &TrainConfig) -> Result<Box<dyn Classifier + Send>> {
        Ok(match self {
            ModelKind::Snn => Box::new(train_snn(x, y, cfg)?),
            ModelKind::Ann => Box::new(train_ann(x, y, cfg)?),
        })
    }
}

pub(crate) fn feature_matrix(ds: &Dataset) -> Array2<f64> {
    Array2::from_shape_fn((ds.len(), ds.n_features()), |(i, j)| ds.rows[i].values[j])
}

pub(crate) fn class_indices(ds: &Dataset) -> Vec<usize> {
    ds.rows.iter().map(|r| r.label.is_positive() as usize).collect()
}

fn subject_labels(ds: &Dataset) -> Result<BTreeMap<&str, Group>> {
    let mut subjects = BTreeMap::new();
    for r in &ds.rows {
        if let Some(&g) = subjects.get(r.subject_id.as_str()) {
            if g != r.label {
                return Err(Error::Data(format!(
                    "subject {} has epochs with both labels",
                    r.subject_id
                )));
            }
        }
        subjects.insert(r.subject_id.as_str(), r.label);
    }
    Ok(subjects)
}

/// Test-row indices of each fold. Subjects are dealt to folds separately
/// per class, so every fold keeps both classes and no subject is split.
pub fn subject_folds(ds: &Dataset, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Config("need at least 2 folds".into()));
    }
    let subjects = subject_labels(ds)?;
    let mut fold_of: BTreeMap<&str, usize> = BTreeMap::new();
    for group in [Group::Hc, Group::Ad] {
        let mut ids: Vec<&str> = subjects.iter().filter(|(_, &g)| g == group).map(|(&s, _)| s).collect();
        if ids.len() < k {
            return Err(Error::Data(format!(
                "{group} has {} subjects, fewer than {k} folds",
                ids.len()
            )));
        }
        ids.shuffle(&mut seed::rng_for(seed, &[streams::FOLD, group.is_positive() as u64]));
        for (i, s) in ids.into_iter().enumerate() {
            fold_of.insert(s, i % k);
        }
    }
    let mut folds = vec![Vec::new(); k];
    for (i, r) in ds.rows.iter().enumerate() {
        folds[fold_of[r.subject_id.as_str()]].push(i);
    }
    Ok(folds)
}

/// Randomly reassigns group labels across subjects, keeping class sizes.
pub fn shuffle_subject_labels(ds: &Dataset, seed: u64) -> Result<Dataset> {
    let subjects = subject_labels(ds)?;
    let ids: Vec<&str> = subjects.keys().copied().collect();
    let mut labels: Vec<Group> = subjects.values().copied().collect();
    labels.shuffle(&mut seed::rng_for(seed, &[streams::SHUFFLE, streams::SUBJECT]));
    let map: BTreeMap<&str, Group> = ids.into_iter().zip(labels).collect();
    let mut out = ds.clone();
    for r in &mut out.rows {
        r.label = map[r.subject_id.as_str()];
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub test_subjects: Vec<String>,
    pub n_train: usize,
    pub n_test: usize,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub model: ModelKind,
    pub seed: u64,
    pub folds: Vec<FoldResult>,
    pub mean_auc: f64,
    /// AUC of all out-of-fold scores pooled together.
    pub pooled_auc: f64,
    pub roc: Vec<(f64, f64)>,
}

/// Stratified subject-disjoint k-fold cross-validation at window level.
pub fn cross_validate(ds: &Dataset, kind: ModelKind, cfg: &TrainConfig, k: usize, seed: u64) -> Result<CvReport> {
    Ok(cross_validate_with_importance(ds, kind, cfg, k, seed, None)?.0)
}

/// [`cross_validate`] plus, when `importance` is set, attribution computed
/// on each fold's held-out rows with that fold's model and averaged over
/// folds.
pub fn cross_validate_with_importance(
    ds: &Dataset,
    kind: ModelKind,
    cfg: &TrainConfig,
    k: usize,
    seed: u64,
    importance: Option<ImportanceMethod>,
) -> Result<(CvReport, Option<AttributionReport>)> {
    let folds = subject_folds(ds, k, seed)?;
    let x = feature_matrix(ds);
    let y = class_indices(ds);
    let results = folds
        .par_iter()
        .enumerate()
        .map(|(f, test)| {
            let is_test: Vec<bool> = {
                let mut v = vec![false; ds.len()];
                test.iter().for_each(|&i| v[i] = true);
                v
            };
            let train: Vec<usize> = (0..ds.len()).filter(|&i| !is_test[i]).collect();
            let train_subjects: std::collections::BTreeSet<&str> =
                train.iter().map(|&i| ds.rows[i].subject_id.as_str()).collect();
            assert!(
                test.iter()
                    .all(|&i| !train_subjects.contains(ds.rows[i].subject_id.as_str())),
                "fold {f} leaks a subject"
            );
            let scaler = MinMaxScaler::fit(&x.select(ndarray::Axis(0), &train))?;
            let xtr = scaler.transform(&x.select(ndarray::Axis(0), &train))?;
            let xte = scaler.transform(&x.select(ndarray::Axis(0), test))?;
            let ytr: Vec<usize> = train.iter().map(|&i| y[i]).collect();
            let fold_cfg = TrainConfig {
                seed: seed::derive(seed, &[streams::TRAIN, f as u64]),
                ..cfg.clone()
            };
            let model = kind.train(&xtr, &ytr, &fold_cfg)?;
            let scores = model.scores(&xte, seed::derive(seed, &[streams::ENCODE, f as u64]))?;
            let labels: Vec<bool> = test.iter().map(|&i| y[i] == 1).collect();
            let auc = roc_auc(&scores, &labels)?;
            let attribution = importance
                .map(|m| {
                    feature_importance(
                        model.as_ref(),
                        &xte,
                        &labels,
                        &ds.names,
                        m,
                        seed::derive(seed, &[streams::IMPORTANCE, f as u64]),
                    )
                })
                .transpose()?;
            let mut subjects: Vec<String> = test.iter().map(|&i| ds.rows[i].subject_id.clone()).collect();
            subjects.dedup();
            Ok((
                FoldResult {
                    fold: f,
                    test_subjects: subjects,
                    n_train: train.len(),
                    n_test: test.len(),
                    auc,
                },
                scores,
                labels,
                attribution,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut all_scores = Vec::new();
    let mut all_labels = Vec::new();
    let mut fold_results = Vec::new();
    let mut attributions = Vec::new();
    for (fr, s, l, a) in results {
        all_scores.extend(s);
        all_labels.extend(l);
        fold_results.push(fr);
        attributions.extend(a);
    }
    let attribution = importance.map(|m| {
        let mut total = vec![0.0; ds.n_features()];
        for a in &attributions {
            total.iter_mut().zip(&a.scores).for_each(|(t, v)| *t += v);
        }
        let n = attributions.len() as f64;
        AttributionReport::new(m, &ds.names, total.into_iter().map(|t| t / n).collect())
    });
    let mean_auc = fold_results.iter().map(|f| f.auc).sum::<f64>() / fold_results.len() as f64;
    let report = CvReport {
        model: kind,
        seed,
        folds: fold_results,
        mean_auc,
        pooled_auc: roc_auc(&all_scores, &all_labels)?,
        roc: roc_curve(&all_scores, &all_labels)?,
    };
    Ok((report, attribution))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureVector;
    use std::collections::BTreeSet;

    fn toy(n_subj: usize, epochs: usize, signal: f64) -> Dataset {
        let mut rows = Vec::new();
        for s in 0..n_subj {
            let label = if s % 2 == 0 { Group::Ad } else { Group::Hc };
            for e in 0..epochs {
                let base = if label == Group::Ad { signal } else { 0.0 };
                let noise = |j: usize| (((s * 31 + e * 7 + j * 3) % 11) as f64) / 11.0;
                rows.push(FeatureVector {
                    values: vec![base + noise(0), noise(1), noise(2)],
                    label,
                    subject_id: format!("sub-{s:02}"),
                    epoch_index: e,
                });
            }
        }
        Dataset {
            names: vec!["a".into(), "b".into(), "c".into()],
            rows,
        }
    }

    #[test]
    fn folds_are_subject_disjoint_and_stratified() {
        let ds = toy(23, 4, 1.0);
        let folds = subject_folds(&ds, 5, 3).unwrap();
        let mut seen = BTreeSet::new();
        for f in &folds {
            let subj: BTreeSet<&str> = f.iter().map(|&i| ds.rows[i].subject_id.as_str()).collect();
            assert!(subj.is_disjoint(&seen));
            seen.extend(subj);
            let labels: BTreeSet<Group> = f.iter().map(|&i| ds.rows[i].label).collect();
            assert_eq!(labels.len(), 2);
        }
        assert_eq!(folds.iter().map(Vec::len).sum::<usize>(), ds.len());
        assert_eq!(folds, subject_folds(&ds, 5, 3).unwrap());
        assert!(matches!(subject_folds(&toy(6, 2, 1.0), 5, 0), Err(Error::Data(_))));
    }

    #[test]
    fn label_shuffle_keeps_subjects_consistent() {
        let ds = toy(20, 3, 1.0);
        let sh = shuffle_subject_labels(&ds, 1).unwrap();
        let labels = subject_labels(&sh).unwrap();
        assert_eq!(labels.values().filter(|&&g| g == Group::Ad).count(), 10);
        assert_ne!(sh.labels(), ds.labels());
    }

    #[test]
    fn ann_cross_validation_on_separable_toy() {
        let ds = toy(20, 5, 2.0);
        let cfg = TrainConfig {
            hidden: vec![8, 4],
            epochs: 40,
            lr: 1e-2,
            batch_size: 16,
            ..TrainConfig::default()
        };
        let r = cross_validate(&ds, ModelKind::Ann, &cfg, 5, 7).unwrap();
        assert_eq!(r.folds.len(), 5);
        assert!(r.mean_auc > 0.95, "{}", r.mean_auc);
        assert_eq!(r, cross_validate(&ds, ModelKind::Ann, &cfg, 5, 7).unwrap());
        let (r2, imp) = cross_validate_with_importance(
            &ds,
            ModelKind::Ann,
            &cfg,
            5,
            7,
            Some(ImportanceMethod::Permutation { repeats: 2 }),
        )
        .unwrap();
        assert_eq!(r2, r);
        assert_eq!(imp.unwrap().top(1), vec!["a"]);
    }
}
