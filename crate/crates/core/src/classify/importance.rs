use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::roc_auc;
use super::Classifier;
use crate::error::{Error, Result};
use crate::seed::{self, streams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "method")]
pub enum ImportanceMethod {
    /// Mean AUC drop when one column is shuffled.
    Permutation { repeats: usize },
    /// Monte Carlo Shapley values over feature orderings with a
    /// mean-imputation baseline; importance is the mean absolute value.
    SampledShapley { n_permutations: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionReport {
    pub method: ImportanceMethod,
    pub names: Vec<String>,
    pub scores: Vec<f64>,
    /// Feature indices by descending score.
    pub ranking: Vec<usize>,
}

impl AttributionReport {
    pub(crate) fn new(method: ImportanceMethod, names: &[String], scores: Vec<f64>) -> Self {
        let mut ranking: Vec<usize> = (0..scores.len()).collect();
        ranking.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        Self {
            method,
            names: names.to_vec(),
            scores,
            ranking,
        }
    }

    pub fn top(&self, n: usize) -> Vec<&str> {
        self.ranking.iter().take(n).map(|&i| self.names[i].as_str()).collect()
    }

    /// 1-based rank of a feature.
    pub fn rank_of(&self, name: &str) -> Option<usize> {
        self.ranking.iter().position(|&i| self.names[i] == name).map(|r| r + 1)
    }

    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["rank", "feature", "importance"])?;
        for (r, &i) in self.ranking.iter().enumerate() {
            w.write_record([(r + 1).to_string(), self.names[i].clone(), self.scores[i].to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check(model: &dyn Classifier, x: &Array2<f64>, names: &[String]) -> Result<()> {
    if !model.is_trained() {
        return Err(Error::Model("feature importance needs a trained model".into()));
    }
    if x.ncols() != model.n_features() || names.len() != x.ncols() {
        return Err(Error::Model(format!(
            "{} columns, {} names, model expects {}",
            x.ncols(),
            names.len(),
            model.n_features()
        )));
    }
    Ok(())
}

pub fn permutation_importance(
    model: &dyn Classifier,
    x: &Array2<f64>,
    labels: &[bool],
    names: &[String],
    repeats: usize,
    seed: u64,
) -> Result<AttributionReport> {
    check(model, x, names)?;
    if repeats == 0 {
        return Err(Error::Config("repeats must be > 0".into()));
    }
    // one encoding seed throughout, so only the shuffled column differs
    let enc = seed::derive(seed, &[streams::ENCODE]);
    let base = roc_auc(&model.scores(x, enc)?, labels)?;
    let scores = (0..x.ncols())
        .into_par_iter()
        .map(|j| {
            let mut drop = 0.0;
            for r in 0..repeats {
                let mut col: Vec<f64> = x.column(j).to_vec();
                col.shuffle(&mut seed::rng_for(seed, &[streams::IMPORTANCE, j as u64, r as u64]));
                let mut xp = x.clone();
                xp.column_mut(j).assign(&ndarray::Array1::from(col));
                drop += base - roc_auc(&model.scores(&xp, enc)?, labels)?;
            }
            Ok(drop / repeats as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(AttributionReport::new(
        ImportanceMethod::Permutation { repeats },
        names,
        scores,
    ))
}

pub fn sampled_shapley(
    model: &dyn Classifier,
    x: &Array2<f64>,
    names: &[String],
    n_permutations: usize,
    seed: u64,
) -> Result<AttributionReport> {
    check(model, x, names)?;
    if n_permutations == 0 {
        return Err(Error::Config("n_permutations must be > 0".into()));
    }
    let (n, f) = x.dim();
    let enc = seed::derive(seed, &[streams::ENCODE]);
    let mean = x.mean_axis(Axis(0)).ok_or_else(|| Error::Data("no rows".into()))?;
    let phi = (0..n_permutations)
        .into_par_iter()
        .map(|p| {
            let mut order: Vec<usize> = (0..f).collect();
            order.shuffle(&mut seed::rng_for(seed, &[streams::IMPORTANCE, p as u64]));
            let mut cur = Array2::from_shape_fn((n, f), |(_, j)| mean[j]);
            let mut prev = model.scores(&cur, enc)?;
            let mut phi = Array2::<f64>::zeros((n, f));
            for j in order {
                cur.column_mut(j).assign(&x.column(j));
                let s = model.scores(&cur, enc)?;
                for i in 0..n {
                    phi[[i, j]] += s[i] - prev[i];
                }
                prev = s;
            }
            Ok(phi)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(Array2::<f64>::zeros((n, f)), |a, b| a + b);
    let scores = (0..f)
        .map(|j| {
            phi.column(j)
                .iter()
                .map(|v| (v / n_permutations as f64).abs())
                .sum::<f64>()
                / n as f64
        })
        .collect();
    Ok(AttributionReport::new(
        ImportanceMethod::SampledShapley { n_permutations },
        names,
        scores,
    ))
}

pub fn feature_importance(
    model: &dyn Classifier,
    x: &Array2<f64>,
    labels: &[bool],
    names: &[String],
    method: ImportanceMethod,
    seed: u64,
) -> Result<AttributionReport> {
    match method {
        ImportanceMethod::Permutation { repeats } => permutation_importance(model, x, labels, names, repeats, seed),
        ImportanceMethod::SampledShapley { n_permutations } => sampled_shapley(model, x, names, n_permutations, seed),
    }
}
