//! Network-based statistics over per-subject connectivity matrices.
//!
//! Edge-wise unequal-variance t statistics are thresholded per tail, the
//! suprathreshold graph is split into connected components, and each
//! component's size (edge count) is compared against the permutation null
//! of the maximum component size.

use std::collections::{BTreeMap, VecDeque};

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::ConnMatrix;
use crate::group::Group;
use crate::seed::{self, streams};
use crate::sigproc::{Band, BandName};

/// Upper bound on relabelings enumerated in exhaustive mode.
pub const MAX_EXHAUSTIVE: u64 = 2_000_000;

/// One-sided alternative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tail {
    /// HC > AD.
    Left,
    /// AD > HC.
    Right,
}

impl Tail {
    pub fn label(self) -> &'static str {
        match self {
            Tail::Left => "Left-tailed (HC > AD)",
            Tail::Right => "Right-tailed (AD > HC)",
        }
    }
}

impl std::str::FromStr for Tail {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "left" => Ok(Tail::Left),
            "right" => Ok(Tail::Right),
            other => Err(Error::Config(format!("unknown tail {other:?}"))),
        }
    }
}

/// Connectivity matrices of one group in one band.
#[derive(Debug, Clone)]
pub struct GroupStack {
    pub matrices: Vec<ConnMatrix>,
    pub group: Group,
    pub band: Band,
}

impl GroupStack {
    pub fn new(matrices: Vec<ConnMatrix>, group: Group, band: Band) -> Result<Self> {
        if matrices.len() < 2 {
            return Err(Error::Statistics(format!(
                "group {group} needs at least 2 subjects, has {}",
                matrices.len()
            )));
        }
        let n = matrices[0].n_nodes();
        if let Some(m) = matrices.iter().find(|m| m.n_nodes() != n) {
            return Err(Error::Data(format!(
                "subject {:?} has {} nodes, expected {n}",
                m.subject_id,
                m.n_nodes()
            )));
        }
        Ok(Self { matrices, group, band })
    }

    pub fn n_nodes(&self) -> usize {
        self.matrices[0].n_nodes()
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }
}

/// Connected suprathreshold subnetwork.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub nodes: Vec<usize>,
    /// `(i, j)` with `i < j`, sorted.
    pub edges: Vec<(usize, usize)>,
    pub fwe_p: f64,
    pub significant: bool,
}

impl Component {
    pub fn size(&self) -> usize {
        self.edges.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NbsResult {
    pub band: Band,
    pub tail: Tail,
    pub t_matrix: Array2<f64>,
    pub components: Vec<Component>,
    pub t_primary: f64,
    pub alpha: f64,
    /// Number of relabelings in the null (all of them in exhaustive mode).
    pub n_perm: usize,
    pub exhaustive: bool,
    pub seed: u64,
    /// Edges with zero variance in both groups; their t is set to 0.
    pub zero_variance_edges: Vec<(usize, usize)>,
    pub labels: Vec<String>,
}

impl NbsResult {
    pub fn significant_edges(&self) -> usize {
        self.components
            .iter()
            .filter(|c| c.significant)
            .map(Component::size)
            .sum()
    }

    pub fn report(&self) -> NbsReport {
        let label = |i: usize| self.labels.get(i).cloned().unwrap_or_else(|| format!("ch{i}"));
        NbsReport {
            band: self.band.name,
            band_range_hz: (self.band.lo_hz, self.band.hi_hz),
            tail: self.tail,
            tail_label: self.tail.label().to_string(),
            t_primary: self.t_primary,
            alpha: self.alpha,
            n_perm: self.n_perm,
            exhaustive: self.exhaustive,
            seed: self.seed,
            significant_edges: self.significant_edges(),
            components: self
                .components
                .iter()
                .map(|c| ComponentReport {
                    size: c.size(),
                    fwe_p: c.fwe_p,
                    significant: c.significant,
                    edges: c.edges.iter().map(|&(i, j)| (label(i), label(j))).collect(),
                })
                .collect(),
            zero_variance_edges: self.zero_variance_edges.len(),
            t_matrix_path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub size: usize,
    pub fwe_p: f64,
    pub significant: bool,
    pub edges: Vec<(String, String)>,
}

/// Serializable summary of one (band, tail) test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbsReport {
    pub band: BandName,
    pub band_range_hz: (f64, f64),
    pub tail: Tail,
    pub tail_label: String,
    pub t_primary: f64,
    pub alpha: f64,
    pub n_perm: usize,
    pub exhaustive: bool,
    pub seed: u64,
    pub significant_edges: usize,
    pub components: Vec<ComponentReport>,
    pub zero_variance_edges: usize,
    pub t_matrix_path: Option<String>,
}

/// Significant edge counts per band, one column per tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeCountRow {
    pub band: BandName,
    pub left: usize,
    pub right: usize,
}

pub fn edge_count_table(reports: &[NbsReport]) -> Vec<EdgeCountRow> {
    let mut rows: BTreeMap<BandName, EdgeCountRow> = BTreeMap::new();
    for r in reports {
        let row = rows.entry(r.band).or_insert(EdgeCountRow {
            band: r.band,
            left: 0,
            right: 0,
        });
        match r.tail {
            Tail::Left => row.left += r.significant_edges,
            Tail::Right => row.right += r.significant_edges,
        }
    }
    rows.into_values().collect()
}

/// Flattened upper-triangle edge values, subject-major.
struct EdgeData {
    n_nodes: usize,
    n_edges: usize,
    values: Vec<f64>,
}

impl EdgeData {
    fn new(hc: &GroupStack, ad: &GroupStack) -> Result<Self> {
        let n = hc.n_nodes();
        if ad.n_nodes() != n {
            return Err(Error::Data(format!(
                "HC matrices have {n} nodes, AD matrices {}",
                ad.n_nodes()
            )));
        }
        let n_edges = n * (n - 1) / 2;
        let mut values = Vec::with_capacity(n_edges * (hc.len() + ad.len()));
        for m in hc.matrices.iter().chain(&ad.matrices) {
            for i in 0..n {
                for j in i + 1..n {
                    let v = m.values[[i, j]];
                    if !v.is_finite() {
                        return Err(Error::Data(format!(
                            "non-finite edge ({i}, {j}) in subject {:?}",
                            m.subject_id
                        )));
                    }
                    values.push(v);
                }
            }
        }
        Ok(Self {
            n_nodes: n,
            n_edges,
            values,
        })
    }

    fn subject(&self, s: usize) -> &[f64] {
        &self.values[s * self.n_edges..(s + 1) * self.n_edges]
    }

    /// Edge t statistics with `first` as the HC group and the rest as AD.
    /// Returns the statistics and the indices of zero-variance edges.
    fn tstats(&self, hc: &[usize], ad: &[usize]) -> (Vec<f64>, Vec<usize>) {
        let e = self.n_edges;
        // shifted by the first subject so constant edges give exactly zero variance
        let moments = |idx: &[usize]| {
            let n = idx.len() as f64;
            let shift = self.subject(idx[0]);
            let mut mean = vec![0.0; e];
            for &s in idx {
                for ((m, v), c) in mean.iter_mut().zip(self.subject(s)).zip(shift) {
                    *m += v - c;
                }
            }
            mean.iter_mut().for_each(|m| *m /= n);
            let mut var = vec![0.0; e];
            for &s in idx {
                for (((q, v), m), c) in var.iter_mut().zip(self.subject(s)).zip(&mean).zip(shift) {
                    let d = v - c - m;
                    *q += d * d;
                }
            }
            var.iter_mut().for_each(|q| *q /= n - 1.0);
            mean.iter_mut().zip(shift).for_each(|(m, c)| *m += c);
            (mean, var)
        };
        let (m_hc, v_hc) = moments(hc);
        let (m_ad, v_ad) = moments(ad);
        let (n_hc, n_ad) = (hc.len() as f64, ad.len() as f64);
        let mut zero = Vec::new();
        let t = (0..e)
            .map(|k| {
                let se2 = v_hc[k] / n_hc + v_ad[k] / n_ad;
                if se2 > 0.0 {
                    (m_hc[k] - m_ad[k]) / se2.sqrt()
                } else {
                    zero.push(k);
                    0.0
                }
            })
            .collect();
        (t, zero)
    }
}

fn edge_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// Edge-wise `(mean_HC − mean_AD) / sqrt(var_HC/n_HC + var_AD/n_AD)` with
/// sample variances; zero diagonal. Edges with zero variance in both
/// groups get t = 0 and are logged.
pub fn edge_tstats(hc: &GroupStack, ad: &GroupStack) -> Result<Array2<f64>> {
    let data = EdgeData::new(hc, ad)?;
    let (hc_idx, ad_idx) = split_indices(hc.len(), ad.len());
    let (t, zero) = data.tstats(&hc_idx, &ad_idx);
    if !zero.is_empty() {
        log::warn!("{} edges have zero variance in both groups; t set to 0", zero.len());
    }
    Ok(to_matrix(data.n_nodes, &t))
}

fn split_indices(n_hc: usize, n_ad: usize) -> (Vec<usize>, Vec<usize>) {
    ((0..n_hc).collect(), (n_hc..n_hc + n_ad).collect())
}

fn to_matrix(n: usize, t: &[f64]) -> Array2<f64> {
    let mut m = Array2::zeros((n, n));
    for (k, (i, j)) in edge_pairs(n).into_iter().enumerate() {
        m[[i, j]] = t[k];
        m[[j, i]] = t[k];
    }
    m
}

/// Connected components of the graph formed by edges whose tail-signed t
/// exceeds `t_primary`: `t > t_primary` for the left tail, `−t > t_primary`
/// for the right. Isolated nodes are not components. Components are
/// ordered by their smallest node.
pub fn suprathreshold_components(
    t: &Array2<f64>,
    t_primary: f64,
    tail: Tail,
) -> Vec<(Vec<usize>, Vec<(usize, usize)>)> {
    let n = t.nrows();
    let sign = match tail {
        Tail::Left => 1.0,
        Tail::Right => -1.0,
    };
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if sign * t[[i, j]] > t_primary {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] || adj[start].is_empty() {
            continue;
        }
        let mut nodes = Vec::new();
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            nodes.push(u);
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        nodes.sort_unstable();
        let mut edges: Vec<(usize, usize)> = nodes
            .iter()
            .flat_map(|&u| adj[u].iter().filter(move |&&w| w > u).map(move |&w| (u, w)))
            .collect();
        edges.sort_unstable();
        out.push((nodes, edges));
    }
    out
}

/// Largest component size (edges) from flattened t values, union–find.
fn max_component_size(n: usize, pairs: &[(usize, usize)], t: &[f64], t_primary: f64, sign: f64) -> usize {
    let mut parent: Vec<usize> = (0..n).collect();
    let mut edges = vec![0usize; n];
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (k, &(i, j)) in pairs.iter().enumerate() {
        if sign * t[k] > t_primary {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a == b {
                edges[a] += 1;
            } else {
                parent[b] = a;
                edges[a] += edges[b] + 1;
                edges[b] = 0;
            }
        }
    }
    (0..n).filter(|&x| parent[x] == x).map(|x| edges[x]).max().unwrap_or(0)
}

/// Permutation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NbsConfig {
    pub t_primary: f64,
    pub alpha: f64,
    pub n_perm: usize,
    /// Enumerate every relabeling instead of sampling.
    pub exhaustive: bool,
}

impl Default for NbsConfig {
    fn default() -> Self {
        Self {
            t_primary: 3.0,
            alpha: 0.01,
            n_perm: 5000,
            exhaustive: false,
        }
    }
}

/// Lexicographic k-subsets of `0..n`.
fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc.saturating_mul((n - i) as u64) / (i as u64 + 1))
}

/// Permutation NBS for one band and tail.
///
/// The null distribution is the maximum component size over relabelings
/// of subjects into groups of the observed sizes. Sampled mode uses
/// `(1 + #{null ≥ size}) / (1 + n_perm)`; exhaustive mode enumerates all
/// relabelings (the observed one included) and reports the exact fraction.
pub fn nbs_test(hc: &GroupStack, ad: &GroupStack, cfg: &NbsConfig, tail: Tail, seed: u64) -> Result<NbsResult> {
    let (n_hc, n_ad) = (hc.len(), ad.len());
    if n_hc < 2 || n_ad < 2 {
        return Err(Error::Statistics(format!(
            "groups of {n_hc} and {n_ad} subjects admit no nontrivial permutation"
        )));
    }
    if !cfg.exhaustive && cfg.n_perm < 100 {
        return Err(Error::Config(format!(
            "n_perm = {} is below 100; use exhaustive mode for tiny samples",
            cfg.n_perm
        )));
    }
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(Error::Config(format!("alpha = {} outside (0, 1)", cfg.alpha)));
    }
    let data = EdgeData::new(hc, ad)?;
    let n = data.n_nodes;
    let pairs = edge_pairs(n);
    let sign = match tail {
        Tail::Left => 1.0,
        Tail::Right => -1.0,
    };
    let (hc_idx, ad_idx) = split_indices(n_hc, n_ad);
    let (t, zero) = data.tstats(&hc_idx, &ad_idx);
    if !zero.is_empty() {
        log::warn!("{} edges have zero variance in both groups; t set to 0", zero.len());
    }
    let t_matrix = to_matrix(n, &t);
    let observed = suprathreshold_components(&t_matrix, cfg.t_primary, tail);

    let total = n_hc + n_ad;
    let null_max = |hc_set: &[usize]| {
        let mut in_hc = vec![false; total];
        hc_set.iter().for_each(|&s| in_hc[s] = true);
        let ad_set: Vec<usize> = (0..total).filter(|&s| !in_hc[s]).collect();
        let (tp, _) = data.tstats(hc_set, &ad_set);
        max_component_size(n, &pairs, &tp, cfg.t_primary, sign)
    };

    let (null, n_perm): (Vec<usize>, usize) = if cfg.exhaustive {
        let count = binomial(total, n_hc);
        if count > MAX_EXHAUSTIVE {
            return Err(Error::Statistics(format!(
                "exhaustive mode needs {count} relabelings (limit {MAX_EXHAUSTIVE})"
            )));
        }
        let mut sets = Vec::with_capacity(count as usize);
        for_each_combination(total, n_hc, |c| sets.push(c.to_vec()));
        let null: Vec<usize> = sets.par_iter().map(|c| null_max(c)).collect();
        let len = null.len();
        (null, len)
    } else {
        let null = (0..cfg.n_perm as u64)
            .into_par_iter()
            .map(|k| {
                let mut rng = seed::rng_for(seed, &[streams::PERMUTATION, k]);
                let perm = rand::seq::index::sample(&mut rng, total, n_hc).into_vec();
                null_max(&perm)
            })
            .collect();
        (null, cfg.n_perm)
    };

    let components = observed
        .into_iter()
        .map(|(nodes, edges)| {
            let size = edges.len();
            let hits = null.iter().filter(|&&m| m >= size).count();
            let fwe_p = if cfg.exhaustive {
                hits as f64 / n_perm as f64
            } else {
                (1 + hits) as f64 / (1 + n_perm) as f64
            };
            Component {
                nodes,
                edges,
                fwe_p,
                significant: fwe_p < cfg.alpha,
            }
        })
        .collect();

    Ok(NbsResult {
        band: hc.band,
        tail,
        t_matrix,
        components,
        t_primary: cfg.t_primary,
        alpha: cfg.alpha,
        n_perm,
        exhaustive: cfg.exhaustive,
        seed,
        zero_variance_edges: zero.iter().map(|&k| pairs[k]).collect(),
        labels: hc.matrices[0].labels.clone(),
    })
}

#[cfg(test)]
mod tests {
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    use super::*;

    fn band() -> Band {
        Band::canonical(BandName::Alpha)
    }

    fn conn(values: Array2<f64>) -> ConnMatrix {
        let n = values.nrows();
        ConnMatrix::new(values, band(), String::new(), (0..n).map(|i| format!("n{i}")).collect()).unwrap()
    }

    /// Symmetric matrix with unit diagonal and `f(i, j)` off the diagonal.
    fn sym(n: usize, f: impl Fn(usize, usize) -> f64) -> ConnMatrix {
        conn(Array2::from_shape_fn((n, n), |(i, j)| {
            if i == j {
                1.0
            } else {
                f(i.min(j), i.max(j))
            }
        }))
    }

    fn stack(ms: Vec<ConnMatrix>, g: Group) -> GroupStack {
        GroupStack::new(ms, g, band()).unwrap()
    }

    fn random_stack<R: Rng>(
        rng: &mut R,
        n_sub: usize,
        n: usize,
        g: Group,
        shift: impl Fn(usize, usize) -> f64,
    ) -> GroupStack {
        let noise = Normal::new(0.0, 0.05).unwrap();
        let ms = (0..n_sub)
            .map(|_| {
                let draws: Vec<f64> = (0..n * n).map(|_| noise.sample(rng)).collect();
                sym(n, |i, j| (0.5 + shift(i, j) + draws[i * n + j]).clamp(0.0, 1.0))
            })
            .collect();
        stack(ms, g)
    }

    #[test]
    fn hand_evaluated_t() {
        let hc = stack([0.8, 0.9, 1.0].iter().map(|&v| sym(2, |_, _| v)).collect(), Group::Hc);
        let ad = stack([0.2, 0.3, 0.4].iter().map(|&v| sym(2, |_, _| v)).collect(), Group::Ad);
        let t = edge_tstats(&hc, &ad).unwrap();
        let expected = 0.6 / (0.01f64 / 3.0 + 0.01 / 3.0).sqrt();
        assert!((t[[0, 1]] - expected).abs() < 1e-9);
        assert!((t[[0, 1]] - 7.348).abs() < 1e-3);
        assert_eq!(t[[0, 0]], 0.0);
        let swapped = edge_tstats(
            &GroupStack {
                group: Group::Hc,
                ..ad.clone()
            },
            &GroupStack {
                group: Group::Ad,
                ..hc.clone()
            },
        )
        .unwrap();
        assert_eq!(swapped[[0, 1]], -t[[0, 1]]);
    }

    #[test]
    fn identical_means_give_zero_t() {
        let a = stack(vec![sym(4, |_, _| 0.3), sym(4, |_, _| 0.5)], Group::Hc);
        let b = stack(vec![sym(4, |_, _| 0.5), sym(4, |_, _| 0.3)], Group::Ad);
        assert!(edge_tstats(&a, &b).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_variance_edge_is_zero_not_infinite() {
        let a = stack(vec![sym(3, |_, _| 0.4); 3], Group::Hc);
        let b = stack(vec![sym(3, |_, _| 0.2); 3], Group::Ad);
        let t = edge_tstats(&a, &b).unwrap();
        assert!(t.iter().all(|&v| v == 0.0));
    }

    /// Breadth-first components of an explicit edge list, independent of
    /// the implementation's adjacency handling.
    fn bfs_oracle(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
        let mut sizes = Vec::new();
        let mut seen = vec![false; n];
        for s in 0..n {
            if seen[s] || !edges.iter().any(|&(a, b)| a == s || b == s) {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut k = 0;
            while k < comp.len() {
                let u = comp[k];
                for &(a, b) in edges {
                    let w = if a == u {
                        b
                    } else if b == u {
                        a
                    } else {
                        continue;
                    };
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                    }
                }
                k += 1;
            }
            sizes.push(edges.iter().filter(|&&(a, _)| comp.contains(&a)).count());
        }
        sizes
    }

    #[test]
    fn planted_clique_and_disjoint_pairs() {
        let n = 8;
        let clique = [1usize, 3, 4, 6];
        let mut t = Array2::zeros((n, n));
        let mut edges = Vec::new();
        for (a, &i) in clique.iter().enumerate() {
            for &j in &clique[a + 1..] {
                t[[i, j]] = 10.0;
                t[[j, i]] = 10.0;
                edges.push((i, j));
            }
        }
        let comps = suprathreshold_components(&t, 3.0, Tail::Left);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].1.len(), 6);
        assert_eq!(bfs_oracle(n, &edges), vec![6]);
        assert!(suprathreshold_components(&t, 3.0, Tail::Right).is_empty());

        let mut t = Array2::zeros((n, n));
        for (i, j) in [(0, 2), (5, 7)] {
            t[[i, j]] = -4.0;
            t[[j, i]] = -4.0;
        }
        let comps = suprathreshold_components(&t, 3.0, Tail::Right);
        assert_eq!(comps.iter().map(|c| c.1.len()).collect::<Vec<_>>(), vec![1, 1]);
        assert_eq!(bfs_oracle(n, &[(0, 2), (5, 7)]), vec![1, 1]);
        assert!(suprathreshold_components(&t, 3.0, Tail::Left).is_empty());
    }

    #[test]
    fn union_find_max_matches_bfs() {
        let mut rng = seed::rng(7);
        for _ in 0..200 {
            let n = 9;
            let t = Array2::from_shape_fn((n, n), |_| 0.0);
            let mut t = t;
            for i in 0..n {
                for j in i + 1..n {
                    let v: f64 = rng.random_range(-6.0..6.0);
                    t[[i, j]] = v;
                    t[[j, i]] = v;
                }
            }
            let pairs = edge_pairs(n);
            let flat: Vec<f64> = pairs.iter().map(|&(i, j)| t[[i, j]]).collect();
            for (tail, sign) in [(Tail::Left, 1.0), (Tail::Right, -1.0)] {
                let kept: Vec<(usize, usize)> =
                    pairs.iter().copied().filter(|&(i, j)| sign * t[[i, j]] > 3.0).collect();
                let oracle = bfs_oracle(n, &kept).into_iter().max().unwrap_or(0);
                assert_eq!(max_component_size(n, &pairs, &flat, 3.0, sign), oracle);
                let comps = suprathreshold_components(&t, 3.0, tail);
                assert_eq!(comps.iter().map(|c| c.1.len()).max().unwrap_or(0), oracle);
            }
        }
    }

    #[test]
    fn raising_threshold_never_grows_components() {
        let mut rng = seed::rng(11);
        let hc = random_stack(&mut rng, 8, 7, Group::Hc, |i, _| if i < 3 { 0.06 } else { 0.0 });
        let ad = random_stack(&mut rng, 8, 7, Group::Ad, |_, _| 0.0);
        let t = edge_tstats(&hc, &ad).unwrap();
        let total = |thr: f64| -> usize {
            suprathreshold_components(&t, thr, Tail::Left)
                .iter()
                .map(|c| c.1.len())
                .sum()
        };
        let mut prev = usize::MAX;
        for thr in [0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 6.0] {
            let now = total(thr);
            assert!(now <= prev);
            prev = now;
        }
    }

    #[test]
    fn combinations_enumerate_all() {
        let mut seen = Vec::new();
        for_each_combination(8, 4, |c| seen.push(c.to_vec()));
        assert_eq!(seen.len(), 70);
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 70);
        assert_eq!(binomial(8, 4), 70);
        assert_eq!(binomial(60, 30), 118_264_581_564_861_424);
    }

    #[test]
    fn too_small_groups_rejected() {
        let one = GroupStack {
            matrices: vec![sym(3, |_, _| 0.5)],
            group: Group::Hc,
            band: band(),
        };
        let two = stack(vec![sym(3, |_, _| 0.5), sym(3, |_, _| 0.4)], Group::Ad);
        assert!(matches!(
            nbs_test(&one, &two, &NbsConfig::default(), Tail::Left, 1),
            Err(Error::Statistics(_))
        ));
        assert!(GroupStack::new(vec![sym(3, |_, _| 0.5)], Group::Hc, band()).is_err());
    }

    #[test]
    fn planted_subnetwork_recovered() {
        let mut rng = seed::rng(21);
        let n = 10;
        // d = 3 on the edges among nodes 0..4 with SD 0.05
        let planted = |i: usize, j: usize| if i < 4 && j < 4 { 0.15 } else { 0.0 };
        let hc = random_stack(&mut rng, 10, n, Group::Hc, planted);
        let ad = random_stack(&mut rng, 10, n, Group::Ad, |_, _| 0.0);
        let cfg = NbsConfig {
            n_perm: 1000,
            ..NbsConfig::default()
        };
        let r = nbs_test(&hc, &ad, &cfg, Tail::Left, 5).unwrap();
        let best = r.components.iter().max_by_key(|c| c.size()).unwrap();
        assert!(best.fwe_p < 0.01, "{}", best.fwe_p);
        assert!(best.edges.contains(&(0, 1)) && best.edges.contains(&(2, 3)));
        assert!(best.size() >= 6);
        assert!(r.components.iter().all(|c| c.fwe_p >= 1.0 / 1001.0 && c.fwe_p <= 1.0));
    }

    #[test]
    fn deterministic_and_label_swap_dual() {
        let mut rng = seed::rng(3);
        let hc = random_stack(&mut rng, 6, 6, Group::Hc, |i, _| if i < 2 { 0.1 } else { 0.0 });
        let ad = random_stack(&mut rng, 6, 6, Group::Ad, |_, j| if j > 3 { 0.1 } else { 0.0 });
        let cfg = NbsConfig {
            n_perm: 200,
            t_primary: 2.0,
            ..NbsConfig::default()
        };
        let a = nbs_test(&hc, &ad, &cfg, Tail::Left, 9).unwrap();
        let b = nbs_test(&hc, &ad, &cfg, Tail::Left, 9).unwrap();
        assert_eq!(a, b);
        let sw_hc = GroupStack {
            group: Group::Hc,
            ..ad.clone()
        };
        let sw_ad = GroupStack {
            group: Group::Ad,
            ..hc.clone()
        };
        let c = nbs_test(&sw_hc, &sw_ad, &cfg, Tail::Right, 9).unwrap();
        let sizes = |r: &NbsResult| r.components.iter().map(|c| c.edges.clone()).collect::<Vec<_>>();
        assert_eq!(sizes(&a), sizes(&c));
        assert_eq!(a.t_matrix, c.t_matrix.mapv(|v| -v));
    }

    #[test]
    fn report_mirrors_table_layout() {
        let mut rng = seed::rng(4);
        let hc = random_stack(&mut rng, 5, 5, Group::Hc, |_, _| 0.1);
        let ad = random_stack(&mut rng, 5, 5, Group::Ad, |_, _| 0.0);
        let cfg = NbsConfig {
            n_perm: 100,
            ..NbsConfig::default()
        };
        let reports: Vec<NbsReport> = [Tail::Left, Tail::Right]
            .iter()
            .map(|&t| nbs_test(&hc, &ad, &cfg, t, 1).unwrap().report())
            .collect();
        let json = serde_json::to_string(&reports[0]).unwrap();
        assert!(json.contains("\"tail_label\":\"Left-tailed (HC > AD)\""));
        let table = edge_count_table(&reports);
        assert_eq!(table.len(), 1);
        assert_eq!(table[0].band, BandName::Alpha);
        assert_eq!(table[0].right, 0);
        assert_eq!(table[0].left, reports[0].significant_edges);
    }
}
