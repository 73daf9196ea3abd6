//! Linear-prediction signal extension.

/// Least-squares forward predictor `x[t] ≈ Σ a[k]·x[t-1-k]` with a small
/// relative ridge. `None` when the signal is too short or the system is
/// singular.
pub(crate) fn ar_fit(x: &[f64], order: usize) -> Option<Vec<f64>> {
    let n = x.len();
    if order == 0 || n < 2 * order + 1 {
        return None;
    }
    let mut a = vec![vec![0.0; order]; order];
    let mut b = vec![0.0; order];
    for t in order..n {
        for i in 0..order {
            let xi = x[t - 1 - i];
            b[i] += xi * x[t];
            for j in 0..=i {
                a[i][j] += xi * x[t - 1 - j];
            }
        }
    }
    for i in 0..order {
        for j in 0..i {
            a[j][i] = a[i][j];
        }
    }
    let trace: f64 = (0..order).map(|i| a[i][i]).sum();
    if !(trace > 0.0) {
        return None;
    }
    let ridge = 1e-10 * trace / order as f64;
    for (i, row) in a.iter_mut().enumerate() {
        row[i] += ridge;
    }
    solve(a, b)
}

/// Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col] == 0.0 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut out = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * out[c]).sum();
        out[r] = (b[r] - s) / a[r][r];
    }
    out.iter().all(|v| v.is_finite()).then_some(out)
}

/// `len` samples predicted past the end of `x`.
fn predict(x: &[f64], coef: &[f64], len: usize) -> Vec<f64> {
    let p = coef.len();
    let mut buf: Vec<f64> = x[x.len() - p..].to_vec();
    buf.reserve(len);
    for _ in 0..len {
        let t = buf.len();
        let v = coef.iter().enumerate().map(|(k, a)| a * buf[t - 1 - k]).sum();
        buf.push(v);
    }
    buf.split_off(p)
}

/// Extends `x` at both ends by `len` predicted samples. Returns `None` if
/// a predictor cannot be fitted or its continuation grows beyond ten
/// times the signal's peak amplitude.
pub(crate) fn predictive_extension(x: &[f64], order: usize, len: usize) -> Option<Vec<f64>> {
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rev: Vec<f64> = x.iter().rev().copied().collect();
    let fwd = predict(x, &ar_fit(x, order)?, len);
    let bwd = predict(&rev, &ar_fit(&rev, order)?, len);
    let ok = |v: &f64| v.is_finite() && v.abs() <= 10.0 * peak;
    if !fwd.iter().all(ok) || !bwd.iter().all(ok) {
        return None;
    }
    let mut ext = Vec::with_capacity(x.len() + 2 * len);
    ext.extend(bwd.iter().rev());
    ext.extend_from_slice(x);
    ext.extend(fwd);
    Some(ext)
}
