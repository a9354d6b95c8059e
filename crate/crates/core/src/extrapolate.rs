//! Polynomial (Richardson/Neville) extrapolation of sampled limits.

use num_complex::Complex64 as C64;

/// Value at `x = 0` of the interpolating polynomial through `(xs[i], ys[i])`.
pub fn to_zero(xs: &[f64], ys: &[C64]) -> C64 {
    assert_eq!(xs.len(), ys.len());
    assert!(!xs.is_empty());
    let mut p: Vec<C64> = ys.to_vec();
    let n = xs.len();
    for m in 1..n {
        for i in 0..n - m {
            let (xi, xj) = (xs[i], xs[i + m]);
            p[i] = (p[i + 1] * xi - p[i] * xj) / (xi - xj);
        }
    }
    p[0]
}

/// Geometric schedule `y0 * ratio^k`, `k = 0..count`.
pub fn geometric(y0: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| y0 * ratio.powi(k as i32)).collect()
}

/// Successive `terms`-point extrapolants over a sliding window.
pub fn sliding(xs: &[f64], ys: &[C64], terms: usize) -> Vec<C64> {
    let terms = terms.max(1).min(xs.len());
    (0..=xs.len() - terms)
        .map(|i| to_zero(&xs[i..i + terms], &ys[i..i + terms]))
        .collect()
}

/// Wynn epsilon (Shanks `e_2`) estimates over sliding 5-point windows.
/// Exact for `c + a r^k + b s^k`.
pub fn shanks_windows(v: &[f64]) -> Vec<f64> {
    v.windows(5).map(wynn).collect()
}

fn wynn(w: &[f64]) -> f64 {
    let mut prev = vec![0.0; w.len() + 1];
    let mut cur = w.to_vec();
    let mut best = w[w.len() - 1];
    for col in 1..w.len() {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let d = cur[i + 1] - cur[i];
            if d.abs() <= 1e-15 * cur[i + 1].abs().max(1e-300) {
                return best;
            }
            next.push(prev[i + 1] + 1.0 / d);
        }
        prev = cur;
        cur = next;
        if col % 2 == 0 {
            best = cur[cur.len() - 1];
        }
    }
    best
}
