//! Quadrature rules used to discretize the named continuous families.
//!
//! Every rule returns `(node, weight)` pairs on `[-1, 1]` (or on the circle
//! for [`equispaced_circle`]) whose weights already sum to one, so they can be
//! pushed forward directly into a probability measure.

use std::f64::consts::PI;

/// Gauss-Legendre rule for the normalized uniform density `1/2` on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        let mut x = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x, 0.5 * w));
    }
    out.reverse();
    out
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Chebyshev rule (first kind) for the arcsine density `1/(pi sqrt(1-x^2))`.
pub fn chebyshev_first(n: usize) -> Vec<(f64, f64)> {
    let w = 1.0 / n as f64;
    let mut out: Vec<(f64, f64)> = (1..=n)
        .map(|k| (((2 * k - 1) as f64 * PI / (2 * n) as f64).cos(), w))
        .collect();
    out.reverse();
    out
}

/// Gauss rule for the semicircle density `(2/pi) sqrt(1-x^2)` (Chebyshev second kind).
pub fn chebyshev_second(n: usize) -> Vec<(f64, f64)> {
    let h = PI / (n + 1) as f64;
    let mut out: Vec<(f64, f64)> = (1..=n)
        .map(|k| {
            let a = k as f64 * h;
            (a.cos(), 2.0 / (n + 1) as f64 * a.sin().powi(2))
        })
        .collect();
    out.reverse();
    out
}

/// Equally weighted, equally spaced angles on the circle.
pub fn equispaced_circle(n: usize) -> Vec<(f64, f64)> {
    let w = 1.0 / n as f64;
    (0..n).map(|k| (2.0 * PI * k as f64 / n as f64, w)).collect()
}
