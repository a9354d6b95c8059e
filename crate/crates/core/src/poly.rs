//! Roots of small polynomials (Aberth-Ehrlich iteration).

use num_complex::Complex64 as C64;

/// Horner evaluation of `p` and `p'`; coefficients from the leading term down.
fn horner(coeffs: &[f64], z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut d = C64::new(0.0, 0.0);
    for &c in coeffs {
        d = d * z + p;
        p = p * z + c;
    }
    (p, d)
}

/// All complex roots of the polynomial with the given coefficients
/// (leading coefficient first, nonzero).
pub fn roots(coeffs: &[f64]) -> Vec<C64> {
    let n = coeffs.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let lead = coeffs[0];
    // Cauchy bound for the initial circle
    let radius = 1.0 + coeffs[1..].iter().map(|c| (c / lead).abs()).fold(0.0, f64::max);
    let mut z: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(0.5 * radius, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0_f64;
        for i in 0..n {
            let (p, d) = horner(coeffs, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / d;
            let repulse: C64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let step = ratio / (1.0 - ratio * repulse);
            z[i] -= step;
            moved = moved.max(step.norm() / z[i].norm().max(1.0));
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartic_with_known_roots() {
        // (x-1)(x-2)(x-3)(x-4)
        let mut r: Vec<f64> = roots(&[1.0, -10.0, 35.0, -50.0, 24.0]).iter().map(|z| z.re).collect();
        r.sort_by(f64::total_cmp);
        for (a, b) in r.iter().zip([1.0, 2.0, 3.0, 4.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn complex_pair() {
        let r = roots(&[1.0, 0.0, 1.0]);
        assert!(r.iter().all(|z| (z.norm() - 1.0).abs() < 1e-14 && z.re.abs() < 1e-14));
    }
}
