use std::f64::consts::{PI, TAU};

use freeconv::dwolff::{HalfplaneInverter, SolverConfig};
use freeconv::freeconv::{free_add, free_mult};
use freeconv::otherconv::{boolean_add_handles, monotone_add_handles};
use freeconv::recovery::{density_real, Schedule};
use freeconv::semigroup::free_add_power;
use freeconv::transforms::{self, cauchy, eta, f_handle, psi};
use freeconv::{make_atomic, make_named, Complex64 as C64, Domain, Measure, NamedFamily};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Distinct positions (at least 0.05 apart) and masses summing to 1.
fn atoms(lo: f64, hi: f64, max: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((lo..hi, 0.05f64..1.0), 2..=max).prop_map(|raw| {
        let mut pts: Vec<(f64, f64)> = Vec::new();
        for (x, w) in raw {
            if pts.iter().all(|p| (p.0 - x).abs() > 0.05) {
                pts.push((x, w));
            }
        }
        let total: f64 = pts.iter().map(|p| p.1).sum();
        let n = pts.len();
        let mut acc = 0.0;
        for (k, p) in pts.iter_mut().enumerate() {
            if k + 1 == n {
                p.1 = 1.0 - acc;
            } else {
                p.1 /= total;
                acc += p.1;
            }
        }
        pts
    })
}

fn real_measure() -> impl Strategy<Value = Measure> {
    atoms(-3.0, 3.0, 4).prop_map(|a| make_atomic(&a, Domain::Real).unwrap())
}

fn halfline_measure() -> impl Strategy<Value = Measure> {
    atoms(0.1, 4.0, 3).prop_map(|a| make_atomic(&a, Domain::Halfline).unwrap())
}

fn circle_measure() -> impl Strategy<Value = Measure> {
    atoms(0.0, 6.2, 3).prop_map(|a| make_atomic(&a, Domain::Circle).unwrap())
}

fn upper() -> impl Strategy<Value = C64> {
    (-4.0f64..4.0, 0.05f64..4.0).prop_map(|(x, y)| c(x, y))
}

fn disk() -> impl Strategy<Value = C64> {
    (0.0f64..0.95, 0.0f64..TAU).prop_map(|(r, t)| C64::from_polar(r, t))
}

fn slit() -> impl Strategy<Value = C64> {
    (0.05f64..5.0, -3.0f64..3.0).prop_map(|(r, t)| C64::from_polar(r, t))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn atomic_measures_have_unit_mass(a in atoms(-5.0, 5.0, 6)) {
        let mu = make_atomic(&a, Domain::Real).unwrap();
        prop_assert!((mu.total_mass() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn affine_round_trip(mu in real_measure(), s in prop_oneof![0.2f64..5.0, -5.0f64..-0.2], b in -3.0f64..3.0) {
        let back = mu.pushforward_affine(s, b).unwrap().pushforward_affine(1.0 / s, -b / s).unwrap();
        let mut x: Vec<_> = mu.atoms().iter().map(|a| (a.position, a.mass)).collect();
        let mut y: Vec<_> = back.atoms().iter().map(|a| (a.position, a.mass)).collect();
        x.sort_by(|p, q| p.0.total_cmp(&q.0));
        y.sort_by(|p, q| p.0.total_cmp(&q.0));
        for (p, q) in x.iter().zip(&y) {
            prop_assert!((p.0 - q.0).abs() < 1e-12 && (p.1 - q.1).abs() < 1e-12);
        }
    }

    #[test]
    fn named_families_are_normalized(center in -2.0f64..2.0, width in 0.1f64..3.0) {
        for fam in [
            NamedFamily::Semicircle { center, radius: width },
            NamedFamily::Arcsine { a: center, b: center + width },
            NamedFamily::UniformInterval { a: center, b: center + width },
        ] {
            let mu = Measure::named_with_nodes(fam, Domain::Real, 128).unwrap();
            let w: f64 = mu.nodes().iter().map(|n| n.weight).sum();
            prop_assert!((w - 1.0).abs() < 1e-8, "{fam:?}: {w}");
        }
    }

    #[test]
    fn cauchy_reflection_and_growth(mu in real_measure(), z in upper()) {
        let g = cauchy(&mu, z);
        prop_assert!((cauchy(&mu, z.conj()) - g.conj()).norm() < 1e-12 * g.norm().max(1.0));
        let f = g.inv();
        prop_assert!(f.im >= z.im * (1.0 - 1e-12));
    }

    #[test]
    fn halfline_identity(mu in halfline_measure(), z in slit()) {
        let lhs = cauchy(&mu, z.inv());
        let rhs = z * (psi(&mu, z) + 1.0);
        prop_assert!((lhs - rhs).norm() < 1e-12 * rhs.norm().max(1.0));
    }

    #[test]
    fn circle_eta_contracts(mu in circle_measure(), z in disk()) {
        prop_assert!(eta(&mu, z).norm() <= z.norm() * (1.0 + 1e-12));
    }

    #[test]
    fn halfplane_inversion_round_trip(mu in real_measure(), t in 1.1f64..3.0, alpha in upper()) {
        let f = f_handle(&mu).unwrap();
        let cfg = SolverConfig::default();
        let h = |w: C64| -> freeconv::Result<C64> { Ok(w * t + (1.0 - t) * f.eval(w)?) };
        let inv = HalfplaneInverter::new(h, cfg).unwrap();
        let w = inv.invert(alpha).unwrap();
        prop_assert!((h(w).unwrap() - alpha).norm() < 10.0 * cfg.tolerance * alpha.norm().max(1.0) + 1e-12);
        // Re omega' > 1/2
        let d = 1e-6;
        let w2 = inv.invert(alpha + d).unwrap();
        prop_assert!(((w2 - w) / d).re > 0.5);
    }

    #[test]
    fn free_add_commutes_and_subordinates(mu in real_measure(), nu in real_measure(), z in upper()) {
        let a = free_add(&mu, &nu).unwrap();
        let b = free_add(&nu, &mu).unwrap();
        let (fa, fb) = (a.convolved.eval(z).unwrap(), b.convolved.eval(z).unwrap());
        prop_assert!((fa - fb).norm() < 1e-10 * fa.norm().max(1.0));
        prop_assert!(a.residual(z).unwrap() < 1e-10);
        prop_assert!(a.omega1.eval(z).unwrap().im >= z.im * (1.0 - 1e-12));
        prop_assert!(a.omega2.eval(z).unwrap().im >= z.im * (1.0 - 1e-12));
    }

    #[test]
    fn free_mult_commutes_halfline(mu in halfline_measure(), nu in halfline_measure(), z in slit()) {
        let a = free_mult(&mu, &nu).unwrap();
        let b = free_mult(&nu, &mu).unwrap();
        let (ea, eb) = (a.convolved.eval(z).unwrap(), b.convolved.eval(z).unwrap());
        prop_assert!((ea - eb).norm() < 1e-10 * ea.norm().max(1.0));
        prop_assert!(a.residual(z).unwrap() < 1e-10 * z.norm().max(1.0));
    }

    #[test]
    fn free_mult_commutes_circle(mu in circle_measure(), nu in circle_measure(), z in disk()) {
        let a = free_mult(&mu, &nu).unwrap();
        let b = free_mult(&nu, &mu).unwrap();
        let (ea, eb) = (a.convolved.eval(z).unwrap(), b.convolved.eval(z).unwrap());
        prop_assert!((ea - eb).norm() < 1e-10);
        prop_assert!(a.residual(z).unwrap() < 1e-10);
    }

    #[test]
    fn boolean_and_monotone_associate(m1 in real_measure(), m2 in real_measure(), m3 in real_measure(), z in upper()) {
        let (f1, f2, f3) = (f_handle(&m1).unwrap(), f_handle(&m2).unwrap(), f_handle(&m3).unwrap());
        let l = boolean_add_handles(&boolean_add_handles(&f1, &f2).unwrap(), &f3).unwrap().eval(z).unwrap();
        let r = boolean_add_handles(&f1, &boolean_add_handles(&f2, &f3).unwrap()).unwrap().eval(z).unwrap();
        prop_assert!((l - r).norm() < 1e-12 * l.norm().max(1.0));
        let l = monotone_add_handles(&monotone_add_handles(&f1, &f2).unwrap(), &f3).unwrap().eval(z).unwrap();
        let r = monotone_add_handles(&f1, &monotone_add_handles(&f2, &f3).unwrap()).unwrap().eval(z).unwrap();
        prop_assert!((l - r).norm() < 1e-12 * l.norm().max(1.0));
    }

    #[test]
    fn boolean_with_delta_zero_is_identity(mu in real_measure(), z in upper()) {
        let f = f_handle(&mu).unwrap();
        let d0 = f_handle(&make_atomic(&[(0.0, 1.0)], Domain::Real).unwrap()).unwrap();
        let b = boolean_add_handles(&f, &d0).unwrap().eval(z).unwrap();
        prop_assert!((b - f.eval(z).unwrap()).norm() < 1e-12 * b.norm().max(1.0));
    }

    #[test]
    fn power_subordination_grows(mu in real_measure(), t in 1.2f64..3.0, z in upper()) {
        let p = free_add_power(&mu, t).unwrap();
        prop_assert!(p.omega_t.eval(z).unwrap().im >= z.im * (1.0 - 1e-12));
        prop_assert!(p.residual(z).unwrap() < 1e-10 * z.norm().max(1.0));
    }
}

#[test]
fn boolean_delta_one_is_not_a_shift() {
    let mu = make_atomic(&[(-1.0, 0.5), (1.0, 0.5)], Domain::Real).unwrap();
    let f = f_handle(&mu).unwrap();
    let d1 = f_handle(&make_atomic(&[(1.0, 1.0)], Domain::Real).unwrap()).unwrap();
    let shifted = f_handle(&mu.pushforward_affine(1.0, 1.0).unwrap()).unwrap();
    let z = c(0.3, 0.7);
    let b = boolean_add_handles(&f, &d1).unwrap().eval(z).unwrap();
    assert!((b - shifted.eval(z).unwrap()).norm() > 1e-3);
}

#[test]
fn halving_the_first_height_is_stable() {
    let b = make_atomic(&[(0.0, 0.5), (2.0, 0.5)], Domain::Real).unwrap();
    let h = free_add(&b, &b).unwrap().convolved;
    for k in 0..=20 {
        let x = 0.5 + 3.0 * k as f64 / 20.0;
        let d1 = density_real(&h, x, &Schedule::default()).unwrap();
        let d2 = density_real(&h, x, &Schedule::with_y0(5e-3)).unwrap();
        assert!((d1 - d2).abs() < 1e-6, "x = {x}: {d1} vs {d2}");
        assert!((d1 - 1.0 / (PI * (x * (4.0 - x)).sqrt())).abs() < 1e-6);
    }
}

#[test]
fn named_round_trip_through_recovery() {
    let s = Schedule::default();
    for fam in [
        NamedFamily::Semicircle { center: 0.5, radius: 2.0 },
        NamedFamily::Arcsine { a: -1.0, b: 1.0 },
        NamedFamily::UniformInterval { a: 0.0, b: 3.0 },
    ] {
        let mu = make_named(fam, Domain::Real).unwrap();
        let g = transforms::g_handle(&mu).unwrap();
        let (lo, hi) = fam.support();
        for k in 1..40 {
            let x = lo + (hi - lo) * k as f64 / 40.0;
            let d = density_real(&g, x, &s).unwrap();
            assert!((d - fam.density(x)).abs() < 1e-5, "{fam:?} at {x}: {d}");
        }
    }
}
