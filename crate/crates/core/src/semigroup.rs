//! Free convolution powers `mu^{⊞t}`, `mu^{⊠t}` for real `t >= 1` and the
//! boolean-to-free maps `Psi_t`.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::dwolff::{continuation, Approach, DiskInverter, HalfplaneInverter, SlitInverter, SolverConfig};
use crate::error::{Error, Result};
use crate::freeconv::{self, AtomReport, AtomRule, ZERO_MOMENT};
use crate::measure::{wrap_angle, Domain, Measure, NamedFamily};
use crate::transforms::{self, continuous_log, DomainTag, Memo, TransformHandle, TransformKind};

type CFn = dyn Fn(C64) -> Result<C64> + Send + Sync;
type Probe = dyn Fn(C64) -> Result<f64> + Send + Sync;

/// Exponents in `(1, 1 + T_GAP)` are rejected: `(t omega - z)/(t - 1)` loses
/// all precision there.
pub const T_GAP: f64 = 1e-6;

#[derive(Clone)]
pub struct PowerResult {
    pub t: f64,
    pub omega_t: TransformHandle,
    /// `F_{mu_t}` (additive) or `eta_{mu_t}` (multiplicative).
    pub transformed: TransformHandle,
    pub branch_note: Option<String>,
    probe: Option<Arc<Probe>>,
}

impl PowerResult {
    /// Residual `|Phi_t(omega_t(z)) - z|` of the inversion defining `omega_t`
    /// (the subordination residual when the power is computed as `mu ⊠ mu`).
    /// Zero for closed-form results.
    pub fn residual(&self, z: C64) -> Result<f64> {
        match &self.probe {
            Some(p) => p(z),
            None => Ok(0.0),
        }
    }
}

impl fmt::Debug for PowerResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PowerResult")
            .field("t", &self.t)
            .field("transformed", &self.transformed)
            .field("branch_note", &self.branch_note)
            .finish_non_exhaustive()
    }
}

fn check_exponent(t: f64) -> Result<()> {
    if !t.is_finite() || t < 1.0 {
        return Err(Error::BadExponent(t));
    }
    if t > 1.0 && t < 1.0 + T_GAP {
        return Err(Error::BadExponent(t));
    }
    Ok(())
}

fn identity(tag: DomainTag, label: &str) -> TransformHandle {
    TransformHandle::symmetric(TransformKind::Composed, tag, format!("identity ({label})"), Ok)
}

fn lift_failure(z: C64, e: Error) -> Error {
    match e {
        Error::MaxIterations { iterations, residual } => Error::SolverFailure(format!(
            "inversion at z = {z} did not converge in {iterations} iterations (residual {residual:e})"
        )),
        other => other,
    }
}

/// `omega_t`, the right inverse of `H_t(z) = t z + (1 - t) F(z)` on the upper half-plane.
fn additive_omega(f: &TransformHandle, t: f64, cfg: SolverConfig, label: &str) -> TransformHandle {
    let memo = Arc::new(Memo::default());
    let f = f.clone();
    TransformHandle::symmetric(TransformKind::Composed, DomainTag::UpperHalfPlane, format!("omega_t of {label}"), move |z| {
        continuation(z, Approach::Vertical, &memo, |p, seed| {
            let h = |w: C64| -> Result<C64> { Ok(w * t + (1.0 - t) * f.eval(w)?) };
            HalfplaneInverter::trusted(h, cfg).invert_seeded(p, seed).map_err(|e| lift_failure(p, e))
        })
    })
}

/// `mu^{⊞t}` for a measure on the line.
pub fn free_add_power(mu: &Measure, t: f64) -> Result<PowerResult> {
    free_add_power_with(mu, t, SolverConfig::default())
}

pub fn free_add_power_with(mu: &Measure, t: f64, cfg: SolverConfig) -> Result<PowerResult> {
    if mu.domain() == Domain::Circle {
        return Err(Error::DomainMismatch("free_add_power needs a measure on the line".into()));
    }
    check_exponent(t)?;
    cfg.validate()?;
    let f = transforms::f_handle(mu)?;
    free_add_power_handle(&f, t, cfg)
}

/// `mu^{⊞t}` from the F-transform of `mu`.
pub fn free_add_power_handle(f: &TransformHandle, t: f64, cfg: SolverConfig) -> Result<PowerResult> {
    check_exponent(t)?;
    if f.kind() != TransformKind::F || f.domain() != DomainTag::UpperHalfPlane {
        return Err(Error::DomainMismatch(format!("{} is not an F-transform", f.provenance())));
    }
    let label = format!("({})^(⊞{t})", f.provenance());
    if t == 1.0 {
        return Ok(PowerResult {
            t,
            omega_t: identity(DomainTag::UpperHalfPlane, &label),
            transformed: f.clone(),
            branch_note: None,
            probe: None,
        });
    }
    let omega = additive_omega(f, t, cfg, &label);
    let w = omega.clone();
    let transformed = TransformHandle::symmetric(TransformKind::F, DomainTag::UpperHalfPlane, format!("F of {label}"), move |z| {
        Ok((w.eval(z)? * t - z) / (t - 1.0))
    });
    let (w, f) = (omega.clone(), f.clone());
    let probe: Arc<Probe> = Arc::new(move |z| {
        let o = w.eval(z)?;
        Ok((o * t + (1.0 - t) * f.eval(o)? - z).norm())
    });
    Ok(PowerResult { t, omega_t: omega, transformed, branch_note: None, probe: Some(probe) })
}

/// Atoms of `mu^{⊞t}`: `t p` carries `t mu({p}) - (t - 1)` when positive.
pub fn atoms_add_power(mu: &Measure, t: f64) -> Result<AtomReport> {
    check_exponent(t)?;
    let mut r = AtomReport::default();
    for a in mu.atoms() {
        let m = t * a.mass - (t - 1.0);
        if m > 1e-14 {
            r.entries.push(freeconv::AtomEntry { location: t * a.position, mass: m.min(1.0), rule: AtomRule::PowerRule });
        }
    }
    Ok(r)
}

/// Winding number of `h` around 0 on the circle of radius `r`; `None` when
/// `h` (numerically) vanishes on it.
fn winding(h: &dyn Fn(C64) -> Result<C64>, r: f64, n: usize) -> Result<Option<i64>> {
    let mut prev = h(C64::new(r, 0.0))?;
    let first = prev;
    let mut total = 0.0;
    for k in 1..=n {
        let next = if k == n { first } else { h(C64::from_polar(r, TAU * k as f64 / n as f64))? };
        if next.norm() < 1e-14 || prev.norm() < 1e-14 {
            return Ok(None);
        }
        total += (next / prev).arg();
        prev = next;
    }
    Ok(Some((total / TAU).round() as i64))
}

/// Circle data of a power: `h = eta / z` (finite at 0) and `eta`.
struct CircleBase {
    h: Arc<CFn>,
    eta: Arc<CFn>,
    slope: C64,
    label: String,
}

fn haar_handle(label: &str) -> TransformHandle {
    TransformHandle::new(TransformKind::Eta, DomainTag::UnitDisk, format!("eta of Haar measure ({label})"), |z| {
        if !DomainTag::UnitDisk.contains(z) {
            return Err(Error::DomainMismatch(format!("{z} is outside the disk")));
        }
        Ok(C64::new(0.0, 0.0))
    })
}

/// `omega_t` on the disk: the Denjoy-Wolff point of `w -> z h(w)^(t-1)`, with
/// `log h` continued along `[0, w]` from `Log h(0)`.
fn circle_power(base: CircleBase, t: f64, cfg: SolverConfig) -> PowerResult {
    let label = format!("({})^(⊠{t})", base.label);
    let log0 = base.slope.ln();
    let note = format!(
        "principal branch: log(eta(z)/z) continued along [0, z] from Log eta'(0) = {:.6}{:+.6}i",
        log0.re, log0.im
    );
    let memo = Arc::new(Memo::default());
    let h = base.h.clone();
    let omega: Arc<CFn> = Arc::new(move |z: C64| {
        continuation(z, Approach::Radial, &memo, |p, seed| {
            let hh = h.clone();
            let q = move |w: C64| -> Result<C64> {
                let l = continuous_log(|x| hh(x), C64::new(0.0, 0.0), w, log0)?;
                Ok((l * (t - 1.0)).exp())
            };
            DiskInverter::from_quotient(q, cfg).invert_seeded(p, seed).map_err(|e| lift_failure(p, e))
        })
    });
    let w = omega.clone();
    let omega_t = TransformHandle::new(TransformKind::Composed, DomainTag::UnitDisk, format!("omega_t of {label}"), move |z| w(z));
    let (w, h) = (omega.clone(), base.h.clone());
    let probe: Arc<Probe> = Arc::new(move |z| {
        let o = w(z)?;
        let l = continuous_log(|x| h(x), C64::new(0.0, 0.0), o, log0)?;
        Ok((o - z * (l * (t - 1.0)).exp()).norm())
    });
    let eta = base.eta.clone();
    let transformed = TransformHandle::new(TransformKind::Eta, DomainTag::UnitDisk, format!("eta of {label}"), move |z| eta(omega(z)?));
    PowerResult { t, omega_t, transformed, branch_note: Some(note), probe: Some(probe) }
}

fn circle_base_of(mu: &Measure) -> CircleBase {
    let (m1, m2) = (mu.clone(), mu.clone());
    CircleBase {
        h: Arc::new(move |w| Ok(transforms::eta_over_z(&m1, w))),
        eta: Arc::new(move |w| Ok(transforms::eta(&m2, w))),
        slope: mu.first_moment(),
        label: format!("circle measure with {} atoms", mu.atoms().len()),
    }
}

fn is_haar(mu: &Measure) -> bool {
    matches!(mu.family(), Some((NamedFamily::HaarCircle, w)) if (w - 1.0).abs() < 1e-12)
}

/// `mu^{⊠t}` for a measure on the circle. Defined for `t >= 1` when `eta_mu`
/// has no zeros in the punctured disk and `eta'(0) != 0`; otherwise for
/// `t >= 2` through `(mu ⊠ mu)^{⊠ t/2}`.
pub fn free_mult_power_circle(mu: &Measure, t: f64) -> Result<PowerResult> {
    free_mult_power_circle_with(mu, t, SolverConfig::default())
}

pub fn free_mult_power_circle_with(mu: &Measure, t: f64, cfg: SolverConfig) -> Result<PowerResult> {
    if mu.domain() != Domain::Circle {
        return Err(Error::DomainMismatch("free_mult_power_circle needs a circle measure".into()));
    }
    check_exponent(t)?;
    cfg.validate()?;
    if t == 1.0 {
        return Ok(PowerResult {
            t,
            omega_t: identity(DomainTag::UnitDisk, "t = 1"),
            transformed: transforms::eta_handle(mu)?,
            branch_note: None,
            probe: None,
        });
    }
    let m1 = mu.first_moment();
    if is_haar(mu) || m1.norm() < ZERO_MOMENT {
        if t < 2.0 {
            return Err(Error::ZeroFirstMoment);
        }
        // mu ⊠ mu is Haar measure, and so are its powers
        return Ok(PowerResult {
            t,
            omega_t: TransformHandle::new(TransformKind::Composed, DomainTag::UnitDisk, "omega_t (Haar power)", |_| {
                Ok(C64::new(0.0, 0.0))
            }),
            transformed: haar_handle("zero first moment"),
            branch_note: Some("Haar measure: no branch choice".into()),
            probe: None,
        });
    }
    let base = circle_base_of(mu);
    if winding(base.h.as_ref(), 0.99, 1024)? == Some(0) {
        return Ok(circle_power(base, t, cfg));
    }
    if t < 2.0 {
        return Err(Error::ZeroOfEta);
    }
    let pair = freeconv::free_mult_circle_with(mu, mu, cfg)?;
    let square = pair.convolved.clone();
    let (s1, s2) = (square.clone(), square.clone());
    let slope = m1 * m1;
    let base = CircleBase {
        h: Arc::new(move |w| if w.norm() == 0.0 { Ok(slope) } else { Ok(s1.eval(w)? / w) }),
        eta: Arc::new(move |w| s2.eval(w)),
        slope,
        label: "mu ⊠ mu".into(),
    };
    let mut r = if t == 2.0 {
        PowerResult {
            t,
            omega_t: identity(DomainTag::UnitDisk, "(mu ⊠ mu)^1"),
            transformed: square,
            branch_note: None,
            probe: Some(Arc::new(move |z| pair.residual(z))),
        }
    } else {
        circle_power(base, t / 2.0, cfg)
    };
    r.t = t;
    r.branch_note = Some(format!(
        "eta_mu has zeros in the disk; computed as (mu ⊠ mu)^(⊠{}). {}",
        t / 2.0,
        r.branch_note.unwrap_or_default()
    ));
    Ok(r)
}

/// Atoms of `mu^{⊠t}` on the circle. An atom `e^{i phi}` with mass
/// `m > (t-1)/t` gives mass `t m - (t - 1)` at the angle `t phi~`, where
/// `phi~` is the argument of `eta(z)/z` at `e^{-i phi}` on the branch used by
/// [`free_mult_power_circle`].
pub fn atoms_mult_power_circle(mu: &Measure, t: f64) -> Result<AtomReport> {
    if mu.domain() != Domain::Circle {
        return Err(Error::DomainMismatch("atoms_mult_power_circle needs a circle measure".into()));
    }
    check_exponent(t)?;
    let mut r = AtomReport::default();
    let log0 = mu.first_moment().ln();
    for a in mu.atoms() {
        let m = t * a.mass - (t - 1.0);
        if m <= 1e-14 {
            continue;
        }
        let phi = if t == 1.0 {
            a.position
        } else {
            let end = C64::from_polar(1.0 - 1e-10, -a.position);
            let l = continuous_log(|w| Ok(transforms::eta_over_z(mu, w)), C64::new(0.0, 0.0), end, log0)?;
            // round to the nearest lift of the atom angle
            let k = ((l.im - a.position) / TAU).round();
            a.position + k * TAU
        };
        r.entries.push(freeconv::AtomEntry { location: wrap_angle(t * phi), mass: m.min(1.0), rule: AtomRule::PowerRule });
    }
    r.entries.sort_by(|a, b| a.location.total_cmp(&b.location));
    Ok(r)
}

/// `mu^{⊠t}` for a measure on `[0, +inf)`, `mu != delta_0`.
pub fn free_mult_power_halfline(mu: &Measure, t: f64) -> Result<PowerResult> {
    free_mult_power_halfline_with(mu, t, SolverConfig::default())
}

pub fn free_mult_power_halfline_with(mu: &Measure, t: f64, cfg: SolverConfig) -> Result<PowerResult> {
    if mu.domain() != Domain::Halfline {
        return Err(Error::DomainMismatch("free_mult_power_halfline needs a half-line measure".into()));
    }
    if mu.as_point_mass() == Some(0.0) {
        return Err(Error::DeltaZero);
    }
    check_exponent(t)?;
    cfg.validate()?;
    if t == 1.0 {
        return Ok(PowerResult {
            t,
            omega_t: identity(DomainTag::SlitPlane, "t = 1"),
            transformed: transforms::eta_handle(mu)?,
            branch_note: None,
            probe: None,
        });
    }
    let label = format!("(half-line measure with {} atoms)^(⊠{t})", mu.atoms().len());
    let m = Arc::new(mu.clone());
    let mh = m.clone();
    // log(-Phi_t(-e^s)) = s - (t - 1) Log(eta(w)/w), w = -e^s; eta(w)/w stays
    // in the closed upper half-plane for w in the upper half-plane
    let lift = move |s: C64| -> Result<C64> {
        let w = -s.exp();
        let h = transforms::eta_over_z(&mh, w);
        if h.norm() == 0.0 {
            return Err(Error::SolverFailure(format!("eta(w)/w vanishes at {w}")));
        }
        let l = h.ln();
        // on the real axis the principal log is real
        let l = if s.im == 0.0 { C64::new(l.re, 0.0) } else { l };
        Ok(s - l * (t - 1.0))
    };
    let lift: Arc<CFn> = Arc::new(lift);
    let lift_probe = lift.clone();
    let k = 2.0 * t - 1.0;
    let memo = Arc::new(Memo::default());
    let omega: Arc<CFn> = Arc::new(move |z: C64| {
        if !DomainTag::SlitPlane.contains(z) || z.norm() == 0.0 {
            return Err(Error::DomainMismatch(format!("{z} is not in the slit plane")));
        }
        let solve = |p: C64, seed: Option<C64>| {
            let l = lift.clone();
            SlitInverter::from_lift(move |s| l(s), k, cfg)?.invert_seeded(p, seed).map_err(|e| lift_failure(p, e))
        };
        if z.im < 0.0 {
            return continuation(z.conj(), Approach::Vertical, &memo, solve).map(|w| w.conj());
        }
        if z.im == 0.0 {
            return memo.get_or(z, || solve(z, None));
        }
        continuation(z, Approach::Vertical, &memo, solve)
    });
    let w = omega.clone();
    let omega_t = TransformHandle::new(TransformKind::Composed, DomainTag::SlitPlane, format!("omega_t of {label}"), move |z| w(z));
    let (w, l) = (omega.clone(), lift_probe);
    let probe: Arc<Probe> = Arc::new(move |z| {
        let o = w(z)?;
        Ok((-(l((-o).ln())?).exp() - z).norm())
    });
    let transformed = TransformHandle::new(TransformKind::Eta, DomainTag::SlitPlane, format!("eta of {label}"), move |z| {
        Ok(transforms::eta(&m, omega(z)?))
    });
    Ok(PowerResult {
        t,
        omega_t,
        transformed,
        branch_note: Some(format!(
            "(z/eta(z))^({}) positive for z < 0, principal logarithm elsewhere",
            t - 1.0
        )),
        probe: Some(probe),
    })
}

/// Atoms of `mu^{⊠t}` on `[0, +inf)`: `p^t` carries `t mu({p}) - (t - 1)`
/// when positive, and the atom at 0 keeps its mass.
pub fn atoms_mult_power_halfline(mu: &Measure, t: f64) -> Result<AtomReport> {
    if mu.domain() != Domain::Halfline {
        return Err(Error::DomainMismatch("atoms_mult_power_halfline needs a half-line measure".into()));
    }
    check_exponent(t)?;
    let mut r = AtomReport::default();
    for a in mu.atoms() {
        if a.position == 0.0 {
            r.entries.push(freeconv::AtomEntry { location: 0.0, mass: a.mass, rule: AtomRule::ZeroRule });
            continue;
        }
        let m = t * a.mass - (t - 1.0);
        if m > 1e-14 {
            r.entries.push(freeconv::AtomEntry { location: a.position.powf(t), mass: m.min(1.0), rule: AtomRule::PowerRule });
        }
    }
    r.entries.sort_by(|a, b| a.location.total_cmp(&b.location));
    Ok(r)
}

/// `Psi_t(mu)` for a measure on the line: the F-transform of the free
/// infinitely divisible law with `phi = (1 - t)(F_mu - z)`.
pub fn boolean_to_free_add(mu: &Measure, t: f64) -> Result<TransformHandle> {
    if mu.domain() == Domain::Circle {
        return Err(Error::DomainMismatch("boolean_to_free_add needs a measure on the line".into()));
    }
    boolean_to_free_add_handle(&transforms::f_handle(mu)?, t, SolverConfig::default())
}

pub fn boolean_to_free_add_handle(f: &TransformHandle, t: f64, cfg: SolverConfig) -> Result<TransformHandle> {
    if !(t > 1.0) {
        return Err(Error::BadExponent(t));
    }
    check_exponent(t)?;
    if f.kind() != TransformKind::F || f.domain() != DomainTag::UpperHalfPlane {
        return Err(Error::DomainMismatch(format!("{} is not an F-transform", f.provenance())));
    }
    let name = if t == 2.0 { "Bercovici-Pata bijection Psi_2".to_string() } else { format!("Psi_{t}") };
    let label = format!("{name} of ({})", f.provenance());
    Ok(additive_omega(f, t, cfg, &label).relabel(TransformKind::F, format!("F of {label}")))
}

/// `Psi_t(mu)` for a measure on the circle that is infinitely divisible for
/// the boolean multiplicative convolution (`eta_mu(z)/z` has no zeros in the
/// disk). Returns the eta-transform.
pub fn boolean_to_free_mult_circle(mu: &Measure, t: f64) -> Result<TransformHandle> {
    boolean_to_free_mult_circle_with(mu, t, SolverConfig::default())
}

pub fn boolean_to_free_mult_circle_with(mu: &Measure, t: f64, cfg: SolverConfig) -> Result<TransformHandle> {
    if mu.domain() != Domain::Circle {
        return Err(Error::DomainMismatch("boolean_to_free_mult_circle needs a circle measure".into()));
    }
    if !(t > 1.0) {
        return Err(Error::BadExponent(t));
    }
    check_exponent(t)?;
    if is_haar(mu) {
        return Ok(haar_handle("Psi_t of Haar"));
    }
    let base = circle_base_of(mu);
    if base.slope.norm() < ZERO_MOMENT {
        return Err(Error::NotBooleanInfDiv("eta_mu(z)/z vanishes at 0".into()));
    }
    match winding(base.h.as_ref(), 0.99, 1024)? {
        Some(0) => {}
        _ => return Err(Error::NotBooleanInfDiv("eta_mu(z)/z has zeros in the disk".into())),
    }
    for k in 0..64 {
        let z = C64::from_polar(0.95 * ((k % 8) as f64 + 0.5) / 8.0, TAU * (k / 8) as f64 / 8.0 + 0.1);
        if (base.h)(z)?.norm() > 1.0 + 1e-12 {
            return Err(Error::NotBooleanInfDiv(format!("|eta_mu(z)/z| > 1 at {z}")));
        }
    }
    let label = format!("Psi_{t} of ({})", base.label);
    // eta of Psi_t(mu) is omega_t itself
    Ok(circle_power(base, t, cfg).omega_t.relabel(TransformKind::Eta, format!("eta of {label}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::make_atomic;
    use std::f64::consts::PI;
    use crate::transforms::{phi_of, sigma_of};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn bern() -> Measure {
        make_atomic(&[(-1.0, 0.5), (1.0, 0.5)], Domain::Real).unwrap()
    }

    #[test]
    fn exponent_checks() {
        assert!(matches!(free_add_power(&bern(), 0.5), Err(Error::BadExponent(_))));
        assert!(matches!(free_add_power(&bern(), 1.0 + 1e-9), Err(Error::BadExponent(_))));
        let p = free_add_power(&bern(), 1.0).unwrap();
        let z = c(0.2, 0.3);
        assert_eq!(p.omega_t.eval(z).unwrap(), z);
    }

    #[test]
    fn point_mass_scales() {
        let a = 0.75;
        let t = 2.5;
        let p = free_add_power(&Measure::point_mass(a, Domain::Real).unwrap(), t).unwrap();
        for z in [c(0.2, 0.3), c(-4.0, 0.01)] {
            assert!((p.transformed.eval(z).unwrap() - (z - t * a)).norm() < 1e-12);
        }
    }

    #[test]
    fn omega_identity_and_im() {
        let mu = make_atomic(&[(-1.0, 0.2), (0.5, 0.5), (3.0, 0.3)], Domain::Real).unwrap();
        let t = 1.7;
        let p = free_add_power(&mu, t).unwrap();
        for z in [c(0.2, 0.3), c(2.0, 0.05), c(-1.0, 2.0)] {
            let w = p.omega_t.eval(z).unwrap();
            let f = p.transformed.eval(z).unwrap();
            assert!((w - (z / t + (1.0 - 1.0 / t) * f)).norm() < 1e-10);
            assert!(w.im >= z.im);
        }
    }

    #[test]
    fn phi_is_linear_in_t() {
        let mu = make_atomic(&[(-1.0, 0.2), (0.5, 0.5), (3.0, 0.3)], Domain::Real).unwrap();
        let f = transforms::f_handle(&mu).unwrap();
        let z = c(0.5, 8.0);
        let base = phi_of(&f, z).unwrap();
        for t in [1.2, 2.9] {
            let p = free_add_power(&mu, t).unwrap();
            let v = phi_of(&p.transformed, z).unwrap();
            assert!((v - base * t).norm() < 1e-9, "{t}");
        }
    }

    #[test]
    fn square_matches_free_add() {
        let mu = make_atomic(&[(0.0, 0.3), (1.0, 0.7)], Domain::Real).unwrap();
        let p = free_add_power(&mu, 2.0).unwrap();
        let q = freeconv::free_add(&mu, &mu).unwrap();
        for z in [c(0.2, 0.01), c(1.5, 0.3)] {
            assert!((p.transformed.eval(z).unwrap() - q.convolved.eval(z).unwrap()).norm() < 1e-10);
        }
    }

    #[test]
    fn additive_atoms() {
        assert!(atoms_add_power(&bern(), 3.0).unwrap().is_empty());
        let r = atoms_add_power(&bern(), 4.0 / 3.0).unwrap();
        assert_eq!(r.entries.len(), 2);
        for (e, x) in r.entries.iter().zip([-4.0 / 3.0, 4.0 / 3.0]) {
            assert!((e.location - x).abs() < 1e-15 && (e.mass - 1.0 / 3.0).abs() < 1e-15);
        }
        let r = atoms_add_power(&Measure::point_mass(0.4, Domain::Real).unwrap(), 2.5).unwrap();
        assert!((r.entries[0].location - 1.0).abs() < 1e-15 && r.entries[0].mass == 1.0);
    }

    #[test]
    fn circle_rotation_power() {
        let theta = 0.8;
        let t = 2.5;
        let p = free_mult_power_circle(&Measure::point_mass(theta, Domain::Circle).unwrap(), t).unwrap();
        let z = c(0.3, 0.4);
        assert!((p.transformed.eval(z).unwrap() - C64::from_polar(1.0, t * theta) * z).norm() < 1e-12);
        assert!(p.branch_note.is_some());
    }

    #[test]
    fn circle_square_matches_product() {
        let mu = make_atomic(&[(0.3, 0.6), (2.0, 0.4)], Domain::Circle).unwrap();
        let p = free_mult_power_circle(&mu, 2.0).unwrap();
        let q = freeconv::free_mult_circle(&mu, &mu).unwrap();
        for z in [c(0.3, 0.4), c(-0.5, -0.1), c(0.0, 0.9)] {
            assert!((p.transformed.eval(z).unwrap() - q.convolved.eval(z).unwrap()).norm() < 1e-10);
        }
    }

    #[test]
    fn circle_zero_mean() {
        let mu = make_atomic(&[(0.0, 0.5), (PI, 0.5)], Domain::Circle).unwrap();
        assert!(matches!(free_mult_power_circle(&mu, 1.5), Err(Error::ZeroFirstMoment)));
        let p = free_mult_power_circle(&mu, 2.0).unwrap();
        assert_eq!(p.transformed.eval(c(0.1, 0.2)).unwrap(), c(0.0, 0.0));
        let haar = Measure::named(NamedFamily::HaarCircle, Domain::Circle).unwrap();
        let p = free_mult_power_circle(&haar, 3.7).unwrap();
        assert_eq!(p.transformed.eval(c(0.1, 0.2)).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn circle_zero_of_eta() {
        // eta has a zero inside the disk but a nonzero first moment
        let mu = make_atomic(&[(0.0, 0.45), (PI, 0.55)], Domain::Circle).unwrap();
        let h = |w: C64| Ok(transforms::eta_over_z(&mu, w));
        assert_ne!(winding(&h, 0.99, 1024).unwrap(), Some(0));
        assert!(matches!(free_mult_power_circle(&mu, 1.5), Err(Error::ZeroOfEta)));
        let p = free_mult_power_circle(&mu, 2.0).unwrap();
        let q = freeconv::free_mult_circle(&mu, &mu).unwrap();
        let z = c(0.2, 0.5);
        assert!((p.transformed.eval(z).unwrap() - q.convolved.eval(z).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn halfline_point_mass_power() {
        let (a, t) = (2.0, 1.5);
        let p = free_mult_power_halfline(&Measure::point_mass(a, Domain::Halfline).unwrap(), t).unwrap();
        for z in [c(-1.0, 0.0), c(0.5, 0.5), c(-0.2, -0.3)] {
            assert!((p.transformed.eval(z).unwrap() - z * a.powf(t)).norm() < 1e-10, "{z}");
        }
        assert!(matches!(
            free_mult_power_halfline(&Measure::point_mass(0.0, Domain::Halfline).unwrap(), 2.0),
            Err(Error::DeltaZero)
        ));
    }

    #[test]
    fn halfline_square_matches_product() {
        let mu = make_atomic(&[(1.0, 0.5), (4.0, 0.5)], Domain::Halfline).unwrap();
        let p = free_mult_power_halfline(&mu, 2.0).unwrap();
        let q = freeconv::free_mult_halfline(&mu, &mu).unwrap();
        for z in [c(-1.0, 0.0), c(-0.3, 0.2), c(2.0, 0.5), c(0.1, -0.05)] {
            assert!((p.transformed.eval(z).unwrap() - q.convolved.eval(z).unwrap()).norm() < 1e-10, "{z}");
        }
    }

    #[test]
    fn sigma_power_law() {
        let mu = make_atomic(&[(0.5, 0.3), (1.0, 0.3), (3.0, 0.4)], Domain::Halfline).unwrap();
        let t = 1.6;
        let p = free_mult_power_halfline(&mu, t).unwrap();
        let e = transforms::eta_handle(&mu).unwrap();
        for x in [-0.09, -0.05, -0.01] {
            let lhs = sigma_of(&p.transformed, x).unwrap();
            let rhs = sigma_of(&e, x).unwrap().powf(t);
            assert!((lhs - rhs).abs() < 1e-8 * rhs.abs().max(1.0), "{x}: {lhs} {rhs}");
        }
    }

    #[test]
    fn halfline_atoms() {
        let mu = make_atomic(&[(1.5, 0.8), (3.0, 0.2)], Domain::Halfline).unwrap();
        let r = atoms_mult_power_halfline(&mu, 2.0).unwrap();
        assert_eq!(r.entries.len(), 1);
        assert!((r.entries[0].location - 2.25).abs() < 1e-15 && (r.entries[0].mass - 0.6).abs() < 1e-15);
    }

    #[test]
    fn psi_point_mass() {
        let (a, t) = (0.6, 2.0);
        let f = boolean_to_free_add(&Measure::point_mass(a, Domain::Real).unwrap(), t).unwrap();
        let z = c(0.3, 0.4);
        assert!((f.eval(z).unwrap() - (z - (t - 1.0) * a)).norm() < 1e-12);
        assert!(f.provenance().contains("Bercovici-Pata"));
        assert!(matches!(boolean_to_free_add(&bern(), 1.0), Err(Error::BadExponent(_))));
    }

    #[test]
    fn psi_real_part() {
        let f = boolean_to_free_add(&bern(), 2.0).unwrap();
        for k in 0..20 {
            let z = c(-3.0 + 0.3 * k as f64, 0.05 + 0.2 * k as f64);
            let h = 1e-6;
            let d = (f.eval(z + h).unwrap() - f.eval(z - h).unwrap()) / (2.0 * h);
            assert!(d.re > 0.5);
            assert!(f.eval(z).unwrap().im >= z.im - 1e-12);
        }
    }

    #[test]
    fn psi_circle() {
        let (theta, t) = (0.7, 2.0);
        let e = boolean_to_free_mult_circle(&Measure::point_mass(theta, Domain::Circle).unwrap(), t).unwrap();
        let z = c(0.3, -0.2);
        assert!((e.eval(z).unwrap() - C64::from_polar(1.0, (t - 1.0) * theta) * z).norm() < 1e-12);
        let haar = Measure::named(NamedFamily::HaarCircle, Domain::Circle).unwrap();
        assert_eq!(boolean_to_free_mult_circle(&haar, 3.0).unwrap().eval(z).unwrap(), c(0.0, 0.0));
        let mu = make_atomic(&[(0.0, 0.45), (PI, 0.55)], Domain::Circle).unwrap();
        assert!(matches!(boolean_to_free_mult_circle(&mu, 2.0), Err(Error::NotBooleanInfDiv(_))));
    }
}
