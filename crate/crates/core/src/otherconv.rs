//! Boolean and monotone convolutions, and the Abel-function estimator.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{Domain, Measure};
use crate::transforms::{self, DomainPoint, DomainTag, TransformHandle, TransformKind};

fn require(mu: &Measure, domain: Domain, what: &str) -> Result<()> {
    let ok = match domain {
        Domain::Real => mu.domain() != Domain::Circle,
        d => mu.domain() == d,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::DomainMismatch(format!("{what} needs measures on the {domain}, got {}", mu.domain())))
    }
}

fn require_kind(h: &TransformHandle, kind: TransformKind, domain: DomainTag) -> Result<()> {
    if h.kind() != kind || h.domain() != domain {
        return Err(Error::DomainMismatch(format!(
            "{} is not a {kind:?}-transform on {domain:?}",
            h.provenance()
        )));
    }
    Ok(())
}

/// `F_1 + F_2 - z`.
pub fn boolean_add_handles(f1: &TransformHandle, f2: &TransformHandle) -> Result<TransformHandle> {
    require_kind(f1, TransformKind::F, DomainTag::UpperHalfPlane)?;
    require_kind(f2, TransformKind::F, DomainTag::UpperHalfPlane)?;
    let label = format!("F of ({}) ⊎ ({})", f1.provenance(), f2.provenance());
    let (a, b) = (f1.clone(), f2.clone());
    Ok(TransformHandle::symmetric(TransformKind::F, DomainTag::UpperHalfPlane, label, move |z| {
        Ok(a.eval(z)? + b.eval(z)? - z)
    }))
}

/// Boolean additive convolution `mu ⊎ nu`, as its F-transform.
pub fn boolean_add(mu: &Measure, nu: &Measure) -> Result<TransformHandle> {
    require(mu, Domain::Real, "boolean_add")?;
    require(nu, Domain::Real, "boolean_add")?;
    boolean_add_handles(&transforms::f_handle(mu)?, &transforms::f_handle(nu)?)
}

/// `eta_1 eta_2 / z` on the disk.
pub fn boolean_mult_circle_handles(e1: &TransformHandle, e2: &TransformHandle) -> Result<TransformHandle> {
    require_kind(e1, TransformKind::Eta, DomainTag::UnitDisk)?;
    require_kind(e2, TransformKind::Eta, DomainTag::UnitDisk)?;
    let label = format!("eta of ({}) boolean-times ({})", e1.provenance(), e2.provenance());
    let (a, b) = (e1.clone(), e2.clone());
    Ok(TransformHandle::new(TransformKind::Eta, DomainTag::UnitDisk, label, move |z| {
        if z.norm() == 0.0 {
            return Ok(C64::new(0.0, 0.0));
        }
        Ok(a.eval(z)? * b.eval(z)? / z)
    }))
}

/// Boolean multiplicative convolution of two circle measures, as its eta-transform.
pub fn boolean_mult_circle(mu: &Measure, nu: &Measure) -> Result<TransformHandle> {
    require(mu, Domain::Circle, "boolean_mult_circle")?;
    require(nu, Domain::Circle, "boolean_mult_circle")?;
    boolean_mult_circle_handles(&transforms::eta_handle(mu)?, &transforms::eta_handle(nu)?)
}

/// `F_1 ∘ F_2`.
pub fn monotone_add_handles(f1: &TransformHandle, f2: &TransformHandle) -> Result<TransformHandle> {
    require_kind(f1, TransformKind::F, DomainTag::UpperHalfPlane)?;
    require_kind(f2, TransformKind::F, DomainTag::UpperHalfPlane)?;
    let label = format!("F of ({}) ▷ ({})", f1.provenance(), f2.provenance());
    let (a, b) = (f1.clone(), f2.clone());
    Ok(TransformHandle::symmetric(TransformKind::F, DomainTag::UpperHalfPlane, label, move |z| {
        a.eval(b.eval(z)?)
    }))
}

/// Monotone additive convolution `mu ▷ nu` (order matters), as its F-transform.
pub fn monotone_add(mu: &Measure, nu: &Measure) -> Result<TransformHandle> {
    require(mu, Domain::Real, "monotone_add")?;
    require(nu, Domain::Real, "monotone_add")?;
    monotone_add_handles(&transforms::f_handle(mu)?, &transforms::f_handle(nu)?)
}

/// `eta_1 ∘ eta_2` on the slit plane.
pub fn monotone_mult_halfline_handles(e1: &TransformHandle, e2: &TransformHandle) -> Result<TransformHandle> {
    require_kind(e1, TransformKind::Eta, DomainTag::SlitPlane)?;
    require_kind(e2, TransformKind::Eta, DomainTag::SlitPlane)?;
    let label = format!("eta of ({}) monotone-times ({})", e1.provenance(), e2.provenance());
    let (a, b) = (e1.clone(), e2.clone());
    Ok(TransformHandle::new(TransformKind::Eta, DomainTag::SlitPlane, label, move |z| {
        let w = b.eval(z)?;
        if w.norm() == 0.0 {
            return Ok(w);
        }
        a.eval(w)
    }))
}

/// Monotone multiplicative convolution of two half-line measures, as its eta-transform.
pub fn monotone_mult_halfline(mu: &Measure, nu: &Measure) -> Result<TransformHandle> {
    require(mu, Domain::Halfline, "monotone_mult_halfline")?;
    require(nu, Domain::Halfline, "monotone_mult_halfline")?;
    monotone_mult_halfline_handles(&transforms::eta_handle(mu)?, &transforms::eta_handle(nu)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AbelEstimate {
    pub value: C64,
    pub n_used: usize,
    /// `|h(F(z)) - h(z) - 1|` for the returned `h_n`.
    pub residual: f64,
}

/// Successive estimates closer than this count as stabilized.
pub const ABEL_STABLE: f64 = 1e-8;

/// Estimates the Abel function `h` (with `h ∘ F = h + 1`) of a self-map of the
/// upper half-plane at `z`, using
/// `h_n(w) = (f^n(w) - z_n) / (z_{n+1} - z_n)` for the transported map
/// `f(w) = -i F(iw)` on the right half-plane and the orbit `z_n = f^n(1)`.
pub fn abel_estimate(f: &TransformHandle, z: DomainPoint, n_max: usize) -> Result<AbelEstimate> {
    require_kind(f, TransformKind::F, DomainTag::UpperHalfPlane)
        .or_else(|_| require_kind(f, TransformKind::Composed, DomainTag::UpperHalfPlane))?;
    if z.tag() != DomainTag::UpperHalfPlane {
        return Err(Error::DomainMismatch("abel_estimate takes a point of the upper half-plane".into()));
    }
    if n_max == 0 {
        return Err(Error::BadParameters("n_max must be positive".into()));
    }
    let i = C64::i();
    let ft = |w: C64| -> Result<C64> { Ok(-i * f.eval(i * w)?) };
    let w0 = -i * z.value();

    // orbit of 1, orbit of w0; h_n needs z_n, z_{n+1}, f^n(w0), f^{n+1}(w0)
    let zn = C64::new(1.0, 0.0);
    let mut zn1 = ft(zn)?;
    let mut wn1 = ft(w0)?;
    let estimate = |zn: C64, zn1: C64, wn: C64, wn1: C64| {
        let d = zn1 - zn;
        ((wn - zn) / d, (wn1 - zn) / d)
    };
    let (mut h, mut hf) = estimate(zn, zn1, w0, wn1);
    let mut diff = f64::INFINITY;
    let mut n = 0;
    while n < n_max {
        let zn2 = ft(zn1)?;
        let wn2 = ft(wn1)?;
        let (h_next, hf_next) = estimate(zn1, zn2, wn1, wn2);
        if !(h_next.re.is_finite() && h_next.im.is_finite() && hf_next.re.is_finite() && hf_next.im.is_finite()) {
            break;
        }
        diff = (h_next - h).norm();
        h = h_next;
        hf = hf_next;
        zn1 = zn2;
        wn1 = wn2;
        n += 1;
        if diff <= 4.0 * f64::EPSILON * h.norm().max(1.0) {
            break;
        }
    }
    if !(diff < ABEL_STABLE) {
        return Err(Error::NonConvergent(format!(
            "Abel estimates still move by {diff:e} after {n} steps"
        )));
    }
    Ok(AbelEstimate { value: h, n_used: n, residual: (hf - h - 1.0).norm() })
}
