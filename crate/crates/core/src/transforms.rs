//! Analytic transforms of measures: Cauchy transform `G`, its reciprocal `F`,
//! the moment generating function `psi` and `eta = psi / (1 + psi)`, plus the
//! numerical inverses used by the phi- and Sigma-transforms.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::extrapolate;
use crate::measure::{Continuous, Domain, Measure};

/// Tag of the domain a transform handle (or a point) lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainTag {
    /// `Im z > 0`; handles built from measures extend by reflection to `Im z < 0`.
    UpperHalfPlane,
    /// `|z| < 1`.
    UnitDisk,
    /// `C \ [0, +inf)`.
    SlitPlane,
    /// `|Im z| < pi`.
    Strip,
}

impl DomainTag {
    /// Whether `z` lies strictly inside the domain.
    pub fn contains(self, z: C64) -> bool {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return false;
        }
        match self {
            DomainTag::UpperHalfPlane => z.im > 0.0,
            DomainTag::UnitDisk => z.norm() < 1.0,
            DomainTag::SlitPlane => !(z.im == 0.0 && z.re >= 0.0),
            DomainTag::Strip => z.im.abs() < PI,
        }
    }
}

/// A complex number checked to lie inside a tagged domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainPoint {
    value: C64,
    tag: DomainTag,
}

impl DomainPoint {
    pub fn new(value: C64, tag: DomainTag) -> Result<DomainPoint> {
        if tag.contains(value) {
            Ok(DomainPoint { value, tag })
        } else {
            Err(Error::DomainMismatch(format!("{value} is not inside {tag:?}")))
        }
    }

    pub fn value(&self) -> C64 {
        self.value
    }

    pub fn tag(&self) -> DomainTag {
        self.tag
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransformKind {
    G,
    F,
    Psi,
    Eta,
    Composed,
}

type Eval = dyn Fn(C64) -> Result<C64> + Send + Sync;

/// An evaluable analytic function on a tagged domain.
#[derive(Clone)]
pub struct TransformHandle {
    kind: TransformKind,
    domain: DomainTag,
    provenance: String,
    symmetric: bool,
    f: Arc<Eval>,
}

impl fmt::Debug for TransformHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransformHandle")
            .field("kind", &self.kind)
            .field("domain", &self.domain)
            .field("provenance", &self.provenance)
            .finish()
    }
}

impl TransformHandle {
    /// Wraps an arbitrary function. No reflection symmetry is assumed.
    pub fn new<F>(kind: TransformKind, domain: DomainTag, provenance: impl Into<String>, f: F) -> Self
    where
        F: Fn(C64) -> Result<C64> + Send + Sync + 'static,
    {
        TransformHandle {
            kind,
            domain,
            provenance: provenance.into(),
            symmetric: false,
            f: Arc::new(f),
        }
    }

    /// Wraps a function satisfying `f(conj z) = conj f(z)`. On the upper
    /// half-plane such handles also accept points with `Im z < 0`.
    pub fn symmetric<F>(kind: TransformKind, domain: DomainTag, provenance: impl Into<String>, f: F) -> Self
    where
        F: Fn(C64) -> Result<C64> + Send + Sync + 'static,
    {
        TransformHandle {
            symmetric: true,
            ..TransformHandle::new(kind, domain, provenance, f)
        }
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn domain(&self) -> DomainTag {
        self.domain
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn eval(&self, z: C64) -> Result<C64> {
        if self.domain.contains(z) {
            return (self.f)(z);
        }
        if self.symmetric && self.domain == DomainTag::UpperHalfPlane && z.im < 0.0 && z.re.is_finite() {
            return (self.f)(z.conj()).map(|w| w.conj());
        }
        Err(Error::DomainMismatch(format!(
            "{z} is outside the domain {:?} of {}",
            self.domain, self.provenance
        )))
    }

    pub fn eval_at(&self, p: DomainPoint) -> Result<C64> {
        self.eval(p.value())
    }

    /// Same function with a different kind/provenance label.
    pub fn relabel(&self, kind: TransformKind, provenance: impl Into<String>) -> Self {
        TransformHandle { kind, provenance: provenance.into(), ..self.clone() }
    }
}

/// Per-handle memo table keyed by the bit pattern of the evaluation point.
#[derive(Default)]
pub(crate) struct Memo {
    table: Mutex<HashMap<[u64; 2], C64>>,
}

impl Memo {
    pub(crate) fn get_or<F: FnOnce() -> Result<C64>>(&self, z: C64, f: F) -> Result<C64> {
        let key = [z.re.to_bits(), z.im.to_bits()];
        if let Some(v) = self.table.lock().expect("memo poisoned").get(&key) {
            return Ok(*v);
        }
        let v = f()?;
        let mut t = self.table.lock().expect("memo poisoned");
        if t.len() > 1 << 20 {
            t.clear();
        }
        t.insert(key, v);
        Ok(v)
    }
}

fn require_line(mu: &Measure, what: &str) -> Result<()> {
    if mu.domain() == Domain::Circle {
        Err(Error::DomainMismatch(format!("{what} needs a measure on the line")))
    } else {
        Ok(())
    }
}

fn require_psi_domain(mu: &Measure, z: C64) -> Result<()> {
    match mu.domain() {
        Domain::Real => Err(Error::DomainMismatch(
            "psi/eta need a half-line or circle measure".into(),
        )),
        Domain::Halfline if !DomainTag::SlitPlane.contains(z) => Err(Error::DomainMismatch(format!(
            "{z} is not in the slit plane"
        ))),
        Domain::Circle if !DomainTag::UnitDisk.contains(z) => {
            Err(Error::DomainMismatch(format!("{z} is not in the unit disk")))
        }
        _ => Ok(()),
    }
}

/// `int dmu(t) / (z - t)` without domain checks.
pub fn cauchy(mu: &Measure, z: C64) -> C64 {
    let mut g = C64::new(0.0, 0.0);
    for a in mu.atoms() {
        g += a.mass / (z - a.position);
    }
    match mu.continuous() {
        Continuous::None => {}
        Continuous::Family { family, weight, .. } => g += family.cauchy(z) * *weight,
        Continuous::Grid(nodes) => {
            for n in nodes {
                g += n.weight / (z - n.position);
            }
        }
    }
    g
}

fn family_uses_nodes(mu: &Measure, z: C64) -> bool {
    let (lo, hi) = mu.support_hull();
    z.norm() * lo.abs().max(hi.abs()) < 0.5
}

/// `psi(z) / z = int t / (1 - z t) dmu(t)` (half-line) or
/// `int zeta / (1 - z zeta) dmu(zeta)` (circle), finite at `z = 0`.
pub fn psi_over_z(mu: &Measure, z: C64) -> C64 {
    let circle = mu.domain() == Domain::Circle;
    let point = |x: f64| if circle { C64::from_polar(1.0, x) } else { C64::new(x, 0.0) };
    let mut s = C64::new(0.0, 0.0);
    for a in mu.atoms() {
        let t = point(a.position);
        s += a.mass * t / (1.0 - z * t);
    }
    let node_sum = |nodes: &[crate::measure::Node]| -> C64 {
        nodes
            .iter()
            .map(|n| {
                let t = point(n.position);
                n.weight * t / (1.0 - z * t)
            })
            .sum()
    };
    match mu.continuous() {
        Continuous::None => {}
        Continuous::Grid(nodes) => s += node_sum(nodes),
        Continuous::Family { family, weight, nodes } => {
            if !circle {
                if family_uses_nodes(mu, z) {
                    s += node_sum(nodes);
                } else {
                    let w = z.inv();
                    s += (family.cauchy(w) * w - 1.0) * w * *weight;
                }
            }
        }
    }
    s
}

/// `psi(z) = int z t / (1 - z t) dmu(t)` without domain checks.
pub fn psi(mu: &Measure, z: C64) -> C64 {
    if mu.domain() != Domain::Circle {
        if let Continuous::Family { family, weight, .. } = mu.continuous() {
            if !family_uses_nodes(mu, z) {
                let w = z.inv();
                let mut s = (family.cauchy(w) * w - 1.0) * *weight;
                for a in mu.atoms() {
                    s += a.mass * z * a.position / (1.0 - z * a.position);
                }
                return s;
            }
        }
    }
    z * psi_over_z(mu, z)
}

/// `eta(z) / z`, equal to the first moment at `z = 0`.
pub fn eta_over_z(mu: &Measure, z: C64) -> C64 {
    psi_over_z(mu, z) / (1.0 + psi(mu, z))
}

/// `eta(z) = psi(z) / (1 + psi(z))` without domain checks.
pub fn eta(mu: &Measure, z: C64) -> C64 {
    let p = psi(mu, z);
    p / (1.0 + p)
}

#[allow(non_snake_case)]
pub fn eval_G(mu: &Measure, z: C64) -> Result<C64> {
    require_line(mu, "G")?;
    Ok(cauchy(mu, z))
}

#[allow(non_snake_case)]
pub fn eval_F(mu: &Measure, z: C64) -> Result<C64> {
    require_line(mu, "F")?;
    Ok(cauchy(mu, z).inv())
}

pub fn eval_psi(mu: &Measure, z: C64) -> Result<C64> {
    require_psi_domain(mu, z)?;
    Ok(psi(mu, z))
}

pub fn eval_eta(mu: &Measure, z: C64) -> Result<C64> {
    require_psi_domain(mu, z)?;
    Ok(eta(mu, z))
}

fn describe(mu: &Measure) -> String {
    let atoms = mu.atoms().len();
    match mu.family() {
        Some((f, w)) => format!("{} measure: {atoms} atoms + {w:.6} x {f:?}", mu.domain()),
        None if mu.nodes().is_empty() => format!("{} measure: {atoms} atoms", mu.domain()),
        None => format!("{} measure: {atoms} atoms + {}-node grid", mu.domain(), mu.nodes().len()),
    }
}

/// Cauchy transform handle on the upper half-plane.
pub fn g_handle(mu: &Measure) -> Result<TransformHandle> {
    require_line(mu, "G")?;
    let m = Arc::new(mu.clone());
    Ok(TransformHandle::symmetric(
        TransformKind::G,
        DomainTag::UpperHalfPlane,
        format!("G of {}", describe(mu)),
        move |z| Ok(cauchy(&m, z)),
    ))
}

/// `F = 1/G` handle on the upper half-plane.
pub fn f_handle(mu: &Measure) -> Result<TransformHandle> {
    require_line(mu, "F")?;
    let provenance = format!("F of {}", describe(mu));
    if let Some(a) = mu.as_point_mass() {
        return Ok(TransformHandle::symmetric(
            TransformKind::F,
            DomainTag::UpperHalfPlane,
            provenance,
            move |z| Ok(z - a),
        ));
    }
    let m = Arc::new(mu.clone());
    Ok(TransformHandle::symmetric(
        TransformKind::F,
        DomainTag::UpperHalfPlane,
        provenance,
        move |z| Ok(cauchy(&m, z).inv()),
    ))
}

fn psi_tag(mu: &Measure) -> Result<DomainTag> {
    match mu.domain() {
        Domain::Real => Err(Error::DomainMismatch("psi/eta need a half-line or circle measure".into())),
        Domain::Halfline => Ok(DomainTag::SlitPlane),
        Domain::Circle => Ok(DomainTag::UnitDisk),
    }
}

pub fn psi_handle(mu: &Measure) -> Result<TransformHandle> {
    let tag = psi_tag(mu)?;
    let m = Arc::new(mu.clone());
    Ok(TransformHandle::symmetric(
        TransformKind::Psi,
        tag,
        format!("psi of {}", describe(mu)),
        move |z| Ok(psi(&m, z)),
    ))
}

pub fn eta_handle(mu: &Measure) -> Result<TransformHandle> {
    let tag = psi_tag(mu)?;
    let provenance = format!("eta of {}", describe(mu));
    if let (Domain::Halfline, Some(a)) = (mu.domain(), mu.as_point_mass()) {
        return Ok(TransformHandle::symmetric(TransformKind::Eta, tag, provenance, move |z| Ok(z * a)));
    }
    if let (Domain::Circle, Some(theta)) = (mu.domain(), mu.as_point_mass()) {
        let r = C64::from_polar(1.0, theta);
        return Ok(TransformHandle::symmetric(TransformKind::Eta, tag, provenance, move |z| Ok(z * r)));
    }
    let m = Arc::new(mu.clone());
    Ok(TransformHandle::symmetric(TransformKind::Eta, tag, provenance, move |z| Ok(eta(&m, z))))
}

/// Nevanlinna data of a self-map of the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NevanlinnaData {
    pub a: f64,
    pub b: f64,
    pub rho_mass: f64,
}

/// Reads `a = Re F(i)`, `b = lim F(iy)/(iy)` and `rho(R) = Im F(i) - b`.
pub fn nevanlinna_read(f: &TransformHandle) -> Result<NevanlinnaData> {
    let fi = f.eval(C64::i())?;
    if !(fi.im > 0.0) {
        return Err(Error::NotSelfMap(fi.im));
    }
    let ys = extrapolate::geometric(1e3, 2.0, 7);
    let mut xs = Vec::with_capacity(ys.len());
    let mut vals = Vec::with_capacity(ys.len());
    for &y in &ys {
        let z = C64::new(0.0, y);
        xs.push(1.0 / y);
        vals.push(f.eval(z)? / z);
    }
    let n = xs.len();
    let b = extrapolate::to_zero(&xs[n - 3..], &vals[n - 3..]).re.max(0.0);
    Ok(NevanlinnaData { a: fi.re, b, rho_mass: fi.im - b })
}

/// Solves `F(w) = z` by damped Newton seeded at `w = z` and returns `w - z`.
pub fn phi_of(f: &TransformHandle, z: C64) -> Result<C64> {
    const MAX_ITER: usize = 200;
    let scale = z.norm().max(1.0);
    let mut w = z;
    let mut r = f.eval(w)? - z;
    for _ in 0..MAX_ITER {
        if r.norm() <= 1e-14 * scale {
            return Ok(w - z);
        }
        let h = 1e-6 * w.norm().max(1.0);
        let d = (f.eval(w + h)? - f.eval(w - h)?) / (2.0 * h);
        if !(d.norm() > 0.0) || !d.re.is_finite() {
            return Err(Error::InversionDiverged(z));
        }
        let step = r / d;
        let mut lambda = 1.0;
        loop {
            let wn = w - step * lambda;
            if wn.im > 0.0 {
                let rn = f.eval(wn)? - z;
                if rn.norm() < r.norm() {
                    w = wn;
                    r = rn;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-12 {
                if r.norm() <= 1e-12 * scale {
                    return Ok(w - z);
                }
                return Err(Error::InversionDiverged(z));
            }
        }
    }
    if r.norm() <= 1e-12 * scale {
        Ok(w - z)
    } else {
        Err(Error::InversionDiverged(z))
    }
}

/// Voiculescu transform `phi(z) = F^{-1}(z) - z`.
pub fn voiculescu_phi(mu: &Measure, z: C64) -> Result<C64> {
    if let Some(a) = mu.as_point_mass() {
        require_line(mu, "phi")?;
        return Ok(C64::new(a, 0.0));
    }
    phi_of(&f_handle(mu)?, z)
}

/// `Sigma(z) = eta^{-1}(z) / z` for `z < 0` in the range of `eta` on `(-inf, 0)`.
pub fn sigma_of(eta: &TransformHandle, z: f64) -> Result<f64> {
    let eval = |x: f64| -> Result<f64> { Ok(eta.eval(C64::new(x, 0.0))?.re) };
    if !(z < 0.0) || !z.is_finite() {
        return Err(Error::OutsideInversionInterval(z));
    }
    // eta is increasing on (-inf, 0) with eta(0-) = 0
    let mut hi = 0.0_f64;
    let mut lo = -1.0_f64;
    let mut f_lo = eval(lo)?;
    while f_lo >= z {
        hi = lo;
        lo *= 4.0;
        if lo < -1e300 {
            return Err(Error::OutsideInversionInterval(z));
        }
        f_lo = eval(lo)?;
    }
    let tol = 1e-15 * z.abs();
    let mut x = 0.5 * (lo + hi);
    for _ in 0..400 {
        let fx = eval(x)? - z;
        if fx.abs() <= tol {
            break;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let h = 1e-7 * x.abs();
        let d = (eval(x + h)? - eval(x - h)?) / (2.0 * h);
        let newton = x - fx / d;
        x = if d > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (hi - lo).abs() <= 4.0 * f64::EPSILON * x.abs() {
            break;
        }
    }
    let resid = (eval(x)? - z).abs();
    if resid > 1e-12 * z.abs().max(1e-300) * 1e3 {
        return Err(Error::OutsideInversionInterval(z));
    }
    Ok(x / z)
}

/// Sigma-transform of a half-line measure.
pub fn sigma_transform(mu: &Measure, z: f64) -> Result<f64> {
    if mu.domain() != Domain::Halfline {
        return Err(Error::DomainMismatch("Sigma needs a half-line measure".into()));
    }
    if let Some(a) = mu.as_point_mass() {
        if a > 0.0 && z < 0.0 {
            return Ok(1.0 / a);
        }
        return Err(Error::OutsideInversionInterval(z));
    }
    sigma_of(&eta_handle(mu)?, z)
}

/// Points approaching a boundary point inside a cone of given aperture.
#[derive(Debug, Clone, PartialEq)]
pub struct NontangentialPath {
    pub base_point: f64,
    pub aperture: f64,
    pub heights: Vec<f64>,
}

impl NontangentialPath {
    pub fn new(base_point: f64, aperture: f64, heights: Vec<f64>) -> Result<Self> {
        if !(aperture > 0.0) || heights.is_empty() {
            return Err(Error::BadParameters("aperture must be > 0 and heights non-empty".into()));
        }
        if heights.iter().any(|h| !(*h > 0.0)) || heights.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::BadParameters("heights must be positive and decreasing".into()));
        }
        Ok(NontangentialPath { base_point, aperture, heights })
    }

    /// `y0 * 2^-k` for `k = 0..count`.
    pub fn geometric(base_point: f64, y0: f64, count: usize) -> Result<Self> {
        NontangentialPath::new(base_point, 1.0, extrapolate::geometric(y0, 0.5, count))
    }

    /// Vertical approach `x + i h` on the half-plane, radial `(1 - h) e^{i x}`
    /// on the disk.
    pub fn points(&self, tag: DomainTag) -> Vec<C64> {
        self.heights
            .iter()
            .map(|&h| match tag {
                DomainTag::UnitDisk => C64::from_polar(1.0 - h, self.base_point),
                _ => C64::new(self.base_point, h),
            })
            .collect()
    }
}

/// Continuous logarithm of `f` along the segment `from -> to`, anchored at
/// `log_from` (a logarithm of `f(from)`).
pub fn continuous_log<F>(f: F, from: C64, to: C64, log_from: C64) -> Result<C64>
where
    F: Fn(C64) -> Result<C64>,
{
    let mut s = 0.0_f64;
    let mut ds = 0.125_f64;
    let mut current = log_from;
    let mut prev = f(from)?;
    while s < 1.0 {
        let step = ds.min(1.0 - s);
        let next = f(from + (to - from) * (s + step))?;
        if next.norm() == 0.0 || !next.re.is_finite() {
            return Err(Error::SolverFailure("logarithm of zero along the path".into()));
        }
        let dlog = (next / prev).ln();
        if dlog.im.abs() > 0.5 && step > 1e-6 {
            ds = step * 0.25;
            continue;
        }
        current += dlog;
        prev = next;
        s += step;
        if dlog.im.abs() < 0.1 {
            ds = (step * 2.0).min(0.25);
        }
    }
    // keep the exact modulus, only the argument comes from tracking
    Ok(C64::new(prev.norm().ln(), current.im))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{make_atomic, make_named, NamedFamily};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn bernoulli() -> Measure {
        make_atomic(&[(-1.0, 0.5), (1.0, 0.5)], Domain::Real).unwrap()
    }

    #[test]
    fn g_examples() {
        let d0 = Measure::point_mass(0.0, Domain::Real).unwrap();
        assert!((eval_G(&d0, c(0.0, 1.0)).unwrap() - c(0.0, -1.0)).norm() < 1e-15);
        assert!((eval_G(&bernoulli(), c(0.0, 2.0)).unwrap() - c(0.0, -0.4)).norm() < 1e-15);
        let y = 1e6;
        let v = c(0.0, y) * eval_G(&bernoulli(), c(0.0, y)).unwrap();
        assert!((v - 1.0).norm() < 1e-5);
    }

    #[test]
    fn f_examples() {
        assert!((eval_F(&bernoulli(), c(0.0, 2.0)).unwrap() - c(0.0, 2.5)).norm() < 1e-14);
        let d = Measure::point_mass(1.5, Domain::Real).unwrap();
        let z = c(0.3, 0.7);
        assert!((eval_F(&d, z).unwrap() - (z - 1.5)).norm() < 1e-15);
        let y = 1e6;
        assert!((eval_F(&bernoulli(), c(0.0, y)).unwrap() / c(0.0, y) - 1.0).norm() < 1e-5);
    }

    #[test]
    fn circle_measure_has_no_g() {
        let m = Measure::point_mass(0.0, Domain::Circle).unwrap();
        assert!(matches!(eval_G(&m, C64::i()), Err(Error::DomainMismatch(_))));
        let r = bernoulli();
        assert!(matches!(eval_psi(&r, c(-1.0, 0.0)), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn psi_examples() {
        let d1 = Measure::point_mass(1.0, Domain::Halfline).unwrap();
        assert!((eval_psi(&d1, c(-1.0, 0.0)).unwrap() - c(-0.5, 0.0)).norm() < 1e-15);
        let haar = make_named(NamedFamily::HaarCircle, Domain::Circle).unwrap();
        for z in [c(0.3, 0.2), c(-0.9, 0.1), c(0.0, 0.999)] {
            assert!(eval_psi(&haar, z).unwrap().norm() < 1e-10);
            assert!(eval_eta(&haar, z).unwrap().norm() < 1e-10);
        }
        assert!(matches!(eval_psi(&d1, c(2.0, 0.0)), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn eta_of_point_masses() {
        let a = 2.5;
        let d = Measure::point_mass(a, Domain::Halfline).unwrap();
        let z = c(-0.3, 0.4);
        assert!((eval_eta(&d, z).unwrap() - z * a).norm() < 1e-14);
        let theta = 1.1;
        let r = Measure::point_mass(theta, Domain::Circle).unwrap();
        let z = c(0.2, -0.5);
        assert!((eval_eta(&r, z).unwrap() - C64::from_polar(1.0, theta) * z).norm() < 1e-14);
    }

    #[test]
    fn halfline_identity_with_families() {
        let m = crate::measure::Measure::with_family(
            Domain::Halfline,
            &[(0.0, 0.2), (3.0, 0.1)],
            NamedFamily::UniformInterval { a: 0.5, b: 2.0 },
            256,
        )
        .unwrap();
        for z in [c(-0.01, 0.001), c(-2.0, 1.0), c(0.3, -0.2), c(5.0, 0.5), c(-100.0, 0.0)] {
            let lhs = cauchy(&m, z.inv());
            let rhs = z * (psi(&m, z) + 1.0);
            assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0), "{z}");
        }
    }

    #[test]
    fn semicircle_family_transform_matches_nodes_far_away() {
        let m = make_named(NamedFamily::Semicircle { center: 1.0, radius: 2.0 }, Domain::Real).unwrap();
        let z = c(0.5, 4.0);
        let nodes: C64 = m.nodes().iter().map(|n| n.weight / (z - n.position)).sum();
        assert!((nodes - cauchy(&m, z)).norm() < 1e-14);
        let z = c(-10.0, 0.0);
        let nodes: C64 = m.nodes().iter().map(|n| n.weight / (z - n.position)).sum();
        assert!((nodes - cauchy(&m, z)).norm() < 1e-14);
    }

    #[test]
    fn nevanlinna_examples() {
        let h = |f: fn(C64) -> C64| {
            TransformHandle::new(TransformKind::F, DomainTag::UpperHalfPlane, "test", move |z| Ok(f(z)))
        };
        let d = nevanlinna_read(&h(|z| z - z.inv())).unwrap();
        assert!(d.a.abs() < 1e-12 && (d.b - 1.0).abs() < 1e-10 && (d.rho_mass - 1.0).abs() < 1e-10);
        let d = nevanlinna_read(&h(|z| z + 5.0)).unwrap();
        assert!((d.a - 5.0).abs() < 1e-12 && (d.b - 1.0).abs() < 1e-10 && d.rho_mass.abs() < 1e-10);
        let d = nevanlinna_read(&h(|z| z * 2.0)).unwrap();
        assert!(d.a.abs() < 1e-12 && (d.b - 2.0).abs() < 1e-10 && d.rho_mass.abs() < 1e-10);
        assert!(matches!(nevanlinna_read(&h(|z| -z)), Err(Error::NotSelfMap(_))));
    }

    #[test]
    fn phi_of_point_mass_and_newton() {
        let d = Measure::point_mass(0.7, Domain::Real).unwrap();
        assert!((voiculescu_phi(&d, c(0.0, 10.0)).unwrap() - 0.7).norm() < 1e-15);
        let b = bernoulli();
        let z = c(0.0, 10.0);
        let phi = voiculescu_phi(&b, z).unwrap();
        assert!((eval_F(&b, z + phi).unwrap() - z).norm() < 1e-12);
    }

    #[test]
    fn phi_outside_cone() {
        let b = bernoulli();
        // F(w) = w - 1/w never takes the value 0.01 i with w in C+
        assert!(matches!(voiculescu_phi(&b, c(0.0, 0.01)), Err(Error::InversionDiverged(_))));
    }

    #[test]
    fn sigma_point_mass_and_bisection() {
        let d = Measure::point_mass(4.0, Domain::Halfline).unwrap();
        assert!((sigma_transform(&d, -0.1).unwrap() - 0.25).abs() < 1e-15);
        let m = make_atomic(&[(1.0, 0.5), (2.0, 0.5)], Domain::Halfline).unwrap();
        let s = sigma_transform(&m, -0.01).unwrap();
        let x = s * -0.01;
        assert!((eta(&m, c(x, 0.0)).re + 0.01).abs() < 1e-14);
    }

    #[test]
    fn sigma_range_is_bounded_with_atom_at_zero() {
        // eta(-inf) = 1 - 1/mu({0}) = -1
        let m = make_atomic(&[(0.0, 0.5), (1.0, 0.5)], Domain::Halfline).unwrap();
        assert!(sigma_transform(&m, -0.5).is_ok());
        assert!(matches!(sigma_transform(&m, -1.5), Err(Error::OutsideInversionInterval(_))));
        assert!(matches!(sigma_transform(&m, 0.1), Err(Error::OutsideInversionInterval(_))));
    }

    #[test]
    fn continuous_log_tracks_winding() {
        // log of z^3 along the unit circle arc from 1 to e^{i 3pi/4}
        let to = C64::from_polar(1.0, 0.75 * PI);
        let l = continuous_log(|z| Ok(z.powi(3)), c(1.0, 0.0), to, c(0.0, 0.0));
        // chord, not arc: the argument still moves continuously to 9pi/4
        let l = l.unwrap();
        assert!((l.im - 2.25 * PI).abs() < 1e-12);
    }

    #[test]
    fn handle_domains() {
        let h = g_handle(&bernoulli()).unwrap();
        let z = c(0.4, -0.3);
        assert!((h.eval(z).unwrap() - cauchy(&bernoulli(), z)).norm() < 1e-15);
        assert!(h.eval(c(0.4, 0.0)).is_err());
        let custom = TransformHandle::new(TransformKind::Composed, DomainTag::UpperHalfPlane, "c", Ok);
        assert!(custom.eval(z).is_err());
        assert!(DomainPoint::new(c(0.5, 0.0), DomainTag::SlitPlane).is_err());
        assert!(DomainPoint::new(c(-0.5, 0.0), DomainTag::SlitPlane).is_ok());
    }

    #[test]
    fn path_points() {
        let p = NontangentialPath::geometric(0.5, 1e-2, 4).unwrap();
        let pts = p.points(DomainTag::UpperHalfPlane);
        assert_eq!(pts.len(), 4);
        assert!(pts.iter().all(|z| (z.re - 0.5).abs() < 1e-15 && z.im > 0.0));
        assert!(NontangentialPath::new(0.0, 1.0, vec![0.1, 0.2]).is_err());
    }
}
