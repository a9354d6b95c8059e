//! Free additive and multiplicative convolutions through subordination.
//!
//! `F_{mu ⊞ nu} = F_mu ∘ omega_1` and `eta_{mu ⊠ nu} = eta_mu ∘ omega_1`,
//! where `omega_1(z)` is computed pointwise as a Denjoy-Wolff fixed point and
//! memoized per handle.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::dwolff::{continuation, iterate_from, Approach, SelfMapDomain, SolverConfig};
use crate::error::{Error, Result};
use crate::measure::{wrap_angle, Domain, Measure};
use crate::poly;
use crate::transforms::{self, DomainTag, Memo, TransformHandle, TransformKind};

type CFn = dyn Fn(C64) -> Result<C64> + Send + Sync;
type Probe = dyn Fn(C64) -> Result<f64> + Send + Sync;

/// Subordination functions of a free convolution and the convolved transform
/// (`F` for ⊞, `eta` for ⊠).
#[derive(Clone)]
pub struct SubordinationPair {
    pub omega1: TransformHandle,
    pub omega2: TransformHandle,
    pub convolved: TransformHandle,
    probe: Arc<Probe>,
}

impl fmt::Debug for SubordinationPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SubordinationPair")
            .field("convolved", &self.convolved)
            .finish_non_exhaustive()
    }
}

impl SubordinationPair {
    /// Residual of the subordination identities at `z`:
    /// `max |F_mu(w1) - F_nu(w2)|, |F_mu(w1) - (w1 + w2 - z)|` for ⊞ and
    /// `max |eta_mu(w1) - eta_nu(w2)|, |eta_mu(w1) - w1 w2 / z|` for ⊠.
    pub fn residual(&self, z: C64) -> Result<f64> {
        (self.probe)(z)
    }
}

fn solver_failure(z: C64, e: Error) -> Error {
    match e {
        Error::MaxIterations { iterations, residual } => Error::SolverFailure(format!(
            "no fixed point at z = {z} after {iterations} iterations (residual {residual:e})"
        )),
        Error::SolverFailure(m) => Error::SolverFailure(format!("at z = {z}: {m}")),
        other => other,
    }
}

fn require_f(h: &TransformHandle) -> Result<()> {
    if h.kind() != TransformKind::F || h.domain() != DomainTag::UpperHalfPlane {
        return Err(Error::DomainMismatch(format!("{} is not an F-transform", h.provenance())));
    }
    Ok(())
}

/// Free additive convolution of two F-transforms (self-maps of the upper
/// half-plane with `F(iy)/(iy) -> 1`).
pub fn free_add_handles(f_mu: &TransformHandle, f_nu: &TransformHandle, cfg: SolverConfig) -> Result<SubordinationPair> {
    require_f(f_mu)?;
    require_f(f_nu)?;
    cfg.validate()?;
    let fmu = f_mu.clone();
    let fnu = f_nu.clone();
    let memo = Arc::new(Memo::default());
    let omega1: Arc<CFn> = {
        let (fmu, fnu, memo) = (fmu.clone(), fnu.clone(), memo.clone());
        Arc::new(move |z: C64| {
            if z.im == 0.0 {
                return Err(Error::DomainMismatch(format!("{z} is on the real axis")));
            }
            let (z, flip) = if z.im < 0.0 { (z.conj(), true) } else { (z, false) };
            let w = continuation(z, Approach::Vertical, &memo, |p, seed| {
                let map = |w: C64| -> Result<C64> {
                    let a = fmu.eval(w)? - w;
                    Ok(fnu.eval(a + p)? - a)
                };
                let seed = seed.filter(|s| s.im > 0.0).unwrap_or(p);
                iterate_from(map, SelfMapDomain::UpperHalfPlane, seed, &cfg)
                    .and_then(|r| r.interior_above(p.im, SelfMapDomain::UpperHalfPlane, &cfg))
                    .map_err(|e| solver_failure(p, e))
            })?;
            Ok(if flip { w.conj() } else { w })
        })
    };
    let label = format!("({}) ⊞ ({})", fmu.provenance(), fnu.provenance());
    build_additive(fmu, fnu, omega1, label)
}

fn build_additive(fmu: TransformHandle, fnu: TransformHandle, omega1: Arc<CFn>, label: String) -> Result<SubordinationPair> {
    let w1 = omega1.clone();
    let omega1_h = TransformHandle::symmetric(
        TransformKind::Composed,
        DomainTag::UpperHalfPlane,
        format!("omega_1 of {label}"),
        move |z| w1(z),
    );
    let (w1, f1) = (omega1.clone(), fmu.clone());
    let omega2_h = TransformHandle::symmetric(
        TransformKind::Composed,
        DomainTag::UpperHalfPlane,
        format!("omega_2 of {label}"),
        move |z| {
            let w = w1(z)?;
            Ok(f1.eval(w)? - w + z)
        },
    );
    let (w1, f1) = (omega1.clone(), fmu.clone());
    let convolved = TransformHandle::symmetric(
        TransformKind::F,
        DomainTag::UpperHalfPlane,
        format!("F of {label}"),
        move |z| f1.eval(w1(z)?),
    );
    let (w1, f1, f2) = (omega1, fmu, fnu);
    let probe: Arc<Probe> = Arc::new(move |z: C64| {
        let a = w1(z)?;
        let fa = f1.eval(a)?;
        let b = fa - a + z;
        let fb = f2.eval(b)?;
        Ok((fa - fb).norm().max((fa - (a + b - z)).norm()))
    });
    Ok(SubordinationPair { omega1: omega1_h, omega2: omega2_h, convolved, probe })
}

/// Free additive convolution `mu ⊞ nu` of two measures on the line.
pub fn free_add(mu: &Measure, nu: &Measure) -> Result<SubordinationPair> {
    free_add_with(mu, nu, SolverConfig::default())
}

pub fn free_add_with(mu: &Measure, nu: &Measure, cfg: SolverConfig) -> Result<SubordinationPair> {
    for m in [mu, nu] {
        if m.domain() == Domain::Circle {
            return Err(Error::DomainMismatch("free_add needs measures on the line".into()));
        }
    }
    let fmu = transforms::f_handle(mu)?;
    let fnu = transforms::f_handle(nu)?;
    let label = format!("({}) ⊞ ({})", fmu.provenance(), fnu.provenance());
    match (mu.as_point_mass(), nu.as_point_mass()) {
        (Some(a), _) => {
            let f2 = fnu.clone();
            let omega1: Arc<CFn> = Arc::new(move |z: C64| Ok(f2.eval(z - a)? + a));
            build_additive(fmu, fnu, omega1, label)
        }
        (None, Some(b)) => {
            let omega1: Arc<CFn> = Arc::new(move |z: C64| {
                if z.im == 0.0 {
                    return Err(Error::DomainMismatch(format!("{z} is on the real axis")));
                }
                Ok(z - b)
            });
            build_additive(fmu, fnu, omega1, label)
        }
        (None, None) => free_add_handles(&fmu, &fnu, cfg),
    }
}

/// Ingredients of a multiplicative subordination problem.
#[derive(Clone)]
struct MultSide {
    eta: Arc<CFn>,
    /// `eta(w) / w`, finite at 0
    h: Arc<CFn>,
    /// `eta'(0)` (the first moment)
    slope: C64,
    provenance: String,
}

impl MultSide {
    fn from_measure(mu: &Measure) -> Result<MultSide> {
        let handle = transforms::eta_handle(mu)?;
        let m1 = Arc::new(mu.clone());
        let h: Arc<CFn> = match (mu.domain(), mu.as_point_mass()) {
            (Domain::Halfline, Some(a)) => Arc::new(move |_| Ok(C64::new(a, 0.0))),
            (Domain::Circle, Some(t)) => {
                let r = C64::from_polar(1.0, t);
                Arc::new(move |_| Ok(r))
            }
            _ => Arc::new(move |w| Ok(transforms::eta_over_z(&m1, w))),
        };
        Ok(MultSide {
            eta: Arc::new(move |w| handle.eval(w)),
            h,
            slope: mu.first_moment(),
            provenance: format!("eta of {}", describe_short(mu)),
        })
    }

    fn from_handle(eta: &TransformHandle) -> Result<MultSide> {
        if eta.kind() != TransformKind::Eta {
            return Err(Error::DomainMismatch(format!("{} is not an eta-transform", eta.provenance())));
        }
        let e1 = eta.clone();
        let e2 = eta.clone();
        let tiny = 1e-8;
        let slope = e1.eval(C64::new(-tiny, 0.0))? / -tiny;
        Ok(MultSide {
            eta: Arc::new(move |w| e1.eval(w)),
            h: Arc::new(move |w| {
                if w.norm() == 0.0 {
                    Ok(slope)
                } else {
                    Ok(e2.eval(w)? / w)
                }
            }),
            slope,
            provenance: eta.provenance().to_string(),
        })
    }
}

fn describe_short(mu: &Measure) -> String {
    format!("{} measure with {} atoms", mu.domain(), mu.atoms().len())
}

/// First moments below this are treated as zero.
pub const ZERO_MOMENT: f64 = 1e-12;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum MultDomain {
    Halfline,
    Circle,
}

fn mult_point_check(domain: MultDomain, z: C64) -> Result<()> {
    let ok = match domain {
        MultDomain::Halfline => DomainTag::SlitPlane.contains(z) || z.norm() == 0.0,
        MultDomain::Circle => DomainTag::UnitDisk.contains(z),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::DomainMismatch(format!("{z} is outside the domain of the subordination functions")))
    }
}

fn solve_mult(domain: MultDomain, s1: &MultSide, s2: &MultSide, z: C64, seed: Option<C64>, cfg: &SolverConfig) -> Result<C64> {
    if z.norm() == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    match domain {
        MultDomain::Halfline => {
            let map = |h: C64| -> Result<C64> { (s2.h)(z * (s1.h)(z * h)?) };
            if z.im == 0.0 {
                let real_map = |h: C64| -> Result<C64> { Ok(C64::new(map(h)?.re, 0.0)) };
                let h = iterate_from(real_map, SelfMapDomain::PositiveAxis, C64::new(1.0, 0.0), cfg)?.interior()?;
                Ok(z * h)
            } else {
                // omega_1 = z h with h in the upper half-plane
                let h0 = seed.map(|w| w / z).filter(|h| h.im > 0.0).unwrap_or(C64::i());
                let h = iterate_from(map, SelfMapDomain::UpperHalfPlane, h0, cfg)?.interior()?;
                Ok(z * h)
            }
        }
        MultDomain::Circle => {
            let swap = s2.slope.norm() < ZERO_MOMENT && s1.slope.norm() >= ZERO_MOMENT;
            let (a, b) = if swap { (s2, s1) } else { (s1, s2) };
            let map = |w: C64| -> Result<C64> { Ok(z * (b.h)(z * (a.h)(w)?)?) };
            let start = match seed {
                // the swapped iteration runs on omega_2 = z h_1(omega_1)
                Some(w) if swap => Some(z * (s1.h)(w)?),
                other => other,
            };
            let start = start.filter(|w| w.norm() < 1.0).unwrap_or(z * 0.5);
            let w = iterate_from(map, SelfMapDomain::UnitDisk, start, cfg)?.interior_above(1.0 - z.norm(), SelfMapDomain::UnitDisk, cfg)?;
            if swap {
                // w is omega_2; omega_1 = z h_2(omega_2)
                Ok(z * (s2.h)(w)?)
            } else {
                Ok(w)
            }
        }
    }
}

fn solve_mult_continued(domain: MultDomain, s1: &MultSide, s2: &MultSide, z: C64, memo: &Memo, cfg: &SolverConfig) -> Result<C64> {
    let solve = |p: C64, seed: Option<C64>| solve_mult(domain, s1, s2, p, seed, cfg).map_err(|e| solver_failure(p, e));
    match domain {
        MultDomain::Halfline if z.im < 0.0 => solve_mult_continued(domain, s1, s2, z.conj(), memo, cfg).map(|w| w.conj()),
        MultDomain::Halfline if z.im == 0.0 => memo.get_or(z, || solve(z, None)),
        MultDomain::Halfline => continuation(z, Approach::Vertical, memo, solve),
        MultDomain::Circle => continuation(z, Approach::Radial, memo, solve),
    }
}

fn build_mult(domain: MultDomain, s1: MultSide, s2: MultSide, omega1: Arc<CFn>) -> SubordinationPair {
    let tag = match domain {
        MultDomain::Halfline => DomainTag::SlitPlane,
        MultDomain::Circle => DomainTag::UnitDisk,
    };
    let label = format!("({}) ⊠ ({})", s1.provenance, s2.provenance);
    let w1 = omega1.clone();
    let omega1_h = TransformHandle::symmetric(TransformKind::Composed, tag, format!("omega_1 of {label}"), move |z| {
        mult_point_check(domain, z)?;
        w1(z)
    });
    let omega2_of = {
        let (w1, h1) = (omega1.clone(), s1.h.clone());
        Arc::new(move |z: C64| -> Result<C64> {
            let w = w1(z)?;
            Ok(z * h1(w)?)
        })
    };
    let o2 = omega2_of.clone();
    let omega2_h = TransformHandle::symmetric(TransformKind::Composed, tag, format!("omega_2 of {label}"), move |z| {
        mult_point_check(domain, z)?;
        o2(z)
    });
    let (w1, e1) = (omega1.clone(), s1.eta.clone());
    let convolved = TransformHandle::symmetric(TransformKind::Eta, tag, format!("eta of {label}"), move |z| {
        mult_point_check(domain, z)?;
        e1(w1(z)?)
    });
    let (e1, e2) = (s1.eta.clone(), s2.eta.clone());
    let probe: Arc<Probe> = Arc::new(move |z: C64| {
        mult_point_check(domain, z)?;
        let a = omega1(z)?;
        let b = omega2_of(z)?;
        let ea = e1(a)?;
        let eb = e2(b)?;
        let prod = if z.norm() == 0.0 { C64::new(0.0, 0.0) } else { a * b / z };
        Ok((ea - eb).norm().max((ea - prod).norm()))
    });
    SubordinationPair { omega1: omega1_h, omega2: omega2_h, convolved, probe }
}

fn mult_pair(domain: MultDomain, s1: MultSide, s2: MultSide, point1: Option<C64>, point2: Option<C64>, cfg: SolverConfig) -> Result<SubordinationPair> {
    cfg.validate()?;
    if domain == MultDomain::Circle && s1.slope.norm() < ZERO_MOMENT && s2.slope.norm() < ZERO_MOMENT {
        // both first moments vanish: the product is Haar measure
        let zero: Arc<CFn> = Arc::new(|_| Ok(C64::new(0.0, 0.0)));
        let mut pair = build_mult(domain, s1, s2, zero.clone());
        pair.omega2 = pair.omega1.relabel(TransformKind::Composed, "omega_2 (Haar product)");
        pair.convolved = TransformHandle::symmetric(TransformKind::Eta, DomainTag::UnitDisk, "eta of Haar measure", |z| {
            mult_point_check(MultDomain::Circle, z)?;
            Ok(C64::new(0.0, 0.0))
        });
        return Ok(pair);
    }
    let omega1: Arc<CFn> = match (point1, point2) {
        (Some(a), _) if a.norm() == 0.0 => {
            // delta_0: the product is delta_0; omega_1 is the limit z h_2(0)
            let slope = s2.slope;
            Arc::new(move |z: C64| Ok(z * slope))
        }
        (Some(a), _) => {
            let e2 = s2.eta.clone();
            Arc::new(move |z: C64| Ok(e2(a * z)? / a))
        }
        (None, Some(b)) => Arc::new(move |z: C64| Ok(b * z)),
        (None, None) => {
            let memo = Arc::new(Memo::default());
            let (a, b) = (s1.clone(), s2.clone());
            Arc::new(move |z: C64| {
                solve_mult_continued(domain, &a, &b, z, &memo, &cfg)
            })
        }
    };
    Ok(build_mult(domain, s1, s2, omega1))
}

fn point_of(mu: &Measure) -> Option<C64> {
    mu.as_point_mass().map(|p| match mu.domain() {
        Domain::Circle => C64::from_polar(1.0, p),
        _ => C64::new(p, 0.0),
    })
}

/// Free multiplicative convolution of two measures on `[0, +inf)`.
pub fn free_mult_halfline(mu: &Measure, nu: &Measure) -> Result<SubordinationPair> {
    free_mult_halfline_with(mu, nu, SolverConfig::default())
}

pub fn free_mult_halfline_with(mu: &Measure, nu: &Measure, cfg: SolverConfig) -> Result<SubordinationPair> {
    if mu.domain() != Domain::Halfline || nu.domain() != Domain::Halfline {
        return Err(Error::DomainMismatch("free_mult_halfline needs half-line measures".into()));
    }
    let mut pair = mult_pair(
        MultDomain::Halfline,
        MultSide::from_measure(mu)?,
        MultSide::from_measure(nu)?,
        point_of(mu),
        point_of(nu),
        cfg,
    )?;
    if point_of(nu).is_some_and(|b| b.norm() == 0.0) {
        pair.convolved = transforms::eta_handle(nu)?;
    }
    Ok(pair)
}

/// Free multiplicative convolution of two measures on the unit circle.
pub fn free_mult_circle(mu: &Measure, nu: &Measure) -> Result<SubordinationPair> {
    free_mult_circle_with(mu, nu, SolverConfig::default())
}

pub fn free_mult_circle_with(mu: &Measure, nu: &Measure, cfg: SolverConfig) -> Result<SubordinationPair> {
    if mu.domain() != Domain::Circle || nu.domain() != Domain::Circle {
        return Err(Error::DomainMismatch("free_mult_circle needs circle measures".into()));
    }
    mult_pair(
        MultDomain::Circle,
        MultSide::from_measure(mu)?,
        MultSide::from_measure(nu)?,
        point_of(mu),
        point_of(nu),
        cfg,
    )
}

/// Free multiplicative convolution on whichever domain the measures share.
pub fn free_mult(mu: &Measure, nu: &Measure) -> Result<SubordinationPair> {
    match (mu.domain(), nu.domain()) {
        (Domain::Halfline, Domain::Halfline) => free_mult_halfline(mu, nu),
        (Domain::Circle, Domain::Circle) => free_mult_circle(mu, nu),
        (a, b) => Err(Error::DomainMismatch(format!(
            "free multiplicative convolution needs two half-line or two circle measures, got {a} and {b}"
        ))),
    }
}

/// Free multiplicative convolution of two eta-transforms (both on the slit
/// plane or both on the disk).
pub fn free_mult_handles(eta_mu: &TransformHandle, eta_nu: &TransformHandle, cfg: SolverConfig) -> Result<SubordinationPair> {
    let domain = match (eta_mu.domain(), eta_nu.domain()) {
        (DomainTag::SlitPlane, DomainTag::SlitPlane) => MultDomain::Halfline,
        (DomainTag::UnitDisk, DomainTag::UnitDisk) => MultDomain::Circle,
        _ => return Err(Error::DomainMismatch("eta-transforms live on different domains".into())),
    };
    mult_pair(domain, MultSide::from_handle(eta_mu)?, MultSide::from_handle(eta_nu)?, None, None, cfg)
}

fn check_weights(s: f64, t: f64, u: f64, v: f64) -> Result<()> {
    let open = |w: f64| w > 0.0 && w < 1.0;
    if !open(s) || !open(t) {
        return Err(Error::BadWeights(format!("weights s = {s}, t = {t} must lie in (0, 1)")));
    }
    if !(u > 0.0 && u.is_finite() && v > 0.0 && v.is_finite()) {
        return Err(Error::BadWeights(format!("atom positions u = {u}, v = {v} must be > 0")));
    }
    Ok(())
}

/// Closed form of `(s δ_0 + (1-s) δ_u) ⊞ (t δ_0 + (1-t) δ_v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoAtomAdd {
    pub s: f64,
    pub u: f64,
    pub t: f64,
    pub v: f64,
    /// Zeros of the discriminant, ascending; the absolutely continuous part
    /// lives where `prod (x - r_j) < 0`.
    pub roots: [f64; 4],
}

pub fn two_atom_add_oracle(s: f64, u: f64, t: f64, v: f64) -> Result<TwoAtomAdd> {
    check_weights(s, t, u, v)?;
    let inner = 8.0 * u * v * (t * s * (1.0 - t) * (1.0 - s)).sqrt();
    let base = (u - v).powi(2) + 4.0 * u * v * (t + s - 2.0 * s * t);
    let mut roots = [0.0; 4];
    let mut k = 0;
    for e in [-1.0, 1.0] {
        let r = (base + e * inner).max(0.0).sqrt();
        for d in [-1.0, 1.0] {
            roots[k] = 0.5 * (u + v + d * r);
            k += 1;
        }
    }
    roots.sort_by(f64::total_cmp);
    Ok(TwoAtomAdd { s, u, t, v, roots })
}

impl TwoAtomAdd {
    /// `omega_1` from the closed form; the square root is
    /// `prod_j sqrt(z - r_j)`, which behaves like `z^2` at infinity.
    pub fn omega1(&self, z: C64) -> C64 {
        let (s, u, t, v) = (self.s, self.u, self.t, self.v);
        let num = z * z - z * (u * (1.0 - 2.0 * s) + v) - u * v * (s + t - 1.0);
        let root: C64 = self.roots.iter().map(|&r| (z - r).sqrt()).product();
        let den = (z - t * v - (1.0 - s) * u) * 2.0;
        (num + root) / den
    }

    pub fn cauchy(&self, z: C64) -> C64 {
        if z.im < 0.0 {
            return self.cauchy(z.conj()).conj();
        }
        let w = self.omega1(z);
        self.s / w + (1.0 - self.s) / (w - self.u)
    }

    /// Density of the absolutely continuous part.
    pub fn density(&self, x: f64) -> f64 {
        let p: f64 = self.roots.iter().map(|r| x - r).product();
        if p >= 0.0 {
            return 0.0;
        }
        (-self.cauchy(C64::new(x, f64::MIN_POSITIVE)).im / std::f64::consts::PI).max(0.0)
    }

    pub fn g_handle(&self) -> TransformHandle {
        let me = *self;
        TransformHandle::symmetric(
            TransformKind::G,
            DomainTag::UpperHalfPlane,
            format!("closed-form G of two-atom sum ({}, {}, {}, {})", me.s, me.u, me.t, me.v),
            move |z| Ok(me.cauchy(z)),
        )
    }

    pub fn measures(&self) -> Result<(Measure, Measure)> {
        Ok((
            Measure::atomic(&[(0.0, self.s), (self.u, 1.0 - self.s)], Domain::Real)?,
            Measure::atomic(&[(0.0, self.t), (self.v, 1.0 - self.t)], Domain::Real)?,
        ))
    }
}

/// Closed form of `(s δ_1 + (1-s) δ_u) ⊠ (t δ_1 + (1-t) δ_v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoAtomMult {
    pub s: f64,
    pub u: f64,
    pub t: f64,
    pub v: f64,
    /// `(A, B, C, D)` of `A z^4 + B z^3 + C z^2 + D z + 1`.
    pub quartic: [f64; 4],
    /// Its roots (all real and positive), ascending.
    pub quartic_roots: [f64; 4],
}

pub fn two_atom_mult_oracle(s: f64, u: f64, t: f64, v: f64) -> Result<TwoAtomMult> {
    check_weights(s, t, u, v)?;
    if u == 1.0 || v == 1.0 {
        return Err(Error::BadWeights(format!(
            "u = {u}, v = {v}: the second atom must differ from 1"
        )));
    }
    let a = u * u * v * v;
    let b = 2.0 * u * v
        * (-(u + v) * ((1.0 - s) * (1.0 - t) + s * t) + (1.0 + u * v) * (t * (s - 1.0) + s * (t - 1.0)));
    let c = (u * u + v * v) * (t + s - 1.0).powi(2)
        + 2.0 * (s * (1.0 - s) + t * (1.0 - t)) * (u + v - 2.0 * u * v + u * u * v + u * v * v)
        + 4.0 * u * v
        + (u * u * v * v + 1.0) * (s - t).powi(2);
    let d = -2.0 * ((u + v) + (u - 1.0) * (v - 1.0) * (t * (1.0 - s) + s * (1.0 - t)));
    let r = poly::roots(&[a, b, c, d, 1.0]);
    let mut rho = [0.0; 4];
    for (k, z) in r.iter().enumerate() {
        if z.im.abs() > 1e-7 * z.norm().max(1.0) || z.re <= 0.0 {
            return Err(Error::SolverFailure(format!(
                "quartic root {z} is not real and positive for ({s}, {u}, {t}, {v})"
            )));
        }
        rho[k] = z.re;
    }
    rho.sort_by(f64::total_cmp);
    Ok(TwoAtomMult { s, u, t, v, quartic: [a, b, c, d], quartic_roots: rho })
}

/// `eta` of `s δ_1 + (1-s) δ_u`.
fn eta_two(s: f64, u: f64, z: C64) -> C64 {
    z * ((s + (1.0 - s) * u) - z * u) / (1.0 - z * (s * u + 1.0 - s))
}

impl TwoAtomMult {
    /// `omega_1`, with the square root `uv prod_j sqrt(rho_j - z)` equal to 1 at 0.
    pub fn omega1(&self, z: C64) -> C64 {
        let (s, u, t, v) = (self.s, self.u, self.t, self.v);
        let num = z * z * u * v + z * ((v - u) * (s + t - 1.0) + (t - s) * (v * u - 1.0)) - 1.0;
        let root: C64 = self.quartic_roots.iter().map(|&r| (r - z).sqrt()).product::<C64>() * (u * v);
        let den = (z * u * (1.0 - t + t * v) - (1.0 - s + s * u)) * 2.0;
        (num + root) / den
    }

    pub fn eta(&self, z: C64) -> C64 {
        if z.im < 0.0 {
            return self.eta(z.conj()).conj();
        }
        eta_two(self.s, self.u, self.omega1(z))
    }

    pub fn eta_handle(&self) -> TransformHandle {
        let me = *self;
        TransformHandle::symmetric(
            TransformKind::Eta,
            DomainTag::SlitPlane,
            format!("closed-form eta of two-atom product ({}, {}, {}, {})", me.s, me.u, me.t, me.v),
            move |z| Ok(me.eta(z)),
        )
    }

    pub fn measures(&self) -> Result<(Measure, Measure)> {
        Ok((
            Measure::atomic(&[(1.0, self.s), (self.u, 1.0 - self.s)], Domain::Halfline)?,
            Measure::atomic(&[(1.0, self.t), (self.v, 1.0 - self.t)], Domain::Halfline)?,
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomRule {
    SumRule,
    ProductRule,
    ZeroRule,
    PowerRule,
    /// Located numerically as a zero of `F` (line) or a solution of `eta = 1` (circle).
    Detected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtomEntry {
    pub location: f64,
    pub mass: f64,
    pub rule: AtomRule,
}

/// Atoms predicted by the atom rules.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AtomReport {
    pub entries: Vec<AtomEntry>,
}

impl AtomReport {
    pub fn total_mass(&self) -> f64 {
        self.entries.iter().map(|e| e.mass).fold(0.0, |a, m| a + m)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn push(&mut self, location: f64, mass: f64, rule: AtomRule) {
        if mass > 0.0 {
            self.entries.push(AtomEntry { location, mass: mass.min(1.0), rule });
        }
    }

    fn sorted(mut self) -> Self {
        self.entries.sort_by(|a, b| a.location.total_cmp(&b.location));
        self
    }
}

const RULE_EPS: f64 = 1e-14;

/// Atoms of `mu ⊞ nu`: `b + c` carries `mu({b}) + nu({c}) - 1` when positive.
pub fn atoms_free_add(mu: &Measure, nu: &Measure) -> AtomReport {
    let mut r = AtomReport::default();
    for a in mu.atoms() {
        for b in nu.atoms() {
            let m = a.mass + b.mass - 1.0;
            if m > RULE_EPS {
                r.push(a.position + b.position, m, AtomRule::SumRule);
            }
        }
    }
    r.sorted()
}

/// Atoms of `mu ⊠ nu` on the half-line (product and zero rules) or on the
/// circle (angle-sum rule).
pub fn atoms_free_mult(mu: &Measure, nu: &Measure) -> Result<AtomReport> {
    let domain = mu.domain();
    if nu.domain() != domain || domain == Domain::Real {
        return Err(Error::DomainMismatch(
            "atoms_free_mult needs two half-line or two circle measures".into(),
        ));
    }
    let mut r = AtomReport::default();
    for a in mu.atoms() {
        for b in nu.atoms() {
            let m = a.mass + b.mass - 1.0;
            if m <= RULE_EPS {
                continue;
            }
            match domain {
                Domain::Circle => r.push(wrap_angle(a.position + b.position), m, AtomRule::ProductRule),
                _ if a.position > 0.0 && b.position > 0.0 => {
                    r.push(a.position * b.position, m, AtomRule::ProductRule)
                }
                _ => {}
            }
        }
    }
    if domain == Domain::Halfline {
        let zero = mu.atom_mass_at(0.0).max(nu.atom_mass_at(0.0));
        r.push(0.0, zero, AtomRule::ZeroRule);
    }
    Ok(r.sorted())
}

/// Normalizes an angle to `[0, 2pi)` for reports.
pub fn report_angle(theta: f64) -> f64 {
    wrap_angle(theta).min(TAU)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{make_atomic, make_named, NamedFamily};
    use crate::transforms::{cauchy, eta as eta_of};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn real(pairs: &[(f64, f64)]) -> Measure {
        make_atomic(pairs, Domain::Real).unwrap()
    }

    #[test]
    fn point_mass_shift() {
        let a = 0.7;
        let nu = real(&[(-1.0, 0.3), (2.0, 0.7)]);
        let p = free_add(&Measure::point_mass(a, Domain::Real).unwrap(), &nu).unwrap();
        for z in [c(0.3, 0.5), c(-2.0, 0.01), c(5.0, 3.0)] {
            let expect = cauchy(&nu, z - a).inv();
            assert!((p.convolved.eval(z).unwrap() - expect).norm() < 1e-14);
            assert!(p.residual(z).unwrap() < 1e-13);
        }
        // and with the point mass on the right
        let q = free_add(&nu, &Measure::point_mass(a, Domain::Real).unwrap()).unwrap();
        let z = c(0.3, 0.5);
        assert!((q.convolved.eval(z).unwrap() - cauchy(&nu, z - a).inv()).norm() < 1e-14);
        assert!(q.residual(z).unwrap() < 1e-13);
    }

    #[test]
    fn bernoulli_residual_and_oracle() {
        let b = real(&[(0.0, 0.5), (2.0, 0.5)]);
        let p = free_add(&b, &b).unwrap();
        let z = c(0.7, 0.3);
        assert!(p.residual(z).unwrap() < 1e-10);
        let g = p.convolved.eval(z).unwrap().inv();
        let arcsine = make_named(NamedFamily::Arcsine { a: 0.0, b: 4.0 }, Domain::Real).unwrap();
        assert!((g - cauchy(&arcsine, z)).norm() < 1e-12);
    }

    #[test]
    fn omega1_grows_in_im() {
        let mu = real(&[(-1.0, 0.2), (0.5, 0.5), (3.0, 0.3)]);
        let nu = real(&[(0.0, 0.6), (1.0, 0.4)]);
        let p = free_add(&mu, &nu).unwrap();
        for z in [c(0.1, 0.01), c(1.0, 1.0), c(-3.0, 0.2)] {
            assert!(p.omega1.eval(z).unwrap().im >= z.im);
        }
        // reflection
        let z = c(0.4, 0.3);
        assert!((p.convolved.eval(z.conj()).unwrap() - p.convolved.eval(z).unwrap().conj()).norm() < 1e-15);
        assert!(p.convolved.eval(c(0.4, 0.0)).is_err());
    }

    #[test]
    fn additive_commutes() {
        let mu = real(&[(-1.0, 0.2), (0.5, 0.5), (3.0, 0.3)]);
        let nu = real(&[(0.0, 0.6), (1.0, 0.4)]);
        let a = free_add(&mu, &nu).unwrap();
        let b = free_add(&nu, &mu).unwrap();
        for z in [c(0.1, 0.05), c(2.0, 1.0)] {
            assert!((a.convolved.eval(z).unwrap() - b.convolved.eval(z).unwrap()).norm() < 1e-10);
        }
    }

    #[test]
    fn free_add_rejects_circle() {
        let c1 = Measure::point_mass(0.0, Domain::Circle).unwrap();
        let r = real(&[(0.0, 1.0)]);
        assert!(matches!(free_add(&r, &c1), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn halfline_point_mass() {
        let a = 2.0;
        let nu = make_atomic(&[(0.5, 0.4), (3.0, 0.6)], Domain::Halfline).unwrap();
        let p = free_mult_halfline(&Measure::point_mass(a, Domain::Halfline).unwrap(), &nu).unwrap();
        for z in [c(-1.0, 0.0), c(-0.3, 0.4), c(2.0, -1.0)] {
            assert!((p.convolved.eval(z).unwrap() - eta_of(&nu, z * a)).norm() < 1e-14);
            assert!(p.residual(z).unwrap() < 1e-13);
        }
    }

    #[test]
    fn halfline_delta_zero_absorbs() {
        let nu = make_atomic(&[(0.5, 0.4), (3.0, 0.6)], Domain::Halfline).unwrap();
        let d0 = Measure::point_mass(0.0, Domain::Halfline).unwrap();
        for p in [free_mult_halfline(&d0, &nu).unwrap(), free_mult_halfline(&nu, &d0).unwrap()] {
            assert!(p.convolved.eval(c(-0.5, 0.2)).unwrap().norm() < 1e-15);
        }
    }

    #[test]
    fn halfline_residual_at_minus_one() {
        let mu = make_atomic(&[(0.0, 0.3), (1.0, 0.3), (2.0, 0.4)], Domain::Halfline).unwrap();
        let nu = make_atomic(&[(0.0, 0.5), (4.0, 0.5)], Domain::Halfline).unwrap();
        let p = free_mult_halfline(&mu, &nu).unwrap();
        let z = c(-1.0, 0.0);
        let w1 = p.omega1.eval(z).unwrap();
        let w2 = p.omega2.eval(z).unwrap();
        let lhs = transforms::psi(&mu, w1);
        let rhs = w1 * w2 / (z - w1 * w2);
        assert!((lhs - rhs).norm() < 1e-10);
        assert!(p.residual(c(-0.4, 0.7)).unwrap() < 1e-10);
    }

    #[test]
    fn halfline_commutes() {
        let mu = make_atomic(&[(0.5, 0.3), (1.0, 0.3), (2.0, 0.4)], Domain::Halfline).unwrap();
        let nu = make_atomic(&[(1.0, 0.5), (4.0, 0.5)], Domain::Halfline).unwrap();
        let a = free_mult_halfline(&mu, &nu).unwrap();
        let b = free_mult_halfline(&nu, &mu).unwrap();
        for z in [c(-1.0, 0.0), c(-0.3, 0.2), c(1.0, 0.5)] {
            assert!((a.convolved.eval(z).unwrap() - b.convolved.eval(z).unwrap()).norm() < 1e-10);
        }
    }

    #[test]
    fn circle_rotations() {
        let (al, be) = (0.4, 2.9);
        let p = free_mult_circle(
            &Measure::point_mass(al, Domain::Circle).unwrap(),
            &Measure::point_mass(be, Domain::Circle).unwrap(),
        )
        .unwrap();
        let z = c(0.3, -0.2);
        assert!((p.convolved.eval(z).unwrap() - C64::from_polar(1.0, al + be) * z).norm() < 1e-15);
    }

    #[test]
    fn circle_zero_means_give_haar() {
        let mu = make_atomic(&[(0.0, 0.5), (std::f64::consts::PI, 0.5)], Domain::Circle).unwrap();
        let nu = make_atomic(&[(0.0, 1.0 / 3.0), (TAU / 3.0, 1.0 / 3.0), (2.0 * TAU / 3.0, 1.0 / 3.0)], Domain::Circle).unwrap();
        let p = free_mult_circle(&mu, &nu).unwrap();
        assert_eq!(p.convolved.eval(c(0.5, 0.5)).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn circle_one_sided_zero_mean_is_not_haar() {
        // mu ⊠ delta_1 = mu for the symmetric Bernoulli on {1, -1}
        let mu = make_atomic(&[(0.0, 0.5), (std::f64::consts::PI, 0.5)], Domain::Circle).unwrap();
        let d1 = Measure::point_mass(0.0, Domain::Circle).unwrap();
        let p = free_mult_circle(&mu, &d1).unwrap();
        let z = c(0.5, 0.1);
        assert!((p.convolved.eval(z).unwrap() - eta_of(&mu, z)).norm() < 1e-14);
        assert!(p.convolved.eval(z).unwrap().norm() > 0.1);

        let nu = make_atomic(&[(0.3, 0.6), (2.0, 0.4)], Domain::Circle).unwrap();
        for (a, b) in [(&mu, &nu), (&nu, &mu)] {
            let p = free_mult_circle(a, b).unwrap();
            for z in [c(0.5, 0.1), c(-0.2, -0.7)] {
                assert!(p.residual(z).unwrap() < 1e-10);
                assert!(p.omega1.eval(z).unwrap().norm() <= z.norm() + 1e-12);
            }
        }
    }

    #[test]
    fn circle_residual_generic() {
        let mu = make_atomic(&[(0.3, 0.6), (2.0, 0.4)], Domain::Circle).unwrap();
        let nu = make_atomic(&[(1.0, 0.5), (4.0, 0.2), (5.5, 0.3)], Domain::Circle).unwrap();
        let p = free_mult_circle(&mu, &nu).unwrap();
        for z in [c(0.5, 0.1), c(-0.2, -0.7), c(0.0, 0.95)] {
            assert!(p.residual(z).unwrap() < 1e-10);
            assert!(p.omega1.eval(z).unwrap().norm() <= z.norm() + 1e-12);
        }
        assert!(p.convolved.eval(c(1.0, 0.0)).is_err());
    }

    #[test]
    fn add_oracle_roots() {
        let o = two_atom_add_oracle(0.5, 2.0, 0.5, 2.0).unwrap();
        for (a, b) in o.roots.iter().zip([0.0, 2.0, 2.0, 4.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let x: f64 = 1.3;
        let exact = 1.0 / (std::f64::consts::PI * (x * (4.0 - x)).sqrt());
        assert!((o.density(x) - exact).abs() < 1e-12);
        assert!(matches!(two_atom_add_oracle(0.0, 1.0, 0.5, 1.0), Err(Error::BadWeights(_))));
    }

    #[test]
    fn add_oracle_matches_fixed_point() {
        let o = two_atom_add_oracle(0.3, 1.0, 0.6, 2.5).unwrap();
        let (mu, nu) = o.measures().unwrap();
        let p = free_add(&mu, &nu).unwrap();
        for z in [c(1.0, 1.0), c(0.5, 0.1), c(3.0, 2.0), c(-2.0, 0.5)] {
            let g = p.convolved.eval(z).unwrap().inv();
            assert!((g - o.cauchy(z)).norm() < 1e-11, "{z}");
        }
    }

    #[test]
    fn mult_oracle_coefficients() {
        let o = two_atom_mult_oracle(0.3, 2.0, 0.4, 3.0).unwrap();
        assert_eq!(o.quartic[0], 36.0);
        assert!(matches!(two_atom_mult_oracle(0.5, 1.0, 0.5, 1.0), Err(Error::BadWeights(_))));
        let (mu, nu) = o.measures().unwrap();
        let p = free_mult_halfline(&mu, &nu).unwrap();
        let z = c(-0.5, 0.0);
        assert!((o.eta(z) - p.convolved.eval(z).unwrap()).norm() < 1e-8);
    }

    #[test]
    fn mult_oracle_printed_coefficients_fail() {
        // B and C exactly as printed do not reproduce the fixed point
        let (s, u, t, v) = (0.3_f64, 2.0_f64, 0.4_f64, 3.0_f64);
        let b_printed = 2.0 * u * v
            * ((v + u) * ((t - 1.0) * (s - 1.0) - t * s) + (1.0 + u * v) * (t * (s - 1.0) + s * (t - 1.0)));
        let o = two_atom_mult_oracle(s, u, t, v).unwrap();
        assert!((b_printed - o.quartic[1]).abs() > 1.0);
        // the corrected quartic is the discriminant: omega_1 solves the fixed point
        let (mu, nu) = o.measures().unwrap();
        let p = free_mult_halfline(&mu, &nu).unwrap();
        for z in [c(-0.5, 0.3), c(-1.0, 1.0), c(2.0, 0.5)] {
            assert!((o.omega1(z) - p.omega1.eval(z).unwrap()).norm() < 1e-9, "{z}");
        }
    }

    #[test]
    fn atom_rule_examples() {
        let mu = real(&[(0.0, 0.8), (1.0, 0.2)]);
        let nu = real(&[(0.0, 0.7), (2.0, 0.3)]);
        let r = atoms_free_add(&mu, &nu);
        assert_eq!(r.entries[0].location, 0.0);
        assert!((r.entries[0].mass - 0.5).abs() < 1e-15);
        // 0.8 + 0.3 - 1 at 0 + 2
        assert!((r.entries[1].location - 2.0).abs() < 1e-15 && (r.entries[1].mass - 0.1).abs() < 1e-15);
        let b = real(&[(-1.0, 0.5), (1.0, 0.5)]);
        assert!(atoms_free_add(&b, &b).is_empty());
        let r = atoms_free_add(&real(&[(1.5, 1.0)]), &real(&[(2.0, 1.0)]));
        assert_eq!(r.entries, vec![AtomEntry { location: 3.5, mass: 1.0, rule: AtomRule::SumRule }]);
    }

    #[test]
    fn mult_atom_rule_examples() {
        let h = |p: &[(f64, f64)]| make_atomic(p, Domain::Halfline).unwrap();
        let r = atoms_free_mult(&h(&[(1.0, 0.6), (2.0, 0.4)]), &h(&[(1.0, 0.7), (3.0, 0.3)])).unwrap();
        assert_eq!(r.entries[0].location, 1.0);
        assert!((r.entries[0].mass - 0.3).abs() < 1e-15);
        assert!((r.entries[1].location - 2.0).abs() < 1e-15 && (r.entries[1].mass - 0.1).abs() < 1e-15);
        let r = atoms_free_mult(&h(&[(0.0, 0.3), (2.0, 0.7)]), &h(&[(0.0, 0.5), (3.0, 0.5)])).unwrap();
        let zero: Vec<_> = r.entries.iter().filter(|e| e.rule == AtomRule::ZeroRule).collect();
        assert_eq!(zero.len(), 1);
        assert!((zero[0].mass - 0.5).abs() < 1e-15);
        let (al, be) = (2.0, 5.0);
        let r = atoms_free_mult(
            &Measure::point_mass(al, Domain::Circle).unwrap(),
            &Measure::point_mass(be, Domain::Circle).unwrap(),
        )
        .unwrap();
        assert!((r.entries[0].location - wrap_angle(al + be)).abs() < 1e-15);
        assert_eq!(r.entries[0].mass, 1.0);
        assert!(atoms_free_mult(&real(&[(1.0, 1.0)]), &real(&[(1.0, 1.0)])).is_err());
    }
}
