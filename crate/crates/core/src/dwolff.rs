//! Denjoy-Wolff fixed points of analytic self-maps, and the inversion
//! solvers built on them (half-plane, disk and slit-plane versions).

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::transforms::{continuous_log, DomainTag, Memo, TransformHandle};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub newton_switch_radius: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tolerance: 1e-13, max_iterations: 10_000, newton_switch_radius: f64::INFINITY }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) || self.max_iterations < 1 || !(self.newton_switch_radius >= 0.0) {
            return Err(Error::BadParameters(format!("invalid solver config {self:?}")));
        }
        Ok(())
    }
}

/// Domain on which a self-map is iterated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelfMapDomain {
    UpperHalfPlane,
    UnitDisk,
    /// `|Im z| < pi`.
    Strip,
    /// `(0, +inf)`, for real-symmetric maps restricted to the positive axis.
    PositiveAxis,
}

impl SelfMapDomain {
    pub fn seed(self) -> C64 {
        match self {
            SelfMapDomain::UpperHalfPlane => C64::i(),
            SelfMapDomain::UnitDisk => C64::new(0.3, 0.3),
            SelfMapDomain::Strip => C64::new(0.0, 0.0),
            SelfMapDomain::PositiveAxis => C64::new(1.0, 0.0),
        }
    }

    pub fn contains(self, z: C64) -> bool {
        match self {
            SelfMapDomain::UpperHalfPlane => DomainTag::UpperHalfPlane.contains(z),
            SelfMapDomain::UnitDisk => DomainTag::UnitDisk.contains(z),
            SelfMapDomain::Strip => DomainTag::Strip.contains(z),
            SelfMapDomain::PositiveAxis => z.im == 0.0 && z.re > 0.0 && z.re.is_finite(),
        }
    }

    /// Distance-like measure of how close `z` is to the finite boundary.
    fn boundary_gap(self, z: C64) -> f64 {
        match self {
            SelfMapDomain::UpperHalfPlane => z.im / z.norm().max(1.0),
            SelfMapDomain::UnitDisk => 1.0 - z.norm(),
            SelfMapDomain::Strip => PI - z.im.abs(),
            SelfMapDomain::PositiveAxis => z.re / z.norm().max(1.0),
        }
    }

    /// Plain distance to the finite boundary.
    pub fn raw_gap(self, z: C64) -> f64 {
        match self {
            SelfMapDomain::UpperHalfPlane => z.im,
            SelfMapDomain::UnitDisk => 1.0 - z.norm(),
            SelfMapDomain::Strip => PI - z.im.abs(),
            SelfMapDomain::PositiveAxis => z.re,
        }
    }
}

impl From<DomainTag> for SelfMapDomain {
    fn from(t: DomainTag) -> Self {
        match t {
            DomainTag::UpperHalfPlane => SelfMapDomain::UpperHalfPlane,
            DomainTag::UnitDisk => SelfMapDomain::UnitDisk,
            DomainTag::Strip => SelfMapDomain::Strip,
            DomainTag::SlitPlane => SelfMapDomain::UpperHalfPlane,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Location {
    Finite(C64),
    Infinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedPointKind {
    Interior,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointResult {
    pub location: Location,
    pub kind: FixedPointKind,
    pub iterations: usize,
    pub residual: f64,
}

impl FixedPointResult {
    /// The finite interior location, or `SolverFailure`.
    pub fn interior(&self) -> Result<C64> {
        match (self.kind, self.location) {
            (FixedPointKind::Interior, Location::Finite(w)) => Ok(w),
            _ => Err(Error::SolverFailure(format!(
                "expected an interior fixed point, got {:?} {:?}",
                self.kind, self.location
            ))),
        }
    }

    /// As [`interior`](Self::interior), for callers that know the fixed point
    /// lies at plain distance at least `floor` from the boundary. A converged
    /// point that close to the edge but above `floor / 2` is accepted.
    pub fn interior_above(&self, floor: f64, domain: SelfMapDomain, cfg: &SolverConfig) -> Result<C64> {
        if let (FixedPointKind::Boundary, Location::Finite(w)) = (self.kind, self.location) {
            let converged = self.residual <= STALL_FACTOR * cfg.tolerance * w.norm().max(1.0);
            if floor > 0.0 && converged && domain.raw_gap(w) >= 0.5 * floor {
                return Ok(w);
            }
        }
        self.interior()
    }

    /// Any finite location, interior or boundary.
    pub fn finite(&self) -> Result<C64> {
        match self.location {
            Location::Finite(w) => Ok(w),
            Location::Infinity => Err(Error::SolverFailure("fixed point at infinity".into())),
        }
    }
}

const ESCAPE_RADIUS: f64 = 1e12;
const STICKY_STEPS: usize = 20;

/// Central-difference derivative.
pub fn derivative<F>(f: &F, w: C64, h: f64) -> Result<C64>
where
    F: Fn(C64) -> Result<C64>,
{
    let hp = C64::new(h, 0.0);
    Ok((f(w + hp)? - f(w - hp)?) / (2.0 * h))
}

/// Distance to the fixed point predicted from `f'(w)`, used to tell a tiny
/// step near a fixed point from slow drift along the domain.
fn predicted_distance<F>(f: &F, w: C64, step: f64, scale: f64) -> f64
where
    F: Fn(C64) -> Result<C64>,
{
    if step == 0.0 {
        return 0.0;
    }
    match derivative(f, w, 1e-6 * scale) {
        Ok(d) => step / (1.0 - d).norm(),
        Err(_) => 0.0,
    }
}

const NEWTON_BUDGET: usize = 60;
const STALL_STEPS: usize = 50;
const STALL_FACTOR: f64 = 1e3;

/// Iterates `f` from `seed`, with Newton acceleration near the fixed point.
pub fn iterate_from<F>(f: F, domain: SelfMapDomain, seed: C64, cfg: &SolverConfig) -> Result<FixedPointResult>
where
    F: Fn(C64) -> Result<C64>,
{
    cfg.validate()?;
    let mut w = seed;
    let mut fw = f(w)?;
    let mut escaped = 0usize;
    let mut near_edge = 0usize;
    // Newton jumps that keep landing near a boundary fixed point are cut off
    let mut newton_left = NEWTON_BUDGET;
    let mut norms = Vec::with_capacity(cfg.max_iterations.min(1 << 16));
    let mut best_step = f64::INFINITY;
    let mut stalled = 0usize;
    for it in 1..=cfg.max_iterations {
        if !(fw.re.is_finite() && fw.im.is_finite()) {
            return Err(Error::SolverFailure(format!("map returned {fw} at {w}")));
        }
        let scale = w.norm().max(1.0);
        let step = (fw - w).norm();
        if step < 0.9 * best_step {
            best_step = step;
            stalled = 0;
        } else {
            stalled += 1;
        }
        // rounding floor: no progress for a while, already close
        let floor = stalled >= STALL_STEPS && step <= STALL_FACTOR * cfg.tolerance * scale;
        let settled = (step <= cfg.tolerance * scale || floor) && {
            let dist = predicted_distance(&f, w, step, scale);
            if dist > w.norm() && w.norm() > 1e3 {
                return Ok(FixedPointResult {
                    location: Location::Infinity,
                    kind: FixedPointKind::Boundary,
                    iterations: it,
                    residual: 0.0,
                });
            }
            dist <= 1e-6 * scale
        };
        if settled {
            let kind = if domain.boundary_gap(w) < 1e-10 {
                FixedPointKind::Boundary
            } else {
                FixedPointKind::Interior
            };
            return Ok(FixedPointResult { location: Location::Finite(w), kind, iterations: it, residual: step });
        }

        let mut next = fw;
        let mut f_next = None;
        if newton_left > 0 && step < cfg.newton_switch_radius * scale {
            let h = 1e-7 * scale;
            if let Ok(d) = derivative(&f, w, h) {
                let denom = d - 1.0;
                if denom.norm() > 0.0 {
                    let mut cand = w - (fw - w) / denom;
                    if domain == SelfMapDomain::PositiveAxis {
                        cand.im = 0.0;
                    }
                    // never jump most of the way to the boundary in one step
                    if domain.contains(cand) && domain.boundary_gap(cand) >= 0.1 * domain.boundary_gap(w) {
                        if let Ok(fc) = f(cand) {
                            if (fc - cand).norm() < step {
                                newton_left -= 1;
                                next = cand;
                                f_next = Some(fc);
                            }
                        }
                    }
                }
            }
        }
        if domain == SelfMapDomain::PositiveAxis {
            next.im = 0.0;
        }
        w = next;

        let n = w.norm();
        if n > ESCAPE_RADIUS {
            escaped += 1;
            if escaped >= STICKY_STEPS {
                return Ok(FixedPointResult {
                    location: Location::Infinity,
                    kind: FixedPointKind::Boundary,
                    iterations: it,
                    residual: 0.0,
                });
            }
        } else {
            escaped = 0;
        }
        if domain.boundary_gap(w) < 1e-12 {
            near_edge += 1;
            if near_edge >= STICKY_STEPS {
                return Ok(FixedPointResult {
                    location: Location::Finite(w),
                    kind: FixedPointKind::Boundary,
                    iterations: it,
                    residual: step,
                });
            }
        } else {
            near_edge = 0;
        }
        norms.push(n);
        fw = match f_next {
            Some(v) => v,
            None => f(w)?,
        };
    }

    // slow escape to infinity: norms grow monotonically over the second half
    let half = norms.len() / 2;
    if half >= 4 {
        let tail = &norms[half..];
        let monotone = tail.windows(2).all(|p| p[1] >= p[0]);
        if monotone && tail[tail.len() - 1] > 1.1 * tail[0] {
            return Ok(FixedPointResult {
                location: Location::Infinity,
                kind: FixedPointKind::Boundary,
                iterations: cfg.max_iterations,
                residual: 0.0,
            });
        }
    }
    let residual = (fw - w).norm();
    Err(Error::MaxIterations { iterations: cfg.max_iterations, residual })
}

/// Denjoy-Wolff point of a self-map of the tagged domain, from the domain's
/// standard seed.
pub fn denjoy_wolff(f: &TransformHandle, domain: DomainTag, cfg: &SolverConfig) -> Result<FixedPointResult> {
    let d = SelfMapDomain::from(domain);
    iterate_from(|w| f.eval(w), d, d.seed(), cfg)
}

fn sample_grid_halfplane() -> Vec<C64> {
    let mut v = Vec::new();
    for &x in &[-10.0, -2.0, -0.5, 0.0, 0.7, 3.0, 10.0] {
        for &y in &[0.05, 0.5, 2.0, 20.0] {
            v.push(C64::new(x, y));
        }
    }
    v
}

fn sample_grid_disk() -> Vec<C64> {
    let mut v = Vec::new();
    for &r in &[0.1, 0.5, 0.9] {
        for k in 0..8 {
            v.push(C64::from_polar(r, k as f64 * PI / 4.0 + 0.1));
        }
    }
    v
}

/// How evaluation points approach the boundary of their domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Approach {
    /// toward the real axis, `Re z` fixed
    Vertical,
    /// toward the unit circle, `arg z` fixed
    Radial,
}

/// Points closer to the boundary than this are solved by continuation.
pub(crate) const LADDER_TOP: f64 = 0.05;

/// Solves at `z` by continuation from points twice, four times, ... as far
/// from the boundary (up to [`LADDER_TOP`]), each solve seeded by a linear
/// extrapolation of the previous ones. Every solution is memoized.
pub(crate) fn continuation<S>(z: C64, approach: Approach, memo: &Memo, solve: S) -> Result<C64>
where
    S: Fn(C64, Option<C64>) -> Result<C64>,
{
    let d = match approach {
        Approach::Vertical => z.im,
        Approach::Radial => 1.0 - z.norm(),
    };
    if !(d > 0.0) || d >= LADDER_TOP {
        return memo.get_or(z, || solve(z, None));
    }
    let at = |d: f64| match approach {
        Approach::Vertical => C64::new(z.re, d),
        Approach::Radial => z * ((1.0 - d) / z.norm()),
    };
    let mut ds = vec![d];
    while ds[ds.len() - 1] < LADDER_TOP {
        ds.push(ds[ds.len() - 1] * 2.0);
    }
    let mut prev: Option<C64> = None;
    let mut prev2: Option<C64> = None;
    for (k, &dk) in ds.iter().enumerate().rev() {
        let p = if k == 0 { z } else { at(dk) };
        let seed = match (prev, prev2) {
            (Some(a), Some(b)) => Some(a + (a - b) * 0.5),
            (Some(a), None) => Some(a),
            _ => None,
        };
        let w = memo.get_or(p, || solve(p, seed).or_else(|e| if seed.is_some() { solve(p, prev) } else { Err(e) }))?;
        prev2 = prev;
        prev = Some(w);
    }
    Ok(prev.expect("ladder has at least one rung"))
}

/// Right inverse of `H` on the upper half-plane (`H(omega(alpha)) = alpha`).
pub struct HalfplaneInverter<'a> {
    h: Box<dyn Fn(C64) -> Result<C64> + Send + Sync + 'a>,
    cfg: SolverConfig,
}

impl<'a> HalfplaneInverter<'a> {
    /// Checks `Im H(z) <= Im z` and `H(iy)/(iy) -> a > 0` on a sample.
    pub fn new<F>(h: F, cfg: SolverConfig) -> Result<Self>
    where
        F: Fn(C64) -> Result<C64> + Send + Sync + 'a,
    {
        cfg.validate()?;
        for z in sample_grid_halfplane() {
            let v = h(z)?;
            if v.im > z.im * (1.0 + 1e-9) + 1e-12 {
                return Err(Error::NotAdmissible(format!("Im H({z}) = {} > Im z", v.im)));
            }
        }
        let y = 1e6;
        let a = h(C64::new(0.0, y))? / C64::new(0.0, y);
        if !(a.re > 0.0) {
            return Err(Error::NotAdmissible(format!("H(iy)/(iy) -> {a}, not positive")));
        }
        Ok(HalfplaneInverter { h: Box::new(h), cfg })
    }

    /// Skips the admissibility sample (the caller knows `H` is admissible).
    pub(crate) fn trusted<F>(h: F, cfg: SolverConfig) -> Self
    where
        F: Fn(C64) -> Result<C64> + Send + Sync + 'a,
    {
        HalfplaneInverter { h: Box::new(h), cfg }
    }

    pub fn solve(&self, alpha: C64) -> Result<FixedPointResult> {
        self.solve_seeded(alpha, None)
    }

    /// As [`solve`](Self::solve), starting from `seed` when it lies in the half-plane.
    pub fn solve_seeded(&self, alpha: C64, seed: Option<C64>) -> Result<FixedPointResult> {
        if !(alpha.im >= 0.0) || !alpha.re.is_finite() {
            return Err(Error::DomainMismatch(format!("{alpha} is not in the closed upper half-plane")));
        }
        let g = |z: C64| -> Result<C64> { Ok(z + alpha - (self.h)(z)?) };
        let seed = match seed {
            Some(s) if s.im > 0.0 && s.re.is_finite() => s,
            _ if alpha.im > 0.0 => alpha,
            _ => alpha + C64::i(),
        };
        iterate_from(g, SelfMapDomain::UpperHalfPlane, seed, &self.cfg)
    }

    pub fn invert(&self, alpha: C64) -> Result<C64> {
        self.invert_seeded(alpha, None)
    }

    pub fn invert_seeded(&self, alpha: C64, seed: Option<C64>) -> Result<C64> {
        let r = self.solve_seeded(alpha, seed)?;
        if alpha.im > 0.0 {
            // Im H(w) <= Im w, so Im omega >= Im alpha
            r.interior_above(alpha.im, SelfMapDomain::UpperHalfPlane, &self.cfg)
        } else {
            r.finite()
        }
    }
}

/// `omega(alpha)` with `H(omega(alpha)) = alpha`, via the Denjoy-Wolff point
/// of `g(z) = z + alpha - H(z)`.
pub fn invert_halfplane(h: &TransformHandle, alpha: C64, cfg: &SolverConfig) -> Result<C64> {
    HalfplaneInverter::new(|z| h.eval(z), *cfg)?.invert(alpha)
}

/// Right inverse of `Phi` on the disk, driven by `q(z) = z / Phi(z)`.
pub struct DiskInverter<'a> {
    q: Box<dyn Fn(C64) -> Result<C64> + Send + Sync + 'a>,
    cfg: SolverConfig,
}

impl<'a> DiskInverter<'a> {
    /// Checks `|Phi(z)| >= |z|` (that is `|q| <= 1`) and `Phi(0) = 0` on a sample.
    pub fn new<F>(phi: F, cfg: SolverConfig) -> Result<DiskInverter<'a>>
    where
        F: Fn(C64) -> Result<C64> + Send + Sync + 'a,
    {
        cfg.validate()?;
        let tiny = C64::new(1e-9, 0.0);
        if phi(tiny)?.norm() > 1e-6 {
            return Err(Error::NotAdmissible("Phi(0) != 0".into()));
        }
        for z in sample_grid_disk() {
            let v = phi(z)?;
            if v.norm() < z.norm() * (1.0 - 1e-9) {
                return Err(Error::NotAdmissible(format!("|Phi({z})| = {} < |z|", v.norm())));
            }
        }
        Ok(DiskInverter::from_quotient(move |z| Ok(z / phi(z)?), cfg))
    }

    pub(crate) fn from_quotient<F>(q: F, cfg: SolverConfig) -> Self
    where
        F: Fn(C64) -> Result<C64> + Send + Sync + 'a,
    {
        DiskInverter { q: Box::new(q), cfg }
    }

    pub fn solve(&self, alpha: C64) -> Result<FixedPointResult> {
        self.solve_seeded(alpha, None)
    }

    /// As [`solve`](Self::solve), starting from `seed` when it lies in the disk.
    pub fn solve_seeded(&self, alpha: C64, seed: Option<C64>) -> Result<FixedPointResult> {
        if !(alpha.norm() <= 1.0) {
            return Err(Error::DomainMismatch(format!("{alpha} is not in the closed disk")));
        }
        if alpha.norm() == 0.0 {
            return Ok(FixedPointResult {
                location: Location::Finite(C64::new(0.0, 0.0)),
                kind: FixedPointKind::Interior,
                iterations: 0,
                residual: 0.0,
            });
        }
        let g = |z: C64| -> Result<C64> {
            if z.norm() == 0.0 {
                return Ok(C64::new(0.0, 0.0));
            }
            Ok(alpha * (self.q)(z)?)
        };
        let seed = match seed {
            Some(s) if s.norm() < 1.0 => s,
            _ => alpha * 0.5,
        };
        iterate_from(g, SelfMapDomain::UnitDisk, seed, &self.cfg)
    }

    pub fn invert(&self, alpha: C64) -> Result<C64> {
        self.invert_seeded(alpha, None)
    }

    pub fn invert_seeded(&self, alpha: C64, seed: Option<C64>) -> Result<C64> {
        let r = self.solve_seeded(alpha, seed)?;
        if alpha.norm() < 1.0 {
            // |q| <= 1, so |omega| <= |alpha|
            r.interior_above(1.0 - alpha.norm(), SelfMapDomain::UnitDisk, &self.cfg)
        } else {
            r.finite()
        }
    }
}

/// `omega(alpha)` with `Phi(omega(alpha)) = alpha` on the disk, via the
/// Denjoy-Wolff point of `g(z) = alpha z / Phi(z)`.
pub fn invert_disk(phi: &TransformHandle, alpha: C64, cfg: &SolverConfig) -> Result<C64> {
    DiskInverter::new(|z| phi.eval(z), *cfg)?.invert(alpha)
}

/// Right inverse of a map `Phi` of the slit plane, solved on the strip
/// `|Im s| < pi` through `u(s) = -e^s`, `v(a) = log(-a)`.
pub struct SlitInverter<'a> {
    lift: Box<dyn Fn(C64) -> Result<C64> + Send + Sync + 'a>,
    tau: f64,
    cfg: SolverConfig,
}

impl<'a> SlitInverter<'a> {
    /// `lift` is `f = v o Phi o u`, real on the real axis; `k` bounds
    /// `Im s <= Im f(s) <= k Im s`.
    pub fn from_lift<F>(lift: F, k: f64, cfg: SolverConfig) -> Result<Self>
    where
        F: Fn(C64) -> Result<C64> + Send + Sync + 'a,
    {
        cfg.validate()?;
        if !(k >= 1.0) || !k.is_finite() {
            return Err(Error::BadParameters(format!("strip constant k = {k} must be >= 1")));
        }
        Ok(SlitInverter { lift: Box::new(lift), tau: PI / (k + PI), cfg })
    }

    /// Builds the lift from `Phi` by tracking `log(-Phi(-e^s))` vertically
    /// from the real axis, and checks the strip bounds on a sample.
    pub fn new<F>(phi: F, k: f64, cfg: SolverConfig) -> Result<Self>
    where
        F: Fn(C64) -> Result<C64> + Send + Sync + Clone + 'a,
    {
        let p = phi.clone();
        let lift = move |s: C64| -> Result<C64> {
            let base = C64::new(s.re, 0.0);
            let at = |x: C64| -> Result<C64> { Ok(-p(-x.exp())?) };
            let b = at(base)?;
            if !(b.re > 0.0) || b.im.abs() > 1e-12 * b.re.max(1.0) {
                return Err(Error::NotAdmissible(format!(
                    "Phi(-e^{}) = {} is not negative",
                    s.re,
                    -b
                )));
            }
            continuous_log(at, base, s, C64::new(b.re.ln(), 0.0))
        };
        let inv = SlitInverter::from_lift(lift, k, cfg)?;
        for &x in &[-3.0, -0.5, 0.0, 1.0, 3.0] {
            for &y in &[0.1, 1.0, 2.5, 3.0] {
                let s = C64::new(x, y);
                let fs = (inv.lift)(s)?;
                if fs.im < y * (1.0 - 1e-9) - 1e-12 || fs.im > k * y * (1.0 + 1e-9) + 1e-12 {
                    return Err(Error::NotAdmissible(format!(
                        "Im f({s}) = {} outside [Im s, k Im s]",
                        fs.im
                    )));
                }
            }
        }
        Ok(inv)
    }

    pub fn solve_strip(&self, beta: C64) -> Result<FixedPointResult> {
        self.solve_strip_seeded(beta, None)
    }

    pub fn solve_strip_seeded(&self, beta: C64, seed: Option<C64>) -> Result<FixedPointResult> {
        let g = |s: C64| -> Result<C64> { Ok(s - ((self.lift)(s)? - beta) * self.tau) };
        let seed = match seed {
            Some(s) if s.im.abs() < PI && s.re.is_finite() && (beta.im != 0.0 || s.im == 0.0) => s,
            _ => C64::new(beta.re, 0.5 * beta.im),
        };
        if beta.im == 0.0 {
            let g_real = |s: C64| -> Result<C64> { Ok(C64::new(g(s)?.re, 0.0)) };
            return iterate_from(g_real, SelfMapDomain::Strip, seed, &self.cfg);
        }
        iterate_from(g, SelfMapDomain::Strip, seed, &self.cfg)
    }

    /// `omega(alpha)` for `alpha` in the slit plane.
    pub fn invert(&self, alpha: C64) -> Result<C64> {
        self.invert_seeded(alpha, None)
    }

    /// As [`invert`](Self::invert), starting from `seed` (a point of the slit plane).
    pub fn invert_seeded(&self, alpha: C64, seed: Option<C64>) -> Result<C64> {
        if !DomainTag::SlitPlane.contains(alpha) || alpha.norm() == 0.0 {
            return Err(Error::DomainMismatch(format!("{alpha} is not in the slit plane")));
        }
        let beta = (-alpha).ln();
        let seed = seed.filter(|w| DomainTag::SlitPlane.contains(*w) && w.norm() > 0.0).map(|w| (-w).ln());
        let s = self.solve_strip_seeded(beta, seed)?.interior()?;
        let w = -s.exp();
        Ok(if alpha.im == 0.0 { C64::new(w.re, 0.0) } else { w })
    }
}

/// `omega(alpha)` with `Phi(omega(alpha)) = alpha` on `C \ [0, +inf)`.
pub fn invert_slitplane(phi: &TransformHandle, alpha: C64, k: f64, cfg: &SolverConfig) -> Result<C64> {
    let p = phi.clone();
    SlitInverter::new(move |z| p.eval(z), k, *cfg)?.invert(alpha)
}
