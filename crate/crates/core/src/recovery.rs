//! Densities and atoms from boundary values of transforms.
//!
//! Line densities are limits of `-Im G(x + iy) / pi`, atom masses limits of
//! `iy G(a + iy)`, circle densities limits of `(1 + 2 Re psi(r e^{-i theta})) / 2pi`.
//! Limits are taken by polynomial extrapolation over a geometric height schedule.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extrapolate;
use crate::freeconv::{AtomEntry, AtomReport};
use crate::measure::wrap_angle;
use crate::transforms::{DomainTag, TransformHandle, TransformKind};

/// Heights `y0 * ratio^k`, `k < count`; the limit uses the last `terms` of them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Schedule {
    pub y0: f64,
    pub ratio: f64,
    pub count: usize,
    pub terms: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule { y0: 1e-2, ratio: 0.5, count: 9, terms: 3 }
    }
}

impl Schedule {
    pub fn with_y0(y0: f64) -> Self {
        Schedule { y0, ..Schedule::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.y0 > 0.0 && self.y0 < 1.0) || !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::BadParameters(format!("height schedule {self:?}")));
        }
        if self.count < 3 || self.terms == 0 || self.terms > self.count {
            return Err(Error::BadParameters(format!("height schedule {self:?}")));
        }
        Ok(())
    }

    pub fn heights(&self) -> Vec<f64> {
        extrapolate::geometric(self.y0, self.ratio, self.count)
    }
}

/// Limit of `values` (sampled at `heights`) as the height goes to 0.
/// Returns `+inf` when the values blow up.
fn boundary_limit(heights: &[f64], values: &[f64], terms: usize, what: &str) -> Result<f64> {
    let n = values.len();
    if values.iter().any(|v| !v.is_finite()) {
        return Ok(f64::INFINITY);
    }
    // growth like y^{-p}, p > 0.3, over the last three halvings
    let grows = (n - 3..n).all(|k| values[k] > values[k - 1] * 1.2 && values[k] > 1e-8);
    if grows {
        return Ok(f64::INFINITY);
    }
    let d: Vec<f64> = (n - 5..n).map(|k| values[k] - values[k - 1]).collect();
    let alternating = d.windows(2).all(|w| w[0] * w[1] < 0.0);
    let not_shrinking = d.windows(2).all(|w| w[1].abs() >= 0.9 * w[0].abs());
    if alternating && not_shrinking && d[d.len() - 1].abs() > 1e-10 {
        return Err(Error::OscillatoryLimit(format!("{what}: successive values {:?}", &values[n - 5..])));
    }
    let ys: Vec<C64> = values[n - terms..].iter().map(|&v| C64::new(v, 0.0)).collect();
    Ok(extrapolate::to_zero(&heights[n - terms..], &ys).re)
}

fn cauchy_of(h: &TransformHandle, z: C64) -> Result<C64> {
    match h.kind() {
        TransformKind::G => h.eval(z),
        TransformKind::F => Ok(h.eval(z)?.inv()),
        k => Err(Error::DomainMismatch(format!("{} is a {k:?}-transform, not G or F", h.provenance()))),
    }
}

fn psi_of(h: &TransformHandle, z: C64) -> Result<C64> {
    match h.kind() {
        TransformKind::Psi => h.eval(z),
        TransformKind::Eta => {
            let e = h.eval(z)?;
            Ok(e / (1.0 - e))
        }
        k => Err(Error::DomainMismatch(format!("{} is a {k:?}-transform, not psi or eta", h.provenance()))),
    }
}

fn require_line_handle(h: &TransformHandle) -> Result<()> {
    if h.domain() != DomainTag::UpperHalfPlane {
        return Err(Error::DomainMismatch(format!("{} does not live on the upper half-plane", h.provenance())));
    }
    Ok(())
}

fn require_disk_handle(h: &TransformHandle) -> Result<()> {
    if h.domain() != DomainTag::UnitDisk {
        return Err(Error::DomainMismatch(format!("{} does not live on the disk", h.provenance())));
    }
    Ok(())
}

/// Density at `x` of the measure behind a G- or F-handle.
pub fn density_real(h: &TransformHandle, x: f64, schedule: &Schedule) -> Result<f64> {
    density_real_excluding(h, x, schedule, &[])
}

/// As [`density_real`], after removing the contribution of known atoms
/// `(position, mass)` from `G`.
pub fn density_real_excluding(h: &TransformHandle, x: f64, schedule: &Schedule, atoms: &[(f64, f64)]) -> Result<f64> {
    require_line_handle(h)?;
    schedule.validate()?;
    let heights = schedule.heights();
    let mut values = Vec::with_capacity(heights.len());
    for &y in &heights {
        let z = C64::new(x, y);
        let mut g = cauchy_of(h, z)?;
        for &(a, m) in atoms {
            g -= m / (z - a);
        }
        values.push(-g.im / PI);
    }
    let v = boundary_limit(&heights, &values, schedule.terms, &format!("density at {x}"))?;
    Ok(v.max(0.0))
}

/// Mass of the atom at `a`: the limit of `iy G(a + iy)` (the reciprocal of the
/// angular derivative of `F` at `a`); 0 when `a` is not an atom.
pub fn atom_mass_real(h: &TransformHandle, a: f64, schedule: &Schedule) -> Result<f64> {
    require_line_handle(h)?;
    schedule.validate()?;
    let m = atom_limit(schedule, |y| Ok((C64::new(0.0, y) * cauchy_of(h, C64::new(a, y))?).re))?;
    Ok(m.clamp(0.0, 1.0))
}

const ATOM_DEPTH_FLOOR: f64 = 1e-13;
const ATOM_MAX_HEIGHTS: usize = 48;
const ATOM_SETTLED: f64 = 1e-12;

/// Limit of `sample(y)` as `y -> 0` for atom masses. The schedule's heights
/// are continued geometrically (down to `ATOM_DEPTH_FLOOR`) until two
/// successive Shanks window estimates agree; the best-agreeing pair wins.
fn atom_limit(schedule: &Schedule, sample: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let mut heights = schedule.heights();
    let mut values = heights.iter().map(|&y| sample(y)).collect::<Result<Vec<f64>>>()?;
    loop {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::OscillatoryLimit("atom mass diverges".into()));
        }
        let est = extrapolate::shanks_windows(&values);
        let best = est
            .windows(2)
            .map(|w| ((w[1] - w[0]).abs(), w[1]))
            .min_by(|p, q| p.0.total_cmp(&q.0));
        let next = heights[heights.len() - 1] * schedule.ratio;
        let stop = next < ATOM_DEPTH_FLOOR || heights.len() >= ATOM_MAX_HEIGHTS;
        match best {
            Some((d, m)) if d <= ATOM_SETTLED || stop => return Ok(m),
            None if stop => {
                let ys: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
                return Ok(extrapolate::to_zero(&heights, &ys).re);
            }
            _ => {}
        }
        match sample(next) {
            Ok(v) if v.is_finite() => {
                heights.push(next);
                values.push(v);
            }
            _ => {
                return Ok(best.map(|b| b.1).unwrap_or(values[values.len() - 1]));
            }
        }
    }
}

/// Density of a circle measure at its own angle `theta`, from a psi- or
/// eta-handle (`psi(z) = sum m z zeta / (1 - z zeta)`, so the boundary point
/// is `e^{-i theta}`).
pub fn density_circle(h: &TransformHandle, theta: f64, schedule: &Schedule) -> Result<f64> {
    density_circle_excluding(h, theta, schedule, &[])
}

pub fn density_circle_excluding(h: &TransformHandle, theta: f64, schedule: &Schedule, atoms: &[(f64, f64)]) -> Result<f64> {
    require_disk_handle(h)?;
    schedule.validate()?;
    let heights = schedule.heights();
    // the Poisson integral of the remaining measure is its mass plus 2 Re psi
    let rest = 1.0 - atoms.iter().map(|a| a.1).fold(0.0, |a, m| a + m);
    let mut values = Vec::with_capacity(heights.len());
    for &y in &heights {
        let z = C64::from_polar(1.0 - y, -theta);
        let mut p = psi_of(h, z)?;
        for &(phi, m) in atoms {
            let zz = z * C64::from_polar(1.0, phi);
            p -= m * zz / (1.0 - zz);
        }
        values.push((rest + 2.0 * p.re) / TAU);
    }
    let v = boundary_limit(&heights, &values, schedule.terms, &format!("density at angle {theta}"))?;
    Ok(v.max(0.0))
}

/// Mass of the atom at angle `phi`: the limit of `(1 - r) Re psi(r e^{-i phi})`.
pub fn atom_mass_circle(h: &TransformHandle, phi: f64, schedule: &Schedule) -> Result<f64> {
    require_disk_handle(h)?;
    schedule.validate()?;
    let m = atom_limit(schedule, |y| Ok(y * psi_of(h, C64::from_polar(1.0 - y, -phi))?.re))?;
    Ok(m.clamp(0.0, 1.0))
}

/// Cauchy transform of a half-line measure from its eta-transform:
/// `G(w) = 1 / (w (1 - eta(1/w)))`.
pub fn g_from_eta_halfline(eta: &TransformHandle) -> Result<TransformHandle> {
    if eta.kind() != TransformKind::Eta || eta.domain() != DomainTag::SlitPlane {
        return Err(Error::DomainMismatch(format!("{} is not a half-line eta-transform", eta.provenance())));
    }
    let e = eta.clone();
    Ok(TransformHandle::symmetric(
        TransformKind::G,
        DomainTag::UpperHalfPlane,
        format!("G from {}", eta.provenance()),
        move |w| Ok((w * (1.0 - e.eval(w.inv())?)).inv()),
    ))
}

const SCAN_BISECTIONS: usize = 60;
const REFINE_HEIGHT: f64 = 1e-12;

/// Atom candidates of the measure behind `h` between grid points, for
/// results without an atom rule. On the line these are the sign changes of
/// `Re F` from negative to positive (`F` increases through its zeros, which
/// are the atoms); on the circle the crossings of `arg eta(e^{-i theta}) = 0`.
/// Locations are refined by bisection; masses are left at 0.
pub fn detect_atoms(h: &TransformHandle, grid: &GridSpec, scan_height: f64) -> Result<Vec<AtomEntry>> {
    grid.validate()?;
    let handle = if h.domain() == DomainTag::SlitPlane {
        g_from_eta_halfline(h)?
    } else {
        h.clone()
    };
    let circle = matches!(grid, GridSpec::Circle { .. });
    let xs = grid.abscissae();
    // signed quantity whose zero marks an atom, and a closeness test at the refined point
    let value = |x: f64, y: f64| -> Result<C64> {
        if circle {
            require_disk_handle(&handle)?;
            let p = psi_of(&handle, C64::from_polar(1.0 - y, -x))?;
            Ok(p / (1.0 + p))
        } else {
            require_line_handle(&handle)?;
            Ok(cauchy_of(&handle, C64::new(x, y))?.inv())
        }
    };
    let sign = |v: C64| -> Option<f64> {
        if circle {
            let a = v.arg();
            (a.abs() < 1.0).then_some(a)
        } else {
            v.re.is_finite().then_some(v.re)
        }
    };
    let samples: Vec<Option<f64>> = xs
        .par_iter()
        .map(|&x| value(x, scan_height).map(sign))
        .collect::<Result<Vec<_>>>()?;
    let n = xs.len();
    let cells = if circle { n } else { n - 1 };
    let mut found: Vec<AtomEntry> = Vec::new();
    for k in 0..cells {
        let j = (k + 1) % n;
        let (Some(a), Some(b)) = (samples[k], samples[j]) else { continue };
        let crosses = if circle { a * b <= 0.0 } else { a < 0.0 && b >= 0.0 };
        if !crosses {
            continue;
        }
        let (mut lo, mut hi) = (xs[k], if j == 0 { TAU } else { xs[j] });
        let fa = sign(value(lo, REFINE_HEIGHT)?).unwrap_or(a);
        for _ in 0..SCAN_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            match sign(value(mid, REFINE_HEIGHT)?) {
                Some(v) if v * fa > 0.0 => lo = mid,
                Some(_) => hi = mid,
                None => break,
            }
        }
        let x = 0.5 * (lo + hi);
        let v = value(x, REFINE_HEIGHT)?;
        let close = if circle { (v - 1.0).norm() < 1e-6 } else { v.norm() < 1e-6 };
        let x = if circle { wrap_angle(x) } else { x };
        if close && !found.iter().any(|e| grid.distance(e.location, x) < 1e-9) {
            found.push(AtomEntry { location: x, mass: 0.0, rule: crate::freeconv::AtomRule::Detected });
        }
    }
    Ok(found)
}

/// Grid of abscissae.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum GridSpec {
    /// `n` equally spaced points on `[lo, hi]`.
    Line { lo: f64, hi: f64, n: usize },
    /// `n` equally spaced angles on `[0, 2pi)`.
    Circle { n: usize },
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            GridSpec::Line { lo, hi, n } if lo.is_finite() && hi.is_finite() && lo < hi && n >= 2 => Ok(()),
            GridSpec::Circle { n } if n >= 3 => Ok(()),
            other => Err(Error::BadParameters(format!("bad grid {other:?}"))),
        }
    }

    pub fn abscissae(&self) -> Vec<f64> {
        match *self {
            GridSpec::Line { lo, hi, n } => (0..n)
                .map(|k| if k + 1 == n { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 })
                .collect(),
            GridSpec::Circle { n } => (0..n).map(|k| TAU * k as f64 / n as f64).collect(),
        }
    }

    fn distance(&self, a: f64, b: f64) -> f64 {
        match self {
            GridSpec::Line { .. } => (a - b).abs(),
            GridSpec::Circle { .. } => {
                let d = wrap_angle(a - b);
                d.min(TAU - d)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassAccount {
    pub continuous_mass: f64,
    pub atomic_mass: f64,
    /// `1 - continuous_mass - atomic_mass`
    pub deficit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityGrid {
    pub abscissae: Vec<f64>,
    /// `NaN` marks masked points, `+inf` singular ones.
    pub densities: Vec<f64>,
    pub atoms: AtomReport,
    pub mass_account: MassAccount,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoverOptions {
    pub schedule: Schedule,
    /// Schedule for atom masses.
    pub atom_schedule: Schedule,
    /// Densities closer than this to an atom or an extra mask point are `NaN`.
    pub mask_radius: f64,
    pub extra_mask: Vec<f64>,
    /// Atoms whose recovered mass is below this are dropped.
    pub min_atom_mass: f64,
}

impl Default for RecoverOptions {
    fn default() -> Self {
        RecoverOptions {
            schedule: Schedule::default(),
            atom_schedule: Schedule { y0: 1e-3, ratio: 0.5, count: 12, terms: 3 },
            mask_radius: 1e-3,
            extra_mask: Vec::new(),
            min_atom_mass: 1e-9,
        }
    }
}

/// `-zeta(1/2)`: trapezoid correction for an inverse square root singularity
/// at a grid point.
const NAVOT: f64 = 1.460_354_508_809_586_8;

/// Trapezoid mass of a grid density. Masked points are interpolated linearly,
/// `+inf` points get the correction for a `|x - x0|^{-1/2}` singularity.
fn grid_mass(xs: &[f64], f: &[f64], periodic: bool) -> f64 {
    let n = xs.len();
    let mut vals: Vec<f64> = f.to_vec();
    let known: Vec<usize> = (0..n).filter(|&k| f[k].is_finite() || f[k] == f64::INFINITY).collect();
    if known.is_empty() {
        return 0.0;
    }
    for k in 0..n {
        if f[k].is_nan() {
            let left = known.iter().rev().find(|&&j| j < k && f[j].is_finite());
            let right = known.iter().find(|&&j| j > k && f[j].is_finite());
            vals[k] = match (left, right) {
                (Some(&l), Some(&r)) => f[l] + (f[r] - f[l]) * (xs[k] - xs[l]) / (xs[r] - xs[l]),
                (Some(&l), None) => f[l],
                (None, Some(&r)) => f[r],
                (None, None) => 0.0,
            };
        }
    }
    let h_of = |k: usize| -> f64 {
        if k + 1 < n {
            xs[k + 1] - xs[k]
        } else {
            TAU + xs[0] - xs[k]
        }
    };
    let cells = if periodic { n } else { n - 1 };
    let mut total = 0.0;
    for k in 0..cells {
        let j = (k + 1) % n;
        let (a, b) = (vals[k], vals[j]);
        let h = h_of(k);
        total += match (a.is_finite(), b.is_finite()) {
            (true, true) => 0.5 * h * (a + b),
            // singular end: drop its value and add the correction from the neighbour
            (false, true) => 0.5 * h * b + NAVOT * h * b,
            (true, false) => 0.5 * h * a + NAVOT * h * a,
            (false, false) => 0.0,
        };
    }
    total
}

/// Evaluates densities on a grid (in parallel), atom masses at the candidate
/// locations, and the mass balance. A G/F handle gives a line grid, a
/// psi/eta handle on the disk a circle grid, and a half-line eta handle is
/// converted to its Cauchy transform first.
pub fn recover_grid(h: &TransformHandle, grid: &GridSpec, candidates: &[AtomEntry], opts: &RecoverOptions) -> Result<DensityGrid> {
    grid.validate()?;
    opts.schedule.validate()?;
    opts.atom_schedule.validate()?;
    let handle = if h.domain() == DomainTag::SlitPlane {
        g_from_eta_halfline(h)?
    } else {
        h.clone()
    };
    let circle = matches!(grid, GridSpec::Circle { .. });
    match (circle, handle.domain()) {
        (true, DomainTag::UnitDisk) | (false, DomainTag::UpperHalfPlane) => {}
        _ => {
            return Err(Error::DomainMismatch(format!(
                "grid {grid:?} does not match the domain of {}",
                handle.provenance()
            )))
        }
    }

    let mut atoms = AtomReport::default();
    for c in candidates {
        let m = if circle {
            atom_mass_circle(&handle, c.location, &opts.atom_schedule)?
        } else {
            atom_mass_real(&handle, c.location, &opts.atom_schedule)?
        };
        if m >= opts.min_atom_mass {
            atoms.entries.push(AtomEntry { location: c.location, mass: m, rule: c.rule });
        }
    }
    let known: Vec<(f64, f64)> = atoms.entries.iter().map(|e| (e.location, e.mass)).collect();
    let mask: Vec<f64> = known.iter().map(|a| a.0).chain(opts.extra_mask.iter().copied()).collect();

    let xs = grid.abscissae();
    let densities: Vec<f64> = xs
        .par_iter()
        .map(|&x| {
            if mask.iter().any(|&p| grid.distance(x, p) < opts.mask_radius) {
                return Ok(f64::NAN);
            }
            if circle {
                density_circle_excluding(&handle, x, &opts.schedule, &known)
            } else {
                density_real_excluding(&handle, x, &opts.schedule, &known)
            }
        })
        .collect::<Result<Vec<f64>>>()?;

    let continuous_mass = grid_mass(&xs, &densities, circle);
    let atomic_mass = atoms.total_mass();
    Ok(DensityGrid {
        abscissae: xs,
        densities,
        atoms,
        mass_account: MassAccount {
            continuous_mass,
            atomic_mass,
            deficit: 1.0 - continuous_mass - atomic_mass,
        },
    })
}
