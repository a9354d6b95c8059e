//! Probability measures on the real line, the half-line `[0, +inf)` and the
//! unit circle.
//!
//! A [`Measure`] is a finite list of atoms plus an optional continuous part.
//! The continuous part is either a named family (kept symbolically so that
//! transforms can use closed forms near the support) or a user supplied grid
//! of weighted nodes.  Both carry quadrature nodes.

pub mod quadrature;
mod spec;

pub use spec::{MeasureSpec, NamedSpec, GridSpec, AtomSpec};

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Tolerance on the total mass.
pub const MASS_TOL: f64 = 1e-10;
/// Absolute tolerance for duplicate atom detection.
pub const DUPLICATE_TOL: f64 = 1e-12;
/// Default number of quadrature nodes for named families.
pub const DEFAULT_NODES: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Real,
    Halfline,
    Circle,
}

impl std::fmt::Display for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Domain::Real => "real",
            Domain::Halfline => "halfline",
            Domain::Circle => "circle",
        };
        f.write_str(s)
    }
}

/// A point mass. On the circle `position` is an angle in `[0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub position: f64,
    pub mass: f64,
}

/// A quadrature node of the continuous part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub position: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NamedFamily {
    Semicircle { center: f64, radius: f64 },
    Arcsine { a: f64, b: f64 },
    UniformInterval { a: f64, b: f64 },
    HaarCircle,
    Point(f64),
}

impl NamedFamily {
    fn validate(&self, domain: Domain) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match *self {
            NamedFamily::Semicircle { center, radius } => {
                if !finite(&[center, radius]) || radius <= 0.0 {
                    return Err(Error::BadParameters(format!(
                        "semicircle needs a finite center and radius > 0, got ({center}, {radius})"
                    )));
                }
                Self::check_interval(domain, center - radius)
            }
            NamedFamily::Arcsine { a, b } | NamedFamily::UniformInterval { a, b } => {
                if !finite(&[a, b]) || a >= b {
                    return Err(Error::BadParameters(format!("need a < b, got ({a}, {b})")));
                }
                Self::check_interval(domain, a)
            }
            NamedFamily::HaarCircle => {
                if domain != Domain::Circle {
                    return Err(Error::BadParameters("haar_circle lives on the circle".into()));
                }
                Ok(())
            }
            NamedFamily::Point(p) => {
                if !p.is_finite() {
                    return Err(Error::BadParameters(format!("point position {p}")));
                }
                Ok(())
            }
        }
    }

    fn check_interval(domain: Domain, lower: f64) -> Result<()> {
        match domain {
            Domain::Real => Ok(()),
            Domain::Halfline if lower >= 0.0 => Ok(()),
            Domain::Halfline => Err(Error::BadParameters(format!(
                "support reaches {lower} < 0 on the half-line"
            ))),
            Domain::Circle => Err(Error::BadParameters(
                "interval families are not defined on the circle".into(),
            )),
        }
    }

    /// Convex hull of the support (angles `[0, 2pi]` for Haar).
    pub fn support(&self) -> (f64, f64) {
        match *self {
            NamedFamily::Semicircle { center, radius } => (center - radius, center + radius),
            NamedFamily::Arcsine { a, b } | NamedFamily::UniformInterval { a, b } => (a, b),
            NamedFamily::HaarCircle => (0.0, TAU),
            NamedFamily::Point(p) => (p, p),
        }
    }

    /// Normalized density. Haar is reported with respect to d(theta).
    pub fn density(&self, x: f64) -> f64 {
        match *self {
            NamedFamily::Semicircle { center, radius } => {
                let d = radius * radius - (x - center).powi(2);
                if d <= 0.0 {
                    0.0
                } else {
                    2.0 / (PI * radius * radius) * d.sqrt()
                }
            }
            NamedFamily::Arcsine { a, b } => {
                if x <= a || x >= b {
                    0.0
                } else {
                    1.0 / (PI * ((x - a) * (b - x)).sqrt())
                }
            }
            NamedFamily::UniformInterval { a, b } => {
                if x < a || x > b {
                    0.0
                } else {
                    1.0 / (b - a)
                }
            }
            NamedFamily::HaarCircle => 1.0 / TAU,
            NamedFamily::Point(_) => 0.0,
        }
    }

    /// Cauchy transform of the normalized family, analytic off the support.
    pub fn cauchy(&self, z: C64) -> C64 {
        match *self {
            NamedFamily::Semicircle { center, radius } => {
                let zeta = z - center;
                let root = (zeta - radius).sqrt() * (zeta + radius).sqrt();
                // the subtraction cancels for large |zeta|; use the rationalized form there
                if zeta.norm() > 2.0 * radius {
                    2.0 / (zeta + root)
                } else {
                    (zeta - root) * (2.0 / (radius * radius))
                }
            }
            NamedFamily::Arcsine { a, b } => 1.0 / ((z - a).sqrt() * (z - b).sqrt()),
            NamedFamily::UniformInterval { a, b } => ((z - a) / (z - b)).ln() / (b - a),
            NamedFamily::HaarCircle => C64::new(f64::NAN, f64::NAN),
            NamedFamily::Point(p) => 1.0 / (z - p),
        }
    }

    fn nodes(&self, n: usize) -> Vec<Node> {
        let affine = |rule: Vec<(f64, f64)>, lo: f64, hi: f64| -> Vec<Node> {
            let mid = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            rule.into_iter()
                .map(|(x, w)| Node { position: mid + half * x, weight: w })
                .collect()
        };
        match *self {
            NamedFamily::Semicircle { center, radius } => {
                affine(quadrature::chebyshev_second(n), center - radius, center + radius)
            }
            NamedFamily::Arcsine { a, b } => affine(quadrature::chebyshev_first(n), a, b),
            NamedFamily::UniformInterval { a, b } => affine(quadrature::gauss_legendre(n), a, b),
            NamedFamily::HaarCircle => quadrature::equispaced_circle(n)
                .into_iter()
                .map(|(x, w)| Node { position: x, weight: w })
                .collect(),
            NamedFamily::Point(p) => vec![Node { position: p, weight: 1.0 }],
        }
    }

    fn pushforward(&self, scale: f64, shift: f64) -> NamedFamily {
        let map = |x: f64| scale * x + shift;
        match *self {
            NamedFamily::Semicircle { center, radius } => NamedFamily::Semicircle {
                center: map(center),
                radius: radius * scale.abs(),
            },
            NamedFamily::Arcsine { a, b } => {
                let (lo, hi) = order(map(a), map(b));
                NamedFamily::Arcsine { a: lo, b: hi }
            }
            NamedFamily::UniformInterval { a, b } => {
                let (lo, hi) = order(map(a), map(b));
                NamedFamily::UniformInterval { a: lo, b: hi }
            }
            NamedFamily::HaarCircle => NamedFamily::HaarCircle,
            NamedFamily::Point(p) => NamedFamily::Point(map(p)),
        }
    }
}

fn order(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Continuous part of a measure.
#[derive(Debug, Clone, PartialEq)]
pub enum Continuous {
    None,
    /// `weight` times the normalized family, discretized by `nodes`.
    Family { family: NamedFamily, weight: f64, nodes: Vec<Node> },
    Grid(Vec<Node>),
}

/// An immutable probability measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    domain: Domain,
    atoms: Vec<Atom>,
    continuous: Continuous,
}

/// Wraps an angle into `[0, 2pi)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

fn check_position(domain: Domain, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::InvalidSupport(format!("non-finite position {x}")));
    }
    match domain {
        Domain::Real => Ok(x),
        Domain::Halfline if x >= 0.0 => Ok(x),
        Domain::Halfline => Err(Error::InvalidSupport(format!(
            "position {x} < 0 on the half-line"
        ))),
        Domain::Circle => Ok(wrap_angle(x)),
    }
}

fn close(domain: Domain, a: f64, b: f64) -> bool {
    let d = (a - b).abs();
    match domain {
        Domain::Circle => d <= DUPLICATE_TOL || (TAU - d) <= DUPLICATE_TOL,
        _ => d <= DUPLICATE_TOL,
    }
}

impl Measure {
    /// Builds a purely atomic measure; see [`make_atomic`].
    pub fn atomic(pairs: &[(f64, f64)], domain: Domain) -> Result<Measure> {
        Measure::from_parts(domain, pairs, Continuous::None)
    }

    /// Point mass at `p` (an angle on the circle).
    pub fn point_mass(p: f64, domain: Domain) -> Result<Measure> {
        Measure::atomic(&[(p, 1.0)], domain)
    }

    /// Named family with the default node count.
    pub fn named(family: NamedFamily, domain: Domain) -> Result<Measure> {
        Measure::named_with_nodes(family, domain, DEFAULT_NODES)
    }

    pub fn named_with_nodes(family: NamedFamily, domain: Domain, nodes: usize) -> Result<Measure> {
        Measure::with_family(domain, &[], family, nodes)
    }

    /// Atoms plus a named family carrying the remaining mass.
    pub fn with_family(
        domain: Domain,
        atoms: &[(f64, f64)],
        family: NamedFamily,
        nodes: usize,
    ) -> Result<Measure> {
        family.validate(domain)?;
        if let NamedFamily::Point(p) = family {
            let rest = 1.0 - atoms.iter().map(|a| a.1).sum::<f64>();
            let mut all = atoms.to_vec();
            all.push((p, rest));
            return Measure::atomic(&all, domain);
        }
        if nodes < 2 {
            return Err(Error::BadParameters(format!("need at least 2 nodes, got {nodes}")));
        }
        let atomic: f64 = atoms.iter().map(|a| a.1).sum();
        let weight = 1.0 - atomic;
        if weight <= MASS_TOL {
            return Err(Error::NonUnitMass(atomic + 1.0));
        }
        let nodes = family
            .nodes(nodes)
            .into_iter()
            .map(|n| Node { position: n.position, weight: n.weight * weight })
            .collect();
        Measure::from_parts(domain, atoms, Continuous::Family { family, weight, nodes })
    }

    /// Atoms plus a grid of weighted nodes.
    pub fn with_grid(domain: Domain, atoms: &[(f64, f64)], grid: &[(f64, f64)]) -> Result<Measure> {
        let nodes = grid
            .iter()
            .map(|&(position, weight)| Node { position, weight })
            .collect();
        Measure::from_parts(domain, atoms, Continuous::Grid(nodes))
    }

    fn from_parts(domain: Domain, pairs: &[(f64, f64)], continuous: Continuous) -> Result<Measure> {
        let mut atoms = Vec::with_capacity(pairs.len());
        for &(pos, mass) in pairs {
            if !mass.is_finite() || mass <= 0.0 {
                return Err(Error::InvalidSupport(format!("atom mass {mass} must be > 0")));
            }
            atoms.push(Atom { position: check_position(domain, pos)?, mass });
        }
        atoms.sort_by(|a, b| a.position.total_cmp(&b.position));
        for w in atoms.windows(2) {
            if close(domain, w[0].position, w[1].position) {
                return Err(Error::DuplicatePosition(w[1].position));
            }
        }
        if domain == Domain::Circle && atoms.len() > 1 {
            let (first, last) = (atoms[0].position, atoms[atoms.len() - 1].position);
            if close(domain, first, last) {
                return Err(Error::DuplicatePosition(last));
            }
        }

        let continuous = match continuous {
            Continuous::Grid(nodes) => {
                let mut checked = Vec::with_capacity(nodes.len());
                for n in nodes {
                    if !n.weight.is_finite() || n.weight <= 0.0 {
                        return Err(Error::InvalidSupport(format!(
                            "grid weight {} must be > 0",
                            n.weight
                        )));
                    }
                    checked.push(Node { position: check_position(domain, n.position)?, weight: n.weight });
                }
                checked.sort_by(|a, b| a.position.total_cmp(&b.position));
                if checked.is_empty() {
                    Continuous::None
                } else {
                    Continuous::Grid(checked)
                }
            }
            other => other,
        };

        let mut m = Measure { domain, atoms, continuous };
        let total = m.total_mass();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::NonUnitMass(total));
        }
        m.normalize(total);
        Ok(m)
    }

    fn normalize(&mut self, total: f64) {
        for a in &mut self.atoms {
            a.mass /= total;
        }
        match &mut self.continuous {
            Continuous::None => {}
            Continuous::Family { weight, nodes, .. } => {
                *weight /= total;
                for n in nodes {
                    n.weight /= total;
                }
            }
            Continuous::Grid(nodes) => {
                for n in nodes {
                    n.weight /= total;
                }
            }
        }
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn continuous(&self) -> &Continuous {
        &self.continuous
    }

    /// Quadrature nodes of the continuous part (empty when purely atomic).
    pub fn nodes(&self) -> &[Node] {
        match &self.continuous {
            Continuous::None => &[],
            Continuous::Family { nodes, .. } | Continuous::Grid(nodes) => nodes,
        }
    }

    pub fn family(&self) -> Option<(NamedFamily, f64)> {
        match &self.continuous {
            Continuous::Family { family, weight, .. } => Some((*family, *weight)),
            _ => None,
        }
    }

    pub fn total_mass(&self) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.mass).sum();
        let cont = match &self.continuous {
            Continuous::None => 0.0,
            Continuous::Family { weight, .. } => *weight,
            Continuous::Grid(nodes) => nodes.iter().map(|n| n.weight).sum(),
        };
        atoms + cont
    }

    /// Mass of the atom at `x` (0 if there is none).
    pub fn atom_mass_at(&self, x: f64) -> f64 {
        let x = if self.domain == Domain::Circle { wrap_angle(x) } else { x };
        self.atoms
            .iter()
            .find(|a| close(self.domain, a.position, x))
            .map_or(0.0, |a| a.mass)
    }

    /// True when the measure is a single point mass; returns its position.
    pub fn as_point_mass(&self) -> Option<f64> {
        match (&self.continuous, self.atoms.as_slice()) {
            (Continuous::None, [a]) => Some(a.position),
            _ => None,
        }
    }

    /// Density of the continuous part at `x` for named families (grids have none).
    pub fn density_at(&self, x: f64) -> f64 {
        match &self.continuous {
            Continuous::Family { family, weight, .. } => {
                let x = if self.domain == Domain::Circle { wrap_angle(x) } else { x };
                weight * family.density(x)
            }
            _ => 0.0,
        }
    }

    /// Smallest interval containing the support (angles on the circle).
    pub fn support_hull(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for a in &self.atoms {
            lo = lo.min(a.position);
            hi = hi.max(a.position);
        }
        match &self.continuous {
            Continuous::None => {}
            Continuous::Family { family, .. } => {
                let (a, b) = family.support();
                lo = lo.min(a);
                hi = hi.max(b);
            }
            Continuous::Grid(nodes) => {
                for n in nodes {
                    lo = lo.min(n.position);
                    hi = hi.max(n.position);
                }
            }
        }
        (lo, hi)
    }

    /// `int t dmu(t)` on the line, `int zeta dmu(zeta)` on the circle.
    pub fn first_moment(&self) -> C64 {
        let point = |x: f64| match self.domain {
            Domain::Circle => C64::from_polar(1.0, x),
            _ => C64::new(x, 0.0),
        };
        let mut m: C64 = self.atoms.iter().map(|a| point(a.position) * a.mass).sum();
        match &self.continuous {
            Continuous::None => {}
            Continuous::Family { family, weight, .. } => {
                m += match *family {
                    NamedFamily::Semicircle { center, .. } => C64::new(center * weight, 0.0),
                    NamedFamily::Arcsine { a, b } | NamedFamily::UniformInterval { a, b } => {
                        C64::new(0.5 * (a + b) * weight, 0.0)
                    }
                    NamedFamily::HaarCircle => C64::new(0.0, 0.0),
                    NamedFamily::Point(p) => point(p) * *weight,
                };
            }
            Continuous::Grid(nodes) => {
                m += nodes.iter().map(|n| point(n.position) * n.weight).sum::<C64>();
            }
        }
        m
    }

    /// Image under `x -> scale x + shift`; on the circle a rotation by `shift`.
    pub fn pushforward_affine(&self, scale: f64, shift: f64) -> Result<Measure> {
        if !scale.is_finite() || !shift.is_finite() || scale == 0.0 {
            return Err(Error::SupportViolation(format!(
                "affine map with scale {scale}, shift {shift}"
            )));
        }
        match self.domain {
            Domain::Halfline if scale < 0.0 || shift < 0.0 => {
                return Err(Error::SupportViolation(format!(
                    "scale {scale}, shift {shift} leave the half-line"
                )))
            }
            Domain::Circle if scale != 1.0 => {
                return Err(Error::SupportViolation(format!(
                    "only rotations act on the circle, got scale {scale}"
                )))
            }
            _ => {}
        }
        let map = |x: f64| match self.domain {
            Domain::Circle => wrap_angle(x + shift),
            _ => scale * x + shift,
        };
        let mut atoms: Vec<Atom> = self
            .atoms
            .iter()
            .map(|a| Atom { position: map(a.position), mass: a.mass })
            .collect();
        atoms.sort_by(|a, b| a.position.total_cmp(&b.position));
        let remap = |nodes: &[Node]| -> Vec<Node> {
            let mut v: Vec<Node> = nodes
                .iter()
                .map(|n| Node { position: map(n.position), weight: n.weight })
                .collect();
            v.sort_by(|a, b| a.position.total_cmp(&b.position));
            v
        };
        let continuous = match &self.continuous {
            Continuous::None => Continuous::None,
            Continuous::Family { family, weight, nodes } => Continuous::Family {
                family: family.pushforward(scale, shift),
                weight: *weight,
                nodes: remap(nodes),
            },
            Continuous::Grid(nodes) => Continuous::Grid(remap(nodes)),
        };
        Ok(Measure { domain: self.domain, atoms, continuous })
    }

    /// Same measure viewed on the real line (half-line measures only).
    pub fn as_real(&self) -> Result<Measure> {
        match self.domain {
            Domain::Circle => Err(Error::DomainMismatch("circle measure is not on the line".into())),
            _ => Ok(Measure { domain: Domain::Real, ..self.clone() }),
        }
    }
}

/// Builds an atomic measure from `(position, mass)` pairs.
pub fn make_atomic(pairs: &[(f64, f64)], domain: Domain) -> Result<Measure> {
    Measure::atomic(pairs, domain)
}

/// Builds a named family with [`DEFAULT_NODES`] quadrature nodes.
pub fn make_named(family: NamedFamily, domain: Domain) -> Result<Measure> {
    Measure::named(family, domain)
}

pub fn pushforward_affine(mu: &Measure, scale: f64, shift: f64) -> Result<Measure> {
    mu.pushforward_affine(scale, shift)
}
