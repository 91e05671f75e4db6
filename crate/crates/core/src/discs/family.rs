use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{Disc, PolyDisc, ProjectiveDisc, BOUNDARY_CLEARANCE};
use crate::domain::{DomainSpec, Primitive};
use crate::error::{Error, Result};
use crate::numerics::{unit_circle, ComplexPoly};

/// Violation reported for a disc whose boundary reaches infinity.
pub const AT_INFINITY_VIOLATION: f64 = 1e6;
/// Pole radius parameter range; radii `>= 1` switch the pole off.
pub const POLE_RADIUS_MAX: f64 = 1.25;
/// A pole at the origin would cancel against `zeta q_i` and drop the
/// center condition `f(0) = x`.
pub const POLE_RADIUS_MIN: f64 = 1e-3;
const SEED_MARGIN: f64 = 1e-6;

/// A finitely parameterized family of discs with prescribed center.
pub trait DiscFamily: Send + Sync {
    /// Ambient dimension `n`.
    fn dim(&self) -> usize;
    fn param_dim(&self) -> usize;
    /// Parameter box for discs centered at `center`.
    fn bounds(&self, center: &[C64]) -> Vec<(f64, f64)>;
    /// The member with center `center` and parameters `params`; its value at
    /// 0 is `center`.
    fn build(&self, center: &[C64], params: &[f64]) -> Disc;
    /// Parameters of the constant disc, when the family contains constants.
    fn constant_params(&self) -> Option<Vec<f64>>;
    /// Structured starting points for discs centered at `center`.
    fn seeds(&self, _center: &[C64]) -> Vec<Vec<f64>> {
        Vec::new()
    }
    /// Zero when the disc meets the family's boundary constraint, otherwise
    /// a positive measure of the violation.
    fn violation(&self, _disc: &Disc) -> f64 {
        0.0
    }
    fn describe(&self) -> String;
}

fn boundary_violation(disc: &Disc, domain: &DomainSpec, samples: usize) -> f64 {
    let nodes = unit_circle(samples);
    let mut worst: f64 = 0.0;
    let mut buf = vec![C64::new(0.0, 0.0); disc.dim()];
    match disc {
        Disc::Affine(f) => {
            for &z in nodes.iter() {
                f.eval_into(z, &mut buf);
                let d = domain.depth(&buf);
                if !(d > 0.0) {
                    worst = worst.max(-d + 1e-12);
                }
            }
        }
        Disc::Projective(p) => {
            let scale = p.lift.iter().map(|q| q.max_abs_coeff()).fold(0.0, f64::max);
            for &z in nodes.iter() {
                let f0 = p.lift[0].eval(z);
                if f0.norm() < BOUNDARY_CLEARANCE * scale {
                    return AT_INFINITY_VIOLATION;
                }
                for (b, q) in buf.iter_mut().zip(&p.lift[1..]) {
                    *b = q.eval(z) / f0;
                }
                let d = domain.depth(&buf);
                if !(d > 0.0) {
                    worst = worst.max(-d + 1e-12);
                }
            }
        }
    }
    worst
}

fn default_coeff_bound() -> f64 {
    3.0
}

fn default_boundary_samples() -> usize {
    512
}

/// Affine polynomial discs `f_i = x_i + sum_{k=1}^{d} c_{ik} zeta^k`,
/// optionally required to map the circle into `constraint`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyFamily {
    pub dim: usize,
    pub degree: usize,
    #[serde(default = "default_coeff_bound")]
    pub coeff_bound: f64,
    #[serde(default)]
    pub constraint: Option<DomainSpec>,
    #[serde(default = "default_boundary_samples")]
    pub boundary_samples: usize,
}

impl PolyFamily {
    pub fn new(dim: usize, degree: usize, coeff_bound: f64) -> Self {
        Self {
            dim,
            degree,
            coeff_bound,
            constraint: None,
            boundary_samples: default_boundary_samples(),
        }
    }

    /// Discs whose boundary lies in `domain`.
    pub fn into_domain(domain: DomainSpec, degree: usize) -> Self {
        let bound = domain.extent().min(1e3).max(1.0);
        Self {
            dim: domain.dim,
            degree,
            coeff_bound: bound,
            constraint: Some(domain),
            boundary_samples: default_boundary_samples(),
        }
    }

    pub fn with_boundary_samples(mut self, n: usize) -> Self {
        self.boundary_samples = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.degree == 0 {
            return Err(Error::Invalid("poly family needs dim >= 1 and degree >= 1".into()));
        }
        if !(self.coeff_bound > 0.0 && self.coeff_bound.is_finite()) {
            return Err(Error::Invalid("coeff_bound must be positive".into()));
        }
        if let Some(d) = &self.constraint {
            d.validate()?;
            if d.dim != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    got: d.dim,
                });
            }
        }
        Ok(())
    }

    /// Parameters of `disc` (which must be a member centered anywhere).
    pub fn params_of(&self, disc: &PolyDisc) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_dim());
        for p in &disc.coords {
            for k in 1..=self.degree {
                let c = p.coeff(k);
                out.push(c.re);
                out.push(c.im);
            }
        }
        out
    }

    /// Parameters in `self` of the disc described by `params` in `smaller`.
    pub fn embed_from(&self, smaller: &PolyFamily, params: &[f64]) -> Result<Vec<f64>> {
        if smaller.dim != self.dim || smaller.degree > self.degree {
            return Err(Error::Invalid("cannot embed a larger poly family".into()));
        }
        let mut out = vec![0.0; self.param_dim()];
        for i in 0..self.dim {
            for k in 0..smaller.degree {
                for r in 0..2 {
                    out[2 * (i * self.degree + k) + r] = params[2 * (i * smaller.degree + k) + r];
                }
            }
        }
        Ok(out)
    }

    /// Truncated disc automorphism of a one-variable disc component
    /// containing `x`, shrunk toward `x` until the boundary fits.
    fn mobius_seed(&self, x: C64) -> Option<Vec<f64>> {
        let domain = self.constraint.as_ref()?;
        let (c, r) = domain
            .components
            .iter()
            .filter_map(|p| match p {
                Primitive::Ball { center, radius } => Some((center[0], *radius)),
                Primitive::Polydisc { center, radii } => Some((center[0], radii[0])),
                Primitive::Halfspaces { .. } => None,
            })
            .filter(|(c, r)| (x - c).norm() < *r)
            .max_by(|a, b| (a.1 - (x - a.0).norm()).partial_cmp(&(b.1 - (x - b.0).norm())).unwrap())?;
        let a = (x - c) / r;
        let mut coeffs = vec![x];
        let mut pw = C64::new(1.0, 0.0);
        for _ in 1..=self.degree {
            coeffs.push(pw * r * (1.0 - a.norm_sqr()));
            pw *= -a.conj();
        }
        let build = |s: f64| {
            let mut cs = coeffs.clone();
            for v in cs.iter_mut().skip(1) {
                *v *= s;
            }
            Disc::Affine(PolyDisc::new(vec![ComplexPoly::new(cs)]))
        };
        let fits = |s: f64| self.violation(&build(s)) == 0.0;
        let s = if fits(1.0) {
            1.0
        } else {
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..40 {
                let mid = 0.5 * (lo + hi);
                if fits(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        if s == 0.0 {
            return None;
        }
        let Disc::Affine(f) = build(s) else { unreachable!() };
        let p = self.params_of(&f);
        Some(p.into_iter().map(|v| v.clamp(-self.coeff_bound, self.coeff_bound)).collect())
    }
}

impl DiscFamily for PolyFamily {
    fn dim(&self) -> usize {
        self.dim
    }

    fn param_dim(&self) -> usize {
        2 * self.dim * self.degree
    }

    fn bounds(&self, _center: &[C64]) -> Vec<(f64, f64)> {
        vec![(-self.coeff_bound, self.coeff_bound); self.param_dim()]
    }

    fn build(&self, center: &[C64], params: &[f64]) -> Disc {
        let coords = (0..self.dim)
            .map(|i| {
                let mut cs = Vec::with_capacity(self.degree + 1);
                cs.push(center[i]);
                for k in 0..self.degree {
                    let j = 2 * (i * self.degree + k);
                    cs.push(C64::new(params[j], params[j + 1]));
                }
                ComplexPoly::new(cs)
            })
            .collect();
        Disc::Affine(PolyDisc::new(coords))
    }

    fn constant_params(&self) -> Option<Vec<f64>> {
        Some(vec![0.0; self.param_dim()])
    }

    fn seeds(&self, center: &[C64]) -> Vec<Vec<f64>> {
        if self.dim == 1 {
            if let Some(s) = self.mobius_seed(center[0]) {
                return vec![s];
            }
        }
        Vec::new()
    }

    fn violation(&self, disc: &Disc) -> f64 {
        match &self.constraint {
            None => 0.0,
            Some(d) => boundary_violation(disc, d, self.boundary_samples),
        }
    }

    fn describe(&self) -> String {
        format!(
            "poly(dim={}, degree={}, coeff_bound={}, constrained={})",
            self.dim,
            self.degree,
            self.coeff_bound,
            self.constraint.is_some()
        )
    }
}

fn default_good_coeff_bound() -> f64 {
    1.5
}

/// Projective discs with boundary in `domain`:
/// `f_0 = prod_{active j} (zeta - a_j)`, `f_i = x_i f_0 + zeta q_i(zeta)`,
/// `deg q_i < degree`. A pole `a_j = rho_j e^{i theta_j}` is active when
/// `rho_j < 1`; larger radii drop its factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoodFamily {
    pub domain: DomainSpec,
    pub degree: usize,
    pub pole_budget: usize,
    #[serde(default = "default_good_coeff_bound")]
    pub coeff_bound: f64,
    #[serde(default = "default_boundary_samples")]
    pub boundary_samples: usize,
}

impl GoodFamily {
    /// Good family with respect to `domain`.
    pub fn new(domain: DomainSpec, degree: usize, pole_budget: usize) -> Result<Self> {
        let f = Self {
            domain,
            degree,
            pole_budget,
            coeff_bound: default_good_coeff_bound(),
            boundary_samples: default_boundary_samples(),
        };
        f.validate()?;
        Ok(f)
    }

    pub fn with_boundary_samples(mut self, n: usize) -> Self {
        self.boundary_samples = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        if self.degree == 0 || self.pole_budget == 0 {
            return Err(Error::Invalid("good family needs degree >= 1 and pole_budget >= 1".into()));
        }
        if !(self.coeff_bound > 0.0 && self.coeff_bound.is_finite()) {
            return Err(Error::Invalid("coeff_bound must be positive".into()));
        }
        Ok(())
    }

    fn q_offset(&self) -> usize {
        2 * self.pole_budget
    }

    /// Active poles `a_j` of a parameter vector.
    pub fn poles(&self, params: &[f64]) -> Vec<C64> {
        (0..self.pole_budget)
            .filter(|&j| params[2 * j] < 1.0)
            .map(|j| C64::from_polar(params[2 * j].max(POLE_RADIUS_MIN), params[2 * j + 1]))
            .collect()
    }

    /// Parameters in `self` of the disc described by `params` in `smaller`.
    pub fn embed_from(&self, smaller: &GoodFamily, params: &[f64]) -> Result<Vec<f64>> {
        if smaller.domain.dim != self.domain.dim || smaller.degree > self.degree || smaller.pole_budget > self.pole_budget {
            return Err(Error::Invalid("cannot embed a larger good family".into()));
        }
        let mut out = self.constant_params().unwrap();
        out[..2 * smaller.pole_budget].copy_from_slice(&params[..2 * smaller.pole_budget]);
        for i in 0..self.domain.dim {
            for k in 0..smaller.degree {
                for r in 0..2 {
                    out[self.q_offset() + 2 * (i * self.degree + k) + r] =
                        params[smaller.q_offset() + 2 * (i * smaller.degree + k) + r];
                }
            }
        }
        Ok(out)
    }

    /// One-pole disc through `x` whose boundary is the circle
    /// `c + (x - c) e^{it} / g` for a component with reference point `c`
    /// and gauge `g` at `x`.
    fn blaschke_seed(&self, x: &[C64], comp: &Primitive) -> Option<Vec<f64>> {
        let g = comp.gauge(x) * (1.0 + SEED_MARGIN);
        if !(g > 1.0) || !g.is_finite() {
            return None;
        }
        let c = comp.reference_point();
        let rho = 1.0 / g;
        let mut p = self.constant_params().unwrap();
        p[0] = rho;
        p[1] = PI;
        for i in 0..self.domain.dim {
            let q0 = (c[i] - x[i]) * (1.0 - rho * rho);
            let j = self.q_offset() + 2 * (i * self.degree);
            p[j] = q0.re;
            p[j + 1] = q0.im;
        }
        let b = self.q_bound(x);
        if p[self.q_offset()..].iter().any(|v| v.abs() > b) {
            return None;
        }
        Some(p)
    }

    fn q_bound(&self, x: &[C64]) -> f64 {
        let spread = self
            .domain
            .components
            .iter()
            .map(|comp| {
                x.iter()
                    .zip(comp.reference_point())
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        self.coeff_bound * (1.0 + spread)
    }
}

impl DiscFamily for GoodFamily {
    fn dim(&self) -> usize {
        self.domain.dim
    }

    fn param_dim(&self) -> usize {
        2 * self.pole_budget + 2 * self.domain.dim * self.degree
    }

    fn bounds(&self, center: &[C64]) -> Vec<(f64, f64)> {
        let mut b = Vec::with_capacity(self.param_dim());
        for _ in 0..self.pole_budget {
            b.push((POLE_RADIUS_MIN, POLE_RADIUS_MAX));
            b.push((-1.5 * PI, 1.5 * PI));
        }
        let qb = self.q_bound(center);
        b.extend(std::iter::repeat((-qb, qb)).take(2 * self.domain.dim * self.degree));
        b
    }

    fn build(&self, center: &[C64], params: &[f64]) -> Disc {
        let one = C64::new(1.0, 0.0);
        let mut f0 = ComplexPoly::constant(one);
        for a in self.poles(params) {
            f0 = &f0 * &ComplexPoly::new(vec![-a, one]);
        }
        let mut lift = vec![f0.clone()];
        for (i, &x) in center.iter().enumerate() {
            let mut zq = vec![C64::new(0.0, 0.0)];
            for k in 0..self.degree {
                let j = self.q_offset() + 2 * (i * self.degree + k);
                zq.push(C64::new(params[j], params[j + 1]));
            }
            lift.push(&f0.scale(x) + &ComplexPoly::new(zq));
        }
        Disc::Projective(ProjectiveDisc::new(lift))
    }

    fn constant_params(&self) -> Option<Vec<f64>> {
        let mut p = vec![0.0; self.param_dim()];
        for j in 0..self.pole_budget {
            p[2 * j] = POLE_RADIUS_MAX;
        }
        Some(p)
    }

    fn seeds(&self, center: &[C64]) -> Vec<Vec<f64>> {
        if self.domain.contains(center) {
            return Vec::new();
        }
        self.domain
            .components
            .iter()
            .filter_map(|comp| self.blaschke_seed(center, comp))
            .collect()
    }

    fn violation(&self, disc: &Disc) -> f64 {
        boundary_violation(disc, &self.domain, self.boundary_samples)
    }

    fn describe(&self) -> String {
        format!(
            "good(dim={}, components={}, degree={}, pole_budget={})",
            self.domain.dim,
            self.domain.components.len(),
            self.degree,
            self.pole_budget
        )
    }
}

/// Serializable choice of family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    Poly(PolyFamily),
    Good(GoodFamily),
}

impl FamilySpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            FamilySpec::Poly(f) => f.validate(),
            FamilySpec::Good(f) => f.validate(),
        }
    }

    fn inner(&self) -> &dyn DiscFamily {
        match self {
            FamilySpec::Poly(f) => f,
            FamilySpec::Good(f) => f,
        }
    }
}

impl DiscFamily for FamilySpec {
    fn dim(&self) -> usize {
        self.inner().dim()
    }
    fn param_dim(&self) -> usize {
        self.inner().param_dim()
    }
    fn bounds(&self, center: &[C64]) -> Vec<(f64, f64)> {
        self.inner().bounds(center)
    }
    fn build(&self, center: &[C64], params: &[f64]) -> Disc {
        self.inner().build(center, params)
    }
    fn constant_params(&self) -> Option<Vec<f64>> {
        self.inner().constant_params()
    }
    fn seeds(&self, center: &[C64]) -> Vec<Vec<f64>> {
        self.inner().seeds(center)
    }
    fn violation(&self, disc: &Disc) -> f64 {
        self.inner().violation(disc)
    }
    fn describe(&self) -> String {
        self.inner().describe()
    }
}
