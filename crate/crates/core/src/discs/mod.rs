//! Analytic discs: affine polynomial discs into `C^n`, projective discs
//! into `P^n` given by polynomial lifts, divisors, and disc families.

mod family;

pub use family::{DiscFamily, FamilySpec, GoodFamily, PolyFamily};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{poly_roots, unit_circle, ComplexPoly};

pub const SCHEMA_VERSION: u32 = 1;

/// Relative Taylor-coefficient threshold for vanishing orders.
pub const ORDER_TOL: f64 = 1e-7;
/// Default relative residual for preimages.
pub const PREIMAGE_TOL: f64 = 1e-9;
/// `|f_0|` below this times the largest lift coefficient counts as a point
/// on the hyperplane at infinity.
pub const AT_INFINITY_TOL: f64 = 1e-12;
/// Boundary clearance for "f(T) in C^n".
pub const BOUNDARY_CLEARANCE: f64 = 1e-6;

/// A point of the unit disc with a positive multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivisorPoint {
    #[serde(with = "crate::serde_ext::complex")]
    pub z: C64,
    pub mult: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Divisor {
    pub points: Vec<DivisorPoint>,
}

impl Divisor {
    pub fn new(points: Vec<DivisorPoint>) -> Result<Self> {
        for p in &points {
            if !(p.z.norm() < 1.0) || p.mult == 0 {
                return Err(Error::Invalid(format!(
                    "divisor point {} (mult {}) is not strictly inside the unit disc",
                    p.z, p.mult
                )));
            }
        }
        Ok(Self { points })
    }

    pub fn single(z: C64, mult: usize) -> Result<Self> {
        Self::new(vec![DivisorPoint { z, mult }])
    }

    pub fn total(&self) -> usize {
        self.points.iter().map(|p| p.mult).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `sum m log|z|`; `-inf` when 0 is a point.
    pub fn log_sum(&self) -> f64 {
        self.points.iter().map(|p| p.mult as f64 * p.z.norm().ln()).sum()
    }

    /// Divisor of `f o r` for `r(zeta) = e^{i theta} zeta`.
    pub fn rotated(&self, theta: f64) -> Divisor {
        let w = C64::from_polar(1.0, -theta);
        Divisor {
            points: self.points.iter().map(|p| DivisorPoint { z: p.z * w, mult: p.mult }).collect(),
        }
    }
}

/// Polynomial disc `f = (f_1, ..., f_n)` on the closed unit disc.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyDisc {
    pub coords: Vec<ComplexPoly>,
}

impl PolyDisc {
    pub fn new(coords: Vec<ComplexPoly>) -> Self {
        assert!(!coords.is_empty(), "a disc needs at least one coordinate");
        Self { coords }
    }

    pub fn constant(x: &[C64]) -> Self {
        Self::new(x.iter().map(|&c| ComplexPoly::constant(c)).collect())
    }

    /// Affine line disc `x + v zeta`.
    pub fn linear(x: &[C64], v: &[C64]) -> Self {
        Self::new(x.iter().zip(v).map(|(&a, &b)| ComplexPoly::new(vec![a, b])).collect())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn degree(&self) -> usize {
        self.coords.iter().map(|p| p.degree()).max().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.coords.iter().all(|p| p.is_constant())
    }

    pub fn eval(&self, zeta: C64) -> Vec<C64> {
        self.coords.iter().map(|p| p.eval(zeta)).collect()
    }

    pub fn eval_into(&self, zeta: C64, out: &mut [C64]) {
        for (o, p) in out.iter_mut().zip(&self.coords) {
            *o = p.eval(zeta);
        }
    }

    pub fn center(&self) -> Vec<C64> {
        self.coords.iter().map(|p| p.coeff(0)).collect()
    }

    /// `f o r` with `r(zeta) = e^{i theta} zeta`.
    pub fn rotated(&self, theta: f64) -> Self {
        let w = C64::from_polar(1.0, theta);
        Self::new(self.coords.iter().map(|p| p.rescale_arg(w)).collect())
    }

    /// `zeta -> f(s zeta)`.
    pub fn rescaled(&self, s: C64) -> Self {
        Self::new(self.coords.iter().map(|p| p.rescale_arg(s)).collect())
    }

    /// Order of vanishing of `f - f(z0)` at `z0`: the minimum over the
    /// nonconstant coordinates.
    pub fn multiplicity(&self, z0: C64) -> Result<usize> {
        self.coords
            .iter()
            .filter(|p| !p.is_constant())
            .filter_map(|p| p.order_at(z0, ORDER_TOL))
            .min()
            .ok_or(Error::ConstantDisc)
    }

    /// All `z` in the open unit disc with `f(z) = y`, with multiplicities.
    ///
    /// Candidates are the roots of the coordinate difference of least
    /// positive degree; a candidate is kept when every coordinate residual
    /// is below `tol` relative to `sum |c_k| |z|^k`.
    pub fn preimages(&self, y: &[C64], tol: f64) -> Result<Divisor> {
        if self.is_constant() {
            return Err(Error::ConstantDisc);
        }
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: y.len(),
            });
        }
        let diffs: Vec<ComplexPoly> = self
            .coords
            .iter()
            .zip(y)
            .map(|(p, &yi)| p - &ComplexPoly::constant(yi))
            .collect();
        // A constant coordinate that misses y_i rules out every candidate.
        for (p, d) in self.coords.iter().zip(&diffs) {
            if p.is_constant() && d.coeff(0).norm() > tol * (1.0 + p.coeff(0).norm()) {
                return Ok(Divisor::default());
            }
        }
        let pivot = diffs
            .iter()
            .zip(&self.coords)
            .filter(|(_, p)| !p.is_constant())
            .min_by_key(|(d, _)| d.degree())
            .map(|(d, _)| d)
            .unwrap();
        let roots = poly_roots(pivot)?;
        let mut points = Vec::new();
        for r in roots.iter() {
            let mut z = r.z;
            if r.multiplicity == 1 {
                z = polish(pivot, z);
            }
            if !(z.norm() < 1.0) {
                continue;
            }
            let on_target = self
                .coords
                .iter()
                .zip(y)
                .all(|(p, &yi)| (p.eval(z) - yi).norm() <= tol * (p.eval_scale(z) + yi.norm()).max(1.0));
            if on_target {
                points.push(DivisorPoint {
                    z,
                    mult: self.multiplicity(z)?,
                });
            }
        }
        Ok(Divisor { points })
    }
}

fn polish(p: &ComplexPoly, mut z: C64) -> C64 {
    for _ in 0..3 {
        let (v, d) = p.eval_with_derivative(z);
        if v == C64::new(0.0, 0.0) || d == C64::new(0.0, 0.0) {
            break;
        }
        let step = v / d;
        if !step.is_finite() {
            break;
        }
        z -= step;
    }
    z
}

/// Point of `P^n` seen from the affine chart `f_0 != 0`.
#[derive(Clone, Debug, PartialEq)]
pub enum ProjPoint {
    Affine(Vec<C64>),
    AtInfinity,
}

/// Projective disc with lift `(f_0, f_1, ..., f_n)`; the hyperplane at
/// infinity is `f_0 = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectiveDisc {
    pub lift: Vec<ComplexPoly>,
}

impl ProjectiveDisc {
    pub fn new(lift: Vec<ComplexPoly>) -> Self {
        assert!(lift.len() >= 2, "a projective lift needs f_0 and at least one coordinate");
        Self { lift }
    }

    /// The affine disc `f` seen as `(1, f)`.
    pub fn from_affine(f: &PolyDisc) -> Self {
        let mut lift = vec![ComplexPoly::constant(C64::new(1.0, 0.0))];
        lift.extend(f.coords.iter().cloned());
        Self::new(lift)
    }

    pub fn dim(&self) -> usize {
        self.lift.len() - 1
    }

    fn scale(&self) -> f64 {
        self.lift.iter().map(|p| p.max_abs_coeff()).fold(0.0, f64::max)
    }

    pub fn eval(&self, zeta: C64) -> ProjPoint {
        let f0 = self.lift[0].eval(zeta);
        if f0.norm() < AT_INFINITY_TOL * self.scale() || f0 == C64::new(0.0, 0.0) {
            return ProjPoint::AtInfinity;
        }
        ProjPoint::Affine(self.lift[1..].iter().map(|p| p.eval(zeta) / f0).collect())
    }

    pub fn center(&self) -> ProjPoint {
        self.eval(C64::new(0.0, 0.0))
    }

    /// `min |f_0|` on `n` boundary samples over the largest lift coefficient.
    pub fn boundary_clearance(&self, n: usize) -> f64 {
        let s = self.scale();
        unit_circle(n)
            .iter()
            .map(|&z| self.lift[0].eval(z).norm())
            .fold(f64::INFINITY, f64::min)
            / s
    }

    /// Whether `f(T)` stays in `C^n` by the clearance rule.
    pub fn boundary_is_affine(&self, n: usize) -> bool {
        self.boundary_clearance(n) >= BOUNDARY_CLEARANCE
    }

    pub fn rotated(&self, theta: f64) -> Self {
        let w = C64::from_polar(1.0, theta);
        Self::new(self.lift.iter().map(|p| p.rescale_arg(w)).collect())
    }

    /// Largest simultaneous relative residual of the lift over the roots of
    /// `f_0` in the closed disc; small values flag a common root.
    pub fn common_root_residual(&self) -> Result<f64> {
        if self.lift[0].is_zero() {
            return Err(Error::DiscInHyperplane);
        }
        if self.lift[0].is_constant() {
            return Ok(f64::INFINITY);
        }
        let roots = poly_roots(&self.lift[0])?;
        let mut worst = f64::INFINITY;
        for r in roots.iter().filter(|r| r.z.norm() <= 1.0 + 1e-12) {
            let res = self.lift[1..]
                .iter()
                .map(|p| p.eval(r.z).norm() / p.eval_scale(r.z).max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max);
            worst = worst.min(res);
        }
        Ok(worst)
    }

    /// `f*H` on the open disc: roots of `f_0` with multiplicity, minus the
    /// part shared by all lift components (a removable common factor).
    pub fn infinity_divisor(&self) -> Result<Divisor> {
        let f0 = &self.lift[0];
        if f0.is_zero() {
            return Err(Error::DiscInHyperplane);
        }
        if f0.is_constant() {
            return Ok(Divisor::default());
        }
        let roots = poly_roots(f0)?;
        let mut points = Vec::new();
        for r in roots.iter().filter(|r| r.z.norm() < 1.0) {
            let common = self.lift[1..]
                .iter()
                .map(|p| if p.is_zero() { usize::MAX } else { p.zero_order_at(r.z, ORDER_TOL).unwrap_or(0) })
                .min()
                .unwrap_or(0);
            let m = r.multiplicity.saturating_sub(common);
            if m > 0 {
                points.push(DivisorPoint { z: r.z, mult: m });
            }
        }
        Ok(Divisor { points })
    }
}

/// Either kind of disc, as built by a family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Disc {
    Affine(PolyDisc),
    Projective(ProjectiveDisc),
}

impl Disc {
    pub fn dim(&self) -> usize {
        match self {
            Disc::Affine(f) => f.dim(),
            Disc::Projective(p) => p.dim(),
        }
    }

    pub fn eval(&self, zeta: C64) -> ProjPoint {
        match self {
            Disc::Affine(f) => ProjPoint::Affine(f.eval(zeta)),
            Disc::Projective(p) => p.eval(zeta),
        }
    }

    pub fn center(&self) -> ProjPoint {
        self.eval(C64::new(0.0, 0.0))
    }

    pub fn as_affine(&self) -> Option<&PolyDisc> {
        match self {
            Disc::Affine(f) => Some(f),
            Disc::Projective(_) => None,
        }
    }

    pub fn to_projective(&self) -> ProjectiveDisc {
        match self {
            Disc::Affine(f) => ProjectiveDisc::from_affine(f),
            Disc::Projective(p) => p.clone(),
        }
    }

    /// Boundary points `f(e^{it})` on `n` uniform nodes; `None` for nodes
    /// mapped to infinity.
    pub fn boundary(&self, n: usize) -> Vec<Option<Vec<C64>>> {
        unit_circle(n)
            .iter()
            .map(|&z| match self.eval(z) {
                ProjPoint::Affine(p) => Some(p),
                ProjPoint::AtInfinity => None,
            })
            .collect()
    }
}

/// Versioned JSON document for a single disc.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscDocument {
    pub schema_version: u32,
    pub disc: Disc,
}

impl DiscDocument {
    pub fn new(disc: Disc) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            disc,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let d: Self = serde_json::from_str(s)?;
        if d.schema_version != SCHEMA_VERSION {
            return Err(Error::Invalid(format!("unsupported disc schema_version {}", d.schema_version)));
        }
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn poly(cs: &[(f64, f64)]) -> ComplexPoly {
        ComplexPoly::new(cs.iter().map(|&(a, b)| c(a, b)).collect())
    }

    fn monomial(k: usize) -> ComplexPoly {
        ComplexPoly::monomial(c(1.0, 0.0), k)
    }

    #[test]
    fn constant_disc_evaluates_to_its_point() {
        let x = [c(1.0, 2.0), c(-0.5, 0.0)];
        let f = PolyDisc::constant(&x);
        assert_eq!(f.eval(c(0.3, -0.9)), x.to_vec());
    }

    #[test]
    fn line_and_parabola_at_i() {
        let f = PolyDisc::new(vec![monomial(1), monomial(2)]);
        let v = f.eval(c(0.0, 1.0));
        assert!((v[0] - c(0.0, 1.0)).norm() < 1e-15);
        assert!((v[1] - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn projective_eval_marks_infinity() {
        let pd = ProjectiveDisc::new(vec![poly(&[(-0.5, 0.0), (1.0, 0.0)]), poly(&[(1.0, 0.0)])]);
        assert_eq!(pd.eval(c(0.5, 0.0)), ProjPoint::AtInfinity);
    }

    #[test]
    fn multiplicities() {
        assert_eq!(PolyDisc::new(vec![monomial(1), monomial(2)]).multiplicity(c(0.0, 0.0)), Ok(1));
        assert_eq!(PolyDisc::new(vec![monomial(2)]).multiplicity(c(0.0, 0.0)), Ok(2));
        assert_eq!(PolyDisc::new(vec![monomial(3), monomial(2)]).multiplicity(c(0.0, 0.0)), Ok(2));
        assert_eq!(PolyDisc::constant(&[c(1.0, 0.0)]).multiplicity(c(0.0, 0.0)), Err(Error::ConstantDisc));
    }

    #[test]
    fn infinity_divisors() {
        let one = poly(&[(1.0, 0.0)]);
        let pd = ProjectiveDisc::new(vec![poly(&[(-0.5, 0.0), (1.0, 0.0)]), one.clone()]);
        let d = pd.infinity_divisor().unwrap();
        assert_eq!(d.points.len(), 1);
        assert!((d.points[0].z - c(0.5, 0.0)).norm() < 1e-14 && d.points[0].mult == 1);

        let pd = ProjectiveDisc::new(vec![one.clone(), poly(&[(0.2, 0.0), (0.0, 1.0), (3.0, 0.0)])]);
        assert!(pd.infinity_divisor().unwrap().is_empty());

        let sq = ComplexPoly::from_roots(&[(c(0.3, 0.0), 2)]);
        let pd = ProjectiveDisc::new(vec![sq, one, monomial(1)]);
        let d = pd.infinity_divisor().unwrap();
        assert_eq!(d.total(), 2);
        assert!((d.points[0].z - c(0.3, 0.0)).norm() < 1e-7);

        let zero = ProjectiveDisc::new(vec![ComplexPoly::zero(), monomial(1)]);
        assert_eq!(zero.infinity_divisor(), Err(Error::DiscInHyperplane));
    }

    #[test]
    fn common_factor_is_not_a_pole() {
        // (zeta - 0.4) (1, 2 + zeta): the affine disc is 2 + zeta
        let f0 = poly(&[(-0.4, 0.0), (1.0, 0.0)]);
        let f1 = &f0 * &poly(&[(2.0, 0.0), (1.0, 0.0)]);
        let pd = ProjectiveDisc::new(vec![f0, f1]);
        assert!(pd.infinity_divisor().unwrap().is_empty());
        assert!(pd.common_root_residual().unwrap() < 1e-12);
    }

    #[test]
    fn preimages_of_square() {
        let f = PolyDisc::new(vec![monomial(2)]);
        let d = f.preimages(&[c(0.25, 0.0)], PREIMAGE_TOL).unwrap();
        assert_eq!(d.points.len(), 2);
        for p in &d.points {
            assert!((p.z.norm() - 0.5).abs() < 1e-14 && p.mult == 1);
        }
    }

    #[test]
    fn nodal_curve_preimages_on_the_circle_are_excluded() {
        let f = PolyDisc::new(vec![monomial(3), poly(&[(0.0, 0.0), (1.0, 0.0), (1.0, 0.0)])]);
        let d = f.preimages(&[c(1.0, 0.0), c(-1.0, 0.0)], PREIMAGE_TOL).unwrap();
        assert!(d.is_empty());
    }

    #[test]
    fn rescaled_nodal_disc_hits_the_node_twice() {
        // Independent oracle: brute-force intersection of the root sets of
        // both coordinate equations.
        let f = PolyDisc::new(vec![
            poly(&[(0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (27.0, 0.0)]),
            poly(&[(0.0, 0.0), (3.0, 0.0), (9.0, 0.0)]),
        ]);
        let y = [c(1.0, 0.0), c(-1.0, 0.0)];
        let d = f.preimages(&y, PREIMAGE_TOL).unwrap();
        let r1 = poly_roots(&(&f.coords[0] - &ComplexPoly::constant(y[0]))).unwrap();
        let r2 = poly_roots(&(&f.coords[1] - &ComplexPoly::constant(y[1]))).unwrap();
        let mut oracle = Vec::new();
        for a in r1.iter() {
            for b in r2.iter() {
                if (a.z - b.z).norm() < 1e-9 {
                    oracle.push(a.z);
                }
            }
        }
        assert_eq!(oracle.len(), 2);
        assert_eq!(d.points.len(), 2);
        let w1 = C64::from_polar(1.0 / 3.0, 2.0 * PI / 3.0);
        for w in [w1, w1.conj()] {
            assert!(d.points.iter().any(|p| (p.z - w).norm() < 1e-12 && p.mult == 1));
            assert!(oracle.iter().any(|o| (o - w).norm() < 1e-9));
        }
    }

    #[test]
    fn rotation_rotates_the_divisor() {
        let f0 = ComplexPoly::from_roots(&[(c(0.3, 0.2), 1), (c(-0.5, 0.1), 2)]);
        let pd = ProjectiveDisc::new(vec![f0, monomial(1), poly(&[(1.0, 0.0), (0.0, 2.0)])]);
        let d = pd.infinity_divisor().unwrap();
        let theta = 0.7;
        let dr = pd.rotated(theta).infinity_divisor().unwrap();
        let expect = d.rotated(theta);
        assert_eq!(dr.total(), d.total());
        for p in &expect.points {
            assert!(dr.points.iter().any(|q| (q.z - p.z).norm() < 1e-6 && q.mult == p.mult));
        }
        assert!((dr.log_sum() - d.log_sum()).abs() < 1e-6);
    }

    #[test]
    fn disc_document_round_trip() {
        let f = PolyDisc::new(vec![poly(&[(1.0, 2.0), (0.5, -0.5)])]);
        let doc = DiscDocument::new(Disc::Affine(f));
        let back = DiscDocument::from_json(&doc.to_json().unwrap()).unwrap();
        assert_eq!(doc, back);
    }
}
