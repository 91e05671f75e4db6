//! Disc functionals: Poisson, Riesz, Lelong (full and reduced), K, J and
//! weighted Green sums.
//!
//! Values live in the extended reals: `-inf` absorbs finite summands and
//! compares below every real.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::discs::{Disc, Divisor, PolyDisc, ProjPoint, ProjectiveDisc, PREIMAGE_TOL};
use crate::error::{Error, Result};
use crate::numerics::{circle_mean, unit_circle};

pub const DEFAULT_SAMPLES: usize = 512;

/// Function on `C^n` with values in `[-inf, +inf)`.
pub trait ScalarField: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, z: &[C64]) -> f64;
    /// Whether the field is asserted to be upper semicontinuous.
    fn usc(&self) -> bool {
        true
    }
    /// A known lower bound of the field.
    fn lower_bound(&self) -> Option<f64> {
        None
    }
}

impl<T: ScalarField + ?Sized> ScalarField for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, z: &[C64]) -> f64 {
        (**self).eval(z)
    }
    fn usc(&self) -> bool {
        (**self).usc()
    }
    fn lower_bound(&self) -> Option<f64> {
        (**self).lower_bound()
    }
}

impl<T: ScalarField + ?Sized> ScalarField for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, z: &[C64]) -> f64 {
        (**self).eval(z)
    }
    fn usc(&self) -> bool {
        (**self).usc()
    }
    fn lower_bound(&self) -> Option<f64> {
        (**self).lower_bound()
    }
}

impl<T: ScalarField + ?Sized> ScalarField for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, z: &[C64]) -> f64 {
        (**self).eval(z)
    }
    fn usc(&self) -> bool {
        (**self).usc()
    }
    fn lower_bound(&self) -> Option<f64> {
        (**self).lower_bound()
    }
}

/// Closure-backed field.
pub struct FnField<F> {
    dim: usize,
    usc: bool,
    f: F,
}

pub fn field<F: Fn(&[C64]) -> f64 + Send + Sync>(dim: usize, f: F) -> FnField<F> {
    FnField { dim, usc: true, f }
}

impl<F> FnField<F> {
    pub fn not_usc(mut self) -> Self {
        self.usc = false;
        self
    }
}

impl<F: Fn(&[C64]) -> f64 + Send + Sync> ScalarField for FnField<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, z: &[C64]) -> f64 {
        (self.f)(z)
    }
    fn usc(&self) -> bool {
        self.usc
    }
}

/// `-u`.
pub struct Negated<U>(pub U);

impl<U: ScalarField> ScalarField for Negated<U> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn eval(&self, z: &[C64]) -> f64 {
        -self.0.eval(z)
    }
    fn usc(&self) -> bool {
        false
    }
}

fn norm(z: &[C64]) -> f64 {
    z.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt()
}

fn dist(z: &[C64], c: &[C64]) -> f64 {
    z.iter().zip(c).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
}

/// Serializable fields for scenarios.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Constant {
        dim: usize,
        value: f64,
    },
    /// `Re z_coord`.
    RealPart { dim: usize, coord: usize },
    /// `log |z - center|`.
    LogNorm {
        #[serde(with = "crate::serde_ext::complex_vec")]
        center: Vec<C64>,
    },
    /// `max(0, log |z - center|)`.
    LogPlus {
        #[serde(with = "crate::serde_ext::complex_vec")]
        center: Vec<C64>,
    },
    /// `|z|^2`.
    NormSquared { dim: usize },
    Neg { field: Box<FieldSpec> },
}

impl ScalarField for FieldSpec {
    fn dim(&self) -> usize {
        match self {
            FieldSpec::Constant { dim, .. } | FieldSpec::RealPart { dim, .. } | FieldSpec::NormSquared { dim } => *dim,
            FieldSpec::LogNorm { center } | FieldSpec::LogPlus { center } => center.len(),
            FieldSpec::Neg { field } => field.dim(),
        }
    }

    fn eval(&self, z: &[C64]) -> f64 {
        match self {
            FieldSpec::Constant { value, .. } => *value,
            FieldSpec::RealPart { coord, .. } => z[*coord].re,
            FieldSpec::LogNorm { center } => dist(z, center).ln(),
            FieldSpec::LogPlus { center } => dist(z, center).ln().max(0.0),
            FieldSpec::NormSquared { .. } => norm(z).powi(2),
            FieldSpec::Neg { field } => -field.eval(z),
        }
    }

    fn usc(&self) -> bool {
        !matches!(self, FieldSpec::Neg { .. })
    }
}

impl FieldSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            FieldSpec::RealPart { dim, coord } if coord >= dim => {
                Err(Error::Invalid(format!("coord {coord} out of range for dim {dim}")))
            }
            FieldSpec::Constant { value, .. } if !value.is_finite() => Err(Error::Invalid("constant must be finite".into())),
            FieldSpec::Neg { field } => field.validate(),
            _ if self.dim() == 0 => Err(Error::Invalid("field dimension must be positive".into())),
            _ => Ok(()),
        }
    }
}

/// One support point of a weight field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightPoint {
    #[serde(with = "crate::serde_ext::complex_vec")]
    pub point: Vec<C64>,
    pub weight: f64,
}

/// Nonnegative function with finite support.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightField {
    pub support: Vec<WeightPoint>,
}

impl WeightField {
    pub fn new(support: Vec<(Vec<C64>, f64)>) -> Result<Self> {
        let w = Self {
            support: support
                .into_iter()
                .map(|(point, weight)| WeightPoint { point, weight })
                .collect(),
        };
        w.validate()?;
        Ok(w)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(point: Vec<C64>, weight: f64) -> Result<Self> {
        Self::new(vec![(point, weight)])
    }

    pub fn validate(&self) -> Result<()> {
        for (i, p) in self.support.iter().enumerate() {
            if !(p.weight > 0.0 && p.weight.is_finite()) {
                return Err(Error::Invalid(format!("weight {} must be positive and finite", p.weight)));
            }
            if p.point.len() != self.support[0].point.len() {
                return Err(Error::DimensionMismatch {
                    expected: self.support[0].point.len(),
                    got: p.point.len(),
                });
            }
            for q in &self.support[..i] {
                if q.point == p.point {
                    return Err(Error::Invalid("weight support points must be distinct".into()));
                }
            }
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// `alpha(z)` with exact point matching.
    pub fn value_at(&self, z: &[C64]) -> f64 {
        self.support.iter().find(|p| p.point == z).map_or(0.0, |p| p.weight)
    }
}

/// Boundary values `f(e^{it})` of a disc whose boundary stays in `C^n`.
fn affine_boundary_eval(disc: &Disc) -> Result<impl Fn(C64) -> Vec<C64> + '_> {
    if let Disc::Projective(p) = disc {
        if !p.boundary_is_affine(DEFAULT_SAMPLES) {
            return Err(Error::Invalid("disc boundary meets the hyperplane at infinity".into()));
        }
    }
    let n = disc.dim();
    Ok(move |z: C64| match disc.eval(z) {
        ProjPoint::Affine(w) => w,
        ProjPoint::AtInfinity => vec![C64::new(f64::INFINITY, 0.0); n],
    })
}

fn affine_center(disc: &Disc) -> Result<Vec<C64>> {
    match disc.center() {
        ProjPoint::Affine(x) => Ok(x),
        ProjPoint::AtInfinity => Err(Error::Invalid("disc center is at infinity".into())),
    }
}

/// `P_u(f) = (1/2pi) int u(f(e^{it})) dt` on `n` nodes.
pub fn poisson<U: ScalarField + ?Sized>(u: &U, f: &Disc, n: usize) -> Result<f64> {
    if u.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            got: f.dim(),
        });
    }
    let g = affine_boundary_eval(f)?;
    Ok(circle_mean(|z| u.eval(&g(z)), n))
}

/// `R_u(f) = u(f(0)) - P_u(f)`; `-inf` when `u(f(0)) = -inf`.
pub fn riesz<U: ScalarField + ?Sized>(u: &U, f: &Disc, n: usize) -> Result<f64> {
    let c = u.eval(&affine_center(f)?);
    if c == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(c - poisson(u, f, n)?)
}

fn sum_ext(terms: impl Iterator<Item = f64>) -> f64 {
    let mut s = 0.0;
    for t in terms {
        if t == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        s += t;
    }
    s
}

/// Per support point: the preimage divisor, or `None` when `f` is constant
/// (then the second element says whether the constant hits the point).
fn support_preimages(alpha: &WeightField, f: &PolyDisc) -> Result<Vec<(f64, Option<Divisor>, bool)>> {
    let x = f.center();
    alpha
        .support
        .iter()
        .map(|p| {
            if p.point.len() != f.dim() {
                return Err(Error::DimensionMismatch {
                    expected: f.dim(),
                    got: p.point.len(),
                });
            }
            if f.is_constant() {
                let hit = dist(&x, &p.point) <= PREIMAGE_TOL * (1.0 + norm(&p.point));
                Ok((p.weight, None, hit))
            } else {
                Ok((p.weight, Some(f.preimages(&p.point, PREIMAGE_TOL)?), false))
            }
        })
        .collect()
}

/// `L_alpha(f) = sum alpha(f(z)) m_f(z) log|z|`; with `reduced` the
/// multiplicities are replaced by 1.
pub fn lelong(alpha: &WeightField, f: &PolyDisc, reduced: bool) -> Result<f64> {
    let parts = support_preimages(alpha, f)?;
    Ok(sum_ext(parts.into_iter().map(|(w, div, hit)| match div {
        None => {
            if hit {
                f64::NEG_INFINITY
            } else {
                0.0
            }
        }
        Some(d) => sum_ext(d.points.iter().map(|p| {
            let m = if reduced { 1.0 } else { p.mult as f64 };
            w * m * p.z.norm().ln()
        })),
    })))
}

/// `K_alpha(f) = inf_z alpha(f(z)) log|z|`.
pub fn k_functional(alpha: &WeightField, f: &PolyDisc) -> Result<f64> {
    let parts = support_preimages(alpha, f)?;
    let mut k: f64 = 0.0;
    for (w, div, hit) in parts {
        match div {
            None if hit => return Ok(f64::NEG_INFINITY),
            None => {}
            Some(d) => {
                for p in &d.points {
                    k = k.min(w * p.z.norm().ln());
                }
            }
        }
    }
    Ok(k)
}

/// `J(f) = -sum m log|zeta|` over the divisor of `f` at infinity.
pub fn j_functional(pd: &ProjectiveDisc) -> Result<f64> {
    let d = pd.infinity_divisor()?;
    if d.is_empty() {
        return Ok(0.0);
    }
    Ok(-d.log_sum())
}

/// `log |(zeta - a) / (1 - conj(a) zeta)|`.
pub fn green(a: C64, zeta: C64) -> f64 {
    let num = (zeta - a).norm();
    if num == 0.0 {
        return f64::NEG_INFINITY;
    }
    (num / (C64::new(1.0, 0.0) - a.conj() * zeta).norm()).ln()
}

/// `sum_j w_j m_j G_{z_j}(zeta)`; points with zero weight are skipped.
pub fn green_sum(d: &Divisor, weights: &[f64], zeta: C64) -> f64 {
    sum_ext(
        d.points
            .iter()
            .zip(weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|(p, &w)| w * p.mult as f64 * green(p.z, zeta)),
    )
}

/// Preimage divisor of `supp alpha` with the matching weights, ready for
/// [`green_sum`].
pub fn pullback_divisor(alpha: &WeightField, f: &PolyDisc) -> Result<(Divisor, Vec<f64>)> {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (w, div, _) in support_preimages(alpha, f)? {
        if let Some(d) = div {
            for p in d.points {
                points.push(p);
                weights.push(w);
            }
        }
    }
    Ok((Divisor { points }, weights))
}

/// A functional on discs, as minimized by the envelope routines.
pub trait DiscFunctional: Send + Sync {
    fn name(&self) -> String;
    fn eval(&self, disc: &Disc) -> Result<f64>;
    /// A known lower bound, used to stop the search early.
    fn lower_bound(&self) -> Option<f64> {
        None
    }
}

pub struct Poisson<U> {
    pub u: U,
    pub samples: usize,
}

impl<U: ScalarField> DiscFunctional for Poisson<U> {
    fn name(&self) -> String {
        "poisson".into()
    }
    fn eval(&self, disc: &Disc) -> Result<f64> {
        poisson(&self.u, disc, self.samples)
    }
    fn lower_bound(&self) -> Option<f64> {
        self.u.lower_bound()
    }
}

pub struct Riesz<U> {
    pub u: U,
    pub samples: usize,
}

impl<U: ScalarField> DiscFunctional for Riesz<U> {
    fn name(&self) -> String {
        "riesz".into()
    }
    fn eval(&self, disc: &Disc) -> Result<f64> {
        riesz(&self.u, disc, self.samples)
    }
}

fn need_affine(disc: &Disc) -> Result<&PolyDisc> {
    disc.as_affine()
        .ok_or_else(|| Error::Invalid("Lelong-type functionals need an affine disc".into()))
}

pub struct Lelong {
    pub alpha: WeightField,
    pub reduced: bool,
}

impl DiscFunctional for Lelong {
    fn name(&self) -> String {
        if self.reduced { "lelong-reduced" } else { "lelong" }.into()
    }
    fn eval(&self, disc: &Disc) -> Result<f64> {
        lelong(&self.alpha, need_affine(disc)?, self.reduced)
    }
}

pub struct KFunctional {
    pub alpha: WeightField,
}

impl DiscFunctional for KFunctional {
    fn name(&self) -> String {
        "k".into()
    }
    fn eval(&self, disc: &Disc) -> Result<f64> {
        k_functional(&self.alpha, need_affine(disc)?)
    }
}

pub struct JFunctional;

impl DiscFunctional for JFunctional {
    fn name(&self) -> String {
        "j".into()
    }
    fn eval(&self, disc: &Disc) -> Result<f64> {
        j_functional(&disc.to_projective())
    }
    fn lower_bound(&self) -> Option<f64> {
        Some(0.0)
    }
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

/// Serializable functional choice, addressable by CLI name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Functional {
    Poisson {
        field: FieldSpec,
        #[serde(default = "default_samples")]
        samples: usize,
    },
    Riesz {
        field: FieldSpec,
        #[serde(default = "default_samples")]
        samples: usize,
    },
    Lelong {
        weights: WeightField,
    },
    LelongReduced {
        weights: WeightField,
    },
    K {
        weights: WeightField,
    },
    J {},
}

impl Functional {
    pub fn validate(&self) -> Result<()> {
        match self {
            Functional::Poisson { field, samples } | Functional::Riesz { field, samples } => {
                if *samples < 8 {
                    return Err(Error::Invalid("samples must be at least 8".into()));
                }
                field.validate()
            }
            Functional::Lelong { weights } | Functional::LelongReduced { weights } | Functional::K { weights } => {
                weights.validate()
            }
            Functional::J {} => Ok(()),
        }
    }
}

impl DiscFunctional for Functional {
    fn name(&self) -> String {
        match self {
            Functional::Poisson { .. } => "poisson",
            Functional::Riesz { .. } => "riesz",
            Functional::Lelong { .. } => "lelong",
            Functional::LelongReduced { .. } => "lelong-reduced",
            Functional::K { .. } => "k",
            Functional::J {} => "j",
        }
        .into()
    }

    fn eval(&self, disc: &Disc) -> Result<f64> {
        match self {
            Functional::Poisson { field, samples } => poisson(field, disc, *samples),
            Functional::Riesz { field, samples } => riesz(field, disc, *samples),
            Functional::Lelong { weights } => lelong(weights, need_affine(disc)?, false),
            Functional::LelongReduced { weights } => lelong(weights, need_affine(disc)?, true),
            Functional::K { weights } => k_functional(weights, need_affine(disc)?),
            Functional::J {} => j_functional(&disc.to_projective()),
        }
    }

    fn lower_bound(&self) -> Option<f64> {
        matches!(self, Functional::J {}).then_some(0.0)
    }
}

/// Boundary samples of the disc as evaluated by `u` (plotting helper).
pub fn boundary_values<U: ScalarField + ?Sized>(u: &U, f: &Disc, n: usize) -> Result<Vec<f64>> {
    let g = affine_boundary_eval(f)?;
    Ok(unit_circle(n).iter().map(|&z| u.eval(&g(z))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::ComplexPoly;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn line(x: C64, v: C64) -> Disc {
        Disc::Affine(PolyDisc::linear(&[x], &[v]))
    }

    fn poly1(coeffs: Vec<C64>) -> PolyDisc {
        PolyDisc::new(vec![ComplexPoly::new(coeffs)])
    }

    #[test]
    fn poisson_examples() {
        let k = FieldSpec::Constant { dim: 1, value: 1.7 };
        assert_abs_diff_eq!(poisson(&k, &line(c(0.3, 0.2), c(2.0, 0.0)), 64).unwrap(), 1.7, epsilon = 1e-14);
        let re = FieldSpec::RealPart { dim: 1, coord: 0 };
        assert_abs_diff_eq!(poisson(&re, &line(c(0.7, -1.0), c(0.5, 0.5)), 512).unwrap(), 0.7, epsilon = 1e-12);
        let lg = FieldSpec::LogNorm { center: vec![c(0.0, 0.0)] };
        assert!(poisson(&lg, &line(c(-0.3, 0.0), c(1.0, 0.0)), 512).unwrap().abs() < 1e-6);
    }

    #[test]
    fn riesz_examples() {
        let re = FieldSpec::RealPart { dim: 1, coord: 0 };
        assert!(riesz(&re, &line(c(0.1, 0.0), c(0.4, 0.3)), 512).unwrap().abs() < 1e-12);
        let lg = FieldSpec::LogNorm { center: vec![c(0.0, 0.0)] };
        assert_eq!(riesz(&lg, &line(c(0.0, 0.0), c(1.0, 0.0)), 512).unwrap(), f64::NEG_INFINITY);
        let sq = FieldSpec::NormSquared { dim: 1 };
        assert_abs_diff_eq!(riesz(&sq, &line(c(0.0, 0.0), c(1.0, 0.0)), 512).unwrap(), -1.0, epsilon = 1e-12);
    }

    /// Riesz mass by integrating the Laplacian of `u o f` against
    /// `log|zeta|` on a polar grid (finite differences), independent of
    /// the representation identity.
    fn riesz_by_laplacian(u: &dyn Fn(C64) -> f64, f: &PolyDisc) -> f64 {
        let h = 1e-4;
        let g = |z: C64| u(f.eval(z)[0]);
        let (nr, nt) = (400, 256);
        let mut s = 0.0;
        for i in 0..nr {
            let r = (i as f64 + 0.5) / nr as f64;
            for j in 0..nt {
                let t = 2.0 * PI * j as f64 / nt as f64;
                let z = C64::from_polar(r, t);
                let lap = (g(z + h) + g(z - h) + g(z + c(0.0, h)) + g(z - c(0.0, h)) - 4.0 * g(z)) / (h * h);
                s += r.ln() * lap * r;
            }
        }
        s * (1.0 / nr as f64) * (2.0 * PI / nt as f64) / (2.0 * PI)
    }

    #[test]
    fn riesz_matches_laplacian_quadrature() {
        let f = poly1(vec![c(0.2, 0.1), c(0.8, 0.0), c(0.1, 0.2)]);
        let u = |w: C64| w.norm_sqr() + (w.re * 0.5).exp();
        let oracle = riesz_by_laplacian(&u, &f);
        let fu = field(1, move |z: &[C64]| u(z[0]));
        let got = riesz(&fu, &Disc::Affine(f), 2048).unwrap();
        assert!((got - oracle).abs() < 2e-3, "{got} vs {oracle}");
    }

    #[test]
    fn lelong_examples() {
        let y = c(0.4, -0.2);
        let a = WeightField::single(vec![y], 1.0).unwrap();
        let far = poly1(vec![c(5.0, 0.0), c(0.1, 0.0)]);
        assert_eq!(lelong(&a, &far, false).unwrap(), 0.0);
        // f = y + 2 (zeta - 0.5)
        let f = poly1(vec![y - 1.0, c(2.0, 0.0)]);
        assert_abs_diff_eq!(lelong(&a, &f, false).unwrap(), 0.5f64.ln(), epsilon = 1e-10);
        let a0 = WeightField::single(vec![c(0.0, 0.0)], 1.0).unwrap();
        let sq = poly1(vec![c(0.25, 0.0), c(-1.0, 0.0), c(1.0, 0.0)]);
        assert_abs_diff_eq!(lelong(&a0, &sq, false).unwrap(), 2.0 * 0.5f64.ln(), epsilon = 1e-8);
        assert_abs_diff_eq!(lelong(&a0, &sq, true).unwrap(), 0.5f64.ln(), epsilon = 1e-8);
        assert_eq!(sq.multiplicity(c(0.5, 0.0)).unwrap(), 2);
        let konst = PolyDisc::constant(&[y]);
        assert_eq!(lelong(&a, &konst, false).unwrap(), f64::NEG_INFINITY);
        assert_eq!(lelong(&a, &PolyDisc::constant(&[c(0.0, 0.0)]), false).unwrap(), 0.0);
    }

    #[test]
    fn k_examples() {
        let y = c(0.1, 0.1);
        let a = WeightField::single(vec![y], 2.0).unwrap();
        assert_eq!(k_functional(&a, &poly1(vec![c(3.0, 0.0), c(0.5, 0.0)])).unwrap(), 0.0);
        let f = poly1(vec![y - 0.5, c(1.0, 0.0)]);
        assert_abs_diff_eq!(k_functional(&a, &f).unwrap(), 2.0 * 0.5f64.ln(), epsilon = 1e-10);
        let a1 = WeightField::single(vec![y], 1.0).unwrap();
        assert_eq!(k_functional(&a1, &PolyDisc::constant(&[y])).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn j_examples() {
        let one = ComplexPoly::constant(c(1.0, 0.0));
        let p = ComplexPoly::new(vec![c(0.3, 0.0), c(2.0, 1.0), c(0.0, 4.0)]);
        assert_eq!(j_functional(&ProjectiveDisc::new(vec![one.clone(), p])).unwrap(), 0.0);
        let zeta = ComplexPoly::identity();
        assert_eq!(
            j_functional(&ProjectiveDisc::new(vec![zeta.clone(), one.clone()])).unwrap(),
            f64::INFINITY
        );
        let shifted = ComplexPoly::new(vec![c(-0.5, 0.0), c(1.0, 0.0)]);
        assert_abs_diff_eq!(
            j_functional(&ProjectiveDisc::new(vec![shifted, one])).unwrap(),
            2f64.ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn green_examples() {
        let d = Divisor::single(c(0.5, 0.0), 1).unwrap();
        assert_abs_diff_eq!(green_sum(&d, &[1.0], c(0.0, 0.0)), 0.5f64.ln(), epsilon = 1e-14);
        let d0 = Divisor::single(c(0.0, 0.0), 1).unwrap();
        let z = c(0.3, -0.4);
        assert_abs_diff_eq!(green_sum(&d0, &[1.0], z), z.norm().ln(), epsilon = 1e-14);
        assert_eq!(green_sum(&d, &[1.0], c(0.5, 0.0)), f64::NEG_INFINITY);
        assert_eq!(green_sum(&d, &[0.0], c(0.5, 0.0)), 0.0);
    }

    #[test]
    fn weight_field_validation() {
        assert!(WeightField::single(vec![c(0.0, 0.0)], 0.0).is_err());
        assert!(WeightField::new(vec![(vec![c(0.0, 0.0)], 1.0), (vec![c(0.0, 0.0)], 2.0)]).is_err());
        assert!(WeightField::new(vec![(vec![c(0.0, 0.0)], 1.0), (vec![c(0.0, 0.0), c(1.0, 0.0)], 2.0)]).is_err());
    }

    #[test]
    fn functional_json_names() {
        let f: Functional = serde_json::from_str(r#"{"name":"lelong-reduced","weights":{"support":[{"point":[[0.5,0.0]],"weight":1.0}]}}"#).unwrap();
        assert_eq!(f.name(), "lelong-reduced");
        let bad = serde_json::from_str::<Functional>(r#"{"name":"j","extra":1}"#);
        assert!(bad.is_err());
    }

    fn arb_c(r: f64) -> impl Strategy<Value = C64> {
        (-r..r, -r..r).prop_map(|(a, b)| c(a, b))
    }

    fn arb_divisor() -> impl Strategy<Value = (Divisor, Vec<f64>)> {
        prop::collection::vec((0.0..0.95f64, 0.0..6.3f64, 1usize..3, 0.1..2.0f64), 1..4).prop_map(|v| {
            let pts = v
                .iter()
                .map(|&(r, t, m, _)| crate::discs::DivisorPoint { z: C64::from_polar(r, t), mult: m })
                .collect();
            (Divisor { points: pts }, v.iter().map(|x| x.3).collect())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn riesz_identity_is_exact(x in arb_c(1.0), v in arb_c(1.0), w in arb_c(0.5)) {
            let f = Disc::Affine(PolyDisc::new(vec![ComplexPoly::new(vec![x, v, w])]));
            let u = FieldSpec::LogPlus { center: vec![c(0.2, 0.0)] };
            let p = poisson(&u, &f, 256).unwrap();
            let r = riesz(&u, &f, 256).unwrap();
            prop_assert!((p + r - u.eval(&[x])).abs() <= 1e-14 * (1.0 + p.abs()));
        }

        #[test]
        fn per_disc_chain(y in arb_c(0.8), w in 0.2..3.0f64, c0 in arb_c(0.5), c1 in arb_c(1.5), c2 in arb_c(1.0), c3 in arb_c(0.5)) {
            let a = WeightField::single(vec![y], w).unwrap();
            let f = PolyDisc::new(vec![ComplexPoly::new(vec![c0, c1, c2, c3])]);
            let l = lelong(&a, &f, false).unwrap();
            let lr = lelong(&a, &f, true).unwrap();
            let k = k_functional(&a, &f).unwrap();
            prop_assert!(l <= lr + 1e-12);
            prop_assert!(lr <= k + 1e-12);
            prop_assert!(k <= 0.0);
        }

        #[test]
        fn green_sum_at_zero_is_lelong(y in arb_c(0.8), w in 0.2..3.0f64, c0 in arb_c(0.5), c1 in arb_c(1.5), c2 in arb_c(1.0)) {
            let a = WeightField::single(vec![y], w).unwrap();
            let f = PolyDisc::new(vec![ComplexPoly::new(vec![c0, c1, c2])]);
            let (d, ws) = pullback_divisor(&a, &f).unwrap();
            let g = green_sum(&d, &ws, c(0.0, 0.0));
            let l = lelong(&a, &f, false).unwrap();
            prop_assert!((g - l).abs() <= 1e-9 * (1.0 + l.abs()));
        }

        #[test]
        fn j_is_nonnegative_and_rotation_invariant(a in arb_c(0.9), b in arb_c(0.9), q in arb_c(2.0), t in 0.0..6.3f64) {
            let f0 = ComplexPoly::from_roots(&[(a, 1), (b, 1)]);
            let f1 = &f0.scale(c(0.5, 0.0)) + &ComplexPoly::new(vec![c(0.0, 0.0), q, c(1.0, 0.0)]);
            let pd = ProjectiveDisc::new(vec![f0, f1]);
            let j = j_functional(&pd).unwrap();
            prop_assert!(j >= 0.0);
            let jr = j_functional(&pd.rotated(t)).unwrap();
            prop_assert!((j - jr).abs() <= 1e-7 * (1.0 + j));
        }

        #[test]
        fn green_sum_is_nonpositive_vanishes_on_circle_and_is_subharmonic(
            (d, ws) in arb_divisor(), z in arb_c(0.7), t in 0.0..6.3f64, r in 0.01..0.2f64
        ) {
            prop_assert!(green_sum(&d, &ws, z) <= 0.0);
            prop_assert!(green_sum(&d, &ws, C64::from_polar(1.0, t)).abs() < 1e-10);
            let g0 = green_sum(&d, &ws, z);
            // Trapezoid means are unreliable on circles grazing a log pole.
            prop_assume!(d.points.iter().all(|p| ((p.z - z).norm() - r).abs() > 0.02));
            let mean = circle_mean(|w| green_sum(&d, &ws, z + r * w), 1024);
            prop_assert!(g0 <= mean + 1e-4);
        }
    }
}
