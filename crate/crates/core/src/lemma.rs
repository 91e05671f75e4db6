//! Solutions of `z^k = zeta(z)` near arcs of the unit circle and the
//! logarithmic estimate they satisfy for large `k`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quadrature::arc_integral;
use crate::numerics::roots::{poly_roots, RootSet};
use crate::numerics::winding::{winding_count, Contour};
use crate::numerics::ComplexPoly;
use crate::par;

/// Largest `k` for which roots are located; above it only counts are
/// available.
pub const MAX_LOCATED_DEGREE: usize = 512;
pub const ARC_NODES: usize = 4096;
/// Grid used to check `0 < |zeta| < 1` on a region.
const CHECK_RADII: usize = 16;
const CHECK_ANGLES: usize = 128;

/// Finite union of closed arcs `[t_start, t_end]` (radians) on the circle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcSet {
    pub arcs: Vec<(f64, f64)>,
}

impl ArcSet {
    pub fn new(arcs: Vec<(f64, f64)>) -> Result<Self> {
        let s = Self { arcs };
        s.validate()?;
        Ok(s)
    }

    pub fn single(t_start: f64, t_end: f64) -> Result<Self> {
        Self::new(vec![(t_start, t_end)])
    }

    /// Arcs that stay disjoint after widening each by `margin` on both sides.
    pub fn validate_with_margin(&self, margin: f64) -> Result<()> {
        if self.arcs.is_empty() {
            return Err(Error::Invalid("arc set is empty".into()));
        }
        for &(a, b) in &self.arcs {
            if !(a.is_finite() && b.is_finite() && b > a) {
                return Err(Error::Invalid(format!("arc [{a}, {b}] has no positive length")));
            }
            if b - a > 2.0 * PI {
                return Err(Error::Invalid(format!("arc [{a}, {b}] exceeds a full turn")));
            }
        }
        if self.arcs.len() == 1 {
            return Ok(());
        }
        let mut spans: Vec<(f64, f64)> = self
            .arcs
            .iter()
            .map(|&(a, b)| {
                let s = a.rem_euclid(2.0 * PI);
                (s, s + (b - a))
            })
            .collect();
        spans.sort_by(|x, y| x.0.total_cmp(&y.0));
        let n = spans.len();
        for i in 0..n {
            let next_start = if i + 1 < n { spans[i + 1].0 } else { spans[0].0 + 2.0 * PI };
            if next_start - spans[i].1 <= 2.0 * margin {
                return Err(Error::Invalid("arcs are not pairwise disjoint".into()));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_with_margin(0.0)
    }

    pub fn total_angle(&self) -> f64 {
        self.arcs.iter().map(|(a, b)| b - a).sum()
    }

    /// `|J|` with the full circle normalized to 1.
    pub fn normalized_length(&self) -> f64 {
        self.total_angle() / (2.0 * PI)
    }
}

/// `U`: the annular sectors `{r_min < |z| < 1}` over the arcs widened by
/// `margin`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Neighborhood {
    pub margin: f64,
    pub r_min: f64,
}

impl Default for Neighborhood {
    fn default() -> Self {
        Self {
            margin: 0.005,
            r_min: 0.5,
        }
    }
}

impl Neighborhood {
    pub fn validate(&self) -> Result<()> {
        if !(self.margin > 0.0 && self.margin < PI) {
            return Err(Error::Invalid("margin must lie in (0, pi)".into()));
        }
        if !(self.r_min > 0.0 && self.r_min < 1.0) {
            return Err(Error::Invalid("r_min must lie in (0, 1)".into()));
        }
        Ok(())
    }

    pub fn sectors(&self, arcs: &ArcSet) -> Result<Vec<Contour>> {
        self.validate()?;
        arcs.validate_with_margin(self.margin)?;
        Ok(arcs
            .arcs
            .iter()
            .map(|&(a, b)| {
                let (t_start, t_end) = if b - a + 2.0 * self.margin >= 2.0 * PI {
                    (a, a + 2.0 * PI)
                } else {
                    (a - self.margin, b + self.margin)
                };
                Contour::AnnularSector {
                    r_inner: self.r_min,
                    r_outer: 1.0,
                    t_start,
                    t_end,
                }
            })
            .collect())
    }
}

/// `z^k - zeta(z)`.
pub fn zk_polynomial(zeta: &ComplexPoly, k: usize) -> ComplexPoly {
    let n = zeta.degree().max(k) + 1;
    let mut c: Vec<C64> = (0..n).map(|j| -zeta.coeff(j)).collect();
    c[k] += C64::new(1.0, 0.0);
    ComplexPoly::new(c)
}

fn winding_samples(k: usize, zeta: &ComplexPoly) -> usize {
    8 * k.max(zeta.degree()).max(8)
}

/// Checks `0 < |zeta| < 1` on a polar grid of the closure of `region`.
pub fn check_zeta_bounds(zeta: &ComplexPoly, region: &Contour) -> Result<()> {
    let (r0, r1, t0, t1) = match *region {
        Contour::Circle { center, radius } => {
            if center.norm() > 0.0 {
                return Err(Error::Invalid("circle regions must be centered at 0".into()));
            }
            (0.0, radius, 0.0, 2.0 * PI)
        }
        Contour::AnnularSector {
            r_inner,
            r_outer,
            t_start,
            t_end,
        } => (r_inner, r_outer, t_start, t_end),
    };
    for i in 0..=CHECK_RADII {
        let r = r0 + (r1 - r0) * i as f64 / CHECK_RADII as f64;
        for j in 0..=CHECK_ANGLES {
            let t = t0 + (t1 - t0) * j as f64 / CHECK_ANGLES as f64;
            let m = zeta.eval(C64::from_polar(r, t)).norm();
            if !(m > 0.0 && m < 1.0) {
                return Err(Error::Invalid(format!("|zeta| = {m} at radius {r}, angle {t}; need 0 < |zeta| < 1")));
            }
        }
    }
    Ok(())
}

/// Roots of `z^k = zeta(z)` inside `region`, cross-checked against the
/// winding number of `z^k - zeta(z)` along the region boundary.
pub fn solve_zk(zeta: &ComplexPoly, k: usize, region: &Contour) -> Result<RootSet> {
    if k == 0 || k > MAX_LOCATED_DEGREE {
        return Err(Error::Invalid(format!("k must lie in 1..={MAX_LOCATED_DEGREE}, use count_zk above")));
    }
    check_zeta_bounds(zeta, region)?;
    let p = zk_polynomial(zeta, k);
    let inside = poly_roots(&p)?.filter(|r| region.contains(r.z));
    let winding = winding_count(|z| p.eval(z), region, winding_samples(k, zeta))?;
    if inside.total_multiplicity() as i64 != winding {
        return Err(Error::CountMismatch {
            roots: inside.total_multiplicity(),
            winding,
        });
    }
    Ok(inside)
}

/// Number of solutions in `region` from the winding number alone; usable
/// for any `k`.
pub fn count_zk(zeta: &ComplexPoly, k: usize, region: &Contour) -> Result<usize> {
    if k == 0 {
        return Err(Error::Invalid("k must be positive".into()));
    }
    check_zeta_bounds(zeta, region)?;
    let p = zk_polynomial(zeta, k);
    let w = winding_count(|z| p.eval(z), region, winding_samples(k, zeta))?;
    usize::try_from(w).map_err(|_| Error::Invalid(format!("negative winding {w}")))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Report {
    pub k: usize,
    pub epsilon: f64,
    pub arcs: ArcSet,
    pub solutions: RootSet,
    /// Winding counts per sector; their sum equals the number of solutions.
    pub winding_counts: Vec<usize>,
    /// `sum log|z|` over the solutions.
    pub lhs: f64,
    /// `int_J log|zeta(e^{it})| dt/2pi + epsilon`.
    pub rhs: f64,
    pub holds: bool,
}

/// `int_J log|zeta(e^{it})| dt/2pi`.
pub fn arc_log_integral(zeta: &ComplexPoly, arcs: &ArcSet) -> f64 {
    arcs.arcs
        .iter()
        .map(|&(a, b)| arc_integral(|w| zeta.eval(w).norm().ln(), a, b, ARC_NODES))
        .sum()
}

pub fn lemma1_check(zeta: &ComplexPoly, arcs: &ArcSet, u: &Neighborhood, k: usize, epsilon: f64) -> Result<Lemma1Report> {
    if !epsilon.is_finite() {
        return Err(Error::Invalid("epsilon must be finite".into()));
    }
    let sectors = u.sectors(arcs)?;
    let mut solutions = RootSet::default();
    let mut winding_counts = Vec::with_capacity(sectors.len());
    for s in &sectors {
        let r = solve_zk(zeta, k, s)?;
        winding_counts.push(r.total_multiplicity());
        solutions.roots.extend(r.roots);
    }
    let lhs = solutions
        .iter()
        .map(|r| r.multiplicity as f64 * r.z.norm().ln())
        .sum::<f64>();
    let rhs = arc_log_integral(zeta, arcs) + epsilon;
    Ok(Lemma1Report {
        k,
        epsilon,
        arcs: arcs.clone(),
        solutions,
        winding_counts,
        lhs,
        rhs,
        holds: lhs < rhs,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdScan {
    pub ks: Vec<usize>,
    pub holds: Vec<bool>,
    /// Smallest `k` in the range from which the estimate holds for every
    /// later `k`; `None` when the last `k` fails.
    pub threshold: Option<usize>,
}

pub fn k_threshold_scan(
    zeta: &ComplexPoly,
    arcs: &ArcSet,
    u: &Neighborhood,
    epsilon: f64,
    ks: &[usize],
) -> Result<ThresholdScan> {
    if ks.is_empty() || ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("k range must be non-empty and increasing".into()));
    }
    let reports = par::map(ks, |&k| lemma1_check(zeta, arcs, u, k, epsilon));
    let holds = reports
        .into_iter()
        .map(|r| r.map(|r| r.holds))
        .collect::<Result<Vec<_>>>()?;
    let mut threshold = None;
    for i in (0..ks.len()).rev() {
        if !holds[i] {
            break;
        }
        threshold = Some(ks[i]);
    }
    Ok(ThresholdScan {
        ks: ks.to_vec(),
        holds,
        threshold,
    })
}

/// Degree-`degree` Taylor polynomial of `b exp(c (z - z0))`.
pub fn exp_taylor(b: C64, c: C64, z0: C64, degree: usize) -> ComplexPoly {
    // b e^{-c z0} sum (c z)^n / n!
    let lead = b * (-c * z0).exp();
    let mut coeffs = Vec::with_capacity(degree + 1);
    let mut term = lead;
    for n in 0..=degree {
        coeffs.push(term);
        term = term * c / (n + 1) as f64;
    }
    ComplexPoly::new(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn quarter() -> ArcSet {
        ArcSet::single(0.01, 0.01 + PI / 2.0).unwrap()
    }

    #[test]
    fn constant_full_disc_equidistributes() {
        let k = 12;
        let a = c(0.3, 0.4);
        let roots = solve_zk(&ComplexPoly::constant(a), k, &Contour::Circle { center: c(0.0, 0.0), radius: 0.999 }).unwrap();
        assert_eq!(roots.total_multiplicity(), k);
        let radius = a.norm().powf(1.0 / k as f64);
        let theta0 = a.arg() / k as f64;
        for j in 0..k {
            let expected = C64::from_polar(radius, theta0 + 2.0 * PI * j as f64 / k as f64);
            assert!(roots.iter().any(|r| (r.z - expected).norm() < 1e-10), "missing root {j}");
        }
    }

    #[test]
    fn half_plane_sector() {
        // Fourth roots of 0.5 at arguments 0, pi/2, pi, 3pi/2: one strictly
        // inside a sector within the right half-plane.
        let s = Contour::AnnularSector { r_inner: 0.5, r_outer: 1.0, t_start: -1.4, t_end: 1.4 };
        let r = solve_zk(&ComplexPoly::constant(c(0.5, 0.0)), 4, &s).unwrap();
        assert_eq!(r.total_multiplicity(), 1);
        assert!((r.roots[0].z - c(0.5f64.powf(0.25), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn linear_zeta_in_the_disc() {
        let zeta = ComplexPoly::from_real(&[0.3, 0.1]);
        let circle = Contour::Circle { center: c(0.0, 0.0), radius: 0.99 };
        assert_eq!(solve_zk(&zeta, 8, &circle).unwrap().total_multiplicity(), 8);
        assert_eq!(count_zk(&zeta, 8, &circle).unwrap(), 8);
    }

    #[test]
    fn constant_case_at_k_100() {
        let r = lemma1_check(&ComplexPoly::constant(c(0.5, 0.0)), &quarter(), &Neighborhood::default(), 100, 0.01).unwrap();
        assert_eq!(r.solutions.total_multiplicity(), 25);
        assert!((r.lhs - 25.0 * 0.5f64.ln() / 100.0).abs() < 1e-12);
        assert!((r.rhs - (0.25 * 0.5f64.ln() + 0.01)).abs() < 1e-9);
        assert!(r.holds);
        assert!((r.lhs - -0.1733).abs() < 1e-4 && (r.rhs - -0.1633).abs() < 1e-4);
    }

    #[test]
    fn small_k_reported() {
        let r = lemma1_check(&ComplexPoly::constant(c(0.5, 0.0)), &quarter(), &Neighborhood::default(), 4, 0.01).unwrap();
        assert_eq!(r.holds, r.lhs < r.rhs);
    }

    #[test]
    fn exponential_zeta_at_k_200() {
        let zeta = exp_taylor(c(0.4, 0.0), c(0.2, 0.0), c(1.0, 0.0), 6);
        let arcs = ArcSet::single(-0.3 * PI, 0.3 * PI).unwrap();
        let r = lemma1_check(&zeta, &arcs, &Neighborhood::default(), 200, 0.02).unwrap();
        assert!(r.holds, "{} vs {}", r.lhs, r.rhs);
        assert_eq!(r.winding_counts.iter().sum::<usize>(), r.solutions.total_multiplicity());
    }

    #[test]
    fn count_only_beyond_cap() {
        let s = Neighborhood::default().sectors(&quarter()).unwrap();
        let zeta = ComplexPoly::constant(c(0.5, 0.0));
        assert!(solve_zk(&zeta, 600, &s[0]).is_err());
        // Roots at 2 pi j / 600 with 0.005 < arg < pi/2 + 0.015.
        let expected = (1..600).filter(|j| 2.0 * PI * *j as f64 / 600.0 < PI / 2.0 + 0.015).count();
        assert_eq!(count_zk(&zeta, 600, &s[0]).unwrap(), expected);
    }

    #[test]
    fn threshold_scan_constant_case() {
        let zeta = ComplexPoly::constant(c(0.5, 0.0));
        let ks: Vec<usize> = (1..=60).collect();
        let loose = k_threshold_scan(&zeta, &quarter(), &Neighborhood::default(), 0.05, &ks).unwrap();
        let t = loose.threshold.unwrap();
        assert!(t <= 40, "{t}");
        let tight = k_threshold_scan(&zeta, &quarter(), &Neighborhood::default(), 1e-4, &ks).unwrap();
        assert!(tight.threshold.is_none_or(|s| s >= t));
    }

    #[test]
    fn multi_arc_counts_add_up() {
        let arcs = ArcSet::new(vec![(0.1, 0.9), (2.0, 3.0), (4.0, 5.5)]).unwrap();
        let zeta = ComplexPoly::from_real(&[0.5, 0.1]);
        let r = lemma1_check(&zeta, &arcs, &Neighborhood::default(), 64, 0.01).unwrap();
        assert_eq!(r.winding_counts.len(), 3);
        assert_eq!(r.winding_counts.iter().sum::<usize>(), r.solutions.total_multiplicity());
    }

    #[test]
    fn invalid_inputs() {
        assert!(ArcSet::new(vec![]).is_err());
        assert!(ArcSet::single(1.0, 1.0).is_err());
        assert!(ArcSet::new(vec![(0.0, 1.0), (0.5, 2.0)]).is_err());
        let big = ComplexPoly::constant(c(1.5, 0.0));
        assert!(lemma1_check(&big, &quarter(), &Neighborhood::default(), 10, 0.01).is_err());
        assert!(lemma1_check(&ComplexPoly::zero(), &quarter(), &Neighborhood::default(), 10, 0.01).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn constant_sector_counts(k in 8usize..200, a in 0.05f64..0.95) {
            let arcs = quarter();
            let u = Neighborhood::default();
            let r = lemma1_check(&ComplexPoly::constant(c(a, 0.0)), &arcs, &u, k, 0.01).unwrap();
            let n = r.solutions.total_multiplicity() as f64;
            let width = (PI / 2.0 + 2.0 * u.margin) / (2.0 * PI);
            prop_assert!((n - k as f64 * width).abs() <= 1.0);
            let per_root = a.ln() / k as f64;
            prop_assert!((r.lhs - n * per_root).abs() < 1e-9);
            prop_assert!((r.lhs - arcs.normalized_length() * a.ln() * n / (k as f64 * arcs.normalized_length())).abs() <= 1e-9);
        }

        #[test]
        fn verdict_monotone_in_epsilon(k in 4usize..80, e1 in -0.2f64..0.2, e2 in -0.2f64..0.2) {
            let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
            let zeta = ComplexPoly::from_real(&[0.4, 0.05]);
            let a = lemma1_check(&zeta, &quarter(), &Neighborhood::default(), k, lo).unwrap();
            let b = lemma1_check(&zeta, &quarter(), &Neighborhood::default(), k, hi).unwrap();
            prop_assert!(!a.holds || b.holds);
        }
    }
}
