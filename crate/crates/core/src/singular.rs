//! Explicit singular curve models (nodal and cuspidal cubic), their
//! normalizations, disc lifting, and the nodal-curve counterexample to
//! upper semicontinuity of Poisson, Riesz and Lelong envelopes.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::discs::{DiscFamily, PolyDisc, PolyFamily};
use crate::domain::DomainSpec;
use crate::envelopes::{envelope, poisson_envelope, psh_check, usc_from_shells, PshVerdict, UscReport, USC_TOL};
use crate::error::{Error, Result};
use crate::functionals::{field, Lelong, Poisson, ScalarField, WeightField};
use crate::numerics::{minimize_with_starts, poly_roots, unit_circle, ComplexPoly, OptimizerConfig};
use crate::par;

pub const NORMALIZE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Nodal,
    Cusp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularPoint {
    #[serde(with = "crate::serde_ext::complex_vec")]
    pub point: Vec<C64>,
    #[serde(with = "crate::serde_ext::complex_vec")]
    pub preimages: Vec<C64>,
}

/// Plane curve given as the image of a polynomial map `t -> (p_1(t), p_2(t))`
/// on the parameter disc `|t| < param_radius`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveModel {
    pub kind: CurveKind,
    pub map: Vec<ComplexPoly>,
    /// `f64::INFINITY` for the whole plane.
    #[serde(with = "crate::serde_ext::ext")]
    pub param_radius: f64,
    pub degree_at_infinity: usize,
    pub singular_points: Vec<SingularPoint>,
    pub locally_irreducible: bool,
}

fn omegas() -> (C64, C64) {
    (C64::from_polar(1.0, 2.0 * PI / 3.0), C64::from_polar(1.0, -2.0 * PI / 3.0))
}

impl CurveModel {
    /// `f(z) = (z^3, z^2 + z)` on `3D`; double point `p = (1, -1)`.
    pub fn nodal() -> Self {
        let (w1, w2) = omegas();
        Self {
            kind: CurveKind::Nodal,
            map: vec![ComplexPoly::from_real(&[0.0, 0.0, 0.0, 1.0]), ComplexPoly::from_real(&[0.0, 1.0, 1.0])],
            param_radius: 3.0,
            degree_at_infinity: 3,
            singular_points: vec![SingularPoint {
                point: vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)],
                preimages: vec![w1, w2],
            }],
            locally_irreducible: false,
        }
    }

    /// `n(t) = (t^2, t^3)`; cusp at the origin.
    pub fn cusp() -> Self {
        Self {
            kind: CurveKind::Cusp,
            map: vec![ComplexPoly::from_real(&[0.0, 0.0, 1.0]), ComplexPoly::from_real(&[0.0, 0.0, 0.0, 1.0])],
            param_radius: f64::INFINITY,
            degree_at_infinity: 3,
            singular_points: vec![SingularPoint {
                point: vec![C64::new(0.0, 0.0); 2],
                preimages: vec![C64::new(0.0, 0.0)],
            }],
            locally_irreducible: true,
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "nodal" => Ok(Self::nodal()),
            "cusp" => Ok(Self::cusp()),
            other => Err(Error::Invalid(format!("unknown curve model `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            CurveKind::Nodal => "nodal",
            CurveKind::Cusp => "cusp",
        }
    }

    pub fn dim(&self) -> usize {
        self.map.len()
    }

    pub fn eval(&self, t: C64) -> Vec<C64> {
        self.map.iter().map(|p| p.eval(t)).collect()
    }

    /// Push-forward `map o h` of a parameter-plane disc.
    pub fn push_forward(&self, h: &PolyDisc) -> PolyDisc {
        assert_eq!(h.dim(), 1, "parameter discs are one-dimensional");
        PolyDisc::new(self.map.iter().map(|p| p.compose(&h.coords[0])).collect())
    }

    fn in_param_domain(&self, t: C64) -> bool {
        t.norm() < self.param_radius
    }

    /// All parameters `t` with `map(t) = x`: the roots of the coordinate
    /// equation of least degree, kept when the other coordinate agrees
    /// within `tol` (relative).
    pub fn normalize_point(&self, x: &[C64], tol: f64) -> Result<Vec<C64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let eqs: Vec<ComplexPoly> = self.map.iter().zip(x).map(|(p, &xi)| p - &ComplexPoly::constant(xi)).collect();
        let (pivot, _) = eqs
            .iter()
            .enumerate()
            .min_by_key(|(_, e)| e.degree())
            .unwrap();
        let roots = poly_roots(&eqs[pivot])?;
        let scale = 1.0 + x.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut out: Vec<C64> = Vec::new();
        let mut nearest = f64::INFINITY;
        for r in roots.iter() {
            let mut t = r.z;
            if r.multiplicity == 1 {
                for _ in 0..3 {
                    let (v, d) = eqs[pivot].eval_with_derivative(t);
                    if d.norm() == 0.0 {
                        break;
                    }
                    t -= v / d;
                }
            }
            // residuals relative to each coordinate, so that the two square
            // roots near the cusp are told apart by the cubic coordinate
            let mut err: f64 = 0.0;
            let mut ok = true;
            for (p, &xi) in self.map.iter().zip(x) {
                let e = (p.eval(t) - xi).norm();
                err = err.max(e);
                ok &= e <= tol * xi.norm().max(p.eval_scale(t)) + 1e-13 * scale;
            }
            nearest = nearest.min(err);
            if ok && self.in_param_domain(t) && !out.iter().any(|s| (s - t).norm() < 1e-7) {
                out.push(t);
            }
        }
        if out.is_empty() {
            return Err(Error::OffCurve { distance: nearest });
        }
        out.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        Ok(out)
    }

    fn is_singular_value(&self, x: &[C64]) -> bool {
        self.singular_points.iter().any(|s| {
            s.point.iter().zip(x).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) < 1e-9
        })
    }

    /// The parameter disc `h` with `map o h = g`.
    ///
    /// Boundary samples are normalized one by one; where a fiber has
    /// several points the branch closest to the linear extrapolation of
    /// the previous two samples is kept. The coefficients of `h` come from
    /// a discrete Fourier transform of the samples and the result is
    /// validated against `g`.
    pub fn lift_disc(&self, g: &PolyDisc, tol: f64) -> Result<PolyDisc> {
        if g.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: g.dim(),
            });
        }
        if g.is_constant() {
            let x = g.center();
            if self.is_singular_value(&x) {
                return Err(Error::LiftUndefined);
            }
            let t = self.normalize_point(&x, tol.max(NORMALIZE_TOL))?;
            if t.len() != 1 {
                return Err(Error::LiftUndefined);
            }
            return Ok(PolyDisc::constant(&t));
        }
        let d = g
            .coords
            .iter()
            .zip(&self.map)
            .map(|(gi, p)| gi.degree().div_ceil(p.degree()))
            .max()
            .unwrap_or(0);
        let m = (8 * (d + 1)).max(32);
        let nodes = unit_circle(m);
        let mut lifted: Vec<C64> = Vec::with_capacity(m);
        for (j, &z) in nodes.iter().enumerate() {
            let x = g.eval(z);
            let cands = self.normalize_point(&x, tol.max(NORMALIZE_TOL))?;
            let t = if cands.len() == 1 {
                cands[0]
            } else {
                let guess = match j {
                    0 => None,
                    1 => Some(lifted[0]),
                    _ => Some(lifted[j - 1] * 2.0 - lifted[j - 2]),
                };
                match guess {
                    Some(gs) => *cands
                        .iter()
                        .min_by(|a, b| (*a - gs).norm().partial_cmp(&(*b - gs).norm()).unwrap())
                        .unwrap(),
                    None => return Err(Error::BranchTracking("first boundary sample lies on a singular fiber".into())),
                }
            };
            lifted.push(t);
        }
        let mut coeffs = vec![C64::new(0.0, 0.0); d + 1];
        for (k, ck) in coeffs.iter_mut().enumerate() {
            let mut s = C64::new(0.0, 0.0);
            for (&z, &t) in nodes.iter().zip(&lifted) {
                s += t * z.powu(k as u32).conj();
            }
            *ck = s / m as f64;
        }
        let h = PolyDisc::new(vec![ComplexPoly::new(coeffs)]);
        let back = self.push_forward(&h);
        let scale = g.coords.iter().map(|p| p.max_abs_coeff()).fold(1.0, f64::max);
        let resid = back
            .coords
            .iter()
            .zip(&g.coords)
            .map(|(a, b)| (a - b).max_abs_coeff())
            .fold(0.0, f64::max);
        if resid > tol.max(1e-10) * scale {
            return Err(Error::BranchTracking(format!("lift residual {resid:.3e} exceeds tolerance")));
        }
        Ok(h)
    }
}

/// Data of the nodal-curve construction: `v = (x^2 + y^2 - 9)(c0 + c1 y)`
/// and `A = a x + b y + c` on the parameter disc `3D`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleData {
    pub c0: f64,
    pub c1: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    #[serde(with = "crate::serde_ext::complex")]
    pub omega1: C64,
    #[serde(with = "crate::serde_ext::complex")]
    pub omega2: C64,
    #[serde(with = "crate::serde_ext::complex_vec")]
    pub p: Vec<C64>,
    pub v_at_omegas: [f64; 2],
    pub a_at_omegas: [f64; 2],
    pub validated: bool,
}

pub const REFERENCE_CONSTANTS: [f64; 5] = [1.0, 0.05, 0.0, 0.4, -1.3];
const CHECK_GRID: usize = 200;

impl CounterexampleData {
    pub fn v(&self, z: C64) -> f64 {
        (z.norm_sqr() - 9.0) * (self.c0 + self.c1 * z.im)
    }

    pub fn affine(&self, z: C64) -> f64 {
        self.a * z.re + self.b * z.im + self.c
    }

    /// `-(v + A)`, the integrand on the parameter disc.
    pub fn u(&self, z: C64) -> f64 {
        -(self.v(z) + self.affine(z))
    }

    /// `v_X` at the curve point over `t` (well defined at `p`).
    pub fn v_x(&self, t: C64) -> f64 {
        self.v(t) + self.affine(t)
    }

    /// Predicted gap `|A(w1) - A(w2)| = |b| sqrt 3`.
    pub fn predicted_gap(&self) -> f64 {
        (self.a_at_omegas[0] - self.a_at_omegas[1]).abs()
    }

    fn hessian_psd(&self, x: f64, y: f64) -> bool {
        let l = self.c0 + self.c1 * y;
        let vxx = 2.0 * l;
        let vyy = 2.0 * l + 4.0 * self.c1 * y;
        let vxy = 2.0 * self.c1 * x;
        let eps = 1e-12;
        vxx >= -eps && vyy >= -eps && vxx * vyy - vxy * vxy >= -eps
    }
}

fn grid_points(radius: f64) -> impl Iterator<Item = C64> {
    let n = CHECK_GRID;
    let interior = (0..n).flat_map(move |i| {
        (0..n).filter_map(move |j| {
            let z = C64::new(
                -radius + 2.0 * radius * i as f64 / (n - 1) as f64,
                -radius + 2.0 * radius * j as f64 / (n - 1) as f64,
            );
            (z.norm() <= radius).then_some(z)
        })
    });
    let rim = (0..4 * n).map(move |j| C64::from_polar(radius, 2.0 * PI * j as f64 / (4 * n) as f64));
    interior.chain(rim)
}

fn assemble(c0: f64, c1: f64, a: f64, b: f64, c: f64) -> CounterexampleData {
    let (w1, w2) = omegas();
    let mut d = CounterexampleData {
        c0,
        c1,
        a,
        b,
        c,
        omega1: w1,
        omega2: w2,
        p: vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)],
        v_at_omegas: [0.0; 2],
        a_at_omegas: [0.0; 2],
        validated: false,
    };
    d.v_at_omegas = [d.v(w1), d.v(w2)];
    d.a_at_omegas = [d.affine(w1), d.affine(w2)];
    d
}

/// Validated construction; each failed condition is named in the error.
pub fn build_counterexample(c0: f64, c1: f64, a: f64, b: f64, c: f64) -> Result<CounterexampleData> {
    let mut d = assemble(c0, c1, a, b, c);
    let [v1, v2] = d.v_at_omegas;
    if (v1 - v2).abs() <= 1e-12 {
        return Err(Error::Rejected("v(w1) = v(w2)".into()));
    }
    let s1 = v1 + d.a_at_omegas[0];
    let s2 = v2 + d.a_at_omegas[1];
    if (s1 - s2).abs() > 1e-12 * (1.0 + s1.abs()) {
        return Err(Error::Rejected("(v + A)(w1) != (v + A)(w2)".into()));
    }
    for z in grid_points(3.0) {
        if !d.hessian_psd(z.re, z.im) {
            return Err(Error::Rejected(format!("v is not convex near {z}")));
        }
        if d.v(z) > 1e-12 {
            return Err(Error::Rejected(format!("v > 0 at {z}")));
        }
        if d.v(z) + d.affine(z) > 1e-12 {
            return Err(Error::Rejected(format!("v + A > 0 at {z}")));
        }
    }
    d.validated = true;
    Ok(d)
}

/// Construction without validation, for probing symmetric or otherwise
/// rejected coefficient sets.
pub fn build_counterexample_unchecked(c0: f64, c1: f64, a: f64, b: f64, c: f64) -> CounterexampleData {
    assemble(c0, c1, a, b, c)
}

/// Settings for the counterexample computations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CounterexampleConfig {
    pub degree: usize,
    pub samples: usize,
    pub boundary_samples: usize,
    pub optimizer: OptimizerConfig,
    /// Decreasing radii of the shells around `w1`, `w2`.
    pub radii: Vec<f64>,
    pub shell_samples: usize,
    /// Regular parameter points where `usc_probe` must pass.
    #[serde(with = "crate::serde_ext::complex_vec")]
    pub regular_points: Vec<C64>,
    pub psh_discs: usize,
}

impl Default for CounterexampleConfig {
    fn default() -> Self {
        Self {
            degree: 20,
            samples: 256,
            boundary_samples: 512,
            optimizer: OptimizerConfig {
                restarts: 0,
                max_evals: 200,
                ..OptimizerConfig::default()
            },
            radii: vec![0.1, 0.05, 0.025],
            shell_samples: 6,
            regular_points: vec![C64::new(0.5, 0.0), C64::new(-0.2, -0.6)],
            psh_discs: 4,
        }
    }
}

impl CounterexampleConfig {
    pub fn family(&self) -> PolyFamily {
        PolyFamily::into_domain(DomainSpec::disc(C64::new(0.0, 0.0), 3.0), self.degree)
            .with_boundary_samples(self.boundary_samples)
    }
}

/// `EP_{-(v+A)}` at a parameter point.
pub fn ep_parameter(data: &CounterexampleData, cfg: &CounterexampleConfig, t: C64) -> Result<f64> {
    let u = field(1, |z: &[C64]| data.u(z[0]));
    Ok(poisson_envelope(u, &cfg.family(), &[t], &cfg.optimizer, cfg.samples)?.value)
}

/// `EP_{-v_X}` at a curve point: the minimum over its parameter preimages.
pub fn ep_on_curve(data: &CounterexampleData, cfg: &CounterexampleConfig, x: &[C64]) -> Result<f64> {
    let ts = CurveModel::nodal().normalize_point(x, NORMALIZE_TOL)?;
    let vals: Vec<Result<f64>> = par::map(&ts, |&t| ep_parameter(data, cfg, t));
    let mut best = f64::INFINITY;
    for v in vals {
        best = best.min(v?);
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub constants: [f64; 5],
    pub v_at_omegas: [f64; 2],
    pub a_at_omegas: [f64; 2],
    /// Envelope through each branch at `p`.
    pub branch_values: [f64; 2],
    pub ep_at_p: f64,
    /// One optimization over both branches (branch chosen by an extra
    /// parameter).
    pub ep_at_p_unrestricted: f64,
    pub limsup: f64,
    pub gap: f64,
    pub predicted_gap: f64,
    pub probe: UscReport,
    pub riesz_gap: f64,
    pub regular_usc_ok: Vec<bool>,
    pub psh_check_at_regular_points: Vec<PshVerdict>,
}

/// Envelope value at `p`, the limsup along the regular part and the gap.
pub fn counterexample_envelope_gap(data: &CounterexampleData, cfg: &CounterexampleConfig) -> Result<GapReport> {
    let fam = cfg.family();
    let u = field(1, |z: &[C64]| data.u(z[0]));
    let h = Poisson { u: &u, samples: cfg.samples };
    let branches = [data.omega1, data.omega2];
    let vals: Vec<Result<f64>> = par::map(&branches, |&w| Ok(envelope(&h, &fam, &[w], &cfg.optimizer)?.value));
    let mut it = vals.into_iter();
    let b1 = it.next().unwrap()?;
    let b2 = it.next().unwrap()?;
    let ep_at_p = b1.min(b2);

    // Both branches in one search: parameter 0 selects the center.
    let mut bounds = vec![(0.0, 1.0)];
    bounds.extend(fam.bounds(&[branches[0]]));
    let joint = |p: &[f64]| {
        let w = if p[0] < 0.5 { branches[0] } else { branches[1] };
        crate::envelopes::penalized(&h, &fam, &[w], &p[1..])
    };
    let mut starts = Vec::new();
    for (sel, w) in [(0.25, branches[0]), (0.75, branches[1])] {
        for s in fam.constant_params().into_iter().chain(fam.seeds(&[w])) {
            let mut v = vec![sel];
            v.extend(s);
            starts.push(v);
        }
    }
    let joint_min = minimize_with_starts(&joint, &cfg.optimizer.with_bounds(bounds), &starts)?;

    let shells: Vec<Vec<f64>> = cfg
        .radii
        .iter()
        .map(|&r| {
            let pts: Vec<C64> = branches
                .iter()
                .flat_map(|&w| {
                    (0..cfg.shell_samples)
                        .map(move |j| w + C64::from_polar(r, 2.0 * PI * (j as f64 + 0.5) / cfg.shell_samples as f64))
                })
                .collect();
            par::map(&pts, |&t| ep_parameter(data, cfg, t).unwrap_or(f64::INFINITY))
        })
        .collect();
    let probe = usc_from_shells(ep_at_p, &shells, USC_TOL);

    // v_X is continuous, so the Riesz envelope v_X + EP_{-v_X} jumps by the
    // same amount; evaluate it along the same shells.
    let vx_p = data.v_x(data.omega1);
    let riesz_shells: Vec<Vec<f64>> = cfg
        .radii
        .iter()
        .zip(&shells)
        .map(|(&r, vals)| {
            let mut out = Vec::new();
            for (bi, &w) in branches.iter().enumerate() {
                for j in 0..cfg.shell_samples {
                    let t = w + C64::from_polar(r, 2.0 * PI * (j as f64 + 0.5) / cfg.shell_samples as f64);
                    out.push(data.v_x(t) + vals[bi * cfg.shell_samples + j]);
                }
            }
            out
        })
        .collect();
    let riesz_probe = usc_from_shells(vx_p + ep_at_p, &riesz_shells, USC_TOL);

    let mut regular_usc_ok = Vec::new();
    let mut psh = Vec::new();
    for &t in &cfg.regular_points {
        let centre = ep_parameter(data, cfg, t)?;
        let sh: Vec<Vec<f64>> = cfg
            .radii
            .iter()
            .map(|&r| {
                let pts: Vec<C64> = (0..cfg.shell_samples)
                    .map(|j| t + C64::from_polar(r, 2.0 * PI * (j as f64 + 0.5) / cfg.shell_samples as f64))
                    .collect();
                par::map(&pts, |&s| ep_parameter(data, cfg, s).unwrap_or(f64::INFINITY))
            })
            .collect();
        regular_usc_ok.push(usc_from_shells(centre, &sh, USC_TOL).usc_ok);
        let fld = |z: &[C64]| ep_parameter(data, cfg, z[0]).unwrap_or(f64::INFINITY);
        psh.push(psh_check(&fld, &[t], cfg.psh_discs, 0.2, 16, 2e-2, 7));
    }

    Ok(GapReport {
        constants: [data.c0, data.c1, data.a, data.b, data.c],
        v_at_omegas: data.v_at_omegas,
        a_at_omegas: data.a_at_omegas,
        branch_values: [b1, b2],
        ep_at_p,
        ep_at_p_unrestricted: joint_min.value,
        limsup: probe.limsup,
        gap: probe.gap,
        predicted_gap: data.predicted_gap(),
        riesz_gap: riesz_probe.gap,
        probe,
        regular_usc_ok,
        psh_check_at_regular_points: psh,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LelongGapReport {
    pub el_omega1: f64,
    pub el_omega2: f64,
    /// Green-function values on `3D`, the reference for the two envelopes.
    pub oracle: [f64; 2],
    pub el_at_p: f64,
    pub limsup: f64,
    pub gap: f64,
}

/// Green function of the disc `|t| < 3` with pole `y`, at `w`.
pub fn green_3d(y: C64, w: C64) -> f64 {
    (3.0 * (w - y) / (C64::new(9.0, 0.0) - y.conj() * w)).norm().ln()
}

/// Lelong-envelope version of the construction: `EL_alpha` at both branch
/// points and the descended value `min` at `p`.
pub fn lelong_counterexample(alpha: &WeightField, cfg: &CounterexampleConfig) -> Result<LelongGapReport> {
    alpha.validate()?;
    let (w1, w2) = omegas();
    for s in &alpha.support {
        if s.point.len() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: s.point.len(),
            });
        }
        if (s.point[0] - w1).norm() < 1e-9 || (s.point[0] - w2).norm() < 1e-9 {
            return Err(Error::Rejected("alpha must vanish at w1 and w2".into()));
        }
        if s.point[0].norm() >= 3.0 {
            return Err(Error::Rejected("alpha must be supported in the parameter disc".into()));
        }
    }
    let oracle_at = |w: C64| -> f64 {
        alpha
            .support
            .iter()
            .map(|s| s.weight * green_3d(s.point[0], w))
            .sum()
    };
    let oracle = [oracle_at(w1), oracle_at(w2)];
    if alpha.is_empty() {
        return Ok(LelongGapReport {
            el_omega1: 0.0,
            el_omega2: 0.0,
            oracle,
            el_at_p: 0.0,
            limsup: 0.0,
            gap: 0.0,
        });
    }
    if (oracle[0] - oracle[1]).abs() < 1e-6 {
        return Err(Error::Rejected("EL_alpha(w1) = EL_alpha(w2) by symmetry".into()));
    }
    let fam = cfg.family();
    let h = Lelong {
        alpha: alpha.clone(),
        reduced: false,
    };
    let vals: Vec<Result<f64>> = par::map(&[w1, w2], |&w| Ok(envelope(&h, &fam, &[w], &cfg.optimizer)?.value));
    let mut it = vals.into_iter();
    let e1 = it.next().unwrap()?;
    let e2 = it.next().unwrap()?;
    // Near p on the regular part the descended envelope follows one
    // branch, so the limsup is the larger of the two branch values.
    Ok(LelongGapReport {
        el_omega1: e1,
        el_omega2: e2,
        oracle,
        el_at_p: e1.min(e2),
        limsup: e1.max(e2),
        gap: (e1 - e2).abs(),
    })
}

/// `-(v + A)` as a field on the parameter plane.
pub fn minus_v_plus_a(data: &CounterexampleData) -> impl ScalarField + '_ {
    field(1, move |z: &[C64]| data.u(z[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn nodal_double_point() {
        let m = CurveModel::nodal();
        let ts = m.normalize_point(&[c(1.0, 0.0), c(-1.0, 0.0)], NORMALIZE_TOL).unwrap();
        assert_eq!(ts.len(), 2);
        let (w1, w2) = omegas();
        assert!(ts.iter().any(|t| (t - w1).norm() < 1e-10));
        assert!(ts.iter().any(|t| (t - w2).norm() < 1e-10));
        let ts = m.normalize_point(&[c(0.125, 0.0), c(0.75, 0.0)], NORMALIZE_TOL).unwrap();
        assert_eq!(ts.len(), 1);
        assert!((ts[0] - 0.5).norm() < 1e-12);
    }

    #[test]
    fn cusp_origin_and_off_curve() {
        let m = CurveModel::cusp();
        let ts = m.normalize_point(&[c(0.0, 0.0), c(0.0, 0.0)], NORMALIZE_TOL).unwrap();
        assert_eq!(ts, vec![c(0.0, 0.0)]);
        match m.normalize_point(&[c(1.0, 0.0), c(0.5, 0.0)], NORMALIZE_TOL) {
            Err(Error::OffCurve { distance }) => assert!(distance > 0.1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn normalization_round_trip_and_injectivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in [CurveModel::nodal(), CurveModel::cusp()] {
            for _ in 0..500 {
                let t = C64::from_polar(rng.gen_range(0.0..2.9), rng.gen_range(0.0..2.0 * PI));
                let ts = m.normalize_point(&m.eval(t), NORMALIZE_TOL).unwrap();
                assert!(ts.iter().any(|s| (s - t).norm() < 1e-7), "{t} -> {ts:?}");
                let (w1, w2) = omegas();
                let near_node = m.kind == CurveKind::Nodal && ((t - w1).norm() < 1e-3 || (t - w2).norm() < 1e-3);
                if !near_node {
                    assert_eq!(ts.len(), 1, "{:?} not injective at {t}", m.kind);
                }
            }
        }
    }

    #[test]
    fn lift_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for m in [CurveModel::nodal(), CurveModel::cusp()] {
            for _ in 0..20 {
                let d = rng.gen_range(1..=5);
                let coeffs: Vec<C64> = (0..=d)
                    .map(|k| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * 0.5f64.powi(k as i32))
                    .collect();
                let h = PolyDisc::new(vec![ComplexPoly::new(coeffs)]);
                let g = m.push_forward(&h);
                let back = m.lift_disc(&g, 1e-8).unwrap();
                let err = (&back.coords[0] - &h.coords[0]).max_abs_coeff();
                assert!(err < 1e-8, "{err}");
            }
        }
    }

    #[test]
    fn lift_keeps_the_branch_through_the_node() {
        let m = CurveModel::nodal();
        let (w1, _) = omegas();
        // h(0.3) = w1, transversal
        let h = PolyDisc::new(vec![ComplexPoly::new(vec![w1 - 0.3 * c(1.2, 0.4), c(1.2, 0.4)])]);
        let g = m.push_forward(&h);
        let back = m.lift_disc(&g, 1e-8).unwrap();
        assert!((back.eval(c(0.3, 0.0))[0] - w1).norm() < 1e-8);
    }

    #[test]
    fn constant_lifts() {
        let m = CurveModel::nodal();
        let x = m.eval(c(0.5, 0.2));
        let l = m.lift_disc(&PolyDisc::constant(&x), 1e-8).unwrap();
        assert!((l.center()[0] - c(0.5, 0.2)).norm() < 1e-9);
        let p = [c(1.0, 0.0), c(-1.0, 0.0)];
        assert!(matches!(m.lift_disc(&PolyDisc::constant(&p), 1e-8), Err(Error::LiftUndefined)));
    }

    #[test]
    fn reference_constants_accepted() {
        let [c0, c1, a, b, cc] = REFERENCE_CONSTANTS;
        let d = build_counterexample(c0, c1, a, b, cc).unwrap();
        let s3 = 3f64.sqrt();
        assert!((d.v_at_omegas[0] - (-8.0 - 0.2 * s3)).abs() < 1e-12);
        assert!((d.v_at_omegas[1] - (-8.0 + 0.2 * s3)).abs() < 1e-12);
        assert!((d.predicted_gap() - 0.4 * s3).abs() < 1e-12);
    }

    #[test]
    fn invalid_constants_rejected() {
        let err = build_counterexample(1.0, 0.0, 0.0, 0.0, -1.3).unwrap_err();
        assert!(err.to_string().contains("v(w1) = v(w2)"), "{err}");
        let err = build_counterexample(1.0, 0.05, 0.0, 0.3, -1.3).unwrap_err();
        assert!(err.to_string().contains("(v + A)"), "{err}");
        assert!(build_counterexample(1.0, 0.05, 0.0, 0.4, 0.5).is_err());
    }

    #[test]
    fn lelong_preconditions() {
        let cfg = CounterexampleConfig::default();
        let sym = WeightField::single(vec![c(0.5, 0.0)], 1.0).unwrap();
        assert!(matches!(lelong_counterexample(&sym, &cfg), Err(Error::Rejected(_))));
        let (w1, _) = omegas();
        let at = WeightField::single(vec![w1], 1.0).unwrap();
        assert!(matches!(lelong_counterexample(&at, &cfg), Err(Error::Rejected(_))));
        let empty = lelong_counterexample(&WeightField::empty(), &cfg).unwrap();
        assert_eq!(empty.gap, 0.0);
    }

    #[test]
    fn green_3d_is_zero_on_the_rim() {
        let y = c(0.0, 0.5);
        assert!(green_3d(y, C64::from_polar(3.0, 1.1)).abs() < 1e-12);
        assert!(green_3d(y, c(0.0, 0.0)) < 0.0);
    }
}
