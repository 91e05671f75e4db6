//! Polynomial roots by Aberth–Ehrlich simultaneous iteration, followed by a
//! validated merge of clustered approximations into multiple roots.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::poly::ComplexPoly;
use crate::error::{Error, Result};

/// Leading coefficients at or below this fraction of the largest one are
/// dropped before solving.
const LEADING_TRIM: f64 = 1e-14;
/// Candidate cluster radius, relative to `max(1, |z|)`.
const CLUSTER_RADIUS: f64 = 1e-4;
/// A candidate cluster of size `m` is merged when the first `m` Taylor
/// coefficients at its mean are this small relative to the largest one.
const MERGE_TOL: f64 = 1e-6;
/// Accepted backward residual `|p(r)| / sum |c_k| |r|^k`.
const RESIDUAL_TOL: f64 = 1e-8;
const MAX_ITERS: usize = 800;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Root {
    #[serde(with = "crate::serde_ext::complex")]
    pub z: C64,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub roots: Vec<Root>,
}

impl RootSet {
    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Root> {
        self.roots.iter()
    }

    /// Roots with `|z| < radius`.
    pub fn inside(&self, radius: f64) -> RootSet {
        RootSet {
            roots: self.roots.iter().copied().filter(|r| r.z.norm() < radius).collect(),
        }
    }

    pub fn filter(&self, keep: impl Fn(&Root) -> bool) -> RootSet {
        RootSet {
            roots: self.roots.iter().copied().filter(|r| keep(r)).collect(),
        }
    }
}

/// All complex roots of `p` with multiplicities.
pub fn poly_roots(p: &ComplexPoly) -> Result<RootSet> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let p = p.trimmed(LEADING_TRIM);
    let coeffs = p.coeffs();
    let zeros_at_origin = coeffs.iter().take_while(|c| **c == C64::new(0.0, 0.0)).count();
    let q = ComplexPoly::new(coeffs[zeros_at_origin..].to_vec());

    let mut roots = Vec::new();
    if zeros_at_origin > 0 {
        roots.push(Root {
            z: C64::new(0.0, 0.0),
            multiplicity: zeros_at_origin,
        });
    }
    if q.degree() > 0 {
        let approx = aberth(&q);
        let residuals: Vec<f64> = approx.iter().map(|&z| relative_residual(&q, z)).collect();
        let worst = residuals.iter().copied().fold(0.0, f64::max);
        if !(worst <= RESIDUAL_TOL) {
            return Err(Error::RootsNotConverged {
                residuals,
                worst_residual: worst,
            });
        }
        roots.extend(merge_clusters(&q, approx));
    }
    roots.sort_by(|a, b| {
        a.z.re
            .partial_cmp(&b.z.re)
            .unwrap()
            .then(a.z.im.partial_cmp(&b.z.im).unwrap())
    });
    Ok(RootSet { roots })
}

fn relative_residual(p: &ComplexPoly, z: C64) -> f64 {
    if z.norm() > 1.0 {
        // Evaluate the reversed polynomial at 1/z to avoid overflow.
        let w = z.inv();
        let rev = reversed(p);
        rev.eval(w).norm() / rev.eval_scale(w)
    } else {
        p.eval(z).norm() / p.eval_scale(z)
    }
}

fn reversed(p: &ComplexPoly) -> ComplexPoly {
    let mut c = p.coeffs().to_vec();
    c.reverse();
    ComplexPoly::new(c)
}

/// Newton step `p(z) / p'(z)`, using the reversed polynomial outside the
/// unit circle.
fn newton_step(p: &ComplexPoly, rev: &ComplexPoly, z: C64) -> C64 {
    if z.norm() <= 1.0 {
        let (v, d) = p.eval_with_derivative(z);
        if v == C64::new(0.0, 0.0) {
            return v;
        }
        v / d
    } else {
        let w = z.inv();
        let (r, dr) = rev.eval_with_derivative(w);
        if r == C64::new(0.0, 0.0) {
            return r;
        }
        let n = p.degree() as f64;
        // p'/p = w (n - w R'(w)/R(w))
        let ratio = w * (C64::new(n, 0.0) - w * dr / r);
        ratio.inv()
    }
}

fn initial_guesses(p: &ComplexPoly) -> Vec<C64> {
    let n = p.degree();
    let c = p.coeffs();
    let a0 = c[0].norm();
    let an = c[n].norm();
    let r = (a0 / an).powf(1.0 / n as f64);
    let r = if r.is_finite() && r > 0.0 { r } else { 1.0 };
    (0..n)
        .map(|j| {
            let t = 2.0 * std::f64::consts::PI * j as f64 / n as f64 + 0.4;
            C64::from_polar(r, t)
        })
        .collect()
}

fn aberth(p: &ComplexPoly) -> Vec<C64> {
    let n = p.degree();
    let lead = p.coeff(n);
    if n == 1 {
        return vec![-p.coeff(0) / lead];
    }
    let rev = reversed(p);
    let mut z = initial_guesses(p);
    let mut done = vec![false; n];
    for _ in 0..MAX_ITERS {
        let mut all_done = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let newton = newton_step(p, &rev, z[i]);
            if !newton.is_finite() {
                // Landed on a critical point: nudge deterministically.
                let bump = C64::new(1e-7, 1e-7) * (1.0 + z[i].norm());
                z[i] += bump;
                all_done = false;
                continue;
            }
            let mut s = C64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    let d = z[i] - z[j];
                    if d != C64::new(0.0, 0.0) {
                        s += d.inv();
                    }
                }
            }
            let w = newton / (C64::new(1.0, 0.0) - newton * s);
            let w = if w.is_finite() { w } else { newton };
            z[i] -= w;
            if w.norm() <= 1e-15 * (1.0 + z[i].norm()) || p.eval(z[i]) == C64::new(0.0, 0.0) {
                done[i] = true;
            } else {
                all_done = false;
            }
        }
        if all_done {
            break;
        }
    }
    z
}

/// Groups approximations into single-linkage clusters, then accepts a
/// cluster of size `m` as one root of multiplicity `m` only when the Taylor
/// expansion at the cluster mean confirms vanishing through order `m - 1`.
fn merge_clusters(p: &ComplexPoly, approx: Vec<C64>) -> Vec<Root> {
    let n = approx.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        let mut k = i;
        while label[k] != r {
            let next = label[k];
            label[k] = r;
            k = next;
        }
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let scale = approx[i].norm().max(approx[j].norm()).max(1.0);
            if (approx[i] - approx[j]).norm() < CLUSTER_RADIUS * scale {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                if a != b {
                    label[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut label, i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    let mut out = Vec::new();
    for g in groups {
        let m = g.len();
        if m == 1 {
            out.push(Root {
                z: approx[g[0]],
                multiplicity: 1,
            });
            continue;
        }
        let mean = g.iter().map(|&i| approx[i]).sum::<C64>() / m as f64;
        let b = p.taylor_shift(mean);
        let scale = b.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let vanishes = b.iter().take(m).all(|c| c.norm() <= MERGE_TOL * scale);
        if vanishes {
            out.push(Root {
                z: mean,
                multiplicity: m,
            });
        } else {
            out.extend(g.iter().map(|&i| Root {
                z: approx[i],
                multiplicity: 1,
            }));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn has_root(rs: &RootSet, z: C64, m: usize, tol: f64) -> bool {
        rs.iter().any(|r| (r.z - z).norm() < tol && r.multiplicity == m)
    }

    #[test]
    fn quadratic_with_two_simple_roots() {
        let rs = poly_roots(&ComplexPoly::from_real(&[-1.0, 0.0, 1.0])).unwrap();
        assert_eq!(rs.len(), 2);
        assert!(has_root(&rs, c(1.0, 0.0), 1, 1e-12));
        assert!(has_root(&rs, c(-1.0, 0.0), 1, 1e-12));
    }

    #[test]
    fn pure_power_is_a_double_root_at_zero() {
        let rs = poly_roots(&ComplexPoly::from_real(&[0.0, 0.0, 1.0])).unwrap();
        assert_eq!(rs.roots, vec![Root { z: c(0.0, 0.0), multiplicity: 2 }]);
    }

    #[test]
    fn cube_roots_of_unity() {
        let rs = poly_roots(&ComplexPoly::from_real(&[-1.0, 0.0, 0.0, 1.0])).unwrap();
        assert_eq!(rs.len(), 3);
        for j in 0..3 {
            assert!(has_root(&rs, C64::from_polar(1.0, 2.0 * PI * j as f64 / 3.0), 1, 1e-12));
        }
    }

    #[test]
    fn zero_polynomial_is_rejected() {
        assert_eq!(poly_roots(&ComplexPoly::zero()), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn off_origin_multiple_roots_are_merged() {
        let p = ComplexPoly::from_roots(&[(c(0.3, 0.0), 2), (c(-0.2, 0.5), 3), (c(1.5, -1.0), 1)]);
        let rs = poly_roots(&p).unwrap();
        assert_eq!(rs.total_multiplicity(), 6);
        assert!(has_root(&rs, c(0.3, 0.0), 2, 1e-7));
        assert!(has_root(&rs, c(-0.2, 0.5), 3, 1e-5));
        assert!(has_root(&rs, c(1.5, -1.0), 1, 1e-9));
    }

    #[test]
    fn high_degree_sparse_polynomial() {
        // z^400 - 0.5: all roots on |z| = 0.5^(1/400)
        let mut coeffs = vec![c(0.0, 0.0); 401];
        coeffs[0] = c(-0.5, 0.0);
        coeffs[400] = c(1.0, 0.0);
        let rs = poly_roots(&ComplexPoly::new(coeffs)).unwrap();
        assert_eq!(rs.len(), 400);
        let r = 0.5f64.powf(1.0 / 400.0);
        for root in rs.iter() {
            assert!((root.z.norm() - r).abs() < 1e-10);
        }
    }

    #[test]
    fn large_modulus_roots() {
        let p = ComplexPoly::from_roots(&[(c(50.0, 0.0), 1), (c(0.01, 0.0), 1), (c(0.0, -7.0), 1)]);
        let rs = poly_roots(&p).unwrap();
        assert!(has_root(&rs, c(50.0, 0.0), 1, 1e-9));
        assert!(has_root(&rs, c(0.01, 0.0), 1, 1e-12));
        assert!(has_root(&rs, c(0.0, -7.0), 1, 1e-10));
    }

    proptest! {
        #[test]
        fn round_trip_from_separated_roots(
            pts in prop::collection::vec((-1.5f64..1.5, -1.5f64..1.5), 1..=12),
        ) {
            let pts: Vec<C64> = pts.iter().map(|&(a, b)| c(a, b)).collect();
            for i in 0..pts.len() {
                for j in 0..i {
                    prop_assume!((pts[i] - pts[j]).norm() >= 1e-3);
                }
            }
            let p = ComplexPoly::from_roots(&pts.iter().map(|&z| (z, 1)).collect::<Vec<_>>());
            let rs = poly_roots(&p).unwrap();
            prop_assert_eq!(rs.total_multiplicity(), pts.len());
            for z in &pts {
                let best = rs.iter().map(|r| (r.z - z).norm()).fold(f64::INFINITY, f64::min);
                prop_assert!(best < 1e-8, "root {} missed by {}", z, best);
            }
        }

        #[test]
        fn multiplicities_sum_to_degree(
            coeffs in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 2..20),
        ) {
            let p = ComplexPoly::new(coeffs.iter().map(|&(a, b)| c(a, b)).collect());
            let p = p.trimmed(LEADING_TRIM);
            prop_assume!(!p.is_constant());
            let rs = poly_roots(&p).unwrap();
            prop_assert_eq!(rs.total_multiplicity(), p.degree());
            for r in rs.iter() {
                prop_assert!(relative_residual(&p, r.z) <= RESIDUAL_TOL);
            }
        }
    }
}
