//! Winding numbers of sampled closed curves around the origin.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative safety threshold: `|h|` below this times the largest sampled
/// modulus counts as touching zero.
const CLEARANCE: f64 = 1e-10;
const MAX_DEPTH: u32 = 40;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Contour {
    Circle {
        #[serde(with = "crate::serde_ext::complex")]
        center: C64,
        radius: f64,
    },
    /// Boundary of `{r_inner < |z| < r_outer, t_start < arg z < t_end}`,
    /// traversed counterclockwise.
    AnnularSector {
        r_inner: f64,
        r_outer: f64,
        t_start: f64,
        t_end: f64,
    },
}

impl Contour {
    pub fn unit_circle() -> Self {
        Contour::Circle {
            center: C64::new(0.0, 0.0),
            radius: 1.0,
        }
    }

    /// Point at curve parameter `s in [0, 1]`.
    pub fn point(&self, s: f64) -> C64 {
        match *self {
            Contour::Circle { center, radius } => center + C64::from_polar(radius, 2.0 * PI * s),
            Contour::AnnularSector {
                r_inner,
                r_outer,
                t_start,
                t_end,
            } => {
                let u = 4.0 * s;
                let piece = (u.floor() as usize).min(3);
                let f = u - piece as f64;
                match piece {
                    0 => C64::from_polar(r_outer, t_start + f * (t_end - t_start)),
                    1 => C64::from_polar(r_outer + f * (r_inner - r_outer), t_end),
                    2 => C64::from_polar(r_inner, t_end + f * (t_start - t_end)),
                    _ => C64::from_polar(r_inner + f * (r_outer - r_inner), t_start),
                }
            }
        }
    }

    /// Whether `z` lies strictly inside the region bounded by the contour.
    pub fn contains(&self, z: C64) -> bool {
        match *self {
            Contour::Circle { center, radius } => (z - center).norm() < radius,
            Contour::AnnularSector {
                r_inner,
                r_outer,
                t_start,
                t_end,
            } => {
                let r = z.norm();
                if !(r > r_inner && r < r_outer) {
                    return false;
                }
                let width = t_end - t_start;
                if width >= 2.0 * PI {
                    return true;
                }
                let d = (z.arg() - t_start).rem_euclid(2.0 * PI);
                d > 0.0 && d < width
            }
        }
    }
}

/// Winding number of `s -> h(contour(s))` around 0, from `samples` initial
/// nodes refined by bisection wherever consecutive arguments jump by more
/// than `pi/3`.
///
/// Bisection cannot see a full turn hidden between two nodes, so `samples`
/// should be a few times the expected winding (for a polynomial, its degree).
pub fn winding_count(h: impl Fn(C64) -> C64, contour: &Contour, samples: usize) -> Result<i64> {
    let n = samples.max(16);
    let vals: Vec<C64> = (0..=n)
        .map(|j| h(contour.point(j as f64 / n as f64)))
        .collect();
    let scale = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let floor = CLEARANCE * scale;
    let check = |s: f64, v: C64| -> Result<()> {
        if !(v.norm() >= floor) || scale == 0.0 {
            let z = contour.point(s);
            return Err(Error::ContourTooClose {
                modulus: v.norm(),
                point_re: z.re,
                point_im: z.im,
            });
        }
        Ok(())
    };
    let mut total = 0.0;
    for j in 0..n {
        let (s0, s1) = (j as f64 / n as f64, (j + 1) as f64 / n as f64);
        check(s0, vals[j])?;
        total += arg_change(&h, contour, s0, s1, vals[j], vals[j + 1], 0, &check)?;
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

fn arg_change(
    h: &impl Fn(C64) -> C64,
    contour: &Contour,
    s0: f64,
    s1: f64,
    v0: C64,
    v1: C64,
    depth: u32,
    check: &impl Fn(f64, C64) -> Result<()>,
) -> Result<f64> {
    let d = (v1 / v0).arg();
    if d.abs() <= PI / 3.0 || depth >= MAX_DEPTH {
        return Ok(d);
    }
    let sm = 0.5 * (s0 + s1);
    let vm = h(contour.point(sm));
    check(sm, vm)?;
    Ok(arg_change(h, contour, s0, sm, v0, vm, depth + 1, check)?
        + arg_change(h, contour, sm, s1, vm, v1, depth + 1, check)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{poly_roots, ComplexPoly};
    use proptest::prelude::*;

    #[test]
    fn identity_winds_once() {
        assert_eq!(winding_count(|z| z, &Contour::unit_circle(), 64).unwrap(), 1);
    }

    #[test]
    fn square_winds_twice() {
        assert_eq!(winding_count(|z| z * z, &Contour::unit_circle(), 64).unwrap(), 2);
    }

    #[test]
    fn power_minus_small_constant() {
        let a = C64::new(0.3, 0.4);
        for k in [1u32, 5, 17, 64] {
            let w = winding_count(|z| z.powu(k) - a, &Contour::unit_circle(), 8 * k as usize).unwrap();
            assert_eq!(w, k as i64);
        }
    }

    #[test]
    fn zero_on_contour_is_an_error() {
        let r = winding_count(|z| z - 1.0, &Contour::unit_circle(), 64);
        assert!(matches!(r, Err(Error::ContourTooClose { .. })));
    }

    #[test]
    fn sector_counts_enclosed_roots() {
        // fourth roots of 0.5 lie at angles k pi/2 on radius 0.5^(1/4); only
        // the one on the positive axis is strictly inside
        let sector = Contour::AnnularSector {
            r_inner: 0.5,
            r_outer: 0.99,
            t_start: -PI / 2.0 + 0.1,
            t_end: PI / 2.0 - 0.1,
        };
        let w = winding_count(|z| z.powu(4) - 0.5, &sector, 256).unwrap();
        assert_eq!(w, 1);
    }

    proptest! {
        #[test]
        fn agrees_with_root_count_inside_circle(
            roots in prop::collection::vec((-1.6f64..1.6, -1.6f64..1.6), 1..8),
            radius in 0.3f64..1.4,
        ) {
            let pts: Vec<(C64, usize)> = roots.iter().map(|&(a, b)| (C64::new(a, b), 1)).collect();
            for (z, _) in &pts {
                prop_assume!((z.norm() - radius).abs() > 1e-2);
            }
            let p = ComplexPoly::from_roots(&pts);
            let inside = poly_roots(&p).unwrap().inside(radius).total_multiplicity() as i64;
            let contour = Contour::Circle { center: C64::new(0.0, 0.0), radius };
            prop_assert_eq!(winding_count(|z| p.eval(z), &contour, 256).unwrap(), inside);
        }
    }
}
