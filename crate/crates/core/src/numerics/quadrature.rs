//! Uniform trapezoid quadrature on the unit circle.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64 as C64;

pub const DEFAULT_NODES: usize = 512;

fn node_cache() -> &'static RwLock<HashMap<(usize, bool), Arc<Vec<C64>>>> {
    static CACHE: OnceLock<RwLock<HashMap<(usize, bool), Arc<Vec<C64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn nodes(n: usize, offset: bool) -> Arc<Vec<C64>> {
    if let Some(v) = node_cache().read().unwrap().get(&(n, offset)) {
        return v.clone();
    }
    let shift = if offset { PI / n as f64 } else { 0.0 };
    let v: Arc<Vec<C64>> = Arc::new(
        (0..n)
            .map(|j| C64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64 + shift))
            .collect(),
    );
    node_cache().write().unwrap().insert((n, offset), v.clone());
    v
}

/// The `n` nodes `e^{2 pi i j / n}`, cached per `n`.
pub fn unit_circle(n: usize) -> Arc<Vec<C64>> {
    nodes(n, false)
}

/// Nodes `e^{i (2 pi j + pi) / n}`, interleaved with [`unit_circle`]`(n)`.
pub fn unit_circle_offset(n: usize) -> Arc<Vec<C64>> {
    nodes(n, true)
}

/// Normalized circle average `(1/2pi) int g(e^{it}) dt` on `n` uniform nodes.
///
/// A few isolated `-inf` samples (at most `max(1, n/128)`) trigger one
/// re-evaluation on `2n` nodes that avoid the original ones; any `-inf`
/// left after that makes the result `-inf`.
pub fn circle_mean(g: impl Fn(C64) -> f64, n: usize) -> f64 {
    let n = n.max(8);
    let (mean, hits) = mean_on(&g, &unit_circle(n));
    if hits == 0 {
        return mean;
    }
    if hits > (n / 128).max(1) {
        return f64::NEG_INFINITY;
    }
    let (mean, hits) = mean_on(&g, &unit_circle_offset(2 * n));
    if hits == 0 {
        mean
    } else {
        f64::NEG_INFINITY
    }
}

fn mean_on(g: &impl Fn(C64) -> f64, pts: &[C64]) -> (f64, usize) {
    let mut sum = 0.0;
    let mut hits = 0;
    for &z in pts {
        let v = g(z);
        if v == f64::NEG_INFINITY {
            hits += 1;
        } else {
            sum += v;
        }
    }
    (sum / pts.len() as f64, hits)
}

/// Mean of precomputed samples with the same `-inf` rule but no refinement.
pub fn mean_of_samples(values: &[f64]) -> f64 {
    if values.iter().any(|v| *v == f64::NEG_INFINITY) {
        return f64::NEG_INFINITY;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// `(1/2pi) int_{t0}^{t1} g(e^{it}) dt` by the midpoint rule on `n` nodes.
pub fn arc_integral(g: impl Fn(C64) -> f64, t0: f64, t1: f64, n: usize) -> f64 {
    let h = (t1 - t0) / n as f64;
    let mut sum = 0.0;
    for j in 0..n {
        let t = t0 + (j as f64 + 0.5) * h;
        sum += g(C64::from_polar(1.0, t));
    }
    sum * h / (2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_mean() {
        assert_eq!(circle_mean(|_| 2.5, 64), 2.5);
    }

    #[test]
    fn cosine_mean_vanishes() {
        assert!(circle_mean(|z| z.re, 512).abs() < 1e-12);
    }

    #[test]
    fn log_distance_mean_value_identity() {
        // Independent oracle: adaptive Simpson on t in [0, 2pi].
        let a = C64::new(0.3, 0.0);
        let f = |t: f64| (C64::from_polar(1.0, t) - a).norm().ln();
        let oracle = simpson(&f, 0.0, 2.0 * PI, 1 << 14) / (2.0 * PI);
        assert!(oracle.abs() < 1e-10);
        let got = circle_mean(|z| (z - a).norm().ln(), 512);
        assert!(got.abs() < 1e-6);
    }

    fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for j in 1..n {
            let w = if j % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + j as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn isolated_singularity_is_refined_away() {
        // log|z - 1| is -inf at the node z = 1 but integrable with mean 0.
        let v = circle_mean(|z| (z - 1.0).norm().ln(), 512);
        assert!(v.is_finite());
        assert!(v.abs() < 5e-3);
    }

    #[test]
    fn minus_infinity_on_an_arc_propagates() {
        let v = circle_mean(|z| if z.im > 0.0 { f64::NEG_INFINITY } else { 0.0 }, 512);
        assert_eq!(v, f64::NEG_INFINITY);
    }

    #[test]
    fn arc_integral_of_constant_is_normalized_length() {
        let v = arc_integral(|_| 1.0, 0.0, PI / 2.0, 100);
        assert!((v - 0.25).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn exact_on_trigonometric_polynomials(
            coeffs in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..32),
            a0 in -3.0f64..3.0,
        ) {
            // degree < n/2 with n = 64
            let g = |z: C64| {
                let mut acc = a0;
                let mut zk = z;
                for &(a, b) in &coeffs {
                    acc += a * zk.re + b * zk.im;
                    zk *= z;
                }
                acc
            };
            prop_assert!((circle_mean(g, 64) - a0).abs() <= 1e-12);
        }
    }
}
