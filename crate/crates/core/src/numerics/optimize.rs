//! Seeded multistart bounded Nelder–Mead.
//!
//! Starts are the caller's explicit points followed by `restarts` points of
//! a Halton sequence with a seeded Cranley–Patterson shift. Start `i`
//! depends only on `(seed, i)`, so adding restarts never loses a start and
//! the best value is monotone in `restarts`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

/// Starts are evaluated in fixed-size batches so that the early stop on
/// `lower_bound` does not depend on the thread count.
const BATCH: usize = 4;

const PRIMES: [u32; 64] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193,
    197, 199, 211, 223, 227, 229, 233, 239, 241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307,
    311,
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Number of quasi-random starts on top of the explicit ones.
    pub restarts: usize,
    /// Evaluation budget per start.
    pub max_evals: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// Box `[lo, hi]` per parameter. Left empty in scenario files; the disc
    /// family fills it in.
    pub bounds: Vec<(f64, f64)>,
    /// Initial simplex edge as a fraction of each box side.
    pub initial_step: f64,
    /// Known lower bound of the objective; reaching it ends the search.
    #[serde(skip)]
    pub lower_bound: Option<f64>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 6,
            max_evals: 300,
            seed: 0,
            tolerance: 1e-9,
            bounds: Vec::new(),
            initial_step: 0.1,
            lower_bound: None,
        }
    }
}

impl OptimizerConfig {
    pub fn with_bounds(&self, bounds: Vec<(f64, f64)>) -> Self {
        Self {
            bounds,
            ..self.clone()
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn with_lower_bound(&self, lb: f64) -> Self {
        Self {
            lower_bound: Some(lb),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_evals == 0 {
            return Err(Error::Invalid("max_evals must be positive".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Invalid("tolerance must be positive".into()));
        }
        if !(self.initial_step > 0.0 && self.initial_step <= 1.0) {
            return Err(Error::Invalid("initial_step must lie in (0, 1]".into()));
        }
        for (i, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::Invalid(format!("bounds[{i}] is not a finite box side")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub params: Vec<f64>,
    #[serde(with = "crate::serde_ext::ext")]
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
    pub start_index: usize,
}

/// Multistart minimization from quasi-random starts only.
pub fn minimize<F>(objective: &F, cfg: &OptimizerConfig) -> Result<Minimum>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    minimize_with_starts(objective, cfg, &[])
}

/// Multistart minimization: `starts` first, then `cfg.restarts` Halton
/// points. The reported value never exceeds the objective at any start.
pub fn minimize_with_starts<F>(objective: &F, cfg: &OptimizerConfig, starts: &[Vec<f64>]) -> Result<Minimum>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate()?;
    let dim = cfg.bounds.len();
    for s in starts {
        if s.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: s.len(),
            });
        }
    }
    let total = starts.len() + cfg.restarts;
    if total == 0 {
        return Err(Error::Invalid("no starts: restarts is 0 and no explicit start given".into()));
    }
    let boxed = Boxed { bounds: &cfg.bounds };
    let shift = cp_shift(cfg.seed, dim);
    let start_point = |i: usize| -> Vec<f64> {
        if i < starts.len() {
            boxed.normalize(&starts[i])
        } else {
            halton_point(i - starts.len(), &shift, cfg.seed)
        }
    };

    let mut best: Option<Minimum> = None;
    let mut evals = 0;
    let mut next = 0;
    while next < total {
        let idx: Vec<usize> = (next..(next + BATCH).min(total)).collect();
        next += idx.len();
        let results = par::map(&idx, |&i| {
            let (u, v, e, conv) = local_search(objective, &boxed, start_point(i), cfg);
            (i, u, v, e, conv)
        });
        for (i, u, v, e, conv) in results {
            evals += e;
            let better = match &best {
                None => true,
                Some(b) => v < b.value,
            };
            if better {
                best = Some(Minimum {
                    params: boxed.denormalize(&u),
                    value: v,
                    evals: 0,
                    converged: conv,
                    start_index: i,
                });
            }
        }
        let b = best.as_ref().unwrap();
        if b.value == f64::NEG_INFINITY {
            break;
        }
        if let Some(lb) = cfg.lower_bound {
            if b.value <= lb + cfg.tolerance {
                break;
            }
        }
    }
    let mut best = best.unwrap();
    best.evals = evals;
    if best.value == f64::INFINITY {
        return Err(Error::InfeasibleFamily);
    }
    Ok(best)
}

struct Boxed<'a> {
    bounds: &'a [(f64, f64)],
}

impl Boxed<'_> {
    fn denormalize(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(self.bounds)
            .map(|(&t, &(lo, hi))| lo + t.clamp(0.0, 1.0) * (hi - lo))
            .collect()
    }

    fn normalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.bounds)
            .map(|(&v, &(lo, hi))| if hi > lo { ((v - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.0 })
            .collect()
    }
}

fn cp_shift(seed: u64, dim: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim).map(|_| rng.gen::<f64>()).collect()
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

fn halton_point(i: usize, shift: &[f64], seed: u64) -> Vec<f64> {
    let mut extra: Option<ChaCha8Rng> = None;
    shift
        .iter()
        .enumerate()
        .map(|(d, &s)| {
            if d < PRIMES.len() {
                (radical_inverse(i as u64 + 1, PRIMES[d] as u64) + s).fract()
            } else {
                let rng = extra.get_or_insert_with(|| {
                    let mut r = ChaCha8Rng::seed_from_u64(seed);
                    r.set_stream(i as u64 + 1);
                    r
                });
                rng.gen::<f64>()
            }
        })
        .collect()
}

/// Bounded Nelder–Mead in normalized coordinates with adaptive
/// coefficients; after each convergence the simplex is rebuilt at the best
/// point with half the previous edge until a round brings no improvement.
fn local_search<F>(f: &F, boxed: &Boxed, u0: Vec<f64>, cfg: &OptimizerConfig) -> (Vec<f64>, f64, usize, bool)
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = u0.len();
    let evals = std::cell::Cell::new(0usize);
    let eval = |u: &[f64]| -> f64 {
        evals.set(evals.get() + 1);
        let v = f(&boxed.denormalize(u));
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let tol = cfg.tolerance;
    let budget = cfg.max_evals;
    let at_floor = |v: f64| v == f64::NEG_INFINITY || cfg.lower_bound.is_some_and(|lb| v <= lb + tol);

    let mut best_u = u0;
    let mut best_v = eval(&best_u);
    if n == 0 || at_floor(best_v) {
        return (best_u, best_v, evals.get(), true);
    }
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);
    let clamp = |u: Vec<f64>| -> Vec<f64> { u.into_iter().map(|t| t.clamp(0.0, 1.0)).collect() };

    let mut step = cfg.initial_step;
    let mut converged = false;
    'rounds: while step >= 1e-7 {
        let round_start = best_v;
        let mut simplex: Vec<(Vec<f64>, f64)> = vec![(best_u.clone(), best_v)];
        for d in 0..n {
            if evals.get() >= budget {
                break 'rounds;
            }
            let mut u = best_u.clone();
            u[d] = if u[d] + step <= 1.0 { u[d] + step } else { u[d] - step };
            let v = eval(&u);
            simplex.push((u, v));
        }
        loop {
            simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
            if simplex[0].1 < best_v {
                best_u = simplex[0].0.clone();
                best_v = simplex[0].1;
            }
            if at_floor(best_v) {
                converged = true;
                break 'rounds;
            }
            let diameter = simplex
                .iter()
                .skip(1)
                .map(|(u, _)| u.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            let (f_lo, f_hi) = (simplex[0].1, simplex[n].1);
            let flat = f_lo.is_finite() && f_hi.is_finite() && f_hi - f_lo <= tol * (1.0 + f_lo.abs());
            if flat || diameter <= 1e-10 {
                break;
            }
            if evals.get() >= budget {
                break 'rounds;
            }
            let mut c = vec![0.0; n];
            for (u, _) in &simplex[..n] {
                for (ci, ui) in c.iter_mut().zip(u) {
                    *ci += ui / nf;
                }
            }
            let worst = simplex[n].clone();
            let toward = |t: f64, p: &[f64]| -> Vec<f64> { clamp(c.iter().zip(p).map(|(ci, pi)| ci + t * (pi - ci)).collect()) };
            let xr = toward(-alpha, &worst.0);
            let fr = eval(&xr);
            if fr < simplex[0].1 {
                let xe = toward(-alpha * beta, &worst.0);
                let fe = eval(&xe);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
                continue;
            }
            let (xc, fc, accept) = if fr < worst.1 {
                let xc = toward(-alpha * gamma, &worst.0);
                let fc = eval(&xc);
                let ok = fc <= fr;
                (xc, fc, ok)
            } else {
                let xc = toward(gamma, &worst.0);
                let fc = eval(&xc);
                let ok = fc < worst.1;
                (xc, fc, ok)
            };
            if accept {
                simplex[n] = (xc, fc);
                continue;
            }
            let x0 = simplex[0].0.clone();
            for k in 1..=n {
                if evals.get() >= budget {
                    break;
                }
                let u = clamp(x0.iter().zip(&simplex[k].0).map(|(a, b)| a + delta * (b - a)).collect());
                let v = eval(&u);
                simplex[k] = (u, v);
            }
        }
        let improved = best_v < round_start - tol * (1.0 + round_start.abs().min(1e300));
        if !improved && step < cfg.initial_step {
            converged = true;
            break;
        }
        step *= 0.5;
    }
    (best_u, best_v, evals.get(), converged)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(dim: usize, lo: f64, hi: f64) -> OptimizerConfig {
        OptimizerConfig {
            restarts: 4,
            max_evals: 400,
            seed: 7,
            tolerance: 1e-12,
            bounds: vec![(lo, hi); dim],
            ..Default::default()
        }
    }

    #[test]
    fn one_dimensional_parabola() {
        let m = minimize(&|x: &[f64]| (x[0] - 1.0).powi(2), &cfg(1, -5.0, 5.0)).unwrap();
        assert!((m.params[0] - 1.0).abs() < 1e-4);
        assert!(m.value < 1e-8);
    }

    #[test]
    fn two_dimensional_bowl_from_explicit_start() {
        let f = |x: &[f64]| x[0] * x[0] + x[1] * x[1];
        let m = minimize_with_starts(&f, &cfg(2, -5.0, 5.0), &[vec![3.0, 3.0]]).unwrap();
        assert!(m.value < 1e-8);
    }

    #[test]
    fn deterministic_reruns() {
        let f = |x: &[f64]| (x[0] - 0.3).abs() + (x[1] + 0.2).powi(2) + (3.0 * x[0]).sin() * 0.1;
        let c = cfg(2, -2.0, 2.0);
        let a = minimize(&f, &c).unwrap();
        let b = minimize(&f, &c).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn never_worse_than_any_start() {
        let f = |x: &[f64]| (x[0] * 5.0).sin() + x[0] * 0.1;
        let starts = vec![vec![-1.9], vec![0.4], vec![1.7]];
        let m = minimize_with_starts(&f, &cfg(1, -2.0, 2.0), &starts).unwrap();
        for s in &starts {
            assert!(m.value <= f(s));
        }
    }

    #[test]
    fn all_infinite_is_infeasible() {
        let r = minimize(&|_: &[f64]| f64::INFINITY, &cfg(2, 0.0, 1.0));
        assert_eq!(r, Err(Error::InfeasibleFamily));
    }

    #[test]
    fn minus_infinity_stops_the_search() {
        let f = |x: &[f64]| if x[0] < 0.5 { f64::NEG_INFINITY } else { 1.0 };
        let m = minimize_with_starts(&f, &cfg(1, 0.0, 1.0), &[vec![0.25]]).unwrap();
        assert_eq!(m.value, f64::NEG_INFINITY);
        assert_eq!(m.start_index, 0);
        // only the first batch ran, one evaluation per start
        assert!(m.evals <= BATCH * c_max(&cfg(1, 0.0, 1.0)));
    }

    fn c_max(c: &OptimizerConfig) -> usize {
        c.max_evals
    }

    #[test]
    fn lower_bound_skips_remaining_batches() {
        let f = |x: &[f64]| x[0].abs();
        let mut c = cfg(1, -1.0, 1.0).with_lower_bound(0.0);
        c.restarts = 40;
        let m = minimize_with_starts(&f, &c, &[vec![0.0]]).unwrap();
        assert_eq!(m.value, 0.0);
        assert!(m.evals <= BATCH * c.max_evals);
    }

    #[test]
    fn monotone_in_restarts() {
        let f = |x: &[f64]| (x[0] * 7.0).sin() * (x[1] * 3.0).cos() + 0.05 * x[0];
        let mut prev = f64::INFINITY;
        for r in 1..8 {
            let mut c = cfg(2, -3.0, 3.0);
            c.restarts = r;
            c.max_evals = 40;
            let v = minimize(&f, &c).unwrap().value;
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn halton_is_inside_unit_cube() {
        let shift = cp_shift(3, 70);
        for i in 0..20 {
            for t in halton_point(i, &shift, 3) {
                assert!((0.0..1.0).contains(&t));
            }
        }
    }
}
