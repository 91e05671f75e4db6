//! Open sets in `C^n` as finite unions of balls, polydiscs and
//! intersections of open real half-spaces.

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Open half-space `normal . x < offset` in the real coordinates
/// `(Re z_1, Im z_1, ..., Re z_n, Im z_n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Primitive {
    Ball {
        #[serde(with = "crate::serde_ext::complex_vec")]
        center: Vec<C64>,
        radius: f64,
    },
    Polydisc {
        #[serde(with = "crate::serde_ext::complex_vec")]
        center: Vec<C64>,
        radii: Vec<f64>,
    },
    Halfspaces {
        constraints: Vec<Halfspace>,
        /// A point inside the intersection, used as the reference center
        /// for seeds. Required because the intersection is not otherwise
        /// centered.
        #[serde(with = "crate::serde_ext::complex_vec")]
        interior: Vec<C64>,
    },
}

impl Primitive {
    pub fn dim(&self) -> usize {
        match self {
            Primitive::Ball { center, .. } | Primitive::Polydisc { center, .. } => center.len(),
            Primitive::Halfspaces { interior, .. } => interior.len(),
        }
    }

    /// Signed clearance: positive inside, negative outside, comparable to a
    /// Euclidean distance to the boundary.
    pub fn depth(&self, z: &[C64]) -> f64 {
        match self {
            Primitive::Ball { center, radius } => radius - dist(z, center),
            Primitive::Polydisc { center, radii } => z
                .iter()
                .zip(center)
                .zip(radii)
                .map(|((zi, ci), ri)| ri - (zi - ci).norm())
                .fold(f64::INFINITY, f64::min),
            Primitive::Halfspaces { constraints, .. } => constraints
                .iter()
                .map(|h| {
                    let (dot, nn) = real_dot(&h.normal, z);
                    (h.offset - dot) / nn
                })
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn reference_point(&self) -> &[C64] {
        match self {
            Primitive::Ball { center, .. } | Primitive::Polydisc { center, .. } => center,
            Primitive::Halfspaces { interior, .. } => interior,
        }
    }

    /// Minkowski gauge of `z` with respect to the reference point: the
    /// factor by which the primitive must be scaled about its reference
    /// point to reach `z` (< 1 inside, > 1 outside).
    pub fn gauge(&self, z: &[C64]) -> f64 {
        match self {
            Primitive::Ball { center, radius } => dist(z, center) / radius,
            Primitive::Polydisc { center, radii } => z
                .iter()
                .zip(center)
                .zip(radii)
                .map(|((zi, ci), ri)| (zi - ci).norm() / ri)
                .fold(0.0, f64::max),
            Primitive::Halfspaces { constraints, interior } => {
                let d: Vec<C64> = z.iter().zip(interior).map(|(a, b)| a - b).collect();
                let mut g: f64 = 0.0;
                for h in constraints {
                    let (nd, _) = real_dot(&h.normal, &d);
                    let (nc, _) = real_dot(&h.normal, interior);
                    let slack = h.offset - nc;
                    if nd > 0.0 {
                        g = g.max(nd / slack);
                    }
                }
                g
            }
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: self.dim(),
            });
        }
        match self {
            Primitive::Ball { radius, .. } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::Invalid("ball radius must be positive".into()));
                }
            }
            Primitive::Polydisc { radii, .. } => {
                if radii.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: radii.len(),
                    });
                }
                if radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
                    return Err(Error::Invalid("polydisc radii must be positive".into()));
                }
            }
            Primitive::Halfspaces { constraints, interior } => {
                if constraints.is_empty() {
                    return Err(Error::Invalid("half-space intersection needs at least one constraint".into()));
                }
                for h in constraints {
                    if h.normal.len() != 2 * dim {
                        return Err(Error::DimensionMismatch {
                            expected: 2 * dim,
                            got: h.normal.len(),
                        });
                    }
                    if h.normal.iter().all(|v| *v == 0.0) {
                        return Err(Error::Invalid("half-space normal is zero".into()));
                    }
                }
                if self.depth(interior) <= 0.0 {
                    return Err(Error::Invalid("half-space interior point is not inside".into()));
                }
            }
        }
        Ok(())
    }
}

fn dist(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn real_dot(normal: &[f64], z: &[C64]) -> (f64, f64) {
    let mut dot = 0.0;
    for (i, zi) in z.iter().enumerate() {
        dot += normal[2 * i] * zi.re + normal[2 * i + 1] * zi.im;
    }
    let nn = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
    (dot, nn)
}

/// A nonempty open set: the union of its components.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub dim: usize,
    pub components: Vec<Primitive>,
}

impl DomainSpec {
    pub fn new(dim: usize, components: Vec<Primitive>) -> Result<Self> {
        let d = Self { dim, components };
        d.validate()?;
        Ok(d)
    }

    pub fn ball(center: Vec<C64>, radius: f64) -> Self {
        Self {
            dim: center.len(),
            components: vec![Primitive::Ball { center, radius }],
        }
    }

    pub fn unit_ball(dim: usize) -> Self {
        Self::ball(vec![C64::new(0.0, 0.0); dim], 1.0)
    }

    pub fn polydisc(center: Vec<C64>, radii: Vec<f64>) -> Self {
        Self {
            dim: center.len(),
            components: vec![Primitive::Polydisc { center, radii }],
        }
    }

    pub fn unit_polydisc(dim: usize) -> Self {
        Self::polydisc(vec![C64::new(0.0, 0.0); dim], vec![1.0; dim])
    }

    /// Disc `|z - center| < radius` in `C`.
    pub fn disc(center: C64, radius: f64) -> Self {
        Self::ball(vec![center], radius)
    }

    pub fn union(mut self, other: DomainSpec) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        self.components.extend(other.components);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Invalid("domain dimension must be positive".into()));
        }
        if self.components.is_empty() {
            return Err(Error::EmptyDomain);
        }
        for c in &self.components {
            c.validate(self.dim)?;
        }
        Ok(())
    }

    /// Largest component depth; membership is `depth > 0`.
    pub fn depth(&self, z: &[C64]) -> f64 {
        self.components
            .iter()
            .map(|c| c.depth(z))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, z: &[C64]) -> bool {
        self.depth(z) > 0.0
    }

    /// True only for a single ball, polydisc or half-space intersection.
    pub fn is_convex(&self) -> bool {
        self.components.len() == 1
    }

    /// Radius of a ball about the origin containing every bounded component
    /// (infinite when some component is unbounded or not a ball/polydisc).
    pub fn extent(&self) -> f64 {
        self.components
            .iter()
            .map(|c| match c {
                Primitive::Ball { center, radius } => dist(center, &vec![C64::new(0.0, 0.0); center.len()]) + radius,
                Primitive::Polydisc { center, radii } => center
                    .iter()
                    .zip(radii)
                    .map(|(c, r)| (c.norm() + r).powi(2))
                    .sum::<f64>()
                    .sqrt(),
                Primitive::Halfspaces { .. } => f64::INFINITY,
            })
            .fold(0.0, f64::max)
    }

    /// Uniform-ish random point of a random bounded component, strictly
    /// inside (rejection sampling in the component's bounding box).
    pub fn sample_interior(&self, rng: &mut impl Rng) -> Vec<C64> {
        loop {
            let c = &self.components[rng.gen_range(0..self.components.len())];
            let (reference, spread) = match c {
                Primitive::Ball { center, radius } => (center.clone(), *radius),
                Primitive::Polydisc { center, radii } => (center.clone(), radii.iter().copied().fold(0.0, f64::max)),
                Primitive::Halfspaces { interior, .. } => (interior.clone(), 1.0),
            };
            let z: Vec<C64> = reference
                .iter()
                .map(|r| r + C64::new(rng.gen_range(-spread..spread), rng.gen_range(-spread..spread)))
                .collect();
            if c.depth(&z) > 1e-9 {
                return z;
            }
        }
    }
}
