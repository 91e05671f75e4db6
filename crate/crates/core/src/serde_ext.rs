//! Serde helpers for the on-disk formats: complex numbers as `[re, im]`
//! pairs and extended reals with `"-inf"`/`"inf"` string sentinels.

use num_complex::Complex64 as C64;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

pub fn c2(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn from_c2(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

pub fn point_to_pairs(z: &[C64]) -> Vec<[f64; 2]> {
    z.iter().copied().map(c2).collect()
}

pub fn pairs_to_point(p: &[[f64; 2]]) -> Vec<C64> {
    p.iter().copied().map(from_c2).collect()
}

/// Vec<Complex64> as a list of `[re, im]` pairs.
pub mod complex_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        point_to_pairs(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(pairs_to_point(&pairs))
    }
}

/// Vec<Vec<Complex64>>: a list of points, each a list of pairs.
pub mod point_list {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Vec<C64>], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|p| point_to_pairs(p)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<C64>>, D::Error> {
        let pts = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        Ok(pts.iter().map(|p| pairs_to_point(p)).collect())
    }
}

/// A single Complex64 as `[re, im]`.
pub mod complex {
    use super::*;

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        c2(*z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        Ok(from_c2(<[f64; 2]>::deserialize(d)?))
    }
}

/// Extended real: finite values as JSON numbers, infinities as strings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtReal(pub f64);

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_finite() {
            s.serialize_f64(v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(ExtReal(v)),
            Raw::Str(s) => match s.as_str() {
                "-inf" => Ok(ExtReal(f64::NEG_INFINITY)),
                "inf" => Ok(ExtReal(f64::INFINITY)),
                "nan" => Ok(ExtReal(f64::NAN)),
                other => Err(de::Error::custom(format!("bad extended real {other:?}"))),
            },
        }
    }
}

/// `f64` fields serialized through [`ExtReal`].
pub mod ext {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        ExtReal(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(ExtReal::deserialize(d)?.0)
    }
}

/// Formats an extended real for CSV output.
pub fn fmt_ext(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}
