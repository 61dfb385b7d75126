//! JSON encodings: complex numbers travel as `[re, im]` pairs.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn unpair(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

/// `serde(with = "complex")` for a single complex number.
pub mod complex {
    use super::*;

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        pair(*z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        <[f64; 2]>::deserialize(d).map(unpair)
    }
}

/// `serde(with = "complex_vec")` for amplitude vectors.
pub mod complex_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &DVector<C64>, s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().map(|z| pair(*z)).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DVector<C64>, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(DVector::from_iterator(pairs.len(), pairs.into_iter().map(unpair)))
    }
}

/// `serde(with = "complex_list")` for `Vec<C64>`.
pub mod complex_list {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().map(|z| pair(*z)).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        Ok(Vec::<[f64; 2]>::deserialize(d)?.into_iter().map(unpair).collect())
    }
}

/// `serde(with = "complex_matrix")`: row-major list of rows of pairs.
pub mod complex_matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &DMatrix<C64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> =
            (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| pair(m[(r, c)])).collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<C64>, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(serde::de::Error::custom("ragged complex matrix"));
        }
        Ok(DMatrix::from_fn(nrows, ncols, |r, c| unpair(rows[r][c])))
    }
}
