//! Dense matrix aliases, small helpers and the JSON encoding shared by every
//! serialized type.
//!
//! Real matrices serialize as row-major nested arrays of numbers; complex
//! matrices as row-major nested arrays of `[re, im]` pairs.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{GtoError, Result};

pub type RMat = DMatrix<f64>;
pub type CMat = DMatrix<Complex<f64>>;
pub type RVec = DVector<f64>;
pub type C64 = Complex<f64>;

/// Largest absolute entry (the max-norm used by every tolerance check).
pub fn max_abs(m: &RMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn max_abs_c(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.norm()))
}

pub fn max_abs_diff(a: &RMat, b: &RMat) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()))
}

pub fn direct_sum(blocks: &[RMat]) -> RMat {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = RMat::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), b.shape()).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

pub fn direct_sum_c(blocks: &[CMat]) -> CMat {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), b.shape()).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// `‖U U† − 𝟙‖_max`.
pub fn unitarity_defect(u: &CMat) -> f64 {
    let n = u.nrows();
    let prod = u * u.adjoint();
    max_abs_c(&(prod - CMat::identity(n, n)))
}

pub fn require_unitary(u: &CMat, tol: f64) -> Result<()> {
    if !u.is_square() {
        return Err(GtoError::dim(format!(
            "unitary must be square, got {}x{}",
            u.nrows(),
            u.ncols()
        )));
    }
    let defect = unitarity_defect(u);
    if defect > tol {
        return Err(GtoError::invalid(format!(
            "matrix is not unitary (defect {defect:e} > {tol:e})"
        )));
    }
    Ok(())
}

pub fn symmetry_defect(m: &RMat) -> f64 {
    max_abs_diff(m, &m.transpose())
}

pub fn require_even_square(m: &RMat, what: &str) -> Result<usize> {
    if !m.is_square() || !m.nrows().is_multiple_of(2) || m.nrows() == 0 {
        return Err(GtoError::dim(format!(
            "{what} must be square with even positive dimension, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows() / 2)
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|v| C64::new(v, 0.0))
}

/// Serde adapter for real matrices as row-major `[[f64]]`.
pub mod real_matrix {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::RMat;

    pub fn serialize<S: Serializer>(m: &RMat, s: S) -> Result<S::Ok, S::Error> {
        rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<RMat, D::Error> {
        let rows: Vec<Vec<f64>> = Vec::deserialize(d)?;
        from_rows(&rows).map_err(D::Error::custom)
    }

    pub fn rows(m: &RMat) -> Vec<Vec<f64>> {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
            .collect()
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<RMat, String> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err("ragged matrix rows".into());
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err("matrix entries must be finite".into());
        }
        Ok(RMat::from_fn(nrows, ncols, |i, j| rows[i][j]))
    }
}

/// Serde adapter for complex matrices as row-major `[[[re, im]]]`.
pub mod complex_matrix {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::{CMat, C64};

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .map(|j| [m[(i, j)].re, m[(i, j)].im])
                    .collect()
            })
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(D::Error::custom("ragged matrix rows"));
        }
        if rows.iter().flatten().flatten().any(|v| !v.is_finite()) {
            return Err(D::Error::custom("matrix entries must be finite"));
        }
        Ok(CMat::from_fn(nrows, ncols, |i, j| {
            C64::new(rows[i][j][0], rows[i][j][1])
        }))
    }
}

/// Serde adapter for a list of complex matrices.
pub mod complex_matrix_vec {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::CMat;

    #[derive(Serialize, Deserialize)]
    struct Wrap(#[serde(with = "super::complex_matrix")] CMat);

    pub fn serialize<S: Serializer>(v: &[CMat], s: S) -> Result<S::Ok, S::Error> {
        let wrapped: Vec<Wrap> = v.iter().cloned().map(Wrap).collect();
        wrapped.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CMat>, D::Error> {
        let wrapped: Vec<Wrap> = Vec::deserialize(d)?;
        Ok(wrapped.into_iter().map(|w| w.0).collect())
    }
}

/// Serde adapter for real vectors as `[f64]`.
pub mod real_vector {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::RVec;

    pub fn serialize<S: Serializer>(v: &RVec, s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<RVec, D::Error> {
        let v: Vec<f64> = Vec::deserialize(d)?;
        if v.iter().any(|x| !x.is_finite()) {
            return Err(D::Error::custom("vector entries must be finite"));
        }
        Ok(RVec::from_vec(v))
    }
}
