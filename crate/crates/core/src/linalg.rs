//! Small dense linear-algebra helpers shared across the crate.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Eigh, Inverse, Norm, UPLO};
use num_complex::Complex64 as c64;

use crate::{Error, Result};

pub const ONE: c64 = c64 { re: 1.0, im: 0.0 };
pub const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
pub const I: c64 = c64 { re: 0.0, im: 1.0 };

/// Largest absolute entry.
pub fn max_abs(a: &Array2<c64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Frobenius norm.
pub fn fro(a: &Array2<c64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn identity(d: usize) -> Array2<c64> {
    Array2::eye(d)
}

pub fn dagger(a: &Array2<c64>) -> Array2<c64> {
    a.t().mapv(|z| z.conj())
}

/// Hermiticity defect `‖A − A†‖_max`.
pub fn hermiticity_defect(a: &Array2<c64>) -> f64 {
    let d = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            worst = worst.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    worst
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending, true
/// eigenvectors in the columns.
///
/// The backend solves the transposed (= conjugate) matrix because of the
/// row-major/Fortran layout mismatch, so its eigenvector columns come back
/// conjugated; undo that here.
pub fn eigh_ascending(a: &Array2<c64>) -> Result<(Array1<f64>, Array2<c64>)> {
    let (vals, vecs) = a
        .eigh(UPLO::Lower)
        .map_err(|e| Error::numerical(format!("hermitian eigensolve failed: {e}")))?;
    Ok((vals, vecs.mapv(|z| z.conj())))
}

/// Eigenvalues of a general complex matrix, sorted by real part descending.
pub fn eig_sorted_desc(a: &Array2<c64>) -> Result<Vec<c64>> {
    let (vals, _) = a
        .eig()
        .map_err(|e| Error::numerical(format!("general eigensolve failed: {e}")))?;
    let mut v: Vec<c64> = vals.to_vec();
    v.sort_by(|x, y| y.re.partial_cmp(&x.re).unwrap_or(std::cmp::Ordering::Equal));
    Ok(v)
}

/// Spectral norm (largest singular value) via the Hermitian square.
pub fn spectral_norm(a: &Array2<c64>) -> Result<f64> {
    let ata = dagger(a).dot(a);
    let (vals, _) = eigh_ascending(&ata)?;
    Ok(vals.iter().fold(0.0f64, |m, &x| m.max(x.max(0.0))).sqrt())
}

/// Trace norm `‖A‖₁ = Σ σᵢ(A)`. For Hermitian input this is `Σ|λᵢ|`.
pub fn trace_norm(a: &Array2<c64>) -> Result<f64> {
    if hermiticity_defect(a) < 1e-12 * (1.0 + max_abs(a)) {
        let (vals, _) = eigh_ascending(a)?;
        return Ok(vals.iter().map(|x| x.abs()).sum());
    }
    let ata = dagger(a).dot(a);
    let (vals, _) = eigh_ascending(&ata)?;
    Ok(vals.iter().map(|x| x.max(0.0).sqrt()).sum())
}

pub fn trace(a: &Array2<c64>) -> c64 {
    a.diag().sum()
}

/// Matrix exponential by scaling and squaring with a Padé(13) core.
pub fn expm(a: &Array2<c64>) -> Result<Array2<c64>> {
    let n = a.nrows();
    let norm1 = a
        .columns()
        .into_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let theta13 = 5.371920351148152;
    let s = if norm1 > theta13 {
        (norm1 / theta13).log2().ceil() as i32
    } else {
        0
    };
    let scale = c64::new(2.0f64.powi(-s), 0.0);
    let a = a.mapv(|z| z * scale);

    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let id = identity(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);

    let u_inner = &a6 * c64::new(B[13], 0.0) + &a4 * c64::new(B[11], 0.0) + &a2 * c64::new(B[9], 0.0);
    let u = a.dot(
        &(a6.dot(&u_inner)
            + &a6 * c64::new(B[7], 0.0)
            + &a4 * c64::new(B[5], 0.0)
            + &a2 * c64::new(B[3], 0.0)
            + &id * c64::new(B[1], 0.0)),
    );
    let v_inner = &a6 * c64::new(B[12], 0.0) + &a4 * c64::new(B[10], 0.0) + &a2 * c64::new(B[8], 0.0);
    let v = a6.dot(&v_inner)
        + &a6 * c64::new(B[6], 0.0)
        + &a4 * c64::new(B[4], 0.0)
        + &a2 * c64::new(B[2], 0.0)
        + &id * c64::new(B[0], 0.0);

    let p = &v + &u;
    let q = &v - &u;
    let qinv = q
        .inv()
        .map_err(|e| Error::numerical(format!("expm solve failed: {e}")))?;
    let mut r = qinv.dot(&p);
    for _ in 0..s {
        r = r.dot(&r);
    }
    Ok(r)
}

/// `‖a − b‖_F / max(‖a‖_F, ε)`, a relative Frobenius residual.
pub fn rel_fro_diff(a: &Array2<c64>, b: &Array2<c64>) -> f64 {
    let diff = a - b;
    fro(&diff) / fro(a).max(1e-300)
}

/// 2-norm of a complex vector.
pub fn vec_norm(v: &Array1<c64>) -> f64 {
    v.norm_l2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn expm_of_zero_is_identity() {
        let z = Array2::<c64>::zeros((4, 4));
        let e = expm(&z).unwrap();
        assert!(max_abs(&(&e - &identity(4))) < 1e-14);
    }

    #[test]
    fn expm_matches_scalar_exponential() {
        let a = array![[c64::new(0.3, 0.7)]];
        let e = expm(&a).unwrap();
        let want = c64::new(0.3, 0.7).exp();
        assert!((e[[0, 0]] - want).norm() < 1e-13);
    }

    #[test]
    fn expm_pauli_x_rotation() {
        // exp(iθσˣ) = cosθ·I + i sinθ·σˣ
        let theta = 0.83;
        let sx = array![[ZERO, ONE], [ONE, ZERO]];
        let e = expm(&sx.mapv(|z| z * I * theta)).unwrap();
        let want = array![
            [c64::new(theta.cos(), 0.0), c64::new(0.0, theta.sin())],
            [c64::new(0.0, theta.sin()), c64::new(theta.cos(), 0.0)]
        ];
        assert!(max_abs(&(&e - &want)) < 1e-13);
    }

    #[test]
    fn trace_norm_of_hermitian() {
        let a = array![[c64::new(1.0, 0.0), ZERO], [ZERO, c64::new(-2.0, 0.0)]];
        assert!((trace_norm(&a).unwrap() - 3.0).abs() < 1e-13);
    }
}
