//! Small dense complex vector helpers: inner products, Gram-Schmidt, and a
//! pivoted solver for the few-by-few systems of the digital precoder.

use num_complex::Complex;

use crate::error::{Result, SimError};
use crate::scalar::Real;

pub type CVec<T> = Vec<Complex<T>>;

/// Hermitian inner product `aᴴ b`.
pub fn vdot<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter()
        .zip(b)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * y)
}

pub fn norm_sqr<T: Real>(a: &[Complex<T>]) -> T {
    a.iter().fold(T::zero(), |acc, x| acc + x.norm_sqr())
}

pub fn norm<T: Real>(a: &[Complex<T>]) -> T {
    norm_sqr(a).sqrt()
}

/// Scales `a` to unit norm. Returns `None` for a (numerically) zero vector.
pub fn normalized<T: Real>(a: &[Complex<T>]) -> Option<CVec<T>> {
    let n = norm(a);
    if n <= T::min_positive_value() || !n.is_finite() {
        return None;
    }
    Some(a.iter().map(|x| x / n).collect())
}

pub fn check_len<T>(a: &[T], expected: usize) -> Result<()> {
    if a.len() != expected {
        return Err(SimError::Dimension { expected, got: a.len() });
    }
    Ok(())
}

/// Removes from `v` its components along the orthonormal vectors in `basis`,
/// with one re-orthogonalization pass.
pub fn project_out<T: Real>(v: &mut [Complex<T>], basis: &[CVec<T>]) {
    for _ in 0..2 {
        for q in basis {
            let c = vdot(q, v);
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= qi * c;
            }
        }
    }
}

/// Orthonormal basis for the span of `vectors`. Vectors whose residual norm
/// falls below `rel_tol` times their original norm are dropped as dependent.
pub fn orthonormal_basis<T: Real>(vectors: &[CVec<T>], rel_tol: T) -> Vec<CVec<T>> {
    let mut basis: Vec<CVec<T>> = Vec::new();
    for v in vectors {
        let n0 = norm(v);
        if n0 <= T::min_positive_value() {
            continue;
        }
        let mut r = v.clone();
        project_out(&mut r, &basis);
        if norm(&r) > rel_tol * n0 {
            basis.push(normalized(&r).expect("nonzero residual"));
        }
    }
    basis
}

/// Squared norm of the component of `v` orthogonal to the orthonormal `basis`.
pub fn residual_norm_sqr<T: Real>(v: &[Complex<T>], basis: &[CVec<T>]) -> T {
    let along = basis.iter().fold(T::zero(), |acc, q| acc + vdot(q, v).norm_sqr());
    (norm_sqr(v) - along).max(T::zero())
}

/// Solves `A x = b` for a square row-major complex matrix by Gaussian
/// elimination with partial pivoting.
pub fn solve<T: Real>(a: &[CVec<T>], b: &[Complex<T>]) -> Result<CVec<T>> {
    let n = a.len();
    check_len(b, n)?;
    let mut m: Vec<CVec<T>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(*bi);
            r
        })
        .collect();
    for row in &m {
        check_len(row, n + 1)?;
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].norm().partial_cmp(&m[j][col].norm()).unwrap())
            .expect("nonempty pivot range");
        if m[pivot][col].norm() <= T::min_positive_value() {
            return Err(SimError::Domain("singular matrix".into()));
        }
        m.swap(col, pivot);
        let p = m[col][col];
        for k in col..=n {
            m[col][k] = m[col][k] / p;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                if f.norm_sqr() > T::zero() {
                    for k in col..=n {
                        let delta = f * m[col][k];
                        m[r][k] -= delta;
                    }
                }
            }
        }
    }
    Ok(m.into_iter().map(|row| row[n]).collect())
}
