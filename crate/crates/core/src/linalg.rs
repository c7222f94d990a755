//! Symmetric positive-definite factorization with escalating diagonal jitter.

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::linalg::triangular_solve::solve_lower_triangular_in_place;
use faer::{Mat, Par, Side};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Jitter schedule: relative levels `start, 10·start, …, max`, each
/// multiplied by the mean of the diagonal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JitterPolicy {
    pub start: f64,
    pub max: f64,
}

impl Default for JitterPolicy {
    fn default() -> Self {
        JitterPolicy {
            start: 1e-10,
            max: 1e-6,
        }
    }
}

impl JitterPolicy {
    fn levels(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::successors(Some(self.start), |l| Some(l * 10.0))
            .take_while(|l| *l <= self.max * (1.0 + 1e-9))
    }
}

/// Lower Cholesky factor `L` of `K + jitter·I`.
pub struct Factorization {
    llt: faer::linalg::solvers::Llt<f64>,
    /// Absolute amount added to every diagonal entry (0 when none was needed).
    pub jitter: f64,
    /// Relative level that produced `jitter`.
    pub jitter_level: f64,
}

fn to_faer(m: &DMatrix<f64>) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: &Mat<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

impl Factorization {
    pub fn dim(&self) -> usize {
        self.llt.L().nrows()
    }

    pub fn log_det(&self) -> f64 {
        let l = self.llt.L();
        2.0 * (0..self.dim()).map(|i| l[(i, i)].ln()).sum::<f64>()
    }

    /// `K⁻¹ b`.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let x = self.llt.solve(Mat::from_fn(b.len(), 1, |i, _| b[i]));
        DVector::from_fn(b.len(), |i, _| x[(i, 0)])
    }

    /// `L⁻¹ B`.
    pub fn solve_lower(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let mut x = to_faer(b);
        solve_lower_triangular_in_place(self.llt.L(), x.as_mut(), Par::Seq);
        from_faer(&x)
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        from_faer(&self.llt.inverse())
    }

    pub fn l(&self) -> DMatrix<f64> {
        let l = self.llt.L();
        DMatrix::from_fn(l.nrows(), l.ncols(), |i, j| if i >= j { l[(i, j)] } else { 0.0 })
    }
}

fn cholesky(k: &Mat<f64>) -> Option<faer::linalg::solvers::Llt<f64>> {
    k.llt(Side::Lower).ok()
}

/// Factorizes `k`, adding jitter only when the plain factorization fails.
pub fn factorize(k: &DMatrix<f64>, policy: &JitterPolicy) -> Result<Factorization> {
    let fail = Error::Factorization {
        max_jitter: policy.max,
    };
    if k.iter().any(|x| !x.is_finite()) {
        return Err(fail);
    }
    let mut m = to_faer(k);
    if let Some(llt) = cholesky(&m) {
        return Ok(Factorization {
            llt,
            jitter: 0.0,
            jitter_level: 0.0,
        });
    }
    let n = k.nrows();
    let scale = k.diagonal().sum() / n as f64;
    if !(scale > 0.0) {
        return Err(fail);
    }
    for level in policy.levels() {
        let jitter = level * scale;
        for i in 0..n {
            m[(i, i)] = k[(i, i)] + jitter;
        }
        if let Some(llt) = cholesky(&m) {
            return Ok(Factorization {
                llt,
                jitter,
                jitter_level: level,
            });
        }
    }
    Err(fail)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_spd_needs_no_jitter() {
        let k = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let f = factorize(&k, &JitterPolicy::default()).unwrap();
        assert_eq!(f.jitter, 0.0);
        assert!((f.log_det() - (2.0f64 - 0.25).ln()).abs() < 1e-14);
    }

    #[test]
    fn singular_matrix_gets_bounded_jitter() {
        let k = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let policy = JitterPolicy::default();
        let f = factorize(&k, &policy).unwrap();
        assert!(f.jitter > 0.0);
        assert!(f.jitter_level <= policy.max);
    }

    #[test]
    fn solves_against_the_factor() {
        let k = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]);
        let f = factorize(&k, &JitterPolicy::default()).unwrap();
        let l = f.l();
        assert!((&l * l.transpose() - &k).abs().max() < 1e-14);
        let b = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        assert!((&k * f.solve(&b) - &b).abs().max() < 1e-14);
        assert!((&k * f.inverse() - DMatrix::identity(3, 3)).abs().max() < 1e-14);
        let bm = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 2.0, 1.0, -1.0, 3.0]);
        assert!((&l * f.solve_lower(&bm) - &bm).abs().max() < 1e-14);
    }

    #[test]
    fn indefinite_matrix_fails() {
        let k = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(factorize(&k, &JitterPolicy::default()), Err(Error::Factorization { .. })));
        let z = DMatrix::<f64>::zeros(1, 1);
        assert!(factorize(&z, &JitterPolicy::default()).is_err());
    }

    #[test]
    fn levels_are_decades() {
        let l: Vec<f64> = JitterPolicy::default().levels().collect();
        assert_eq!(l.len(), 5);
        assert!((l[4] - 1e-6).abs() < 1e-18);
    }
}
