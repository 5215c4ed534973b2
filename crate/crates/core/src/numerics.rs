//! Dense complex linear algebra used by every numerical module.
//!
//! Storage and factorizations come from `nalgebra`; this module adds the
//! tolerance policy, a 1-norm condition estimate for LU solves, and seeded
//! complex Gaussian sampling.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Condition estimate above which a linear system is treated as singular.
pub const SINGULAR_CONDITION: f64 = 1e14;

/// The single tolerance policy shared by all modules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative singular-value cutoff for numerical rank.
    pub rank_rel: f64,
    /// Relative distance under which two slice points are the same image point.
    pub dedupe: f64,
    /// Largest residual a stored solution may carry.
    pub validation: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank_rel: 1e-8,
            dedupe: 1e-6,
            validation: 1e-8,
        }
    }
}

pub fn ensure_finite(m: &ComplexMatrix) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

fn one_norm(m: &ComplexMatrix) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// An LU factorization that can also solve with the adjoint.
struct Factored {
    lu: nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl Factored {
    fn solve(&self, b: &CVector) -> Option<CVector> {
        self.lu.solve(b)
    }

    // P·M = L·U, so Mᴴ y = b  ⇔  Uᴴ Lᴴ (P y) = b.
    fn solve_adjoint(&self, b: &CVector) -> Option<CVector> {
        let z = self.lu.u().ad_solve_upper_triangular(b)?;
        let mut w = self.lu.l().ad_solve_lower_triangular(&z)?;
        self.lu.p().inv_permute_rows(&mut w);
        Some(w)
    }

    /// Hager–Higham estimate of `‖M⁻¹‖₁`.
    fn inverse_one_norm(&self, n: usize) -> Option<f64> {
        let mut x = CVector::from_element(n, Complex64::new(1.0 / n as f64, 0.0));
        let mut estimate = 0.0;
        let mut last_j = usize::MAX;
        for iter in 0..5 {
            let y = self.solve(&x)?;
            estimate = y.iter().map(|z| z.norm()).sum::<f64>();
            let sign = y.map(|z| {
                let a = z.norm();
                if a == 0.0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    z / a
                }
            });
            let z = self.solve_adjoint(&sign)?;
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(j, v)| (j, v.norm()))
                .fold((0, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
            let zx = z.dotc(&x).re;
            if iter > 0 && (zmax <= zx || j == last_j) {
                break;
            }
            last_j = j;
            x.fill(Complex64::new(0.0, 0.0));
            x[j] = Complex64::new(1.0, 0.0);
        }
        Some(estimate)
    }
}

/// Outcome of [`linear_solve_with_condition`].
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub x: CVector,
    pub condition: f64,
}

/// Solve `M x = v` by partial-pivoting LU with one step of iterative
/// refinement when the residual misses `1e−10·(1+‖v‖)`.
pub fn linear_solve(m: &ComplexMatrix, v: &CVector) -> Result<CVector> {
    linear_solve_with_condition(m, v).map(|r| r.x)
}

pub fn linear_solve_with_condition(m: &ComplexMatrix, v: &CVector) -> Result<SolveReport> {
    let n = m.nrows();
    if m.ncols() != n || v.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "linear_solve: {}x{} matrix with vector of length {}",
            m.nrows(),
            m.ncols(),
            v.len()
        )));
    }
    if n == 0 {
        return Ok(SolveReport {
            x: CVector::zeros(0),
            condition: 1.0,
        });
    }
    let fact = Factored { lu: m.clone().lu() };
    let singular = || Error::SingularSystem {
        condition: f64::INFINITY,
    };
    let mut x = fact.solve(v).ok_or_else(singular)?;
    let inv_norm = fact.inverse_one_norm(n).ok_or_else(singular)?;
    let condition = one_norm(m) * inv_norm;
    if !condition.is_finite() || condition > SINGULAR_CONDITION {
        return Err(Error::SingularSystem { condition });
    }
    let target = 1e-10 * (1.0 + v.norm());
    let residual = v - m * &x;
    if residual.norm() > target {
        if let Some(dx) = fact.solve(&residual) {
            x += dx;
        }
    }
    if x.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::SingularSystem { condition });
    }
    Ok(SolveReport { x, condition })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumericRank {
    pub rank: usize,
    /// Singular values in nonincreasing order.
    pub singular_values: Vec<f64>,
}

/// Count singular values above `rel_tol·σ_max`.
pub fn numeric_rank(m: &ComplexMatrix, rel_tol: f64) -> NumericRank {
    if m.nrows() == 0 || m.ncols() == 0 {
        return NumericRank {
            rank: 0,
            singular_values: Vec::new(),
        };
    }
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    let smax = sv[0];
    let rank = if smax > 0.0 {
        sv.iter().filter(|&&s| s > rel_tol * smax).count()
    } else {
        0
    };
    NumericRank {
        rank,
        singular_values: sv,
    }
}

/// 2-norm condition number of a square matrix from its singular values.
pub fn condition_number(m: &ComplexMatrix) -> f64 {
    let sv = numeric_rank(m, 0.5).singular_values;
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Deterministic generator for `(seed, stream)`; distinct streams never overlap.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard complex Gaussian: real and imaginary parts `N(0, 1/2)`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| complex_gaussian(rng))
}

/// Entries are drawn in row-major order so the stream layout does not depend
/// on nalgebra's storage order.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let data: Vec<Complex64> = (0..rows * cols).map(|_| complex_gaussian(rng)).collect();
    ComplexMatrix::from_row_slice(rows, cols, &data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_and_diagonal_solves() {
        let v = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0), c(-2.0, 0.0)]);
        let x = linear_solve(&ComplexMatrix::identity(3, 3), &v).unwrap();
        assert_eq!(x, v);

        let m = ComplexMatrix::from_diagonal(&CVector::from_vec(vec![c(2.0, 0.0), c(4.0, 0.0)]));
        let x = linear_solve(&m, &CVector::from_vec(vec![c(2.0, 0.0), c(4.0, 0.0)])).unwrap();
        assert!((x[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((x[1] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn recovers_known_solution() {
        let mut rng = seeded_rng(7, 0);
        let m = gaussian_matrix(&mut rng, 10, 10) + ComplexMatrix::identity(10, 10) * c(4.0, 0.0);
        let x0 = gaussian_vector(&mut rng, 10);
        let v = &m * &x0;
        let x = linear_solve(&m, &v).unwrap();
        assert!((x - x0).norm() < 1e-10);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let u = CVector::from_vec(vec![c(1.0, 0.0), c(2.0, 1.0), c(0.0, -1.0)]);
        let m = &u * u.transpose();
        let err = linear_solve(&m, &u).unwrap_err();
        assert!(matches!(err, Error::SingularSystem { .. }), "{err}");
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let m = ComplexMatrix::identity(3, 2);
        assert!(matches!(
            linear_solve(&m, &CVector::zeros(3)),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn adjoint_solve_matches_definition() {
        let mut rng = seeded_rng(3, 1);
        let m = gaussian_matrix(&mut rng, 8, 8);
        let b = gaussian_vector(&mut rng, 8);
        let fact = Factored { lu: m.clone().lu() };
        let y = fact.solve_adjoint(&b).unwrap();
        assert!((m.adjoint() * y - b).norm() < 1e-10);
    }

    #[test]
    fn condition_estimate_is_close_to_exact_one_norm_condition() {
        let mut rng = seeded_rng(11, 0);
        for _ in 0..10 {
            let m = gaussian_matrix(&mut rng, 12, 12);
            let report = linear_solve_with_condition(&m, &gaussian_vector(&mut rng, 12)).unwrap();
            let inv = m.clone().try_inverse().unwrap();
            let exact = one_norm(&m) * one_norm(&inv);
            // Hager's estimator is a lower bound that is usually within a small factor.
            assert!(report.condition <= exact * (1.0 + 1e-9));
            assert!(report.condition >= exact / 10.0);
        }
    }

    #[test]
    fn rank_of_identity_and_outer_product() {
        assert_eq!(numeric_rank(&ComplexMatrix::identity(3, 3), 1e-8).rank, 3);
        let mut rng = seeded_rng(1, 0);
        let u = gaussian_vector(&mut rng, 5);
        let v = gaussian_vector(&mut rng, 4);
        assert_eq!(numeric_rank(&(&u * v.transpose()), 1e-8).rank, 1);
        assert_eq!(numeric_rank(&ComplexMatrix::zeros(3, 3), 1e-8).rank, 0);
        assert_eq!(numeric_rank(&ComplexMatrix::zeros(0, 3), 1e-8).rank, 0);
    }

    #[test]
    fn vandermonde_rank_agrees_with_determinant() {
        let mut rng = seeded_rng(5, 0);
        let nodes: Vec<Complex64> = (0..9)
            .map(|k| {
                Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 9.0)
                    + complex_gaussian(&mut rng) * 0.05
            })
            .collect();
        let m = ComplexMatrix::from_fn(9, 9, |i, j| nodes[i].powu(j as u32));
        // Independent oracle: det V = Π_{i<j} (x_j − x_i).
        let mut det = c(1.0, 0.0);
        for i in 0..9 {
            for j in i + 1..9 {
                det *= nodes[j] - nodes[i];
            }
        }
        assert!(det.norm() > 1e-3);
        assert!((m.clone().determinant() - det).norm() < 1e-8 * det.norm().max(1.0));
        assert_eq!(numeric_rank(&m, 1e-8).rank, 9);
    }

    #[test]
    fn seeded_streams_are_deterministic_and_distinct() {
        let a = gaussian_vector(&mut seeded_rng(42, 3), 4);
        let b = gaussian_vector(&mut seeded_rng(42, 3), 4);
        let c = gaussian_vector(&mut seeded_rng(42, 4), 4);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
