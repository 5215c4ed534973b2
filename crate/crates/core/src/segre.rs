//! The slicing system for a secant variety of the Segre variety.
//!
//! Unknowns are the chart coordinates `u = (a_1, b_1, c_1, …, a_r, b_r, c_r)`
//! with `a_i ∈ C^{a−1}`, `b_i ∈ C^{b−1}`, `c_i ∈ C^c`, each summand being
//! `(a_i,1) ⊗ (b_i,1) ⊗ c_i`, plus the slice coordinate `t ∈ C^ℓ`. The square
//! system is
//!
//! ```text
//! T(u) − (A t + B) = 0      (abc equations)
//! H u − H u0       = 0      (m fiber slices)
//! ```
//!
//! Tensors are flattened row-major: `(i, j, k) ↦ (i·b + j)·c + k`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formats::{expected_generic_rank, system_shape, Format};
use crate::numerics::{
    condition_number, gaussian_matrix, gaussian_vector, numeric_rank, seeded_rng, CVector,
    ComplexMatrix, Tolerances,
};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dimension data of `σ_r` for one format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SecantProfile {
    pub format: Format,
    /// Affine dimension of the cone `σ_r ⊂ C^{abc}`.
    pub dim: usize,
    /// `ℓ = abc − dim`.
    pub codim: usize,
    /// Generic fiber dimension `m = n_u − dim` of the chart map.
    pub fiber_dim: usize,
}

impl SecantProfile {
    pub fn from_dim(format: Format, dim: usize) -> Result<Self> {
        let abc = format.ambient_dim();
        let n_u = format.n_u();
        if dim > abc.min(n_u) {
            return Err(Error::ShapeMismatch(format!(
                "dimension {dim} exceeds min(abc, n_u) = {} for {format}",
                abc.min(n_u)
            )));
        }
        Ok(Self {
            format,
            dim,
            codim: abc - dim,
            fiber_dim: n_u - dim,
        })
    }

    pub fn n_vars(&self) -> usize {
        self.format.n_u() + self.codim
    }

    pub fn n_eqs(&self) -> usize {
        self.format.ambient_dim() + self.fiber_dim
    }
}

/// A point of the monodromy parameter space: the image slice `A t + B` and
/// the fiber slices `H u = H u0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceParams {
    pub a: ComplexMatrix,
    pub b: CVector,
    pub h: ComplexMatrix,
    pub u0: CVector,
}

impl SliceParams {
    pub fn check(&self, profile: &SecantProfile) -> Result<()> {
        let abc = profile.format.ambient_dim();
        let n_u = profile.format.n_u();
        let ok = self.a.shape() == (abc, profile.codim)
            && self.b.len() == abc
            && self.h.shape() == (profile.fiber_dim, n_u)
            && self.u0.len() == n_u;
        if ok {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "slice params A {:?}, B {}, H {:?}, u0 {} for {} with codim {} and fiber dim {}",
                self.a.shape(),
                self.b.len(),
                self.h.shape(),
                self.u0.len(),
                profile.format,
                profile.codim,
                profile.fiber_dim
            )))
        }
    }

    /// Same fiber slices, different image slice.
    pub fn with_slice(&self, a: ComplexMatrix, b: CVector) -> Self {
        Self {
            a,
            b,
            h: self.h.clone(),
            u0: self.u0.clone(),
        }
    }

    /// `(1−τ)·self + τ·other` on the `(A, B)` part; `H` and `u0` from `self`.
    pub fn blend(&self, other: &SliceParams, tau: Complex64) -> Self {
        let w = ONE - tau;
        self.with_slice(&self.a * w + &other.a * tau, &self.b * w + &other.b * tau)
    }
}

/// A point `(u, t)` of the square slicing system.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub u: CVector,
    pub t: CVector,
    pub residual_norm: f64,
}

impl Solution {
    /// Stack `(u, t)` into one unknown vector.
    pub fn to_vector(&self) -> CVector {
        let mut x = CVector::zeros(self.u.len() + self.t.len());
        x.rows_mut(0, self.u.len()).copy_from(&self.u);
        x.rows_mut(self.u.len(), self.t.len()).copy_from(&self.t);
        x
    }

    pub fn from_vector(x: &CVector, n_u: usize, residual_norm: f64) -> Self {
        Self {
            u: x.rows(0, n_u).into_owned(),
            t: x.rows(n_u, x.len() - n_u).into_owned(),
            residual_norm,
        }
    }

    /// Image point `A t + B` on the slice.
    pub fn image(&self, params: &SliceParams) -> CVector {
        &params.a * &self.t + &params.b
    }
}

/// Chart vectors of summand `s`: `(a_s, 1)`, `(b_s, 1)`, `c_s`.
fn summand_factors(format: &Format, u: &CVector, s: usize) -> (Vec<Complex64>, Vec<Complex64>, Vec<Complex64>) {
    let off = s * format.summand_len();
    let (a, b, c) = (format.a, format.b, format.c);
    let mut av: Vec<Complex64> = u.rows(off, a - 1).iter().copied().collect();
    av.push(ONE);
    let mut bv: Vec<Complex64> = u.rows(off + a - 1, b - 1).iter().copied().collect();
    bv.push(ONE);
    let cv: Vec<Complex64> = u.rows(off + a + b - 2, c).iter().copied().collect();
    (av, bv, cv)
}

fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got == want {
        Ok(())
    } else {
        Err(Error::ShapeMismatch(format!("{what}: length {got}, expected {want}")))
    }
}

/// The flattened tensor `Σ_i (a_i,1) ⊗ (b_i,1) ⊗ c_i`.
pub fn parametrize_tensor(format: &Format, u: &CVector) -> Result<CVector> {
    check_len("chart coordinates", u.len(), format.n_u())?;
    let (b, c) = (format.b, format.c);
    let mut out = CVector::zeros(format.ambient_dim());
    for s in 0..format.r {
        let (av, bv, cv) = summand_factors(format, u, s);
        for (i, &ai) in av.iter().enumerate() {
            for (j, &bj) in bv.iter().enumerate() {
                let ab = ai * bj;
                let base = (i * b + j) * c;
                for (k, &ck) in cv.iter().enumerate() {
                    out[base + k] += ab * ck;
                }
            }
        }
    }
    Ok(out)
}

/// `dT/du`, an `abc × n_u` matrix.
pub fn chart_jacobian(format: &Format, u: &CVector) -> Result<ComplexMatrix> {
    check_len("chart coordinates", u.len(), format.n_u())?;
    let mut jac = ComplexMatrix::zeros(format.ambient_dim(), format.n_u());
    fill_chart_jacobian(format, u, &mut jac);
    Ok(jac)
}

fn fill_chart_jacobian(format: &Format, u: &CVector, jac: &mut ComplexMatrix) {
    let (a, b, c) = (format.a, format.b, format.c);
    let idx = |i: usize, j: usize, k: usize| (i * b + j) * c + k;
    for s in 0..format.r {
        let off = s * format.summand_len();
        let (av, bv, cv) = summand_factors(format, u, s);
        for p in 0..a - 1 {
            let mut col = jac.column_mut(off + p);
            for j in 0..b {
                for k in 0..c {
                    col[idx(p, j, k)] = bv[j] * cv[k];
                }
            }
        }
        for p in 0..b - 1 {
            let mut col = jac.column_mut(off + a - 1 + p);
            for i in 0..a {
                for k in 0..c {
                    col[idx(i, p, k)] = av[i] * cv[k];
                }
            }
        }
        for p in 0..c {
            let mut col = jac.column_mut(off + a + b - 2 + p);
            for i in 0..a {
                for j in 0..b {
                    col[idx(i, j, p)] = av[i] * bv[j];
                }
            }
        }
    }
}

fn check_point(profile: &SecantProfile, params: &SliceParams, u: &CVector, t: &CVector) -> Result<()> {
    params.check(profile)?;
    check_len("chart coordinates", u.len(), profile.format.n_u())?;
    check_len("slice coordinates", t.len(), profile.codim)
}

/// Residual of the square system, length `abc + m`.
pub fn evaluate(profile: &SecantProfile, params: &SliceParams, u: &CVector, t: &CVector) -> Result<CVector> {
    check_point(profile, params, u, t)?;
    let abc = profile.format.ambient_dim();
    let tensor = parametrize_tensor(&profile.format, u)?;
    let top = tensor - &params.a * t - &params.b;
    let bottom = &params.h * (u - &params.u0);
    let mut out = CVector::zeros(abc + profile.fiber_dim);
    out.rows_mut(0, abc).copy_from(&top);
    out.rows_mut(abc, profile.fiber_dim).copy_from(&bottom);
    Ok(out)
}

/// Jacobian of [`evaluate`] with block structure `[dT/du, −A; H, 0]`.
pub fn jacobian(profile: &SecantProfile, params: &SliceParams, u: &CVector, t: &CVector) -> Result<ComplexMatrix> {
    check_point(profile, params, u, t)?;
    let abc = profile.format.ambient_dim();
    let n_u = profile.format.n_u();
    let mut jac = ComplexMatrix::zeros(profile.n_eqs(), profile.n_vars());
    // Only rows < abc and columns < n_u are touched.
    fill_chart_jacobian(&profile.format, u, &mut jac);
    jac.view_mut((0, n_u), (abc, profile.codim)).copy_from(&(-&params.a));
    jac.view_mut((abc, 0), (profile.fiber_dim, n_u)).copy_from(&params.h);
    Ok(jac)
}

/// `‖F(u, t)‖` at `params`.
pub fn residual_norm(profile: &SecantProfile, params: &SliceParams, u: &CVector, t: &CVector) -> Result<f64> {
    Ok(evaluate(profile, params, u, t)?.norm())
}

/// Dimension of `σ_r` as the Jacobian rank of the chart at random points,
/// with the default rank tolerance.
pub fn secant_dimension(format: &Format, seed: u64) -> Result<SecantProfile> {
    secant_dimension_with_tol(format, seed, Tolerances::default().rank_rel)
}

pub fn secant_dimension_with_tol(format: &Format, seed: u64, rel_tol: f64) -> Result<SecantProfile> {
    let ranks: Vec<usize> = (0..3)
        .map(|stream| {
            let mut rng = seeded_rng(seed, stream);
            let u = gaussian_vector(&mut rng, format.n_u());
            chart_jacobian(format, &u).map(|j| numeric_rank(&j, rel_tol).rank)
        })
        .collect::<Result<_>>()?;
    let dim = if ranks[0] == ranks[1] || ranks[0] == ranks[2] {
        ranks[0]
    } else if ranks[1] == ranks[2] {
        ranks[1]
    } else {
        return Err(Error::Disagreement { ranks });
    };
    SecantProfile::from_dim(*format, dim)
}

/// Smallest `r` whose secant variety fills `C^a ⊗ C^b ⊗ C^c`.
pub fn generic_border_rank(a: usize, b: usize, c: usize, seed: u64) -> Result<usize> {
    let base = Format::new(a, b, c, 1)?;
    let abc = base.ambient_dim();
    let fills = |r: usize| -> Result<bool> { Ok(secant_dimension(&base.with_r(r)?, seed)?.dim == abc) };
    let mut r = expected_generic_rank(a, b, c);
    if fills(r)? {
        while r > 1 && fills(r - 1)? {
            r -= 1;
        }
    } else {
        // σ_abc always fills, so the scan terminates.
        r += 1;
        while !fills(r)? {
            r += 1;
        }
    }
    Ok(r)
}

/// Seeds above this condition number are redrawn.
const SEED_CONDITION_LIMIT: f64 = 1e10;
const SEED_ATTEMPTS: u64 = 32;

/// Random slice parameters with one solution known by construction:
/// `t = 0`, `B = T(u0)`, so `u = u0` solves both blocks.
pub fn seed_witness(profile: &SecantProfile, seed: u64) -> Result<(SliceParams, Solution)> {
    if profile.codim == 0 {
        return Err(Error::FillingSecant);
    }
    system_shape(&profile.format, profile.codim)?;
    let abc = profile.format.ambient_dim();
    let n_u = profile.format.n_u();
    let m = profile.fiber_dim;
    for attempt in 0..SEED_ATTEMPTS {
        let mut rng = seeded_rng(seed, 0x5eed_0000 + attempt);
        let u0 = gaussian_vector(&mut rng, n_u);
        let a = gaussian_matrix(&mut rng, abc, profile.codim);
        let h = gaussian_matrix(&mut rng, m, n_u);
        if numeric_rank(&h, Tolerances::default().rank_rel).rank != m {
            continue;
        }
        let b = parametrize_tensor(&profile.format, &u0)?;
        let params = SliceParams { a, b, h, u0: u0.clone() };
        let t = CVector::zeros(profile.codim);
        let residual = residual_norm(profile, &params, &u0, &t)?;
        let jac = jacobian(profile, &params, &u0, &t)?;
        if condition_number(&jac) >= SEED_CONDITION_LIMIT {
            continue;
        }
        let sol = Solution {
            u: u0,
            t,
            residual_norm: residual,
        };
        return Ok((params, sol));
    }
    Err(Error::SeedFailure {
        attempts: SEED_ATTEMPTS as usize,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn flattening_rank(format: &Format, t: &CVector, mode: usize) -> usize {
        let (a, b, cc) = (format.a, format.b, format.c);
        let m = match mode {
            0 => ComplexMatrix::from_fn(a, b * cc, |i, jk| t[i * b * cc + jk]),
            1 => ComplexMatrix::from_fn(b, a * cc, |j, ik| {
                let (i, k) = (ik / cc, ik % cc);
                t[(i * b + j) * cc + k]
            }),
            _ => ComplexMatrix::from_fn(cc, a * b, |k, ij| t[ij * cc + k]),
        };
        numeric_rank(&m, 1e-10).rank
    }

    #[test]
    fn single_indicator_summand() {
        let f = Format::new(2, 2, 2, 1).unwrap();
        let u = CVector::from_vec(vec![c(0.0), c(0.0), c(1.0), c(0.0)]);
        let t = parametrize_tensor(&f, &u).unwrap();
        // (0,1) ⊗ (0,1) ⊗ (1,0): only entry (i,j,k) = (1,1,0) in 0-based indexing.
        for (idx, z) in t.iter().enumerate() {
            let want = if idx == (1 * 2 + 1) * 2 { 1.0 } else { 0.0 };
            assert_eq!(*z, c(want));
        }
    }

    #[test]
    fn cancelling_summands_give_zero() {
        let f = Format::new(2, 2, 2, 2).unwrap();
        let mut rng = seeded_rng(1, 0);
        let first = gaussian_vector(&mut rng, 4);
        let mut u = CVector::zeros(8);
        u.rows_mut(0, 4).copy_from(&first);
        u.rows_mut(4, 4).copy_from(&first);
        u[6] = -u[2];
        u[7] = -u[3];
        assert!(parametrize_tensor(&f, &u).unwrap().norm() < 1e-15);
    }

    #[test]
    fn rank_two_tensor_has_flattening_ranks_at_most_two() {
        let f = Format::new(2, 2, 2, 2).unwrap();
        let mut rng = seeded_rng(2, 0);
        let u = gaussian_vector(&mut rng, f.n_u());
        let t = parametrize_tensor(&f, &u).unwrap();
        for mode in 0..3 {
            assert!(flattening_rank(&f, &t, mode) <= 2);
        }
        let f3 = Format::new(2, 3, 3, 2).unwrap();
        let t = parametrize_tensor(&f3, &gaussian_vector(&mut rng, f3.n_u())).unwrap();
        assert_eq!(flattening_rank(&f3, &t, 2), 2);
    }

    #[test]
    fn length_mismatch_rejected() {
        let f = Format::new(2, 2, 2, 1).unwrap();
        assert!(matches!(
            parametrize_tensor(&f, &CVector::zeros(3)),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn c_columns_are_rank_one_summand_slices() {
        let f = Format::new(2, 3, 4, 2).unwrap();
        let mut rng = seeded_rng(3, 0);
        let u = gaussian_vector(&mut rng, f.n_u());
        let jac = chart_jacobian(&f, &u).unwrap();
        let s = 1;
        let (av, bv, _) = summand_factors(&f, &u, s);
        for k in 0..f.c {
            let col = jac.column(s * f.summand_len() + f.a + f.b - 2 + k);
            for i in 0..f.a {
                for j in 0..f.b {
                    for kk in 0..f.c {
                        let want = if kk == k { av[i] * bv[j] } else { c(0.0) };
                        assert_eq!(col[(i * f.b + j) * f.c + kk], want);
                    }
                }
            }
        }
    }

    #[test]
    fn scaling_a_c_block_scales_that_summand() {
        let f = Format::new(2, 3, 3, 2).unwrap();
        let mut rng = seeded_rng(4, 0);
        let u = gaussian_vector(&mut rng, f.n_u());
        let lambda = Complex64::new(0.3, -1.7);
        let mut only_first = u.clone();
        only_first.rows_mut(f.summand_len() + f.a + f.b - 2, f.c).fill(c(0.0));
        let mut scaled = u.clone();
        let k = f.summand_len();
        for p in f.a + f.b - 2..k {
            scaled[p] *= lambda;
        }
        let full = parametrize_tensor(&f, &u).unwrap();
        let first = parametrize_tensor(&f, &only_first).unwrap();
        let want = &first * lambda + (&full - &first);
        assert!((parametrize_tensor(&f, &scaled).unwrap() - want).norm() < 1e-12);
    }

    #[test]
    fn secant_dimensions_of_small_formats() {
        let p = secant_dimension(&Format::new(3, 3, 3, 4).unwrap(), 1).unwrap();
        assert_eq!((p.dim, p.codim, p.fiber_dim), (26, 1, 2));
        let p = secant_dimension(&Format::new(2, 2, 2, 2).unwrap(), 1).unwrap();
        assert_eq!((p.dim, p.codim), (8, 0));
        let p = secant_dimension(&Format::new(4, 4, 8, 9).unwrap(), 1).unwrap();
        assert_eq!((p.dim, p.codim), (126, 2));
    }

    #[test]
    fn small_generic_border_ranks() {
        assert_eq!(generic_border_rank(2, 2, 2, 0).unwrap(), 2);
        assert_eq!(generic_border_rank(3, 3, 3, 0).unwrap(), 5);
    }

    #[test]
    fn seed_is_exact_and_deterministic() {
        let f = Format::new(3, 3, 3, 4).unwrap();
        let profile = secant_dimension(&f, 0).unwrap();
        let (p1, s1) = seed_witness(&profile, 9).unwrap();
        let (p2, s2) = seed_witness(&profile, 9).unwrap();
        assert_eq!(p1, p2);
        assert_eq!(s1, s2);
        assert!(s1.residual_norm <= 1e-12);
        let jac = jacobian(&profile, &p1, &s1.u, &s1.t).unwrap();
        assert!(condition_number(&jac) < 1e10);
        // Bottom-right block is identically zero.
        let n_u = f.n_u();
        let abc = f.ambient_dim();
        assert!(jac.view((abc, n_u), (profile.fiber_dim, profile.codim)).iter().all(|z| *z == c(0.0)));
    }

    #[test]
    fn seeding_a_filling_secant_is_rejected() {
        let profile = secant_dimension(&Format::new(2, 2, 2, 2).unwrap(), 1).unwrap();
        assert!(matches!(seed_witness(&profile, 0), Err(Error::FillingSecant)));
    }

    #[test]
    fn evaluate_vanishes_when_slice_passes_through_u0() {
        let f = Format::new(2, 3, 3, 2).unwrap();
        let profile = secant_dimension(&f, 0).unwrap();
        assert!(profile.codim >= 1);
        let mut rng = seeded_rng(6, 0);
        let abc = f.ambient_dim();
        let u0 = gaussian_vector(&mut rng, f.n_u());
        let a = gaussian_matrix(&mut rng, abc, profile.codim);
        let t = gaussian_vector(&mut rng, profile.codim);
        let b = parametrize_tensor(&f, &u0).unwrap() - &a * &t;
        let h = gaussian_matrix(&mut rng, profile.fiber_dim, f.n_u());
        let params = SliceParams { a, b, h, u0: u0.clone() };
        assert!(evaluate(&profile, &params, &u0, &t).unwrap().norm() < 1e-12);
    }
}
