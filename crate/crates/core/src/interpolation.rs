//! Interpolation certificates: does some degree-`q` form vanish on the
//! sampled slice points?
//!
//! Points `t ∈ C^ℓ` are homogenized to `s = (t, 1)`, scaled to unit norm and
//! evaluated on every degree-`q` monomial in `ℓ+1` variables. A full column
//! rank of that matrix means no nonzero form of degree `q` vanishes on them.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::monodromy::WitnessSet;
use crate::numerics::{numeric_rank, CVector, ComplexMatrix, Tolerances};

/// Exponent vectors of all degree-`q` monomials in `n_vars` variables, in
/// graded lexicographic order (for `n_vars = 2, q = 2`: `x², xy, y²`).
pub fn homogeneous_monomials(n_vars: usize, q: u32) -> Vec<Vec<u32>> {
    fn fill(prefix: &mut Vec<u32>, remaining_vars: usize, degree: u32, out: &mut Vec<Vec<u32>>) {
        if remaining_vars == 1 {
            prefix.push(degree);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=degree).rev() {
            prefix.push(e);
            fill(prefix, remaining_vars - 1, degree - e, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n_vars == 0 {
        return out;
    }
    fill(&mut Vec::with_capacity(n_vars), n_vars, q, &mut out);
    out
}

/// `C(n, k)` as an exact integer (saturating).
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        acc = acc.saturating_mul(n as u128 - k as u128 + i) / i;
    }
    acc
}

fn homogenize(t: &CVector) -> Vec<Complex64> {
    let mut s: Vec<Complex64> = t.iter().copied().collect();
    s.push(Complex64::new(1.0, 0.0));
    let norm = s.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    s.iter().map(|z| z / norm).collect()
}

fn scale_row_to_unit_max(row: &mut [Complex64]) {
    let max = row.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max > 0.0 {
        row.iter_mut().for_each(|z| *z /= max);
    }
}

/// Monomial evaluation matrix: one row per point, one column per monomial.
pub fn build_matrix(points_t: &[CVector], q: u32) -> Result<ComplexMatrix> {
    let first = points_t.first().ok_or(Error::Empty("interpolation points"))?;
    let ell = first.len();
    if let Some(bad) = points_t.iter().find(|p| p.len() != ell) {
        return Err(Error::ShapeMismatch(format!(
            "interpolation point of length {} among points of length {ell}",
            bad.len()
        )));
    }
    let monomials = homogeneous_monomials(ell + 1, q);
    let mut data = Vec::with_capacity(points_t.len() * monomials.len());
    for t in points_t {
        let s = homogenize(t);
        let start = data.len();
        data.extend(monomials.iter().map(|exps| {
            s.iter()
                .zip(exps)
                .fold(Complex64::new(1.0, 0.0), |acc, (z, &e)| acc * z.powu(e))
        }));
        scale_row_to_unit_max(&mut data[start..]);
    }
    Ok(ComplexMatrix::from_row_slice(points_t.len(), monomials.len(), &data))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterpolationVerdict {
    pub q: u32,
    pub n_monomials: usize,
    pub n_points: usize,
    pub rank: usize,
    pub full_rank: bool,
    /// `σ_rank / σ_max`: how far the weakest kept direction is from the cutoff.
    pub smallest_kept_sv_ratio: f64,
    /// Fewer points than monomials: the verdict can refute but never certify.
    pub insufficient_points: bool,
}

pub fn verdict_for_points(points_t: &[CVector], q: u32, rel_tol: f64) -> Result<InterpolationVerdict> {
    let m = build_matrix(points_t, q)?;
    let report = numeric_rank(&m, rel_tol);
    let ratio = match (report.singular_values.first(), report.rank) {
        (Some(&smax), rank) if rank > 0 && smax > 0.0 => report.singular_values[rank - 1] / smax,
        _ => 0.0,
    };
    let n_monomials = m.ncols();
    Ok(InterpolationVerdict {
        q,
        n_monomials,
        n_points: m.nrows(),
        rank: report.rank,
        full_rank: report.rank == n_monomials,
        smallest_kept_sv_ratio: ratio,
        insufficient_points: m.nrows() < n_monomials,
    })
}

/// Rank test on the slice coordinates of a witness set.
pub fn nonvanishing(ws: &WitnessSet, q: u32) -> Result<InterpolationVerdict> {
    nonvanishing_with_tol(ws, q, Tolerances::default().rank_rel)
}

pub fn nonvanishing_with_tol(ws: &WitnessSet, q: u32, rel_tol: f64) -> Result<InterpolationVerdict> {
    let points: Vec<CVector> = ws.solutions.iter().map(|s| s.t.clone()).collect();
    verdict_for_points(&points, q, rel_tol)
}
