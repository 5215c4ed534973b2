//! Small-scale checks of the symmetric basis of Kronecker powers.
//!
//! For `V = C^{abc}` and a composition `g: Δ → N` with `Σ g = q`, the vector
//! `T^(g)` is the sum of `e_{δ_1} ⊗ … ⊗ e_{δ_q}` over all distinct arrangements
//! of the multiset `g`, and `T^{⊗q} = Σ_g T^g · T^(g)` with `T^g = Π T_δ^{g(δ)}`.
//! Everything here is dense and guarded by [`SIZE_GUARD`].

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::interpolation::binomial;
use crate::numerics::{gaussian_vector, numeric_rank, CVector, ComplexMatrix, Tolerances};

/// Largest `(abc)^q` any function here will materialize.
pub const SIZE_GUARD: u64 = 10_000_000;

fn power_len(n: usize, q: u32) -> Result<usize> {
    match (n as u64).checked_pow(q) {
        Some(len) if len <= SIZE_GUARD => Ok(len as usize),
        _ => Err(Error::SizeGuard(format!("{n}^{q} exceeds {SIZE_GUARD}"))),
    }
}

/// Multiplicities `g(δ)` over the flattened index set `Δ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CompositionIndex {
    pub counts: Vec<u32>,
}

impl CompositionIndex {
    pub fn new(counts: Vec<u32>) -> Self {
        Self { counts }
    }

    pub fn degree(&self) -> u32 {
        self.counts.iter().sum()
    }

    /// The multiset as a nondecreasing list of cells.
    pub fn sorted_cells(&self) -> Vec<usize> {
        self.counts
            .iter()
            .enumerate()
            .flat_map(|(d, &k)| std::iter::repeat_n(d, k as usize))
            .collect()
    }

    /// `q! / Π g(δ)!`, the number of distinct arrangements.
    pub fn multinomial(&self) -> u128 {
        let mut acc: u128 = 1;
        let mut placed = 0u64;
        for &k in &self.counts {
            placed += k as u64;
            acc *= binomial(placed, k as u64);
        }
        acc
    }
}

/// All compositions of `q` into `n_cells` parts, in lexicographic order of
/// their sorted cell lists. There are `C(n_cells + q − 1, q)` of them.
pub fn compositions(n_cells: usize, q: u32) -> Vec<CompositionIndex> {
    let mut out = Vec::new();
    if n_cells == 0 {
        return out;
    }
    let mut cells = vec![0usize; q as usize];
    loop {
        let mut counts = vec![0u32; n_cells];
        for &d in &cells {
            counts[d] += 1;
        }
        out.push(CompositionIndex::new(counts));
        // Next nondecreasing sequence.
        let Some(pos) = cells.iter().rposition(|&d| d + 1 < n_cells) else {
            break;
        };
        let v = cells[pos] + 1;
        cells[pos..].iter_mut().for_each(|d| *d = v);
    }
    out
}

pub fn kronecker_power(t: &CVector, q: u32) -> Result<CVector> {
    if q == 0 {
        return Err(Error::Domain("Kronecker power needs q ≥ 1".into()));
    }
    let len = power_len(t.len(), q)?;
    let mut acc = t.clone();
    for _ in 1..q {
        acc = acc.kronecker(t);
    }
    debug_assert_eq!(acc.len(), len);
    Ok(acc)
}

/// The monomial `T^g`.
pub fn coefficient(t: &CVector, g: &CompositionIndex) -> Complex64 {
    t.iter()
        .zip(&g.counts)
        .filter(|(_, &k)| k > 0)
        .fold(Complex64::new(1.0, 0.0), |acc, (z, &k)| acc * z.powu(k))
}

/// Sparse vector with unit entries at the listed positions.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    pub len: usize,
    /// Sorted, distinct positions.
    pub indices: Vec<usize>,
}

impl SparseVector {
    pub fn to_dense(&self) -> CVector {
        let mut v = CVector::zeros(self.len);
        for &i in &self.indices {
            v[i] = Complex64::new(1.0, 0.0);
        }
        v
    }
}

fn flat_index(cells: &[usize], n: usize) -> usize {
    cells.iter().fold(0, |acc, &d| acc * n + d)
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = v.iter().rposition(|&x| x > v[i]).expect("a larger element exists");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// `T^(g)`: one unit entry per distinct arrangement of `g`, no multinomial weight.
pub fn basis_vector(g: &CompositionIndex) -> Result<SparseVector> {
    let n = g.counts.len();
    let q = g.degree();
    let len = power_len(n, q)?;
    let mut cells = g.sorted_cells();
    let mut indices = vec![flat_index(&cells, n)];
    while next_permutation(&mut cells) {
        indices.push(flat_index(&cells, n));
    }
    indices.sort_unstable();
    Ok(SparseVector { len, indices })
}

/// `‖T^{⊗q} − Σ_g T^g T^(g)‖`.
pub fn verify_decomposition(t: &CVector, q: u32) -> Result<f64> {
    let power = kronecker_power(t, q)?;
    let mut rebuilt = CVector::zeros(power.len());
    for g in compositions(t.len(), q) {
        let coeff = coefficient(t, &g);
        for i in basis_vector(&g)?.indices {
            rebuilt[i] += coeff;
        }
    }
    Ok((power - rebuilt).norm())
}

/// Numerical rank of Kronecker powers of random tensors, read off at one
/// coordinate per composition (the sorted arrangement).
pub fn span_dimension<R: Rng + ?Sized>(a: usize, b: usize, c: usize, q: u32, n_samples: usize, rng: &mut R) -> Result<usize> {
    let n = a * b * c;
    if n == 0 || q == 0 {
        return Err(Error::Domain("span_dimension needs positive sides and q ≥ 1".into()));
    }
    power_len(n, q)?;
    let comps = compositions(n, q);
    let needed = comps.len() + 5;
    if n_samples < needed {
        return Err(Error::Domain(format!(
            "span_dimension needs at least {needed} samples, got {n_samples}"
        )));
    }
    let coords: Vec<usize> = comps.iter().map(|g| flat_index(&g.sorted_cells(), n)).collect();
    let mut m = ComplexMatrix::zeros(n_samples, coords.len());
    for row in 0..n_samples {
        let power = kronecker_power(&gaussian_vector(rng, n), q)?;
        for (col, &idx) in coords.iter().enumerate() {
            m[(row, col)] = power[idx];
        }
    }
    Ok(numeric_rank(&m, Tolerances::default().rank_rel).rank)
}
