//! Tensor formats and the bookkeeping around the chart parametrization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A tensor format `C^a ⊗ C^b ⊗ C^c` together with a secant index `r`.
///
/// Sides are sorted on construction so that `a ≤ b ≤ c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Format {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub r: usize,
}

impl Format {
    pub fn new(a: usize, b: usize, c: usize, r: usize) -> Result<Self> {
        if a == 0 || b == 0 || c == 0 {
            return Err(Error::InvalidFormat(format!(
                "sides must be positive, got ({a},{b},{c})"
            )));
        }
        if r == 0 {
            return Err(Error::InvalidFormat("secant index r must be positive".into()));
        }
        let [a, b, c] = sorted_sides(a, b, c);
        Ok(Self { a, b, c, r })
    }

    /// Same sides, different secant index.
    pub fn with_r(self, r: usize) -> Result<Self> {
        Self::new(self.a, self.b, self.c, r)
    }

    pub fn sides(&self) -> [usize; 3] {
        [self.a, self.b, self.c]
    }

    pub fn ambient_dim(&self) -> usize {
        self.a * self.b * self.c
    }

    /// Chart unknowns per rank-one summand: `(a−1) + (b−1) + c`.
    pub fn summand_len(&self) -> usize {
        self.a + self.b + self.c - 2
    }

    /// Total chart unknowns `n_u = r·(a+b+c−2)`.
    pub fn n_u(&self) -> usize {
        self.r * self.summand_len()
    }

    pub fn is_concise(&self) -> bool {
        is_concise(self.a, self.b, self.c)
    }
}

impl std::fmt::Display for Format {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "σ_{}(C^{}⊗C^{}⊗C^{})", self.r, self.a, self.b, self.c)
    }
}

fn sorted_sides(a: usize, b: usize, c: usize) -> [usize; 3] {
    let mut s = [a, b, c];
    s.sort_unstable();
    s
}

/// Conciseness of the format: after sorting, `c < a·b`.
pub fn is_concise(a: usize, b: usize, c: usize) -> bool {
    let [a, b, c] = sorted_sides(a, b, c);
    c < a * b
}

/// Size of the square slicing system for a secant variety of codimension `codim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemShape {
    pub n_vars: usize,
    pub n_eqs: usize,
    /// Entries of the slice matrix `A` and offset `B`.
    pub n_params: usize,
    /// Number of fiber-slice equations `m`.
    pub n_fiber_slices: usize,
}

pub fn system_shape(format: &Format, codim: usize) -> Result<SystemShape> {
    if codim == 0 {
        return Err(Error::FillingSecant);
    }
    let abc = format.ambient_dim();
    let n_vars = format.n_u() + codim;
    let m = n_vars as i64 - abc as i64;
    if m < 0 {
        return Err(Error::NegativeFiberCount(m));
    }
    let m = m as usize;
    Ok(SystemShape {
        n_vars,
        n_eqs: abc + m,
        n_params: abc * (codim + 1),
        n_fiber_slices: m,
    })
}

/// Parameter-count guess `⌈abc/(a+b+c−2)⌉` for the generic border rank.
///
/// Only a starting point for [`crate::segre::generic_border_rank`]; defective
/// formats differ from it.
pub fn expected_generic_rank(a: usize, b: usize, c: usize) -> usize {
    let abc = a * b * c;
    let per_summand = (a + b + c).saturating_sub(2).max(1);
    abc.div_ceil(per_summand).max(1)
}
