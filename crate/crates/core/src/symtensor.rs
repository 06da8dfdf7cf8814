//! Symmetric tensor powers `Sym^m(K^d)` in the monomial basis.
//!
//! Vectors lift to plain monomials, `τ ↦ (τ^α)_α`, and functionals lift with
//! multinomial weights, `u ↦ (multinomial(m; α)·u^α)_α`. With this pairing,
//! `⟨lift(u), lift(τ)⟩ = (Σ_i u_i τ_i)^m` holds without dividing by any
//! integer, so no valuation changes are introduced.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{FrameConfig, Matrix};
use crate::scalar::{binomial, Scalar};

/// Largest symmetric-power dimension `sym_frame_operator` will build.
pub const MAX_SYM_DIM: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymError {
    #[error("symmetric power order must be at least 1")]
    ZeroOrder,
    #[error("Sym^{m} of dimension {d} has dimension {dim}, above the limit {MAX_SYM_DIM}")]
    TooLarge { d: usize, m: u32, dim: BigUint },
}

/// Exponent vector `α` with `|α| = m`; serialized as the plain array.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SymIndex(pub Vec<u32>);

impl SymIndex {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

/// `dim Sym^m(K^d) = C(d+m-1, m)`.
pub fn sym_dim(d: usize, m: u32) -> BigUint {
    if d == 0 {
        return BigUint::from(0u8);
    }
    binomial((d as u64) + u64::from(m) - 1, u64::from(m))
}

/// Monomial basis in descending lexicographic order, e.g. `(2,0), (1,1), (0,2)`.
pub fn sym_basis(d: usize, m: u32) -> Vec<SymIndex> {
    fn rec(d: usize, m: u32, prefix: &mut Vec<u32>, out: &mut Vec<SymIndex>) {
        if prefix.len() + 1 == d {
            prefix.push(m);
            out.push(SymIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for first in (0..=m).rev() {
            prefix.push(first);
            rec(d, m - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if d > 0 {
        rec(d, m, &mut Vec::with_capacity(d), &mut out);
    }
    out
}

/// `m! / Π α_i!`.
pub fn multinomial(alpha: &SymIndex) -> BigUint {
    let mut acc = BigUint::from(1u8);
    let mut total = 0u64;
    for &a in &alpha.0 {
        total += u64::from(a);
        acc *= binomial(total, u64::from(a));
    }
    acc
}

fn monomial(x: &[Scalar], alpha: &SymIndex) -> Scalar {
    let mut acc = Scalar::one();
    for (xi, &a) in x.iter().zip(&alpha.0) {
        if a > 0 {
            acc = &acc * &xi.pow(a);
        }
    }
    acc
}

/// Coordinates of `τ^{⊗m}`: `τ^α` over the basis.
pub fn lift_vector(tau: &[Scalar], m: u32) -> Vec<Scalar> {
    sym_basis(tau.len(), m).iter().map(|a| monomial(tau, a)).collect()
}

/// Coefficients of `f^{⊗m}`: `multinomial(m; α)·u^α` over the basis.
pub fn lift_functional(u: &[Scalar], m: u32) -> Vec<Scalar> {
    sym_basis(u.len(), m)
        .iter()
        .map(|a| {
            let w = Scalar::Rational(crate::scalar::Rational::from_integer(multinomial(a).into()));
            &w * &monomial(u, a)
        })
        .collect()
}

/// `S_{f,τ}` on `Sym^m`, in the [`sym_basis`] order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymOperator {
    pub m: u32,
    pub dim: usize,
    pub basis: Vec<SymIndex>,
    pub matrix: Matrix,
}

fn checked_dim(d: usize, m: u32) -> Result<usize, SymError> {
    if m == 0 {
        return Err(SymError::ZeroOrder);
    }
    let dim = sym_dim(d, m);
    match dim.to_usize() {
        Some(x) if x <= MAX_SYM_DIM => Ok(x),
        _ => Err(SymError::TooLarge { d, m, dim }),
    }
}

/// `Σ_j lift_vector(τ_j)·lift_functional(f_j)ᵀ`.
pub fn sym_frame_operator(config: &FrameConfig, m: u32) -> Result<SymOperator, SymError> {
    let dim = checked_dim(config.d(), m)?;
    let mut matrix = Matrix::zeros(dim, dim);
    for (tau, u) in config.vectors().iter().zip(config.functionals()) {
        matrix.add_outer(&lift_vector(tau, m), &lift_functional(u, m));
    }
    Ok(SymOperator { m, dim, basis: sym_basis(config.d(), m), matrix })
}

/// Same operator, with the sum over `j` split across rayon workers.
pub fn sym_frame_operator_par(config: &FrameConfig, m: u32) -> Result<SymOperator, SymError> {
    use rayon::prelude::*;
    let dim = checked_dim(config.d(), m)?;
    let matrix = (0..config.n())
        .into_par_iter()
        .fold(
            || Matrix::zeros(dim, dim),
            |mut acc, j| {
                acc.add_outer(&lift_vector(&config.vectors()[j], m), &lift_functional(&config.functionals()[j], m));
                acc
            },
        )
        .reduce(
            || Matrix::zeros(dim, dim),
            |mut a, b| {
                a.add_assign(&b);
                a
            },
        );
    Ok(SymOperator { m, dim, basis: sym_basis(config.d(), m), matrix })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, frame_operator};
    use crate::scalar::Backend;

    fn ints(xs: &[i64]) -> Vec<Scalar> {
        xs.iter().map(|&x| Scalar::from_int(x)).collect()
    }

    #[test]
    fn sym_dim_examples() {
        assert_eq!(sym_dim(4, 2), BigUint::from(10u8));
        for d in 1..8 {
            assert_eq!(sym_dim(d, 1), BigUint::from(d));
        }
        assert_eq!(sym_dim(2, 3), BigUint::from(4u8));
    }

    #[test]
    fn basis_order_and_size() {
        let b = sym_basis(2, 2);
        assert_eq!(b, vec![SymIndex(vec![2, 0]), SymIndex(vec![1, 1]), SymIndex(vec![0, 2])]);
        for d in 1..5 {
            for m in 1..5 {
                let b = sym_basis(d, m);
                assert_eq!(BigUint::from(b.len()), sym_dim(d, m));
                assert!(b.windows(2).all(|w| w[0] > w[1]));
                assert!(b.iter().all(|a| a.degree() == m));
            }
        }
        assert_eq!(serde_json::to_string(&SymIndex(vec![2, 0, 1])).unwrap(), "[2,0,1]");
    }

    #[test]
    fn lift_examples() {
        assert_eq!(lift_vector(&ints(&[1, 0]), 2), ints(&[1, 0, 0]));
        assert_eq!(lift_vector(&ints(&[1, 1]), 2), ints(&[1, 1, 1]));
        assert_eq!(lift_vector(&ints(&[2, 3]), 2), ints(&[4, 6, 9]));
        assert_eq!(lift_functional(&ints(&[1, 0]), 2), ints(&[1, 0, 0]));
        assert_eq!(lift_functional(&ints(&[1, 1]), 2), ints(&[1, 2, 1]));
        let pairing = dot(&lift_functional(&ints(&[1, 1]), 2), &lift_vector(&ints(&[2, 3]), 2));
        assert_eq!(pairing, Scalar::from_int(25));
    }

    #[test]
    fn sym_operator_examples() {
        let p3 = Backend::padic(3).unwrap();
        let s = sym_frame_operator(&FrameConfig::standard_basis(p3, 2), 2).unwrap();
        assert_eq!(s.matrix, Matrix::from_ints(&[&[1, 0, 0], &[0, 0, 0], &[0, 0, 1]]));

        let line = FrameConfig::new(p3, vec![ints(&[1]), ints(&[1])], vec![ints(&[1]), ints(&[1])]).unwrap();
        assert_eq!(sym_frame_operator(&line, 3).unwrap().matrix, Matrix::from_ints(&[&[2]]));

        let c = FrameConfig::new(
            p3,
            vec![ints(&[1, 2]), ints(&[0, 5]), ints(&[-1, 1])],
            vec![ints(&[3, 1]), ints(&[2, 2]), ints(&[0, -4])],
        )
        .unwrap();
        assert_eq!(sym_frame_operator(&c, 1).unwrap().matrix, frame_operator(&c));
        assert_eq!(sym_frame_operator_par(&c, 3).unwrap(), sym_frame_operator(&c, 3).unwrap());
    }

    #[test]
    fn guards() {
        let c = FrameConfig::standard_basis(Backend::Laurent, 30);
        assert!(matches!(sym_frame_operator(&c, 4), Err(SymError::TooLarge { .. })));
        assert_eq!(sym_frame_operator(&c, 0).unwrap_err(), SymError::ZeroOrder);
    }

    #[test]
    fn pascal_recurrence() {
        for d in 1..=12usize {
            assert_eq!(sym_dim(1, d as u32), BigUint::from(1u8));
            for m in 1..=12u32 {
                if d > 1 && m > 1 {
                    assert_eq!(sym_dim(d, m), sym_dim(d - 1, m) + sym_dim(d, m - 1));
                }
            }
        }
    }
}
