//! The monomial-basis operator against the full tensor power `(K^d)^{⊗m}`.

mod common;

use proptest::prelude::*;
use ultrawelch_core::symtensor::{sym_basis, sym_dim, sym_frame_operator, SymIndex};
use ultrawelch_core::{FrameConfig, Scalar};

fn kron(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

fn tensor_power(v: &[Scalar], m: u32) -> Vec<Scalar> {
    (1..m).fold(v.to_vec(), |acc, _| kron(&acc, v))
}

/// Word index -> exponent vector.
fn content(mut word: usize, d: usize, m: u32) -> SymIndex {
    let mut alpha = vec![0u32; d];
    for _ in 0..m {
        alpha[word % d] += 1;
        word /= d;
    }
    SymIndex(alpha)
}

/// Matrix of `T = Σ τ^{⊗m} (u^{⊗m})ᵀ` restricted to symmetric tensors, in the
/// basis `e_α = Σ_{words w of content α} e_w`.
fn brute_force(config: &FrameConfig, m: u32) -> Vec<Vec<Scalar>> {
    let d = config.d();
    let big = d.pow(m);
    let basis = sym_basis(d, m);
    let words: Vec<SymIndex> = (0..big).map(|w| content(w, d, m)).collect();
    let mut t = vec![vec![Scalar::zero(); big]; big];
    for (tau, u) in config.vectors().iter().zip(config.functionals()) {
        let tp = tensor_power(tau, m);
        let up = tensor_power(u, m);
        for i in 0..big {
            for j in 0..big {
                t[i][j] = &t[i][j] + &(&tp[i] * &up[j]);
            }
        }
    }
    let mut out = vec![vec![Scalar::zero(); basis.len()]; basis.len()];
    for (col, alpha) in basis.iter().enumerate() {
        let e: Vec<Scalar> = words.iter().map(|w| if w == alpha { Scalar::one() } else { Scalar::zero() }).collect();
        let image: Vec<Scalar> =
            t.iter().map(|row| row.iter().zip(&e).map(|(a, b)| a * b).sum()).collect();
        // The image is symmetric; read each coordinate off any word of that content.
        for (row, beta) in basis.iter().enumerate() {
            let w = words.iter().position(|w| w == beta).unwrap();
            out[row][col] = image[w].clone();
        }
        for (w, word) in words.iter().enumerate() {
            let row = basis.iter().position(|b| b == word).unwrap();
            assert_eq!(image[w], out[row][col], "image is not a symmetric tensor");
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn d2_m2_matches_tensor_power(c in common::config(2, 4).prop_filter("d = 2", |c| c.d() == 2)) {
        let op = sym_frame_operator(&c, 2).unwrap();
        prop_assert_eq!(op.matrix.to_rows(), brute_force(&c, 2));
    }

    #[test]
    fn small_orders_match_tensor_power(c in common::config(3, 3), m in 1u32..=3) {
        let op = sym_frame_operator(&c, m).unwrap();
        prop_assert_eq!(op.dim, sym_dim(c.d(), m).try_into().unwrap());
        prop_assert_eq!(op.matrix.to_rows(), brute_force(&c, m));
    }
}
