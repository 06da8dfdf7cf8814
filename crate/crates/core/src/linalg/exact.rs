//! Dense linear algebra over `Q`: characteristic polynomials, rational roots,
//! rank, null spaces and inverses.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::scalar::Rational;

pub type RatMatrix = Vec<Vec<Rational>>;

/// Polynomial with coefficients stored lowest degree first.
pub type Poly = Vec<Rational>;

pub fn identity(n: usize) -> RatMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
        .collect()
}

pub fn mat_mul(a: &RatMatrix, b: &RatMatrix) -> RatMatrix {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut acc = Rational::zero();
                    for k in 0..inner {
                        if !row[k].is_zero() && !b[k][j].is_zero() {
                            acc += &row[k] * &b[k][j];
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

fn trace(a: &RatMatrix) -> Rational {
    a.iter().enumerate().map(|(i, row)| row[i].clone()).sum()
}

/// `det(xI - A)` by Faddeev–LeVerrier; monic, degree `n`.
pub fn charpoly(a: &RatMatrix) -> Poly {
    let n = a.len();
    let mut coeffs = vec![Rational::zero(); n + 1];
    coeffs[n] = Rational::one();
    let mut m = vec![vec![Rational::zero(); n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = mat_mul(a, &m);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += &coeffs[n - k + 1];
        }
        m = next;
        let am = mat_mul(a, &m);
        coeffs[n - k] = -trace(&am) / Rational::from_integer(BigInt::from(k));
    }
    coeffs
}

pub fn eval(poly: &Poly, x: &Rational) -> Rational {
    poly.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
}

/// Divides by `(x - r)`, assuming `r` is a root.
fn deflate(poly: &Poly, r: &Rational) -> Poly {
    let deg = poly.len() - 1;
    let mut out = vec![Rational::zero(); deg];
    let mut carry = Rational::zero();
    for i in (1..=deg).rev() {
        carry = &poly[i] + &carry * r;
        out[i - 1] = carry.clone();
    }
    out
}

/// Largest trial divisor used when factoring constant and leading terms.
const TRIAL_LIMIT: u64 = 1_000_000;

/// Rational roots with algebraic multiplicities, in increasing order.
///
/// The second value is `false` when a cofactor could not be fully factored
/// below the trial-division limit; roots may then be missing.
pub fn rational_roots(poly: &Poly) -> (Vec<(Rational, usize)>, bool) {
    let mut poly: Poly = poly.clone();
    while poly.len() > 1 && poly.last().is_some_and(Zero::is_zero) {
        poly.pop();
    }
    let mut roots = Vec::new();
    let zeros = poly.iter().take_while(|c| c.is_zero()).count();
    if zeros > 0 {
        roots.push((Rational::zero(), zeros));
        poly.drain(..zeros);
    }
    if poly.len() <= 1 {
        return (roots, true);
    }
    let ints = primitive_integer_coeffs(&poly);
    let (low, low_ok) = divisors(&ints[0]);
    let (high, high_ok) = divisors(ints.last().expect("nonconstant"));
    let mut candidates: Vec<Rational> = Vec::new();
    for p in &low {
        for q in &high {
            let r = Rational::new(p.clone(), q.clone());
            candidates.push(r.clone());
            candidates.push(-r);
        }
    }
    candidates.sort();
    candidates.dedup();
    for r in candidates {
        let mut mult = 0;
        while poly.len() > 1 && eval(&poly, &r).is_zero() {
            poly = deflate(&poly, &r);
            mult += 1;
        }
        if mult > 0 {
            roots.push((r, mult));
        }
        if poly.len() <= 1 {
            break;
        }
    }
    roots.sort_by(|a, b| a.0.cmp(&b.0));
    (roots, low_ok && high_ok)
}

fn primitive_integer_coeffs(poly: &Poly) -> Vec<BigInt> {
    let lcm = poly.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = poly.iter().map(|c| (c * Rational::from_integer(lcm.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    ints.into_iter().map(|c| c / &g).collect()
}

/// Positive divisors of a nonzero integer by trial division.
fn divisors(n: &BigInt) -> (Vec<BigInt>, bool) {
    let mut m = n.abs();
    let mut factors: Vec<(BigInt, u32)> = Vec::new();
    let mut q = 2u64;
    while q <= TRIAL_LIMIT {
        let qb = BigInt::from(q);
        if &qb * &qb > m {
            break;
        }
        let mut e = 0;
        while (&m % &qb).is_zero() {
            m /= &qb;
            e += 1;
        }
        if e > 0 {
            factors.push((qb, e));
        }
        q += 1;
    }
    let complete = {
        let limit = BigInt::from(TRIAL_LIMIT);
        m <= &limit * &limit
    };
    if !m.is_one() {
        factors.push((m, 1));
    }
    let mut divs = vec![BigInt::one()];
    for (p, e) in factors {
        let mut next = Vec::with_capacity(divs.len() * (e as usize + 1));
        for d in &divs {
            let mut pk = BigInt::one();
            for _ in 0..=e {
                next.push(d * &pk);
                pk *= &p;
            }
        }
        divs = next;
    }
    (divs, complete)
}

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref(a: &mut RatMatrix) -> Vec<usize> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                let pivot_row = a[r].clone();
                for (x, y) in a[i].iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(a: &RatMatrix) -> usize {
    let mut a = a.clone();
    rref(&mut a).len()
}

/// Basis of `{x : A x = 0}`.
pub fn nullspace(a: &RatMatrix) -> Vec<Vec<Rational>> {
    let cols = a.first().map_or(0, Vec::len);
    let mut r = a.clone();
    let pivots = rref(&mut r);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); cols];
            v[f] = Rational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -r[row][f].clone();
            }
            v
        })
        .collect()
}

pub fn inverse(a: &RatMatrix) -> Option<RatMatrix> {
    let n = a.len();
    let mut aug: RatMatrix = a
        .iter()
        .zip(identity(n))
        .map(|(row, id)| row.iter().cloned().chain(id).collect())
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(aug.into_iter().map(|row| row[n..].to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    fn m(rows: &[&[i64]]) -> RatMatrix {
        rows.iter().map(|row| row.iter().map(|&x| r(x)).collect()).collect()
    }

    #[test]
    fn charpoly_small() {
        // [[0,1],[2,0]] -> x^2 - 2
        assert_eq!(charpoly(&m(&[&[0, 1], &[2, 0]])), vec![r(-2), r(0), r(1)]);
        // Upper-triangular: product of (x - a_ii).
        let p = charpoly(&m(&[&[1, 5, 7], &[0, 2, 3], &[0, 0, 3]]));
        assert_eq!(p, vec![r(-6), r(11), r(-6), r(1)]);
    }

    #[test]
    fn roots_with_multiplicity() {
        // (x - 1/2)^2 (x + 3) x = x^4 + 2x^3 - 11/4 x^2 + 3/4 x
        let half = Rational::new(1.into(), 2.into());
        let poly = vec![r(0), Rational::new(3.into(), 4.into()), Rational::new((-11).into(), 4.into()), r(2), r(1)];
        let (roots, complete) = rational_roots(&poly);
        assert!(complete);
        assert_eq!(roots, vec![(r(-3), 1), (r(0), 1), (half, 2)]);
        assert!(rational_roots(&vec![r(-2), r(0), r(1)]).0.is_empty());
    }

    #[test]
    fn nullspace_and_inverse() {
        let a = m(&[&[1, 2], &[2, 4]]);
        assert_eq!(rank(&a), 1);
        let ns = nullspace(&a);
        assert_eq!(ns, vec![vec![r(-2), r(1)]]);
        assert!(inverse(&a).is_none());
        let b = m(&[&[2, 1], &[1, 1]]);
        let inv = inverse(&b).unwrap();
        assert_eq!(mat_mul(&b, &inv), identity(2));
    }
}
