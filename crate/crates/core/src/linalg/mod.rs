//! Exact matrices, frame configurations and the two hypothesis checkers.
//!
//! A configuration is a family of vectors `τ_j ∈ K^d` together with
//! functionals `f_j ∈ (K^d)*`, stored as coefficient rows so that
//! `f_j(x) = Σ_i u_j[i]·x[i]`. Its frame operator is `S = Σ_j τ_j u_jᵀ` and
//! its Gram matrix is `G[j][k] = f_j(τ_k)`. Both share the trace data
//! `tr S = tr G` and `tr S² = tr G²`.

pub mod exact;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{AbsValue, Backend, Rational, Scalar, ScalarError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("configuration needs at least one vector and dimension d >= 1")]
    Empty,
    #[error("{vectors} vectors but {functionals} functionals")]
    CountMismatch { vectors: usize, functionals: usize },
    #[error("{what} {index} has {found} entries, expected d = {expected}")]
    DimensionMismatch { what: &'static str, index: usize, expected: usize, found: usize },
    #[error("declared {field} = {declared} but data has {actual}")]
    DeclaredSize { field: &'static str, declared: usize, actual: usize },
    #[error("{what} {index}: {source}")]
    Entry { what: &'static str, index: usize, source: ScalarError },
    #[error("matrix entry ({row}, {col}) = {value} is not a rational constant")]
    NonRational { row: usize, col: usize, value: String },
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
}

/// Dense row-major matrix of exact scalars.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Scalar::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Matrix::scalar_identity(n, Scalar::one())
    }

    pub fn scalar_identity(n: usize, b: Scalar) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = b.clone();
        }
        m
    }

    /// Panics on ragged input.
    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix rows");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_ints(rows: &[&[i64]]) -> Self {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| Scalar::from_int(x)).collect()).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Scalar>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.data
    }

    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matrix product");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] = &out[(i, j)] + &(a * b);
                    }
                }
            }
        }
        out
    }

    pub fn add_assign(&mut self, rhs: &Matrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            if !b.is_zero() {
                *a = &*a + b;
            }
        }
    }

    /// `self += col · rowᵀ`.
    pub fn add_outer(&mut self, col: &[Scalar], row: &[Scalar]) {
        assert_eq!((self.rows, self.cols), (col.len(), row.len()));
        for (i, c) in col.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (j, r) in row.iter().enumerate() {
                if !r.is_zero() {
                    let idx = i * self.cols + j;
                    self.data[idx] = &self.data[idx] + &(c * r);
                }
            }
        }
    }

    /// Sum of the diagonal. Panics if not square.
    pub fn trace(&self) -> Scalar {
        assert!(self.is_square(), "trace of a non-square matrix");
        (0..self.rows).map(|i| self[(i, i)].clone()).sum()
    }

    /// `tr(M²) = Σ_{i,k} M[i][k]·M[k][i]` without forming the product.
    pub fn trace_of_square(&self) -> Scalar {
        assert!(self.is_square(), "trace of a non-square matrix");
        let mut acc = Scalar::zero();
        for i in 0..self.rows {
            for k in 0..self.rows {
                let (a, b) = (&self[(i, k)], &self[(k, i)]);
                if !a.is_zero() && !b.is_zero() {
                    acc = &acc + &(a * b);
                }
            }
        }
        acc
    }

    /// Entries as rationals, or the first non-constant entry.
    pub fn to_rational(&self) -> Result<exact::RatMatrix, LinalgError> {
        let mut out = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut row = Vec::with_capacity(self.cols);
            for j in 0..self.cols {
                match &self[(i, j)] {
                    Scalar::Rational(r) => row.push(r.clone()),
                    other => {
                        return Err(LinalgError::NonRational { row: i, col: j, value: other.to_string() })
                    }
                }
            }
            out.push(row);
        }
        Ok(out)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Scalar;

    fn index(&self, (i, j): (usize, usize)) -> &Scalar {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Scalar {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Serialize for Matrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

/// Vectors `τ_1..τ_n` and functionals `f_1..f_n` over one backend.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawFrameConfig")]
pub struct FrameConfig {
    backend: Backend,
    d: usize,
    n: usize,
    vectors: Vec<Vec<Scalar>>,
    functionals: Vec<Vec<Scalar>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFrameConfig {
    backend: Backend,
    d: usize,
    n: usize,
    vectors: Vec<Vec<Scalar>>,
    functionals: Vec<Vec<Scalar>>,
}

impl TryFrom<RawFrameConfig> for FrameConfig {
    type Error = LinalgError;

    fn try_from(raw: RawFrameConfig) -> Result<Self, Self::Error> {
        let c = FrameConfig::new(raw.backend, raw.vectors, raw.functionals)?;
        if c.d != raw.d {
            return Err(LinalgError::DeclaredSize { field: "d", declared: raw.d, actual: c.d });
        }
        if c.n != raw.n {
            return Err(LinalgError::DeclaredSize { field: "n", declared: raw.n, actual: c.n });
        }
        Ok(c)
    }
}

impl FrameConfig {
    pub fn new(
        backend: Backend,
        vectors: Vec<Vec<Scalar>>,
        functionals: Vec<Vec<Scalar>>,
    ) -> Result<Self, LinalgError> {
        let n = vectors.len();
        let d = vectors.first().map_or(0, Vec::len);
        if n == 0 || d == 0 {
            return Err(LinalgError::Empty);
        }
        if functionals.len() != n {
            return Err(LinalgError::CountMismatch { vectors: n, functionals: functionals.len() });
        }
        for (what, family) in [("vector", &vectors), ("functional", &functionals)] {
            for (index, v) in family.iter().enumerate() {
                if v.len() != d {
                    return Err(LinalgError::DimensionMismatch { what, index, expected: d, found: v.len() });
                }
                if let Some(bad) = v.iter().find(|x| !backend.admits(x)) {
                    return Err(LinalgError::Entry {
                        what,
                        index,
                        source: ScalarError::NotInBackend(bad.to_string()),
                    });
                }
            }
        }
        Ok(FrameConfig { backend, d, n, vectors, functionals })
    }

    /// `τ_j = e_j`, `f_j = e_j*` for `j < d`.
    pub fn standard_basis(backend: Backend, d: usize) -> Self {
        let rows: Vec<Vec<Scalar>> = Matrix::identity(d).to_rows();
        FrameConfig::new(backend, rows.clone(), rows).expect("standard basis is well formed")
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vectors(&self) -> &[Vec<Scalar>] {
        &self.vectors
    }

    pub fn functionals(&self) -> &[Vec<Scalar>] {
        &self.functionals
    }

    pub fn with_backend(&self, backend: Backend) -> Result<Self, LinalgError> {
        FrameConfig::new(backend, self.vectors.clone(), self.functionals.clone())
    }

    /// `f_j(τ_k)`.
    pub fn pairing(&self, j: usize, k: usize) -> Scalar {
        dot(&self.functionals[j], &self.vectors[k])
    }

    /// Whether `f_j(τ_j) = 1` for all `j`; otherwise the first offending `j`.
    pub fn first_non_unital(&self) -> Option<usize> {
        (0..self.n).find(|&j| !self.pairing(j, j).is_one())
    }
}

pub fn dot(u: &[Scalar], x: &[Scalar]) -> Scalar {
    let mut acc = Scalar::zero();
    for (a, b) in u.iter().zip(x) {
        if !a.is_zero() && !b.is_zero() {
            acc = &acc + &(a * b);
        }
    }
    acc
}

/// `G[j][k] = f_j(τ_k)`.
pub fn gram(config: &FrameConfig) -> Matrix {
    let n = config.n();
    let mut g = Matrix::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            g[(j, k)] = config.pairing(j, k);
        }
    }
    g
}

/// `S = Σ_j τ_j u_jᵀ`, i.e. `x ↦ Σ_j f_j(x) τ_j`.
pub fn frame_operator(config: &FrameConfig) -> Matrix {
    let d = config.d();
    let mut s = Matrix::zeros(d, d);
    for (tau, u) in config.vectors().iter().zip(config.functionals()) {
        s.add_outer(tau, u);
    }
    s
}

pub fn trace(m: &Matrix) -> Scalar {
    m.trace()
}

/// Which space a tightness certificate speaks about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorSpace {
    Base,
    SymPower(u32),
}

/// Witness that an operator equals `b·I`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TightnessCertificate {
    pub b: Scalar,
    pub space: OperatorSpace,
}

impl TightnessCertificate {
    pub fn check(m: &Matrix, space: OperatorSpace) -> Option<Self> {
        is_scalar_identity(m).map(|b| TightnessCertificate { b, space })
    }

    /// Applies `m` to every standard basis vector and compares with `b·e_i`.
    pub fn verify(&self, m: &Matrix) -> bool {
        m.is_square()
            && (0..m.cols()).all(|i| (0..m.rows()).all(|r| {
                let expected = if r == i { self.b.clone() } else { Scalar::zero() };
                m[(r, i)] == expected
            }))
    }
}

/// `Some(b)` when `M = b·I` entrywise.
pub fn is_scalar_identity(m: &Matrix) -> Option<Scalar> {
    if !m.is_square() {
        return None;
    }
    let b = if m.rows() == 0 { Scalar::zero() } else { m[(0, 0)].clone() };
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let ok = if i == j { m[(i, j)] == b } else { m[(i, j)].is_zero() };
            if !ok {
                return None;
            }
        }
    }
    Some(b)
}

/// First entry that breaks `M = b·I`, for reporting.
pub fn scalar_identity_defect(m: &Matrix) -> Option<(usize, usize)> {
    let b = &m[(0, 0)];
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let ok = if i == j { &m[(i, j)] == b } else { m[(i, j)].is_zero() };
            if !ok {
                return Some((i, j));
            }
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagStatus {
    DiagonalizableOverRationals,
    NotDiagonalizable,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Eigenvalue {
    #[serde(with = "rational_text")]
    pub value: Rational,
    pub algebraic: usize,
    pub geometric: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagVerdict {
    pub status: DiagStatus,
    pub eigenvalues: Vec<Eigenvalue>,
    /// Eigenvectors grouped by eigenvalue order; present only when
    /// diagonalizable.
    #[serde(skip)]
    pub eigenbasis: Option<Vec<Vec<Rational>>>,
}

/// Decides diagonalizability when every eigenvalue is rational.
///
/// Irrational eigenvalues are not located; if no rational eigenvalue shows a
/// defect the verdict is `Unknown`.
pub fn diagonalizable_over_rationals(m: &Matrix) -> Result<DiagVerdict, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let a = m.to_rational()?;
    let n = a.len();
    let poly = exact::charpoly(&a);
    let (roots, _complete) = exact::rational_roots(&poly);
    let mut eigenvalues = Vec::with_capacity(roots.len());
    let mut basis = Vec::new();
    for (value, algebraic) in roots {
        let mut shifted = a.clone();
        for (i, row) in shifted.iter_mut().enumerate() {
            row[i] -= &value;
        }
        let kernel = exact::nullspace(&shifted);
        eigenvalues.push(Eigenvalue { value, algebraic, geometric: kernel.len() });
        basis.extend(kernel);
    }
    let found: usize = eigenvalues.iter().map(|e| e.algebraic).sum();
    let defective = eigenvalues.iter().any(|e| e.geometric < e.algebraic);
    let status = if defective {
        DiagStatus::NotDiagonalizable
    } else if found == n {
        DiagStatus::DiagonalizableOverRationals
    } else {
        DiagStatus::Unknown
    };
    let eigenbasis = (status == DiagStatus::DiagonalizableOverRationals).then_some(basis);
    Ok(DiagVerdict { status, eigenvalues, eigenbasis })
}

/// `max_i |v[i]|` under the sup norm.
pub fn sup_norm(v: &[Scalar], backend: &Backend) -> Result<AbsValue, ScalarError> {
    if v.is_empty() {
        return Err(ScalarError::Empty);
    }
    let mut best = AbsValue::ZERO;
    for x in v {
        best = best.max(backend.abs(x)?);
    }
    Ok(best)
}

pub(crate) mod rational_text {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::scalar::{format_rational, parse_rational, Rational};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Valuation;

    fn q(s: &str) -> Scalar {
        s.parse().unwrap()
    }

    fn p(n: u64) -> Backend {
        Backend::padic(n).unwrap()
    }

    fn row(xs: &[&str]) -> Vec<Scalar> {
        xs.iter().map(|x| q(x)).collect()
    }

    fn tight_2_3(b: Backend) -> FrameConfig {
        FrameConfig::new(
            b,
            vec![row(&["1", "0"]), row(&["0", "1"]), row(&["1", "1"])],
            vec![row(&["1", "-1/2"]), row(&["-1/2", "1"]), row(&["1/2", "1/2"])],
        )
        .unwrap()
    }

    fn line_2(b: Backend) -> FrameConfig {
        FrameConfig::new(b, vec![row(&["1"]), row(&["1"])], vec![row(&["1"]), row(&["1"])]).unwrap()
    }

    #[test]
    fn gram_examples() {
        assert_eq!(gram(&FrameConfig::standard_basis(p(3), 2)), Matrix::identity(2));
        assert_eq!(gram(&line_2(p(3))), Matrix::from_ints(&[&[1, 1], &[1, 1]]));
        let g = gram(&tight_2_3(p(5)));
        let expected = Matrix::from_rows(vec![
            row(&["1", "-1/2", "1/2"]),
            row(&["-1/2", "1", "1/2"]),
            row(&["1/2", "1/2", "1"]),
        ]);
        assert_eq!(g, expected);
    }

    #[test]
    fn frame_operator_and_trace_examples() {
        assert_eq!(frame_operator(&FrameConfig::standard_basis(p(3), 3)), Matrix::identity(3));
        let s1 = frame_operator(&line_2(p(3)));
        assert_eq!(s1, Matrix::from_ints(&[&[2]]));
        let s = frame_operator(&tight_2_3(p(5)));
        assert_eq!(s, Matrix::scalar_identity(2, q("3/2")));

        assert_eq!(trace(&Matrix::identity(4)), Scalar::from_int(4));
        assert_eq!(trace(&gram(&line_2(p(3)))), Scalar::from_int(2));
        assert_eq!(trace(&s), Scalar::from_int(3));
    }

    #[test]
    fn scalar_identity_examples() {
        assert_eq!(is_scalar_identity(&Matrix::scalar_identity(2, q("3/2"))), Some(q("3/2")));
        assert_eq!(is_scalar_identity(&Matrix::identity(3)), Some(Scalar::one()));
        assert_eq!(is_scalar_identity(&Matrix::from_ints(&[&[1, 1], &[0, 1]])), None);
        let m = Matrix::scalar_identity(3, q("5"));
        let cert = TightnessCertificate::check(&m, OperatorSpace::Base).unwrap();
        assert!(cert.verify(&m));
        assert!(!cert.verify(&Matrix::identity(3)));
    }

    #[test]
    fn diagonalizability_examples() {
        let v = diagonalizable_over_rationals(&Matrix::from_ints(&[&[1, 0], &[0, 2]])).unwrap();
        assert_eq!(v.status, DiagStatus::DiagonalizableOverRationals);
        let values: Vec<_> = v.eigenvalues.iter().map(|e| e.value.clone()).collect();
        assert_eq!(values, vec![Rational::from_integer(1.into()), Rational::from_integer(2.into())]);

        let v = diagonalizable_over_rationals(&Matrix::from_ints(&[&[0, 1], &[0, 0]])).unwrap();
        assert_eq!(v.status, DiagStatus::NotDiagonalizable);
        assert_eq!(v.eigenvalues[0].algebraic, 2);
        assert_eq!(v.eigenvalues[0].geometric, 1);

        let v = diagonalizable_over_rationals(&Matrix::from_ints(&[&[0, 1], &[2, 0]])).unwrap();
        assert_eq!(v.status, DiagStatus::Unknown);
        assert!(v.eigenvalues.is_empty());
    }

    #[test]
    fn diagonalizability_rejects_laurent_entries() {
        let m = Matrix::from_rows(vec![vec![Scalar::t(), Scalar::zero()], vec![Scalar::zero(), Scalar::one()]]);
        assert!(matches!(
            diagonalizable_over_rationals(&m),
            Err(LinalgError::NonRational { row: 0, col: 0, .. })
        ));
    }

    #[test]
    fn sup_norm_examples() {
        assert_eq!(sup_norm(&row(&["1", "3"]), &p(3)).unwrap().valuation(), Valuation::Finite(0));
        assert_eq!(sup_norm(&row(&["1/2", "1"]), &p(2)).unwrap().valuation(), Valuation::Finite(-1));
        assert_eq!(sup_norm(&row(&["1/2", "1/2"]), &p(5)).unwrap().valuation(), Valuation::Finite(0));
    }

    #[test]
    fn config_validation() {
        assert_eq!(FrameConfig::new(p(3), vec![], vec![]), Err(LinalgError::Empty));
        assert_eq!(
            FrameConfig::new(p(3), vec![row(&["1"])], vec![]),
            Err(LinalgError::CountMismatch { vectors: 1, functionals: 0 })
        );
        assert!(matches!(
            FrameConfig::new(p(3), vec![row(&["1", "2"])], vec![row(&["1"])]),
            Err(LinalgError::DimensionMismatch { what: "functional", index: 0, expected: 2, found: 1 })
        ));
        assert!(matches!(
            FrameConfig::new(p(3), vec![vec![Scalar::t()]], vec![row(&["1"])]),
            Err(LinalgError::Entry { what: "vector", index: 0, .. })
        ));
        assert!(FrameConfig::new(Backend::Laurent, vec![vec![Scalar::t()]], vec![row(&["1"])]).is_ok());
    }

    #[test]
    fn config_json() {
        let c = tight_2_3(p(5));
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(
            s,
            r#"{"backend":{"padic":5},"d":2,"n":3,"vectors":[["1","0"],["0","1"],["1","1"]],"functionals":[["1","-1/2"],["-1/2","1"],["1/2","1/2"]]}"#
        );
        assert_eq!(serde_json::from_str::<FrameConfig>(&s).unwrap(), c);
        let wrong_n = s.replace(r#""n":3"#, r#""n":4"#);
        let err = serde_json::from_str::<FrameConfig>(&wrong_n).unwrap_err();
        assert!(err.to_string().contains("declared n = 4"), "{err}");
        let bad = s.replace("-1/2", "-1/0");
        let err = serde_json::from_str::<FrameConfig>(&bad).unwrap_err();
        assert!(err.line() == 1 && err.column() > 0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn rational() -> impl Strategy<Value = Scalar> {
            (-10i64..=10, 1i64..=10).prop_map(|(a, b)| Scalar::ratio(a, b))
        }

        fn config() -> impl Strategy<Value = FrameConfig> {
            (1usize..=3, 1usize..=4).prop_flat_map(|(d, n)| {
                let fam = || proptest::collection::vec(proptest::collection::vec(rational(), d), n);
                (fam(), fam()).prop_map(|(v, f)| FrameConfig::new(Backend::padic(3).unwrap(), v, f).unwrap())
            })
        }

        proptest! {
            #[test]
            fn trace_identities(c in config()) {
                let s = frame_operator(&c);
                let g = gram(&c);
                let diag: Scalar = (0..c.n()).map(|j| c.pairing(j, j)).sum();
                prop_assert_eq!(s.trace(), g.trace());
                prop_assert_eq!(g.trace(), diag);
                let cross: Scalar = (0..c.n())
                    .flat_map(|j| (0..c.n()).map(move |k| (j, k)))
                    .map(|(j, k)| &c.pairing(j, k) * &c.pairing(k, j))
                    .sum();
                prop_assert_eq!(s.mul(&s).trace(), g.mul(&g).trace());
                prop_assert_eq!(s.trace_of_square(), cross);
            }

            #[test]
            fn tight_traces(b in rational(), d in 1usize..=4) {
                let s = Matrix::scalar_identity(d, b.clone());
                let cert = is_scalar_identity(&s).unwrap();
                let dd = Scalar::from_int(d as i64);
                prop_assert_eq!(s.trace(), &cert * &dd);
                prop_assert_eq!(s.trace_of_square(), &(&cert * &cert) * &dd);
            }

            #[test]
            fn diagonalizable_reconstructs(entries in proptest::collection::vec(-3i64..=3, 9), shape in 0usize..3) {
                // Build P D P^-1 with integer eigenvalues and a random invertible P,
                // or use the raw entries directly.
                let raw = Matrix::from_rows(entries.chunks(3).map(|r| r.iter().map(|&x| Scalar::from_int(x)).collect()).collect());
                let m = if shape == 0 {
                    raw
                } else {
                    let a = raw.to_rational().unwrap();
                    match exact::inverse(&a) {
                        None => raw,
                        Some(inv) => {
                            let d = exact::identity(3).into_iter().enumerate()
                                .map(|(i, r)| r.into_iter().map(|x| x * Rational::from_integer(((i % shape) as i64).into())).collect())
                                .collect();
                            let prod = exact::mat_mul(&exact::mat_mul(&a, &d), &inv);
                            Matrix::from_rows(prod.into_iter().map(|r| r.into_iter().map(Scalar::Rational).collect()).collect())
                        }
                    }
                };
                let v = diagonalizable_over_rationals(&m).unwrap();
                if v.status == DiagStatus::DiagonalizableOverRationals {
                    let basis = v.eigenbasis.clone().unwrap();
                    prop_assert_eq!(basis.len(), 3);
                    let geo: usize = v.eigenvalues.iter().map(|e| e.geometric).sum();
                    prop_assert_eq!(geo, 3);
                    // Columns of P are eigenvectors; D lists matching eigenvalues.
                    let p_cols: exact::RatMatrix = (0..3).map(|i| basis.iter().map(|v| v[i].clone()).collect()).collect();
                    let mut diag = Vec::new();
                    for e in &v.eigenvalues {
                        diag.extend(std::iter::repeat_n(e.value.clone(), e.geometric));
                    }
                    let d: exact::RatMatrix = (0..3).map(|i| (0..3).map(|j| if i == j { diag[i].clone() } else { Rational::from_integer(0.into()) }).collect()).collect();
                    let p_inv = exact::inverse(&p_cols).expect("eigenbasis is a basis");
                    let back = exact::mat_mul(&exact::mat_mul(&p_cols, &d), &p_inv);
                    prop_assert_eq!(back, m.to_rational().unwrap());
                }
            }

            #[test]
            fn sup_norm_homogeneous(x in rational(), v in proptest::collection::vec(rational(), 1..4)) {
                let b = Backend::padic(3).unwrap();
                let scaled: Vec<Scalar> = v.iter().map(|e| &x * e).collect();
                prop_assert_eq!(
                    sup_norm(&scaled, &b).unwrap().valuation(),
                    b.valuation(&x).unwrap() + sup_norm(&v, &b).unwrap().valuation()
                );
            }

            #[test]
            fn dual_norm_consistency(u in proptest::collection::vec(rational(), 3), v in proptest::collection::vec(rational(), 3)) {
                let b = Backend::padic(3).unwrap();
                let nv = sup_norm(&v, &b).unwrap();
                prop_assume!(!nv.is_zero());
                // Rescale v to unit sup norm by a power of p.
                let shift = nv.valuation().finite().unwrap();
                let scale = Scalar::from_int(3).pow(shift.unsigned_abs() as u32);
                let scale = if shift < 0 { scale } else { scale.inv().unwrap() };
                let unit: Vec<Scalar> = v.iter().map(|e| &scale * e).collect();
                prop_assert_eq!(sup_norm(&unit, &b).unwrap(), AbsValue::ONE);
                let nf = sup_norm(&u, &b).unwrap();
                prop_assert!(b.abs(&dot(&u, &unit)).unwrap() <= nf);
                let attained = (0..3).any(|i| {
                    let mut e = vec![Scalar::zero(); 3];
                    e[i] = Scalar::one();
                    b.abs(&dot(&u, &e)).unwrap() == nf
                });
                prop_assert!(attained);
            }
        }
    }
}
