//! Valuation-level verification of the functional Welch bounds.
//!
//! For a configuration `(τ_j, f_j)` and order `m` the checked inequality is
//!
//! ```text
//! max{ |Σ_l f_l(τ_l)^{2m}|, max_{j≠k} |f_j(τ_k) f_k(τ_j)|^m }
//!     ≥ |Σ_j f_j(τ_j)^m|² / |C(d+m-1, m)|
//! ```
//!
//! and, when every `f_j(τ_j) = 1`, its unital form
//! `max{|n|, max_{j≠k} |f_j(τ_k) f_k(τ_j)|^m} ≥ |n|² / |C(d+m-1, m)|`.
//!
//! The inequality is guaranteed under one of two hypotheses on the operator
//! `S = Σ_j f_j^{⊗m}(·) τ_j^{⊗m}` acting on `Sym^m`:
//!
//! * [`Variant::NonArch`], Laurent backend: `S` is diagonalizable.
//! * [`Variant::Padic`], p-adic backend: `S = b·I` for some scalar `b`.
//!
//! Reports keep the hypothesis outcome separate from the numeric comparison,
//! so a failed hypothesis with a failed inequality shows up as
//! [`Verdict::Violated`] rather than being silently skipped.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{
    diagonalizable_over_rationals, gram, scalar_identity_defect, DiagStatus, Eigenvalue, FrameConfig,
    LinalgError, Matrix, OperatorSpace, TightnessCertificate,
};
use crate::scalar::{binomial, AbsValue, Backend, Scalar, ScalarError};
use crate::symtensor::{sym_frame_operator, SymError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WelchError {
    #[error("variant {variant:?} cannot run on backend {backend}")]
    IncompatibleBackend { variant: Variant, backend: Backend },
    #[error("the cross term needs n >= 2, got n = {0}")]
    TooFewElements(usize),
    #[error("order m must be at least 1")]
    ZeroOrder,
    #[error("f_{index}(τ_{index}) = {value}, expected 1")]
    NotUnital { index: usize, value: String },
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    NonArch,
    Padic,
}

impl Variant {
    /// The variant matching a backend's built-in hypothesis.
    pub fn for_backend(backend: &Backend) -> Variant {
        match backend {
            Backend::Padic(_) => Variant::Padic,
            Backend::Laurent => Variant::NonArch,
        }
    }

    pub fn check_backend(self, backend: &Backend) -> Result<(), WelchError> {
        match (self, backend) {
            (Variant::NonArch, Backend::Laurent) | (Variant::Padic, Backend::Padic(_)) => Ok(()),
            _ => Err(WelchError::IncompatibleBackend { variant: self, backend: *backend }),
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nonarch" => Ok(Variant::NonArch),
            "padic" => Ok(Variant::Padic),
            other => Err(format!("unknown variant {other:?} (expected nonarch or padic)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HypothesisDetail {
    /// `S = b·I`.
    Tight { certificate: TightnessCertificate },
    /// First entry of `S` that breaks `S = b·I`.
    NotScalar { row: usize, col: usize },
    Diagonalizable { eigenvalues: Vec<Eigenvalue> },
    NotDiagonalizable { eigenvalues: Vec<Eigenvalue> },
    /// Diagonalizability could not be decided exactly.
    Undetermined { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub satisfied: bool,
    pub detail: HypothesisDetail,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    General,
    Unital,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LhsTerms {
    /// `|Σ_l f_l(τ_l)^{2m}|`, or `|n|` in unital form.
    pub diag_term: AbsValue,
    /// `max_{j≠k} |f_j(τ_k) f_k(τ_j)|^m`.
    pub cross_term: AbsValue,
    /// First `(j, k)`, 0-based and row-major, attaining `cross_term`.
    pub argmax: (usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    HoldsStrict,
    HoldsWithEquality,
    Violated,
    Inapplicable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub backend: Backend,
    pub variant: Variant,
    pub form: Form,
    pub d: usize,
    pub n: usize,
    pub m: u32,
    pub hypothesis: Hypothesis,
    /// Whether `f_j(τ_j) = 1` for every `j`.
    pub unital: bool,
    pub lhs_terms: LhsTerms,
    pub lhs: AbsValue,
    pub rhs: AbsValue,
    /// The right-hand numerator vanished, so `rhs = 0`.
    pub degenerate: bool,
    pub verdict: Verdict,
}

impl BoundReport {
    /// Whether `lhs ≥ rhs`.
    pub fn bound_holds(&self) -> bool {
        self.lhs >= self.rhs
    }
}

/// Evaluates the general display.
pub fn check_bound(config: &FrameConfig, m: u32, variant: Variant) -> Result<BoundReport, WelchError> {
    evaluate(config, m, variant, Form::General)
}

/// Evaluates the unital display; every `f_j(τ_j)` must equal 1.
pub fn check_unital(config: &FrameConfig, m: u32, variant: Variant) -> Result<BoundReport, WelchError> {
    if let Some(j) = config.first_non_unital() {
        return Err(WelchError::NotUnital { index: j, value: config.pairing(j, j).to_string() });
    }
    evaluate(config, m, variant, Form::Unital)
}

/// `|C(d+m-1, m)|` in the given backend.
pub fn sym_dim_abs(backend: &Backend, d: usize, m: u32) -> AbsValue {
    let c = binomial(d as u64 + u64::from(m) - 1, u64::from(m));
    AbsValue(backend.integer_valuation(&BigInt::from(c)))
}

/// Largest `|f_j(τ_k) f_k(τ_j)|` over `j ≠ k` and its first position.
pub(crate) fn max_cross(g: &Matrix, backend: &Backend) -> Result<(AbsValue, (usize, usize)), ScalarError> {
    let n = g.rows();
    let mut best = (AbsValue::ZERO, (0, 1.min(n.saturating_sub(1))));
    let mut first = true;
    for j in 0..n {
        for k in 0..n {
            if j == k {
                continue;
            }
            let v = backend.abs(&(&g[(j, k)] * &g[(k, j)]))?;
            if first || v > best.0 {
                best = (v, (j, k));
                first = false;
            }
        }
    }
    Ok(best)
}

fn evaluate(config: &FrameConfig, m: u32, variant: Variant, form: Form) -> Result<BoundReport, WelchError> {
    let backend = config.backend();
    variant.check_backend(&backend)?;
    if m == 0 {
        return Err(WelchError::ZeroOrder);
    }
    let n = config.n();
    if n < 2 {
        return Err(WelchError::TooFewElements(n));
    }
    let d = config.d();

    let hypothesis = hypothesis(config, m, variant)?;

    let g = gram(config);
    let diagonal: Vec<Scalar> = (0..n).map(|j| g[(j, j)].clone()).collect();
    let unital = diagonal.iter().all(Scalar::is_one);

    let (cross, argmax) = max_cross(&g, &backend)?;
    let cross_term = cross.pow(m);

    let c_abs = sym_dim_abs(&backend, d, m);
    let (diag_term, numerator) = match form {
        Form::General => {
            let diag_sum: Scalar = diagonal.iter().map(|x| x.pow(2 * m)).sum();
            let trace_sum: Scalar = diagonal.iter().map(|x| x.pow(m)).sum();
            (backend.abs(&diag_sum)?, backend.abs(&trace_sum)?.pow(2))
        }
        Form::Unital => {
            let n_abs = AbsValue(backend.integer_valuation(&BigInt::from(n)));
            (n_abs, n_abs.pow(2))
        }
    };
    let lhs = diag_term.max(cross_term);
    // |C| is never zero, so the quotient is always defined.
    let rhs = numerator.checked_div(c_abs).expect("binomial coefficient is nonzero");
    let degenerate = numerator.is_zero();

    let holds = lhs >= rhs;
    let verdict = match (holds, hypothesis.satisfied) {
        (false, _) => Verdict::Violated,
        (true, false) => Verdict::Inapplicable,
        (true, true) if lhs == rhs => Verdict::HoldsWithEquality,
        (true, true) => Verdict::HoldsStrict,
    };

    Ok(BoundReport {
        backend,
        variant,
        form,
        d,
        n,
        m,
        hypothesis,
        unital,
        lhs_terms: LhsTerms { diag_term, cross_term, argmax },
        lhs,
        rhs,
        degenerate,
        verdict,
    })
}

fn hypothesis(config: &FrameConfig, m: u32, variant: Variant) -> Result<Hypothesis, WelchError> {
    let op = sym_frame_operator(config, m)?;
    let space = OperatorSpace::SymPower(m);
    Ok(match variant {
        Variant::Padic => match TightnessCertificate::check(&op.matrix, space) {
            Some(certificate) => Hypothesis { satisfied: true, detail: HypothesisDetail::Tight { certificate } },
            None => {
                let (row, col) = scalar_identity_defect(&op.matrix).expect("not a scalar identity");
                Hypothesis { satisfied: false, detail: HypothesisDetail::NotScalar { row, col } }
            }
        },
        Variant::NonArch => match diagonalizable_over_rationals(&op.matrix) {
            Ok(v) => match v.status {
                DiagStatus::DiagonalizableOverRationals => Hypothesis {
                    satisfied: true,
                    detail: HypothesisDetail::Diagonalizable { eigenvalues: v.eigenvalues },
                },
                DiagStatus::NotDiagonalizable => Hypothesis {
                    satisfied: false,
                    detail: HypothesisDetail::NotDiagonalizable { eigenvalues: v.eigenvalues },
                },
                DiagStatus::Unknown => Hypothesis {
                    satisfied: false,
                    detail: HypothesisDetail::Undetermined {
                        reason: "characteristic polynomial has non-rational roots".into(),
                    },
                },
            },
            Err(LinalgError::NonRational { row, col, value }) => Hypothesis {
                satisfied: false,
                detail: HypothesisDetail::Undetermined {
                    reason: format!("operator entry ({row}, {col}) = {value} is not a rational constant"),
                },
            },
            Err(e) => return Err(e.into()),
        },
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedReport {
    pub name: String,
    pub report: BoundReport,
}

/// The `d = 2`, `n = 3` configuration with `S = (3/2)·I` and `f_j(τ_j) = 1`.
pub fn tight_2_3(backend: Backend) -> FrameConfig {
    let q = |s: &str| -> Scalar { s.parse().expect("literal") };
    FrameConfig::new(
        backend,
        vec![vec![q("1"), q("0")], vec![q("0"), q("1")], vec![q("1"), q("1")]],
        vec![vec![q("1"), q("-1/2")], vec![q("-1/2"), q("1")], vec![q("1/2"), q("1/2")]],
    )
    .expect("well formed")
}

/// Two copies of `τ = (1)`, `f = x ↦ x` in dimension 1.
pub fn doubled_line(backend: Backend) -> FrameConfig {
    let one = || vec![Scalar::one()];
    FrameConfig::new(backend, vec![one(), one()], vec![one(), one()]).expect("well formed")
}

/// Curated reports: equality cases, a strict case and a hypothesis violation.
pub fn demo_suite() -> Vec<NamedReport> {
    let p = |q: u64| Backend::padic(q).expect("prime");
    let cases: Vec<(&str, FrameConfig, u32, Form)> = vec![
        ("standard-basis-equality", FrameConfig::standard_basis(p(3), 2), 1, Form::Unital),
        ("tight-2-3-p5", tight_2_3(p(5)), 1, Form::General),
        ("tight-2-3-p2", tight_2_3(p(2)), 1, Form::General),
        ("hypothesis-violation-p3-m2", FrameConfig::standard_basis(p(3), 2), 2, Form::General),
        ("doubled-line-p3", doubled_line(p(3)), 1, Form::General),
        ("doubled-line-p2-unital", doubled_line(p(2)), 1, Form::Unital),
        ("laurent-tight-2-3-m1", tight_2_3(Backend::Laurent), 1, Form::Unital),
        ("laurent-tight-2-3-m2", tight_2_3(Backend::Laurent), 2, Form::General),
    ];
    cases
        .into_iter()
        .map(|(name, config, m, form)| {
            let variant = Variant::for_backend(&config.backend());
            let report = match form {
                Form::General => check_bound(&config, m, variant),
                Form::Unital => check_unital(&config, m, variant),
            }
            .expect("demo configurations are valid");
            NamedReport { name: name.to_string(), report }
        })
        .collect()
}

/// First-order quantities straight from the Gram matrix and frame operator,
/// without going through the symmetric power.
pub fn first_order_direct(config: &FrameConfig) -> Result<(bool, AbsValue, AbsValue), WelchError> {
    let backend = config.backend();
    let g = gram(config);
    let n = config.n();
    let trace: Scalar = (0..n).map(|j| g[(j, j)].clone()).sum();
    let squares: Scalar = (0..n).map(|j| g[(j, j)].pow(2)).sum();
    let (cross, _) = max_cross(&g, &backend)?;
    let lhs = backend.abs(&squares)?.max(cross);
    let d_abs = AbsValue(backend.integer_valuation(&BigInt::from(config.d())));
    let rhs = backend.abs(&trace)?.pow(2).checked_div(d_abs).expect("d is nonzero");
    let tight = crate::linalg::is_scalar_identity(&crate::linalg::frame_operator(config)).is_some();
    Ok((tight, lhs, rhs))
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::HoldsStrict => "holds_strict",
            Verdict::HoldsWithEquality => "holds_with_equality",
            Verdict::Violated => "violated",
            Verdict::Inapplicable => "inapplicable",
        };
        f.write_str(s)
    }
}
