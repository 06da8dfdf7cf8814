#![allow(dead_code)]

use proptest::prelude::*;
use ultrawelch_core::scalar::{LaurentPoly, Rational};
use ultrawelch_core::{Backend, FrameConfig, Scalar};

pub fn small_rational() -> impl Strategy<Value = Rational> {
    (-10i64..=10, 1i64..=10).prop_map(|(a, b)| Rational::new(a.into(), b.into()))
}

pub fn rational_scalar() -> impl Strategy<Value = Scalar> {
    small_rational().prop_map(Scalar::Rational)
}

pub fn laurent_scalar() -> impl Strategy<Value = Scalar> {
    proptest::collection::vec((-2i64..=2, small_rational()), 0..3)
        .prop_map(|terms| Scalar::from_laurent(LaurentPoly::from_terms(terms)))
}

pub fn scalar_for(backend: Backend) -> BoxedStrategy<Scalar> {
    match backend {
        Backend::Padic(_) => rational_scalar().boxed(),
        Backend::Laurent => laurent_scalar().boxed(),
    }
}

pub fn backend() -> impl Strategy<Value = Backend> {
    prop_oneof![
        Just(Backend::padic(2).unwrap()),
        Just(Backend::padic(3).unwrap()),
        Just(Backend::padic(5).unwrap()),
        Just(Backend::Laurent),
    ]
}

pub fn config_in(backend: Backend, d_max: usize, n_max: usize) -> impl Strategy<Value = FrameConfig> {
    (1..=d_max, 1..=n_max).prop_flat_map(move |(d, n)| {
        let family = || proptest::collection::vec(proptest::collection::vec(scalar_for(backend), d), n);
        (family(), family()).prop_map(move |(v, f)| FrameConfig::new(backend, v, f).unwrap())
    })
}

pub fn config(d_max: usize, n_max: usize) -> impl Strategy<Value = FrameConfig> {
    backend().prop_flat_map(move |b| config_in(b, d_max, n_max))
}
