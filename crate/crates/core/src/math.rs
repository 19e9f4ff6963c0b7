//! Thin re-exports of `libm` so the crate stays `no_std`.

pub(crate) use libm::{asin, atan2, ceil, cos, erf, exp, floor, log, pow, round, sin, sqrt};

pub(crate) const SQRT_3: f64 = 1.732_050_807_568_877_2;
