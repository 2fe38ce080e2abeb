//! Log-domain scalar arithmetic, special functions, and seeded randomness.
//!
//! Everything downstream stores probabilities as natural logarithms, so the
//! primitives here are the only place where mass leaves or enters the linear
//! domain. All functions are pure; random streams are counter-based and keyed
//! by an explicit [`SeedSpec`] — there is no global RNG state anywhere in the
//! crate.

mod seed;
mod zeta;

pub use seed::{random_pmf, random_pmf_on, SeedSpec};
pub use zeta::riemann_zeta;

/// log(exp(a) + exp(b)) without leaving the log domain.
///
/// `-inf` is the "probability zero" sentinel and behaves as the additive
/// identity.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    debug_assert!(!a.is_nan() && !b.is_nan(), "NaN reached log_add_exp");
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a > b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// log(Σ exp(v_i)), max-shifted for stability.
///
/// The list must be non-empty; a list of `-inf` sentinels returns `-inf`
/// (no mass anywhere). NaN inputs are a programming error, not a value.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "log_sum_exp of empty list");
    let mut max = f64::NEG_INFINITY;
    for &v in values {
        debug_assert!(!v.is_nan(), "NaN reached log_sum_exp");
        if v > max {
            max = v;
        }
    }
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = values.iter().map(|&v| (v - max).exp()).sum();
    max + sum.ln()
}
