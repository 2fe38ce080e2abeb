use crate::error::{Error, Result};

/// Bernoulli numbers B_2, B_4, ..., B_24 for the Euler–Maclaurin tail.
const BERNOULLI: [f64; 12] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
];

const TOLERANCE: f64 = 1e-12;

/// Riemann zeta ζ(s) = Σ_{n≥1} n^{-s} for real s > 1, absolute error ≤ 1e-12.
///
/// Partial sum to N plus the Euler–Maclaurin tail
/// N^{1-s}/(s-1) + N^{-s}/2 + Σ_k B_{2k}/(2k)! · s(s+1)…(s+2k-2) · N^{-s-2k+1};
/// N doubles until the first omitted correction term is below tolerance.
pub fn riemann_zeta(s: f64) -> Result<f64> {
    if s.is_nan() {
        return Err(Error::domain("zeta argument is NaN"));
    }
    if s <= 1.0 {
        return Err(Error::domain(format!("zeta series diverges for s = {s} ≤ 1")));
    }

    let mut n = 16u64;
    loop {
        let (value, remainder) = euler_maclaurin(s, n);
        if remainder.abs() <= TOLERANCE * 0.1 {
            return Ok(value);
        }
        n *= 2;
        assert!(n <= 1 << 20, "zeta tail failed to converge for s = {s}");
    }
}

/// Returns (estimate, magnitude of the first omitted correction term).
fn euler_maclaurin(s: f64, n: u64) -> (f64, f64) {
    let nf = n as f64;
    let mut partial = 0.0;
    for k in (1..=n).rev() {
        partial += (k as f64).powf(-s);
    }
    let mut value = partial + nf.powf(1.0 - s) / (s - 1.0) - 0.5 * nf.powf(-s);

    // B_{2k}/(2k)! · s(s+1)…(s+2k-2) · N^{-(s+2k-1)}, built incrementally.
    let mut rising = s; // s(s+1)…(s+2k-2)
    let mut factorial = 2.0; // (2k)!
    let mut last_term = 0.0;
    for (idx, b) in BERNOULLI.iter().enumerate() {
        let k = idx + 1;
        if k > 1 {
            rising *= (s + (2 * k - 3) as f64) * (s + (2 * k - 2) as f64);
            factorial *= ((2 * k - 1) * (2 * k)) as f64;
        }
        last_term = b / factorial * rising * nf.powf(-(s + (2 * k - 1) as f64));
        value += last_term;
    }
    (value, last_term)
}
