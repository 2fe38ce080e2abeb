//! Moment-entropy inequalities for integer-valued random variables.
//!
//! Both relate E|X|^ρ to the Rényi entropy of order 1/(1+ρ): the bounded
//! form pays a log(M₋M₊) support penalty, the unbounded form pays a
//! 1 + 2ζ(m/ρ) tail penalty instead. The "+1" on the moment side comes from
//! regularizing |x| to 1 at x = 0 before taking reciprocal powers.

use super::{BoundParams, BoundReport};
use crate::dist::IntegerPmf;
use crate::error::{Error, Result};
use crate::numerics::riemann_zeta;

/// E|X|^ρ + 1 ≥ (3 + ln(M₋M₊))^{−ρ} · exp(ρ·H_{1/(1+ρ)}(X)) for a law on
/// {−M₋,…,M₊}. Support bounds are padded to M₋, M₊ ≥ 1, which only loosens
/// the right-hand side; a law concentrated at 0 uses M₋ = M₊ = 1.
pub fn moment_entropy_bounded(
    p: &IntegerPmf,
    rho: f64,
    provenance: impl Into<String>,
) -> Result<BoundReport> {
    if rho.is_nan() || rho < 0.0 {
        return Err(Error::parameter(format!("ρ = {rho} must be ≥ 0")));
    }
    if p.truncated_tail_mass() > 0.0 {
        return Err(Error::domain(
            "bounded-support moment-entropy check rejects tail-truncated laws",
        ));
    }
    let lhs = p.abs_moment(rho) + 1.0;
    let m_minus = (-p.min_support()).max(1) as f64;
    let m_plus = p.max_support().max(1) as f64;
    let entropy = p.renyi_entropy(1.0 / (1.0 + rho))?;
    let rhs = (rho * entropy - rho * (3.0 + (m_minus * m_plus).ln()).ln()).exp();
    Ok(
        BoundReport::new("moment_entropy_bounded", lhs, rhs, BoundParams::default().with_rho(rho), provenance),
    )
}

/// E|X|^m + 1 ≥ (1 + 2ζ(m/ρ))^{−ρ} · exp(ρ·H_{1/(1+ρ)}(X)) for any integer
/// law, 0 < ρ < m.
///
/// Tail mass up to 1e-12 is folded in by renormalizing the stored atoms
/// (the inequality is then asserted for the renormalized law, which is a
/// perfectly valid integer law); anything larger is rejected because a
/// spread-out tail can inflate the entropy side without bound.
pub fn moment_entropy_zeta(
    p: &IntegerPmf,
    m: f64,
    rho: f64,
    provenance: impl Into<String>,
) -> Result<BoundReport> {
    if !(rho > 0.0) || !(m > rho) {
        return Err(Error::parameter(format!(
            "need 0 < ρ < m for the zeta tail (got ρ = {rho}, m = {m}); ζ(m/ρ) diverges otherwise"
        )));
    }
    let mut provenance = provenance.into();
    let law = if p.truncated_tail_mass() > 1e-12 {
        return Err(Error::domain(format!(
            "truncated tail mass {} exceeds 1e-12; represent more atoms",
            p.truncated_tail_mass()
        )));
    } else if p.truncated_tail_mass() > 0.0 {
        provenance.push_str(" [tail renormalized]");
        p.renormalized_without_tail()
    } else {
        p.clone()
    };
    let lhs = law.abs_moment(m) + 1.0;
    let zeta = riemann_zeta(m / rho)?;
    let entropy = law.renyi_entropy(1.0 / (1.0 + rho))?;
    let rhs = (rho * entropy - rho * (1.0 + 2.0 * zeta).ln()).exp();
    Ok(BoundReport::new(
        "moment_entropy_zeta",
        lhs,
        rhs,
        BoundParams::default().with_m(m).with_rho(rho),
        provenance,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{random_pmf_on, SeedSpec};

    #[test]
    fn uniform_three_atoms_has_known_slack() {
        // E|X| = 2/3, H_{1/2} = log 3, M₋ = M₊ = 1 ⇒ rhs = 3/3 = 1.
        let p = IntegerPmf::uniform(-1, 1).unwrap();
        let r = moment_entropy_bounded(&p, 1.0, "uniform{-1..1}").unwrap();
        assert!((r.lhs - 5.0 / 3.0).abs() < 1e-13);
        assert!((r.rhs - 1.0).abs() < 1e-13);
        assert!((r.slack - 2.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn point_mass_at_zero_is_padded() {
        // lhs = 0 + 1 at every ρ; padding M₋ = M₊ = 1 makes rhs = 3^{−ρ}.
        let p = IntegerPmf::point_mass(0);
        for rho in [0.0, 0.5, 1.0, 2.0] {
            let r = moment_entropy_bounded(&p, rho, "delta0").unwrap();
            assert!((r.lhs - 1.0).abs() < 1e-15);
            assert!((r.rhs - 3f64.powf(-rho)).abs() < 1e-13);
            assert!(r.holds(1e-12));
        }
    }

    #[test]
    fn bounded_sweep_never_fails() {
        let support: Vec<i64> = (-8..=8).collect();
        for i in 0..300 {
            let p = random_pmf_on(&support, SeedSpec::new(101, i));
            for rho in [0.5, 1.0, 2.0] {
                let r = moment_entropy_bounded(&p, rho, format!("dirichlet#{i}")).unwrap();
                assert!(r.holds(1e-9), "slack {} at instance {i}, ρ={rho}", r.slack);
            }
        }
    }

    #[test]
    fn zeta_form_on_degenerate_law() {
        let p = IntegerPmf::point_mass(0);
        let r = moment_entropy_zeta(&p, 2.0, 1.0, "delta0").unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-15);
        let expect = 1.0 / (1.0 + 2.0 * std::f64::consts::PI.powi(2) / 6.0);
        assert!((r.rhs - expect).abs() < 1e-12);
        assert!(r.holds(1e-12));
    }

    #[test]
    fn zeta_form_on_truncated_geometric() {
        // p(k) ∝ (1/2)^{|k|} on {−30,…,30}, normalized exactly on the range.
        let weights: Vec<(i64, f64)> = (-30..=30)
            .map(|k: i64| (k, 0.5f64.powi(k.unsigned_abs() as i32)))
            .collect();
        let total: f64 = weights.iter().map(|&(_, w)| w).sum();
        let pairs: Vec<(i64, f64)> = weights.into_iter().map(|(k, w)| (k, w / total)).collect();
        let p = IntegerPmf::from_linear(&pairs).unwrap();
        let r = moment_entropy_zeta(&p, 2.0, 1.0, "geometric").unwrap();
        assert!(r.holds(0.0), "slack {}", r.slack);
    }

    #[test]
    fn zeta_sweep_never_fails() {
        let support: Vec<i64> = (-20..=20).collect();
        for i in 0..200 {
            let p = random_pmf_on(&support, SeedSpec::new(102, i));
            for (m, rho) in [(2.0, 1.0), (3.0, 1.5), (1.0, 0.5)] {
                let r = moment_entropy_zeta(&p, m, rho, format!("dirichlet#{i}")).unwrap();
                assert!(r.holds(1e-9), "slack {} at instance {i}", r.slack);
            }
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let p = IntegerPmf::uniform(-2, 2).unwrap();
        assert!(moment_entropy_zeta(&p, 2.0, 2.0, "x").is_err());
        assert!(moment_entropy_zeta(&p, 2.0, 2.5, "x").is_err());
        assert!(moment_entropy_bounded(&p, -0.5, "x").is_err());
    }

    #[test]
    fn oversized_tail_is_rejected() {
        let p = IntegerPmf::with_tail(&[(0, 0.9f64.ln())], 0.1).unwrap();
        assert!(moment_entropy_zeta(&p, 2.0, 1.0, "x").is_err());
        assert!(moment_entropy_bounded(&p, 1.0, "x").is_err());
    }
}
