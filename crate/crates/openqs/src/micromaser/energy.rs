//! Energy flux and entropy production of the pumped cavity.
//!
//! Perfect cavity: the total energy is constant while an atom is in transit
//! and jumps when the beam advances. Contracting the beam-advance observable
//! against the Bernoulli moments leaves only the atom that has just finished
//! its slot, whose accumulated phase is one slot's worth regardless of `n`:
//! the step is the `n`-independent
//! `ΔE(t_n, t_{n-1}) = 2(λ²/ε) p(1-p) (1 - cos ετ)` and the telescoped total
//! `ΔE(t_n, t_1) = (n-1) · 2(λ²/ε) p(1-p) (1 - cos ετ)`, growing linearly —
//! as it must, since the cavity photon number itself grows linearly while
//! the interaction energy stays bounded. Both match the brute-force
//! cavity⊗atoms oracle and are the `σ → 0⁺` limits of the leaking-cavity
//! expressions.
//!
//! Leaking cavity: every quantity is assembled from two verified primitives —
//! the exact photon number `N(kτ)` and the interaction-energy expectations
//! `λ ω^{kτ}((b*+b)⊗η_n)` — as
//!
//! * in-cavity step  `= ε(N(nτ) - N((n-1)τ)) + λΩ_n(nτ) - λΩ_n((n-1)τ)`
//! * jump            `= λΩ_n((n-1)τ) - λΩ_{n-1}((n-1)τ)` (zero for `n = 1`)
//! * extended step   `=` their sum
//! * cumulative      `= ε(N(nτ) - N(0)) + λΩ_n(nτ)`
//!
//! so the telescoping identity `cumulative = Σ_k extended(k)` holds exactly.
//! The jump equals
//! `p(1-p)(2λ²ε/|μ|²)(1-e^{-στ/2}cos ετ) - p(1-p)(λ²σ/|μ|²)e^{-στ/2} sin ετ`
//! for every `n ≥ 2`.
//!
//! Entropy: with Gibbs-distributed photons and a diagonal atomic beam the
//! relative entropy of the evolved total state collapses to
//! `ΔS(nτ) = βε (N(nτ) - N(0))`, the Clausius form of the second law for the
//! pumping process.

use crate::error::{Error, Result};

use super::closed_form::photon_number_closed;
use super::{gibbs_state, MicromaserParams};

/// Perfect-cavity energy variation (σ = 0).
#[derive(Debug, Clone, Copy)]
pub struct PerfectEnergy {
    /// `ΔE(t_n, t_{n-1})`, defined for `n ≥ 2`.
    pub step: f64,
    /// `ΔE(t_n, t_1) = Σ_{k=2}^{n} step(k)`.
    pub cumulative: f64,
}

pub fn energy_variation_perfect(params: &MicromaserParams, n: usize) -> Result<PerfectEnergy> {
    params.validate()?;
    if params.sigma != 0.0 {
        return Err(Error::InvalidParameter(
            "energy_variation_perfect requires sigma = 0".into(),
        ));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(
            "stepwise energy variation needs n >= 2".into(),
        ));
    }
    let amp = 2.0 * params.lambda.powi(2) / params.epsilon * params.p * (1.0 - params.p);
    let step = amp * params.one_minus_cos_n(1.0);
    let cumulative = (n as f64 - 1.0) * step;
    Ok(PerfectEnergy { step, cumulative })
}

/// `λ ω^{nτ}((b*+b) ⊗ η_n)` — the interaction energy with the atom that has
/// just finished its slot.
fn interaction_energy_same(params: &MicromaserParams, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    let p = params.p;
    let mod2 = params.mu().norm_sqr();
    let lam2 = params.lambda.powi(2);
    let sig_half = params.sigma * params.tau / 2.0;
    let theta = params.epsilon * params.tau;
    let g1 = 1.0 - (-sig_half).exp() * theta.cos();
    let gn = 1.0 - (-nf * sig_half).exp() * (nf * theta).cos();
    let s1 = (-sig_half).exp() * theta.sin();
    let sn = (-nf * sig_half).exp() * (nf * theta).sin();

    -(2.0 * lam2 * params.epsilon / mod2) * (p * (1.0 - p) * g1 + p * p * gn)
        + (lam2 * params.sigma / mod2) * (p * (1.0 - p) * s1 + p * p * sn)
}

/// `λ ω^{(n-1)τ}((b*+b) ⊗ η_n)` — the interaction energy with the atom that
/// is about to enter (only its correlation through earlier atoms survives).
fn interaction_energy_prev(params: &MicromaserParams, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let kf = n as f64 - 1.0;
    let p = params.p;
    let mod2 = params.mu().norm_sqr();
    let lam2 = params.lambda.powi(2);
    let sig_half = params.sigma * params.tau / 2.0;
    let theta = params.epsilon * params.tau;
    let gk = 1.0 - (-kf * sig_half).exp() * (kf * theta).cos();
    let sk = (-kf * sig_half).exp() * (kf * theta).sin();
    -(2.0 * lam2 * params.epsilon / mod2) * p * p * gk
        + (lam2 * params.sigma / mod2) * p * p * sk
}

/// Leaky-cavity energy record at slot `n`.
#[derive(Debug, Clone, Copy)]
pub struct LeakyEnergy {
    /// `ΔE_σ(nτ-0, (n-1)τ)` — variation while atom `n` transits.
    pub in_cavity_step: f64,
    /// `ΔE_σ((n-1)τ, (n-1)τ-0)` — the beam-advance jump (zero at `n = 1`).
    pub jump: f64,
    /// `ΔE_σ(nτ-0, (n-1)τ-0) = in_cavity_step + jump`.
    pub extended_step: f64,
    /// `ΔE_σ(t_n, t_0) = Σ_k extended(k)`.
    pub cumulative: f64,
    /// `lim_{n→∞} cumulative`.
    pub limit: f64,
    /// Upper/lower envelopes `-εN₀ + (2λ²ε/|μ|²) p(1-p)/(1 ∓ e^{-στ/2})` of
    /// the geometric-mixing part of the limit.
    pub limit_upper_bound: f64,
    pub limit_lower_bound: f64,
}

pub fn energy_variation_leaky(
    params: &MicromaserParams,
    n: usize,
    n0: f64,
) -> Result<LeakyEnergy> {
    params.validate()?;
    if params.sigma <= 0.0 {
        return Err(Error::InvalidParameter(
            "energy_variation_leaky requires sigma > 0".into(),
        ));
    }
    if n < 1 {
        return Err(Error::InvalidParameter("needs n >= 1".into()));
    }
    let eps = params.epsilon;
    let photon = |k: usize| photon_number_closed(params, k, n0);

    let in_cavity_step = eps * (photon(n) - photon(n - 1)) + interaction_energy_same(params, n)
        - interaction_energy_prev(params, n);
    let jump = interaction_energy_prev(params, n) - interaction_energy_same(params, n - 1);
    let extended_step = in_cavity_step + jump;
    let cumulative = eps * (photon(n) - n0) + interaction_energy_same(params, n);

    // n → ∞ of the cumulative: photon number tends to its limit and the
    // interaction settles at its non-oscillating part.
    let p = params.p;
    let mod2 = params.mu().norm_sqr();
    let lam2 = params.lambda.powi(2);
    let sig_tau = params.sigma * params.tau;
    let theta = eps * params.tau;
    let g1 = 1.0 - (-sig_tau / 2.0).exp() * theta.cos();
    let s1 = (-sig_tau / 2.0).exp() * theta.sin();
    let photon_limit = super::closed_form::photon_number_limit(params)?;
    let interaction_limit =
        -(2.0 * lam2 * eps / mod2) * (p * (1.0 - p) * g1 + p * p) + (lam2 * params.sigma / mod2) * p * (1.0 - p) * s1;
    let limit = eps * (photon_limit - n0) + interaction_limit;

    let mixing = 2.0 * lam2 * eps / mod2 * p * (1.0 - p);
    let limit_upper_bound = -eps * n0 + mixing / (1.0 - (-sig_tau / 2.0).exp());
    let limit_lower_bound = -eps * n0 + mixing / (1.0 + (-sig_tau / 2.0).exp());

    Ok(LeakyEnergy {
        in_cavity_step,
        jump,
        extended_step,
        cumulative,
        limit,
        limit_upper_bound,
        limit_lower_bound,
    })
}

/// Entropy production of the non-leaking cavity after `n` slots, starting
/// from Gibbs-distributed photons at inverse temperature `β`:
/// `ΔS(nτ) = βε (N(nτ) - N(0))` with `N(0)` the truncated-Gibbs expectation.
pub fn entropy_production(params: &MicromaserParams, beta: f64, n: usize) -> Result<f64> {
    params.validate()?;
    if params.sigma != 0.0 {
        return Err(Error::InvalidParameter(
            "entropy_production covers the non-leaking cavity".into(),
        ));
    }
    if beta <= 0.0 {
        return Err(Error::InvalidParameter("beta must be positive".into()));
    }
    let n0 = gibbs_state(beta, params.epsilon, params.cutoff).mean_photon_number();
    let n_t = photon_number_closed(params, n, n0);
    Ok(beta * params.epsilon * (n_t - n0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::micromaser::fullsys::{
        entropy_oracle, leaky_energy_oracle, perfect_energy_cumulative_oracle,
        perfect_energy_step_oracle,
    };
    use crate::micromaser::gibbs_state;

    fn perfect(cutoff: usize) -> MicromaserParams {
        MicromaserParams {
            epsilon: 1.0,
            atom_level: 0.8,
            lambda: 0.25,
            tau: 1.0,
            p: 0.4,
            sigma: 0.0,
            cutoff,
        }
    }

    #[test]
    fn perfect_energy_vanishes_at_deterministic_beam() {
        let mut params = perfect(20);
        for p in [0.0, 1.0] {
            params.p = p;
            let e = energy_variation_perfect(&params, 5).unwrap();
            assert_eq!(e.step, 0.0);
            assert_eq!(e.cumulative, 0.0);
        }
    }

    #[test]
    fn perfect_energy_vanishes_at_resonance() {
        let mut params = perfect(20);
        params.tau = 2.0 * std::f64::consts::PI;
        for n in [2, 3, 9] {
            let e = energy_variation_perfect(&params, n).unwrap();
            assert_eq!(e.step, 0.0);
            assert_eq!(e.cumulative, 0.0);
        }
    }

    #[test]
    fn perfect_cumulative_telescopes_steps() {
        let params = perfect(20);
        let mut acc = 0.0;
        for k in 2..=9 {
            acc += energy_variation_perfect(&params, k).unwrap().step;
        }
        let cum = energy_variation_perfect(&params, 9).unwrap().cumulative;
        assert!((acc - cum).abs() < 1e-12);
    }

    #[test]
    fn perfect_step_matches_full_system_oracle() {
        let params = perfect(18);
        let g = gibbs_state(1.0, params.epsilon, params.cutoff);
        for n in [2usize, 3] {
            let closed = energy_variation_perfect(&params, n).unwrap().step;
            let oracle = perfect_energy_step_oracle(&params, n, &g).unwrap();
            assert!(
                (closed - oracle).abs() < 1e-7,
                "n={n}: closed {closed} vs oracle {oracle}"
            );
        }
    }

    #[test]
    fn perfect_cumulative_matches_full_system_oracle() {
        let params = perfect(18);
        let g = gibbs_state(1.0, params.epsilon, params.cutoff);
        let closed = energy_variation_perfect(&params, 3).unwrap().cumulative;
        let oracle = perfect_energy_cumulative_oracle(&params, 3, &g).unwrap();
        assert!(
            (closed - oracle).abs() < 1e-7,
            "closed {closed} vs oracle {oracle}"
        );
    }

    fn leaky(cutoff: usize) -> MicromaserParams {
        MicromaserParams {
            sigma: 0.4,
            ..perfect(cutoff)
        }
    }

    #[test]
    fn leaky_components_vanish_without_beam_or_photons() {
        let mut params = leaky(15);
        params.p = 0.0;
        for n in [1, 2, 6] {
            let e = energy_variation_leaky(&params, n, 0.0).unwrap();
            assert!(e.in_cavity_step.abs() < 1e-15);
            assert!(e.jump.abs() < 1e-15);
            assert!(e.cumulative.abs() < 1e-15);
            assert!(e.limit.abs() < 1e-15);
        }
    }

    #[test]
    fn leaky_telescoping_is_exact() {
        let params = leaky(15);
        let n0 = 0.37;
        let mut acc = 0.0;
        for k in 1..=12 {
            acc += energy_variation_leaky(&params, k, n0).unwrap().extended_step;
        }
        let cum = energy_variation_leaky(&params, 12, n0).unwrap().cumulative;
        assert!(
            (acc - cum).abs() < 1e-12,
            "telescoping defect {}",
            (acc - cum).abs()
        );
    }

    #[test]
    fn leaky_jump_is_n_independent_beyond_first() {
        let params = leaky(15);
        let j2 = energy_variation_leaky(&params, 2, 0.1).unwrap().jump;
        let j7 = energy_variation_leaky(&params, 7, 0.1).unwrap().jump;
        assert!((j2 - j7).abs() < 1e-13);
        // and matches the closed expression
        let p = params.p;
        let mod2 = params.mu().norm_sqr();
        let g = 1.0
            - (-params.sigma * params.tau / 2.0).exp() * (params.epsilon * params.tau).cos();
        let s = (-params.sigma * params.tau / 2.0).exp() * (params.epsilon * params.tau).sin();
        let expect = p * (1.0 - p) * 2.0 * params.lambda.powi(2) * params.epsilon / mod2 * g
            - p * (1.0 - p) * params.lambda.powi(2) * params.sigma / mod2 * s;
        assert!((j2 - expect).abs() < 1e-13);
        // first atom enters a gauge-invariant cavity: no jump
        let j1 = energy_variation_leaky(&params, 1, 0.1).unwrap().jump;
        assert_eq!(j1, 0.0);
    }

    #[test]
    fn leaky_small_sigma_freezes_in_cavity_step() {
        // σ → 0⁺ recovers the autonomous case: no variation mid-slot
        let mut params = leaky(15);
        params.sigma = 1e-8;
        for n in [1, 2, 5] {
            let e = energy_variation_leaky(&params, n, 0.4).unwrap();
            assert!(
                e.in_cavity_step.abs() < 1e-6,
                "n={n}: step {}",
                e.in_cavity_step
            );
        }
    }

    #[test]
    fn leaky_components_match_full_system_oracle() {
        let params = leaky(12);
        let g = gibbs_state(1.0, params.epsilon, params.cutoff);
        let n0 = g.mean_photon_number();
        for n in [1usize, 2, 3] {
            let closed = energy_variation_leaky(&params, n, n0).unwrap();
            let oracle = leaky_energy_oracle(&params, n, &g).unwrap();
            assert!(
                (closed.in_cavity_step - oracle.in_cavity_step).abs() < 1e-6,
                "n={n} in-cavity: closed {} vs oracle {}",
                closed.in_cavity_step,
                oracle.in_cavity_step
            );
            assert!(
                (closed.jump - oracle.jump).abs() < 1e-6,
                "n={n} jump: closed {} vs oracle {}",
                closed.jump,
                oracle.jump
            );
            assert!(
                (closed.cumulative - oracle.cumulative).abs() < 1e-6,
                "n={n} cumulative: closed {} vs oracle {}",
                closed.cumulative,
                oracle.cumulative
            );
        }
    }

    #[test]
    fn leaky_limit_is_long_run_cumulative() {
        let params = leaky(15);
        let n0 = 0.23;
        let lim = energy_variation_leaky(&params, 1, n0).unwrap().limit;
        let far = energy_variation_leaky(&params, 3000, n0).unwrap().cumulative;
        assert!((lim - far).abs() < 1e-10, "limit {lim} vs far {far}");
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(48))]

        #[test]
        fn prop_leaky_telescoping(
            p in 0.0f64..1.0,
            lambda in 0.01f64..0.5,
            sigma in 0.05f64..1.2,
            tau in 0.2f64..2.0,
            n0 in 0.0f64..1.5,
        ) {
            let params = MicromaserParams {
                epsilon: 1.0,
                atom_level: 1.0,
                lambda,
                tau,
                p,
                sigma,
                cutoff: 10,
            };
            let mut acc = 0.0;
            for k in 1..=9usize {
                acc += energy_variation_leaky(&params, k, n0).unwrap().extended_step;
            }
            let cum = energy_variation_leaky(&params, 9, n0).unwrap().cumulative;
            proptest::prop_assert!((acc - cum).abs() < 1e-12,
                "telescoping defect {}", (acc - cum).abs());
        }
    }

    #[test]
    fn entropy_zero_steps_and_resonance() {
        let params = perfect(20);
        assert_eq!(entropy_production(&params, 1.0, 0).unwrap(), 0.0);
        let mut resonant = params;
        resonant.tau = 2.0 * std::f64::consts::PI;
        for n in [1, 4, 9] {
            assert!(entropy_production(&resonant, 1.0, n).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn second_law_holds_along_the_whole_run() {
        // non-resonant, 0 < p < 1: the photon number never dips below its
        // Gibbs start, so the production is nonnegative at every slot
        let params = perfect(20);
        for n in 0..=200usize {
            assert!(entropy_production(&params, 1.0, n).unwrap() >= -1e-12);
        }
    }

    #[test]
    fn entropy_is_nonnegative_and_matches_oracle() {
        let params = perfect(15);
        let beta = 1.0;
        let g = gibbs_state(beta, params.epsilon, params.cutoff);
        for n in [1usize, 2] {
            let closed = entropy_production(&params, beta, n).unwrap();
            assert!(closed >= 0.0);
            let oracle = entropy_oracle(&params, n, &g).unwrap();
            assert!(
                (closed - oracle).abs() < 1e-6,
                "n={n}: closed {closed} vs oracle {oracle}"
            );
        }
    }
}
