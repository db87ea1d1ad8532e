//! Closed-form photon statistics of the repeated-interaction cavity.
//!
//! The Heisenberg slot map sends the polynomial algebra spanned by
//! `{b*b, b*, b, 𝟙}` into itself:
//!
//! * `ℒ*(b*) = e^{-μ̄τ} b* + p (iλ/μ̄)(1 - e^{-μ̄τ})`
//! * `ℒ*(b)  = e^{-μτ} b  - p (iλ/μ)(1 - e^{-μτ})`
//! * `ℒ*(b*b) = e^{-στ} b*b + p (iλ/μ) e^{-στ}(1 - e^{μτ}) b*
//!              - p (iλ/μ̄) e^{-στ}(1 - e^{μ̄τ}) b
//!              + p (λ²/|μ|²) e^{-στ}(1-e^{μτ})(1-e^{μ̄τ})`
//!
//! with `μ = σ/2 + iε` (σ = 0 included as `μ = iε`). Iterating the map `n`
//! times closes into [`NumberOpCoefficients`]; the closed forms below are the
//! resolved `n`-th powers, and [`dual_number_coefficients_recursive`] is the
//! step-by-step recursion kept as an independent oracle.

use crate::error::{Error, Result};
use crate::linalg::C64;

use super::MicromaserParams;

/// Coefficients of `(ℒ*)^n(b*b) = c_num·b*b + c_cre·b* + c_ann·b + c_id`.
///
/// `c_ann = conj(c_cre)`; `c_num` and `c_id` are real.
#[derive(Debug, Clone, Copy)]
pub struct NumberOpCoefficients {
    pub c_num: f64,
    pub c_cre: C64,
    pub c_ann: C64,
    pub c_id: f64,
}

impl NumberOpCoefficients {
    pub fn identity() -> Self {
        NumberOpCoefficients {
            c_num: 1.0,
            c_cre: C64::new(0.0, 0.0),
            c_ann: C64::new(0.0, 0.0),
            c_id: 0.0,
        }
    }
}

/// One-step coefficients of the dual slot map on `{b*b, b*, b, 𝟙}`.
struct OneStep {
    /// coefficient of `b*b` in `ℒ*(b*b)`
    a_num: f64,
    /// coefficient of `b*` in `ℒ*(b*b)`
    a_cre: C64,
    /// constant in `ℒ*(b*b)`
    a_id: f64,
    /// `ℒ*(b*) = b_cre · b* + beta_cre`
    b_cre: C64,
    beta_cre: C64,
}

fn one_step(params: &MicromaserParams) -> OneStep {
    let mu = params.mu();
    let mu_bar = mu.conj();
    let p = params.p;
    let lambda = params.lambda;
    let i = C64::new(0.0, 1.0);
    let e_sig = (-params.sigma * params.tau).exp();
    let one_minus_emu = C64::new(1.0, 0.0) - (mu * params.tau).exp();
    let one_minus_emubar = one_minus_emu.conj();

    let a_cre = (i * lambda / mu) * e_sig * one_minus_emu * p;
    let a_id = (lambda.powi(2) / mu.norm_sqr()) * e_sig * (one_minus_emu * one_minus_emubar).re * p;
    let b_cre = (-mu_bar * params.tau).exp();
    let beta_cre = (i * lambda / mu_bar) * (C64::new(1.0, 0.0) - b_cre) * p;
    OneStep {
        a_num: e_sig,
        a_cre,
        a_id,
        b_cre,
        beta_cre,
    }
}

/// Coefficients of `(ℒ*)^n(b*b)` by `n`-fold application of the one-step
/// map — the independent recursion oracle for the closed forms.
pub fn dual_number_coefficients_recursive(
    params: &MicromaserParams,
    n: usize,
) -> NumberOpCoefficients {
    let step = one_step(params);
    let mut coeff = NumberOpCoefficients::identity();
    for _ in 0..n {
        let new_num = coeff.c_num * step.a_num;
        let new_cre = step.a_cre * coeff.c_num + coeff.c_cre * step.b_cre;
        let new_ann = new_cre.conj();
        let id_shift = coeff.c_cre * step.beta_cre + coeff.c_ann * step.beta_cre.conj();
        let new_id = coeff.c_num * step.a_id + id_shift.re + coeff.c_id;
        coeff = NumberOpCoefficients {
            c_num: new_num,
            c_cre: new_cre,
            c_ann: new_ann,
            c_id: new_id,
        };
    }
    coeff
}

/// Closed-form coefficients of `(ℒ*)^n(b*b)`.
pub fn dual_number_coefficients(params: &MicromaserParams, n: usize) -> NumberOpCoefficients {
    if n == 0 {
        return NumberOpCoefficients::identity();
    }
    let nf = n as f64;
    let p = params.p;
    let lambda = params.lambda;
    let i = C64::new(0.0, 1.0);

    if params.sigma == 0.0 {
        let eps = params.epsilon;
        let theta = eps * params.tau;
        let scale = 2.0 * lambda.powi(2) / eps.powi(2);
        let c_cre =
            (lambda / eps) * (C64::new(1.0, 0.0) - (i * nf * theta).exp()) * p;
        let c_id = nf * p * (1.0 - p) * scale * params.one_minus_cos_n(1.0)
            + p.powi(2) * scale * params.one_minus_cos_n(nf);
        return NumberOpCoefficients {
            c_num: 1.0,
            c_cre,
            c_ann: c_cre.conj(),
            c_id,
        };
    }

    let mu = params.mu();
    let mu_bar = mu.conj();
    let sig_tau = params.sigma * params.tau;
    let e_nsig = (-nf * sig_tau).exp();
    let e_sig = (-sig_tau).exp();
    let geo = (1.0 - e_nsig) / (1.0 - e_sig);
    let mod2 = mu.norm_sqr();
    let g = 1.0 - (-0.5 * sig_tau).exp() * (params.epsilon * params.tau).cos();

    let c_cre = (i * lambda / mu) * (C64::new(e_nsig, 0.0) - (-nf * mu_bar * params.tau).exp()) * p;
    let prod = ((C64::new(1.0, 0.0) - (mu * params.tau).exp())
        * (C64::new(1.0, 0.0) - (mu_bar * params.tau).exp()))
    .re;
    let c_id = p * (lambda.powi(2) / mod2) * e_sig * prod * geo
        - p.powi(2) * (2.0 * lambda.powi(2) / mod2) * geo * g
        + p.powi(2)
            * (2.0 * lambda.powi(2) / mod2)
            * (1.0 - (-nf * sig_tau / 2.0).exp() * (nf * params.epsilon * params.tau).cos());

    NumberOpCoefficients {
        c_num: e_nsig,
        c_cre,
        c_ann: c_cre.conj(),
        c_id,
    }
}

/// Mean photon number after `n` slots from a gauge-invariant initial state
/// with `⟨b*b⟩ = n0`: `N(nτ) = c_num·n0 + c_id`.
///
/// For `σ = 0` this is
/// `n0 + n p(1-p)(2λ²/ε²)(1-cos ετ) + p²(2λ²/ε²)(1-cos nετ)`.
pub fn photon_number_closed(params: &MicromaserParams, n: usize, n0: f64) -> f64 {
    let coeff = dual_number_coefficients(params, n);
    coeff.c_num * n0 + coeff.c_id
}

/// Long-run photon number of the leaking cavity,
/// `(4λ²/(4ε²+σ²)) · p/(1-e^{-στ}) · {1 + e^{-στ}(1-2p) - 2e^{-στ/2}(1-p) cos ετ}`.
pub fn photon_number_limit(params: &MicromaserParams) -> Result<f64> {
    if params.sigma <= 0.0 {
        return Err(Error::InvalidParameter(
            "photon_number_limit requires sigma > 0".into(),
        ));
    }
    let p = params.p;
    let sig_tau = params.sigma * params.tau;
    let mod2 = params.mu().norm_sqr();
    let cos = if params.is_resonant() {
        1.0
    } else {
        (params.epsilon * params.tau).cos()
    };
    let brace = 1.0 + (-sig_tau).exp() * (1.0 - 2.0 * p)
        - 2.0 * (-sig_tau / 2.0).exp() * (1.0 - p) * cos;
    Ok((params.lambda.powi(2) / mod2) * p / (1.0 - (-sig_tau).exp()) * brace)
}
