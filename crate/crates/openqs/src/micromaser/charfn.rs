//! Characteristic function of the cavity state along the slot dynamics, its
//! infinite-time limit, and a quasi-freeness test.
//!
//! The dual slot map acts on Weyl operators `W(α) = e^{αb - ᾱb*}` as a
//! product of a scalar factor and a contracted Weyl operator, which iterates
//! into the closed form
//!
//! `(ℒ*)^n(W(α)) = ∏_{k=0}^{n-1}(p e^{z_k - z̄_k} + 1 - p)
//!                 · e^{-(1-e^{-nστ})|α|²/2} · W(e^{-nμτ} α)`
//!
//! with `z_k = -(iλ/μ)(1 - e^{-μτ}) e^{-kμτ} α`. The per-factor exponents are
//! purely imaginary, so `|factor| ≤ 1`; the Gaussian is the vacuum-noise
//! envelope accumulated by the damping (each slot contributes
//! `e^{-(1-e^{-στ})|β|²/2}` at the current Weyl argument `β`, and the
//! geometric sum of `|β_k|² = e^{-kστ}|α|²` telescopes). In the limit
//! `n → ∞` the residual Weyl factor drops out — the limit state does not
//! remember the initial state — leaving
//! `ω(W(α)) = e^{-|α|²/2} ∏_{k=0}^{∞}(p e^{z_k - z̄_k} + 1 - p)`,
//! truncated where the geometric tail of `|h_k| = p|e^{z_k-z̄_k} - 1|`
//! falls below the requested tolerance.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c, trace, C64};
use crate::operators::{weyl_op, FockSpace};

use super::{CavityState, MicromaserParams};

/// Scalar factor of slot `k`: `p e^{z_k - z̄_k} + 1 - p`.
fn slot_factor(params: &MicromaserParams, k: usize, alpha: C64) -> C64 {
    let mu = params.mu();
    let i = C64::new(0.0, 1.0);
    let z = -(i * params.lambda / mu)
        * (C64::new(1.0, 0.0) - (-mu * params.tau).exp())
        * (-mu * params.tau * k as f64).exp()
        * alpha;
    let exponent = z - z.conj();
    c(params.p) * exponent.exp() + c(1.0 - params.p)
}

/// Gaussian vacuum-noise envelope accumulated over `n` slots.
fn noise_envelope(params: &MicromaserParams, n: usize, alpha: C64) -> f64 {
    let decay = 1.0 - (-(n as f64) * params.sigma * params.tau).exp();
    (-decay * alpha.norm_sqr() / 2.0).exp()
}

/// `ω^{(n)}(W(α)) = Tr(W(α) ℒ^n(ρ0))` from the product formula.
pub fn characteristic_function(
    params: &MicromaserParams,
    n: usize,
    alpha: C64,
    rho0: &CavityState,
) -> Result<C64> {
    params.validate()?;
    let mut product = C64::new(1.0, 0.0);
    for k in 0..n {
        product *= slot_factor(params, k, alpha);
    }
    let residual_arg = (-params.mu() * params.tau * n as f64).exp() * alpha;
    let space = FockSpace::new(rho0.cutoff());
    let w = weyl_op(space, residual_arg, crate::defaults::TAIL_THRESHOLD)?;
    let residual = trace(&w.dot(rho0.density()));
    Ok(product * c(noise_envelope(params, n, alpha)) * residual)
}

/// Number of factors needed so that the neglected tail of the infinite
/// product shifts the value by less than `tol`; errors out instead of
/// looping unboundedly when `στ` is too small for the tolerance.
fn product_truncation(params: &MicromaserParams, alpha_mod: f64, tol: f64) -> Result<usize> {
    let mu_mod = params.mu().norm();
    let step = (C64::new(1.0, 0.0) - (-params.mu() * params.tau).exp()).norm();
    let half_rate = params.sigma * params.tau / 2.0;
    // Σ_{k≥K} |h_k| ≤ 2p (λ/|μ|) |1-e^{-μτ}| |α| e^{-K στ/2} / (1 - e^{-στ/2})
    let prefactor = 2.0 * params.p * params.lambda / mu_mod * step * alpha_mod
        / (1.0 - (-half_rate).exp());
    if prefactor <= tol {
        return Ok(1);
    }
    let k = ((prefactor / tol).ln() / half_rate).ceil();
    if !(k.is_finite() && k < 1e7) {
        return Err(Error::InvalidParameter(format!(
            "sigma·tau = {:.3e} too small to reach tolerance {tol:.1e}",
            params.sigma * params.tau
        )));
    }
    Ok(k as usize + 1)
}

/// Characteristic function of the limiting cavity state; independent of the
/// initial state by construction. Requires `σ > 0`.
pub fn limiting_characteristic(params: &MicromaserParams, alpha: C64, tol: f64) -> Result<C64> {
    params.validate()?;
    if params.sigma <= 0.0 {
        return Err(Error::InvalidParameter(
            "limiting_characteristic requires sigma > 0".into(),
        ));
    }
    let k_max = product_truncation(params, alpha.norm(), tol)?;
    let mut product = C64::new(1.0, 0.0);
    for k in 0..k_max {
        product *= slot_factor(params, k, alpha);
    }
    Ok(product * c((-alpha.norm_sqr() / 2.0).exp()))
}

/// Branch-safe logarithm of the limiting characteristic function: the
/// Gaussian exponent plus the sum of per-factor principal logarithms (each
/// factor has positive real part for `p < 1` and modulus one for `p = 1`).
fn log_limiting(params: &MicromaserParams, alpha: C64, tol: f64) -> Result<C64> {
    let k_max = product_truncation(params, alpha.norm(), tol)?;
    let mut log_sum = C64::new(-alpha.norm_sqr() / 2.0, 0.0);
    for k in 0..k_max {
        log_sum += slot_factor(params, k, alpha).ln();
    }
    Ok(log_sum)
}

/// Quadratic-form fit residual of `log ω(W(α))` over a polar grid with radii
/// up to 2.
///
/// A quasi-free state has `log ω(W(α))` equal to a polynomial of degree ≤ 2
/// in `(α, ᾱ)`, so the residual sits at numerical noise; the pumped leaking
/// cavity produces a genuinely non-quadratic logarithm for `0 < p < 1`. The
/// grid radius is capped so that each factor's phase stays inside the
/// principal branch (`2 (λ/|μ|) |1-e^{-μτ}| r < π`) for moderate couplings.
pub fn quasifree_defect(params: &MicromaserParams) -> Result<f64> {
    params.validate()?;
    if params.sigma <= 0.0 {
        return Err(Error::InvalidParameter(
            "quasifree_defect requires sigma > 0".into(),
        ));
    }

    let radii = [0.5, 1.0, 1.5, 2.0];
    let angles = 12;
    let mut points = Vec::new();
    for &r in &radii {
        for a in 0..angles {
            let phi = 2.0 * std::f64::consts::PI * a as f64 / angles as f64;
            points.push(C64::new(r * phi.cos(), r * phi.sin()));
        }
    }

    // basis: 1, α, ᾱ, α², ᾱ², |α|²
    let m = points.len();
    let mut design = Array2::<Complex64>::zeros((m, 6));
    let mut values = ndarray::Array1::<Complex64>::zeros(m);
    for (row, &alpha) in points.iter().enumerate() {
        design[[row, 0]] = C64::new(1.0, 0.0);
        design[[row, 1]] = alpha;
        design[[row, 2]] = alpha.conj();
        design[[row, 3]] = alpha * alpha;
        design[[row, 4]] = alpha.conj() * alpha.conj();
        design[[row, 5]] = c(alpha.norm_sqr());
        values[row] = log_limiting(params, alpha, 1e-12)?;
    }

    // least squares through the normal equations (6×6, well conditioned on
    // the polar grid)
    let dt = crate::linalg::dagger(&design);
    let gram = dt.dot(&design);
    let rhs = dt.dot(&values);
    use ndarray_linalg::Inverse;
    let coeffs = gram
        .inv()
        .map_err(|e| Error::Linalg(e.to_string()))?
        .dot(&rhs);

    let fitted = design.dot(&coeffs);
    let residual = values
        .iter()
        .zip(fitted.iter())
        .map(|(v, f)| (v - f).norm())
        .fold(0.0, f64::max);
    Ok(residual)
}
