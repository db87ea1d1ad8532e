//! The one-atom-per-slot reduced cavity channel.
//!
//! Perfect cavity (`σ = 0`): tracing the atom out of one slot of unitary
//! evolution leaves
//! `ρ ↦ p U_e ρ U_e* + (1-p) U_g ρ U_g*` with `U_g = e^{-iτε b*b}` and
//! `U_e = D(-λ/ε) U_g D(λ/ε)`, `D(r) = e^{r(b*-b)}`.
//!
//! Leaking cavity (`σ > 0`): the slot map becomes
//! `ρ ↦ p D(-λ/ε) e^{τ L_λ}(D(λ/ε) ρ D(-λ/ε)) D(λ/ε) + (1-p) e^{τ L_0}(ρ)`
//! with the shifted damped-oscillator generator
//! `L_λ(ρ) = -i[ε b*b, ρ] + σ (b-λ/ε) ρ (b*-λ/ε) - (σ/2){(b*-λ/ε)(b-λ/ε), ρ}`.
//! The two `τ`-exponentials depend only on `(ε, λ, τ, σ, cutoff)` and are
//! cached process-wide; the excitation probability `p` only mixes them.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::defaults;
use crate::error::{Error, Result};
use crate::lindblad::{Picture, Superoperator};
use crate::linalg::{c, identity, matrix_exp, sandwich_superop, CMat, I};
use crate::operators::{annihilation_op, displacement, number_op};

use super::{CavityState, MicromaserParams};

/// Completely positive trace-preserving map on cavity states, stored in the
/// Schrödinger picture.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    pub superop: Superoperator,
    pub cutoff: usize,
}

impl QuantumChannel {
    pub fn apply(&self, rho: &CMat) -> CMat {
        self.superop.apply(rho)
    }

    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }
}

/// `e^{-iτε b*b}` built from exact diagonal phases.
fn free_rotation(params: &MicromaserParams) -> CMat {
    let d = params.cutoff + 1;
    let mut u = CMat::zeros((d, d));
    for n in 0..d {
        let phase = -params.tau * params.epsilon * n as f64;
        u[[n, n]] = C64::new(phase.cos(), phase.sin());
    }
    u
}

use crate::linalg::C64;

/// Perfect-cavity slot channel (`σ = 0`).
pub fn one_atom_channel(params: &MicromaserParams) -> Result<QuantumChannel> {
    params.validate()?;
    if params.sigma != 0.0 {
        return Err(Error::InvalidParameter(
            "one_atom_channel requires sigma = 0; use one_atom_channel_leaky".into(),
        ));
    }
    let space = params.fock_space();
    let r = params.displacement_amplitude();
    let u_g = free_rotation(params);
    let d_plus = displacement(space, r, defaults::TAIL_THRESHOLD)?;
    let d_minus = displacement(space, -r, defaults::TAIL_THRESHOLD)?;
    let u_e = d_minus.dot(&u_g).dot(&d_plus);

    // ρ ↦ U ρ U† vectorizes to conj(U) ⊗ U.
    let conj_e = sandwich_superop(&u_e, &crate::linalg::dagger(&u_e));
    let conj_g = sandwich_superop(&u_g, &crate::linalg::dagger(&u_g));
    let mat = conj_e.mapv(|z| z * c(params.p)) + conj_g.mapv(|z| z * c(1.0 - params.p));
    Ok(QuantumChannel {
        superop: Superoperator {
            dim: space.dim(),
            mat,
            picture: Picture::Schroedinger,
        },
        cutoff: params.cutoff,
    })
}

/// Vectorized Schrödinger generator of the damped oscillator shifted by `r`:
/// `L_r(ρ) = -i[ε b*b, ρ] + σ b_r ρ b_r† - (σ/2){b_r† b_r, ρ}` with
/// `b_r = b - r`.
fn shifted_damping_superop(params: &MicromaserParams, r: f64) -> CMat {
    let space = params.fock_space();
    let d = space.dim();
    let eye = identity(d);
    let b_r = annihilation_op(space) - eye.mapv(|z| z * c(r));
    let b_r_dag = crate::linalg::dagger(&b_r);
    let n_op = number_op(space).mapv(|z| z * c(params.epsilon));
    let bdb = b_r_dag.dot(&b_r);

    let mut m = (sandwich_superop(&n_op, &eye) - sandwich_superop(&eye, &n_op)).mapv(|z| -z * I);
    m = m + sandwich_superop(&b_r, &b_r_dag).mapv(|z| z * c(params.sigma));
    m = m
        - (sandwich_superop(&bdb, &eye) + sandwich_superop(&eye, &bdb))
            .mapv(|z| z * c(params.sigma / 2.0));
    m
}

type ExpCache = Mutex<HashMap<(u64, u64, u64, u64, usize), (Arc<CMat>, Arc<CMat>)>>;

fn exp_cache() -> &'static ExpCache {
    static CACHE: OnceLock<ExpCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cached_slot_exponentials(params: &MicromaserParams) -> Result<(Arc<CMat>, Arc<CMat>)> {
    let key = (
        params.epsilon.to_bits(),
        params.lambda.to_bits(),
        params.tau.to_bits(),
        params.sigma.to_bits(),
        params.cutoff,
    );
    if let Some(hit) = exp_cache().lock().unwrap().get(&key) {
        return Ok(hit.clone());
    }
    let r = params.displacement_amplitude();
    let gen_l = shifted_damping_superop(params, r).mapv(|z| z * c(params.tau));
    let gen_0 = shifted_damping_superop(params, 0.0).mapv(|z| z * c(params.tau));
    let e_l = Arc::new(matrix_exp(&gen_l, defaults::EXPM_TOL)?);
    let e_0 = Arc::new(matrix_exp(&gen_0, defaults::EXPM_TOL)?);
    exp_cache()
        .lock()
        .unwrap()
        .insert(key, (e_l.clone(), e_0.clone()));
    Ok((e_l, e_0))
}

/// Leaking-cavity slot channel (`σ > 0`).
pub fn one_atom_channel_leaky(params: &MicromaserParams) -> Result<QuantumChannel> {
    params.validate()?;
    if params.sigma <= 0.0 {
        return Err(Error::InvalidParameter(
            "one_atom_channel_leaky requires sigma > 0".into(),
        ));
    }
    let space = params.fock_space();
    let r = params.displacement_amplitude();
    let d_plus = displacement(space, r, defaults::TAIL_THRESHOLD)?;
    let d_minus = displacement(space, -r, defaults::TAIL_THRESHOLD)?;
    let (e_l, e_0) = cached_slot_exponentials(params)?;

    // p · S_{D(-r)} e^{τL_λ} S_{D(r)} + (1-p) e^{τL_0}
    let s_plus = sandwich_superop(&d_plus, &crate::linalg::dagger(&d_plus));
    let s_minus = sandwich_superop(&d_minus, &crate::linalg::dagger(&d_minus));
    let excited = s_minus.dot(&*e_l).dot(&s_plus);
    let mat =
        excited.mapv(|z| z * c(params.p)) + e_0.mapv(|z| z * c(1.0 - params.p));
    Ok(QuantumChannel {
        superop: Superoperator {
            dim: space.dim(),
            mat,
            picture: Picture::Schroedinger,
        },
        cutoff: params.cutoff,
    })
}

/// Slot channel for the given parameters, perfect or leaky.
pub fn slot_channel(params: &MicromaserParams) -> Result<QuantumChannel> {
    if params.sigma > 0.0 {
        one_atom_channel_leaky(params)
    } else {
        one_atom_channel(params)
    }
}

/// `n`-fold application of the slot channel, with the tail mass of the top
/// Fock level monitored after each step.
pub fn iterate(
    channel: &QuantumChannel,
    rho0: &CavityState,
    n: usize,
    tail_threshold: f64,
) -> Result<CavityState> {
    if rho0.dim() != channel.dim() {
        return Err(Error::DimensionMismatch {
            expected: channel.dim(),
            got: rho0.dim(),
            context: "state vs channel cutoff",
        });
    }
    let mut rho = rho0.density().clone();
    for _ in 0..n {
        rho = channel.apply(&rho);
        let d = rho.nrows();
        let tail = rho[[d - 1, d - 1]].re;
        if tail > tail_threshold {
            return Err(Error::TruncationError {
                tail,
                threshold: tail_threshold,
            });
        }
    }
    Ok(CavityState::from_density_unchecked(rho))
}
