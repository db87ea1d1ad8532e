//! Repeated-interaction cavity model: a one-mode resonator pumped by a beam
//! of randomly excited two-level atoms, one atom per time slot `τ`, with an
//! optional photon leak of rate `σ`.
//!
//! The per-slot reduced cavity map is built in [`channel`], the closed-form
//! photon statistics and number-operator coefficients live in
//! [`closed_form`], the characteristic function of the limiting state and the
//! quasi-freeness test in [`charfn`], energy flux and entropy production in
//! [`energy`], and the brute-force cavity⊗atoms oracles in [`fullsys`].
//!
//! Everything is parameterized by [`MicromaserParams`]; the derived complex
//! rate is `μ = σ/2 + iε` and the displacement amplitude `λ/ε`.

pub mod channel;
pub mod charfn;
pub mod closed_form;
pub mod energy;
pub mod fullsys;

pub use channel::{iterate, one_atom_channel, one_atom_channel_leaky, slot_channel, QuantumChannel};
pub use charfn::{characteristic_function, limiting_characteristic, quasifree_defect};
pub use closed_form::{
    dual_number_coefficients, dual_number_coefficients_recursive, photon_number_closed,
    photon_number_limit, NumberOpCoefficients,
};
pub use energy::{
    energy_variation_leaky, energy_variation_perfect, entropy_production, LeakyEnergy,
    PerfectEnergy,
};

use crate::error::{Error, Result};
use crate::linalg::{c, trace, CMat, C64};
use crate::operators::FockSpace;

/// Full parameterization of the cavity/beam model.
///
/// `atom_level` (the atomic excitation energy `E`) never enters a cavity
/// observable — the interaction commutes with every atomic number operator —
/// so it is stored and echoed in reports but excluded from numerical paths.
#[derive(Debug, Clone, Copy)]
pub struct MicromaserParams {
    /// Cavity frequency `ε > 0`.
    pub epsilon: f64,
    /// Atomic level spacing `E` (dynamically inert for the cavity).
    pub atom_level: f64,
    /// Coupling strength `λ`.
    pub lambda: f64,
    /// Passage time `τ > 0` of one atom.
    pub tau: f64,
    /// Excitation probability `p ∈ [0, 1]` of each beam atom.
    pub p: f64,
    /// Leak rate `σ ≥ 0`; `σ = 0` is the perfect cavity.
    pub sigma: f64,
    /// Fock truncation: basis `|0⟩..|cutoff⟩`.
    pub cutoff: usize,
}

impl MicromaserParams {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon <= 0.0 {
            return Err(Error::InvalidParameter("epsilon must be positive".into()));
        }
        if self.tau <= 0.0 {
            return Err(Error::InvalidParameter("tau must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidParameter("p must lie in [0, 1]".into()));
        }
        if self.sigma < 0.0 {
            return Err(Error::InvalidParameter("sigma must be >= 0".into()));
        }
        Ok(())
    }

    /// `μ = σ/2 + iε`; `|μ|² = ε² + σ²/4`.
    pub fn mu(&self) -> C64 {
        C64::new(self.sigma / 2.0, self.epsilon)
    }

    /// Displacement amplitude `λ/ε`.
    pub fn displacement_amplitude(&self) -> f64 {
        self.lambda / self.epsilon
    }

    pub fn fock_space(&self) -> FockSpace {
        FockSpace::new(self.cutoff)
    }

    /// True when `ετ` sits within `1e-9` of a multiple of `2π`; assertions on
    /// closed forms then take the resonant path (cosine terms replaced by
    /// exact ones) to avoid catastrophic cancellation.
    pub fn is_resonant(&self) -> bool {
        let r = (self.epsilon * self.tau).rem_euclid(2.0 * std::f64::consts::PI);
        r < 1e-9 || (2.0 * std::f64::consts::PI - r) < 1e-9
    }

    /// `1 - cos(n ετ)` with the resonant snap applied.
    pub(crate) fn one_minus_cos_n(&self, n: f64) -> f64 {
        if self.is_resonant() {
            return 0.0;
        }
        let r = (n * self.epsilon * self.tau).rem_euclid(2.0 * std::f64::consts::PI);
        1.0 - r.cos()
    }
}

/// Density matrix on the truncated Fock space, validated on construction.
#[derive(Debug, Clone)]
pub struct CavityState {
    density: CMat,
}

impl CavityState {
    /// Validates trace one, positivity (up to `1e-10`) and a tail mass on the
    /// top Fock level below `tail_threshold`.
    pub fn new(density: CMat, tail_threshold: f64) -> Result<Self> {
        let d = density.nrows();
        if d == 0 || density.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: density.ncols(),
                context: "cavity state must be square",
            });
        }
        let tr = trace(&density);
        if (tr - c(1.0)).norm() > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "cavity state trace {} != 1",
                tr
            )));
        }
        let herm = (&density + &crate::linalg::dagger(&density)).mapv(|z| z * c(0.5));
        let min = crate::linalg::min_eigenvalue_hermitian(&herm)?;
        if min < -1e-10 {
            return Err(Error::InvalidParameter(format!(
                "cavity state has eigenvalue {min}"
            )));
        }
        let state = CavityState { density };
        let tail = state.tail_mass();
        if tail > tail_threshold {
            return Err(Error::TruncationError {
                tail,
                threshold: tail_threshold,
            });
        }
        Ok(state)
    }

    /// Internal constructor for states produced by validated channels.
    pub(crate) fn from_density_unchecked(density: CMat) -> Self {
        CavityState { density }
    }

    pub fn vacuum(cutoff: usize) -> Self {
        let mut rho = CMat::zeros((cutoff + 1, cutoff + 1));
        rho[[0, 0]] = c(1.0);
        CavityState { density: rho }
    }

    pub fn density(&self) -> &CMat {
        &self.density
    }

    pub fn dim(&self) -> usize {
        self.density.nrows()
    }

    pub fn cutoff(&self) -> usize {
        self.dim() - 1
    }

    /// Occupation of the top retained Fock level, `⟨N_max|ρ|N_max⟩`.
    pub fn tail_mass(&self) -> f64 {
        let d = self.dim();
        self.density[[d - 1, d - 1]].re
    }

    /// `⟨b*b⟩`
    pub fn mean_photon_number(&self) -> f64 {
        self.density
            .diag()
            .iter()
            .enumerate()
            .map(|(n, z)| n as f64 * z.re)
            .sum()
    }

    pub fn expectation(&self, op: &CMat) -> C64 {
        trace(&op.dot(&self.density))
    }
}

/// Thermal cavity state `e^{-βε b*b} / Z`, normalized on the truncated space.
///
/// Its mean photon number approaches `1/(e^{βε} - 1)` as the cutoff grows;
/// consumers that compare against closed forms should use the measured
/// truncated expectation, not the infinite-space value.
pub fn gibbs_state(beta: f64, epsilon: f64, cutoff: usize) -> CavityState {
    let d = cutoff + 1;
    let mut rho = CMat::zeros((d, d));
    let mut z = 0.0;
    for n in 0..d {
        let w = (-beta * epsilon * n as f64).exp();
        rho[[n, n]] = c(w);
        z += w;
    }
    let rho = rho.mapv(|v| v / c(z));
    CavityState { density: rho }
}
