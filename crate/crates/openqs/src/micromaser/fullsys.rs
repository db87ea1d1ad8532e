//! Brute-force cavity⊗atoms oracles.
//!
//! A [`Register`] holds the cavity mode plus the first few beam atoms as one
//! tensor-product space (site 0 = cavity, sites 1.. = atoms in passage
//! order). Slot `k` evolves the register under the full generator — unitary
//! conjugation by `e^{-iτH_k}` for the perfect cavity, the Kossakowski-
//! Lindblad extension with the photon leak for `σ > 0`. Everything here goes
//! through the generic lattice machinery and never touches the reduced
//! channel or any closed form, so it can serve as the independent side of
//! every cross-check.
//!
//! Memory caps this at a handful of atoms; the reduced channel covers all
//! larger slot counts.

use crate::error::{Error, Result};
use crate::lindblad::{exp_apply, GeneratorSpec, InteractionTerm, Picture};
use crate::linalg::{c, dagger, eigh, kron, matrix_exp, trace, CMat, I};
use crate::operators::{
    annihilation_op, creation_op, embed, number_op, partial_trace, AtomSpace, FockSpace,
    SiteLattice,
};

use super::{CavityState, MicromaserParams};

/// Cavity plus the first `atoms` beam atoms.
#[derive(Debug, Clone)]
pub struct Register {
    pub params: MicromaserParams,
    pub atoms: usize,
    pub lattice: SiteLattice,
}

impl Register {
    pub fn new(params: MicromaserParams, atoms: usize) -> Self {
        let mut dims = vec![params.cutoff + 1];
        dims.extend(std::iter::repeat_n(AtomSpace::DIM, atoms));
        Register {
            params,
            atoms,
            lattice: SiteLattice::new(dims),
        }
    }

    pub fn dim(&self) -> usize {
        self.lattice.total_dim()
    }

    /// Initial product state `ρ_C ⊗ diag(1-p, p)^{⊗atoms}`.
    pub fn initial_state(&self, rho_c: &CavityState) -> CMat {
        let mut rho = rho_c.density().clone();
        let atom = AtomSpace::state(self.params.p);
        for _ in 0..self.atoms {
            rho = kron(&rho, &atom);
        }
        rho
    }

    /// Generator spec of slot `k` (1-based): cavity free term, the atomic
    /// level, the coupling `λ(b*+b)⊗η_k`, and for `σ > 0` the photon leak.
    fn slot_spec(&self, k: usize) -> Result<GeneratorSpec> {
        assert!((1..=self.atoms).contains(&k));
        let space = FockSpace::new(self.params.cutoff);
        let b = annihilation_op(space);
        let n_op = number_op(space);
        let eta = AtomSpace::excitation_projector();
        let field = &creation_op(space) + &b;

        let mut terms = vec![
            InteractionTerm::hamiltonian(vec![0], n_op.mapv(|z| z * c(self.params.epsilon))),
            InteractionTerm::hamiltonian(vec![k], eta.mapv(|z| z * c(self.params.atom_level))),
            InteractionTerm::hamiltonian(
                vec![0, k],
                kron(&field, &eta).mapv(|z| z * c(self.params.lambda)),
            ),
        ];
        if self.params.sigma > 0.0 {
            terms.push(InteractionTerm::jump(
                vec![0],
                b.mapv(|z| z * c(self.params.sigma.sqrt())),
            ));
        }
        GeneratorSpec::new(self.lattice.clone(), terms, self.params.tau)
    }

    /// Advance the register state by one slot (`duration` defaults to `τ`;
    /// shorter pieces are allowed for mid-slot probes).
    pub fn advance_slot(&self, rho: &CMat, k: usize, duration: f64) -> Result<CMat> {
        let spec = self.slot_spec(k)?;
        if self.params.sigma == 0.0 {
            // unitary slot: ρ ↦ e^{-i duration H_k} ρ e^{+i duration H_k}
            let h = self.slot_hamiltonian(k)?;
            let u = matrix_exp(&h.mapv(|z| -z * I * c(duration)), crate::defaults::EXPM_TOL)?;
            return Ok(u.dot(rho).dot(&dagger(&u)));
        }
        let gen = spec.embedded_at(0.0)?;
        Ok(exp_apply(
            &gen,
            spec.norm_upper(0.0),
            duration,
            rho,
            Picture::Schroedinger,
        ))
    }

    /// `ρ_S(nτ)` from `ρ_C ⊗ ρ_A`.
    pub fn evolve(&self, rho_c: &CavityState, slots: usize) -> Result<CMat> {
        if slots > self.atoms {
            return Err(Error::InvalidParameter(format!(
                "register holds {} atoms, cannot run {} slots",
                self.atoms, slots
            )));
        }
        let mut rho = self.initial_state(rho_c);
        for k in 1..=slots {
            rho = self.advance_slot(&rho, k, self.params.tau)?;
        }
        Ok(rho)
    }

    /// Full Hamiltonian of slot `k` as a dense matrix on the register.
    pub fn slot_hamiltonian(&self, k: usize) -> Result<CMat> {
        let space = FockSpace::new(self.params.cutoff);
        let n_op = number_op(space);
        let eta = AtomSpace::excitation_projector();
        let field = &creation_op(space) + &annihilation_op(space);
        let mut h = embed(
            &n_op.mapv(|z| z * c(self.params.epsilon)),
            &[0],
            &self.lattice,
        )?;
        h = h + embed(
            &eta.mapv(|z| z * c(self.params.atom_level)),
            &[k],
            &self.lattice,
        )?;
        h = h + embed(
            &kron(&field, &eta).mapv(|z| z * c(self.params.lambda)),
            &[0, k],
            &self.lattice,
        )?;
        Ok(h)
    }

    /// `⟨b*b⟩` of the register state.
    pub fn photon_number(&self, rho: &CMat) -> Result<f64> {
        let n_op = embed(
            &number_op(FockSpace::new(self.params.cutoff)),
            &[0],
            &self.lattice,
        )?;
        Ok(trace(&n_op.dot(rho)).re)
    }

    /// `⟨(b*+b) ⊗ η_k⟩` of the register state.
    pub fn field_atom_correlation(&self, rho: &CMat, k: usize) -> Result<f64> {
        let space = FockSpace::new(self.params.cutoff);
        let field = &creation_op(space) + &annihilation_op(space);
        let op = embed(
            &kron(&field, &AtomSpace::excitation_projector()),
            &[0, k],
            &self.lattice,
        )?;
        Ok(trace(&op.dot(rho)).re)
    }

    /// `⟨b*+b⟩` of the reduced cavity state.
    pub fn field_expectation(&self, rho: &CMat) -> Result<f64> {
        let space = FockSpace::new(self.params.cutoff);
        let field = &creation_op(space) + &annihilation_op(space);
        let op = embed(&field, &[0], &self.lattice)?;
        Ok(trace(&op.dot(rho)).re)
    }

    pub fn reduced_cavity(&self, rho: &CMat) -> Result<CMat> {
        partial_trace(rho, &self.lattice, &[0])
    }
}

/// Total-energy variation of the perfect cavity between mid-slot times
/// `t_{n-1}` and `t_n` (both `ν`-independent):
/// `Tr(ρ_S((n-1)τ) [H_n - H_{n-1}])`, with the not-yet-arrived atom `n`
/// handled through its uncorrelated marginal. Needs `n ≥ 2` and a register
/// of `n-1` atoms.
pub fn perfect_energy_step_oracle(
    params: &MicromaserParams,
    n: usize,
    rho_c: &CavityState,
) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter("step oracle needs n >= 2".into()));
    }
    let reg = Register::new(*params, n - 1);
    let rho = reg.evolve(rho_c, n - 1)?;
    // ⟨H_n - H_{n-1}⟩ = λ⟨(b*+b)(η_n - η_{n-1})⟩ + E(⟨η_n⟩ - ⟨η_{n-1}⟩);
    // atom n is fresh: ⟨(b*+b)η_n⟩ = p⟨b*+b⟩ and the level terms cancel.
    let fresh = params.p * reg.field_expectation(&rho)?;
    let correlated = reg.field_atom_correlation(&rho, n - 1)?;
    Ok(params.lambda * (fresh - correlated))
}

/// Cumulative perfect-cavity variation `ΔE(t_n, t_1)` via
/// `Tr(ρ_S((n-1)τ) H_n) - Tr(ρ_S(0) H_1)`, fresh atoms handled as above.
pub fn perfect_energy_cumulative_oracle(
    params: &MicromaserParams,
    n: usize,
    rho_c: &CavityState,
) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidParameter("needs n >= 1".into()));
    }
    let reg = Register::new(*params, n.saturating_sub(1).max(1));
    let rho = reg.evolve(rho_c, n - 1)?;
    let at_n = params.epsilon * reg.photon_number(&rho)?
        + params.lambda * params.p * reg.field_expectation(&rho)?;
    let rho0 = reg.initial_state(rho_c);
    let at_1 = params.epsilon * reg.photon_number(&rho0)?
        + params.lambda * params.p * reg.field_expectation(&rho0)?;
    Ok(at_n - at_1)
}

/// All four step-level leaky-cavity energies measured on a register of `n`
/// atoms (needs `n ≥ 1`; `n ≥ 2` for a nonzero jump).
#[derive(Debug, Clone, Copy)]
pub struct LeakyEnergyOracle {
    pub in_cavity_step: f64,
    pub jump: f64,
    pub extended_step: f64,
    pub cumulative: f64,
}

pub fn leaky_energy_oracle(
    params: &MicromaserParams,
    n: usize,
    rho_c: &CavityState,
) -> Result<LeakyEnergyOracle> {
    if n < 1 {
        return Err(Error::InvalidParameter("needs n >= 1".into()));
    }
    let reg = Register::new(*params, n);
    let before = reg.evolve(rho_c, n - 1)?;
    let after = reg.advance_slot(&before, n, params.tau)?;

    let h_n_expect = |rho: &CMat| -> Result<f64> {
        Ok(params.epsilon * reg.photon_number(rho)?
            + params.lambda * reg.field_atom_correlation(rho, n)?)
    };
    let in_cavity_step = h_n_expect(&after)? - h_n_expect(&before)?;

    let jump = if n >= 2 {
        params.lambda
            * (reg.field_atom_correlation(&before, n)?
                - reg.field_atom_correlation(&before, n - 1)?)
    } else {
        // the first atom enters an interaction-free system
        params.lambda * reg.field_atom_correlation(&reg.initial_state(rho_c), 1)?
    };

    let rho0 = reg.initial_state(rho_c);
    let cumulative = h_n_expect(&after)?
        - params.epsilon * reg.photon_number(&rho0)?
        - params.lambda * reg.field_atom_correlation(&rho0, n)?;

    Ok(LeakyEnergyOracle {
        in_cavity_step,
        jump,
        extended_step: in_cavity_step + jump,
        cumulative,
    })
}

/// Relative entropy `Ent(ρ|ρ0) = Tr(ρ ln ρ - ρ ln ρ0)` for a full-support
/// diagonal `ρ0`; eigenvalues of `ρ` below `1e-15` contribute zero (the
/// `x ln x → 0` limit).
pub fn relative_entropy_diagonal_reference(rho: &CMat, rho0_diag: &[f64]) -> Result<f64> {
    let (vals, _) = eigh(rho)?;
    let mut s = 0.0;
    for &v in vals.iter() {
        if v > 1e-15 {
            s += v * v.ln();
        }
    }
    for (j, &q) in rho0_diag.iter().enumerate() {
        if q <= 0.0 {
            return Err(Error::InvalidParameter(
                "reference state must have full support".into(),
            ));
        }
        s -= rho[[j, j]].re * q.ln();
    }
    Ok(s)
}

/// `Ent(ρ_S(nτ) | ρ_S(0))` for the perfect cavity started in
/// `ρ_C ⊗ diag(1-p, p)^{⊗n}` (σ = 0, unitary slots).
pub fn entropy_oracle(params: &MicromaserParams, n: usize, rho_c: &CavityState) -> Result<f64> {
    if params.sigma != 0.0 {
        return Err(Error::InvalidParameter(
            "entropy oracle covers the non-leaking cavity".into(),
        ));
    }
    let reg = Register::new(*params, n);
    let rho0 = reg.initial_state(rho_c);
    let rho_n = reg.evolve(rho_c, n)?;
    let diag: Vec<f64> = rho0.diag().iter().map(|z| z.re).collect();
    relative_entropy_diagonal_reference(&rho_n, &diag)
}
