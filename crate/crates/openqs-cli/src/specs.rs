//! Shared model builders for the experiment driver.
//!
//! Randomized specs derive from a stated 64-bit seed through `ChaCha8`;
//! matrix entries are drawn uniformly from the centered unit square of the
//! complex plane, Hermitian parts are symmetrized, and every draw order is
//! fixed, so a seed pins the whole experiment.

use std::sync::Arc;

use openqs::lindblad::{GeneratorSpec, InteractionTerm, TimeDep};
use openqs::linalg::{c, kron, random, CMat, I, ONE};
use openqs::operators::SiteLattice;
use rand_chacha::ChaCha8Rng;

pub fn pauli_x() -> CMat {
    let mut m = CMat::zeros((2, 2));
    m[[0, 1]] = ONE;
    m[[1, 0]] = ONE;
    m
}

pub fn pauli_y() -> CMat {
    let mut m = CMat::zeros((2, 2));
    m[[0, 1]] = -I;
    m[[1, 0]] = I;
    m
}

pub fn pauli_z() -> CMat {
    let mut m = CMat::zeros((2, 2));
    m[[0, 0]] = ONE;
    m[[1, 1]] = -ONE;
    m
}

/// Hopping bond `X⊗X + Y⊗Y`.
pub fn xx_bond() -> CMat {
    kron(&pauli_x(), &pauli_x()) + kron(&pauli_y(), &pauli_y())
}

/// Nearest-neighbour XX chain with on-site dephasing `√rate · σ_z`.
pub fn xx_dephasing_chain(
    sites: usize,
    coupling: f64,
    dephasing_rate: f64,
    horizon: f64,
) -> GeneratorSpec {
    let lattice = SiteLattice::qubits(sites);
    let bond = xx_bond().mapv(|z| z * c(coupling));
    let mut terms: Vec<InteractionTerm> = (0..sites - 1)
        .map(|i| InteractionTerm::hamiltonian(vec![i, i + 1], bond.clone()))
        .collect();
    if dephasing_rate > 0.0 {
        for i in 0..sites {
            terms.push(InteractionTerm::jump(
                vec![i],
                pauli_z().mapv(|z| z * c(dephasing_rate.sqrt())),
            ));
        }
    }
    GeneratorSpec::new(lattice, terms, horizon).expect("valid chain spec")
}

/// Two-qubit spec with smooth (sampled-callable) time dependence: a ramped
/// hopping bond and a modulated dephasing rate. Used for the Euler-product
/// convergence study.
pub fn smooth_two_qubit_spec(horizon: f64) -> GeneratorSpec {
    let lattice = SiteLattice::qubits(2);
    let ham = TimeDep::Sampled {
        f: Arc::new(move |t: f64| xx_bond().mapv(|z| z * c(0.6 + 0.3 * (1.5 * t).sin()))),
        norm_bound: 0.9 * 2.0,
        lipschitz: 0.45 * 2.0,
    };
    let jump0 = TimeDep::Sampled {
        f: Arc::new(|t: f64| pauli_z().mapv(|z| z * c((0.25 + 0.15 * t).sqrt()))),
        norm_bound: 1.0,
        lipschitz: 0.5,
    };
    let terms = vec![
        InteractionTerm {
            support: vec![0, 1],
            hamiltonian: Some(ham),
            jumps: vec![],
        },
        InteractionTerm {
            support: vec![0],
            hamiltonian: None,
            jumps: vec![jump0],
        },
        InteractionTerm::jump(vec![1], pauli_x().mapv(|z| z * c(0.3))),
    ];
    GeneratorSpec::new(lattice, terms, horizon).expect("valid smooth spec")
}

/// Random admissible spec on a qubit chain: one random Hermitian bond term
/// per neighbouring pair plus one random jump operator per site, scaled to
/// keep the generator norm moderate.
pub fn random_qubit_spec(rng: &mut ChaCha8Rng, qubits: usize, horizon: f64) -> GeneratorSpec {
    let lattice = SiteLattice::qubits(qubits);
    let mut terms = Vec::new();
    for i in 0..qubits - 1 {
        let h = random::hermitian(rng, 4).mapv(|z| z * c(0.7));
        terms.push(InteractionTerm::hamiltonian(vec![i, i + 1], h));
    }
    for i in 0..qubits {
        let l = random::complex_matrix(rng, 2).mapv(|z| z * c(0.6));
        terms.push(InteractionTerm::jump(vec![i], l));
    }
    GeneratorSpec::new(lattice, terms, horizon).expect("valid random spec")
}

/// Random observable on the full space of a spec.
pub fn random_observable(rng: &mut ChaCha8Rng, spec: &GeneratorSpec) -> CMat {
    random::complex_matrix(rng, spec.lattice.total_dim())
}

