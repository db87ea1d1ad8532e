//! Finite-volume Cauchy diagnostic for the existence of the thermodynamic
//! limit: evolve a fixed local observable in a nested family of boxes and
//! compare the successive differences `‖γ^{(n+1)}_{t,0}(A) - γ^{(n)}_{t,0}(A)‖`
//! against the explicit tail bound
//! `‖A‖ ‖Ψ‖_{t,μ} (∫_s^t e^{μ v_{r,μ} (r-s)} dr) |X| sup_{x∈X} Σ_{z∈Λ_{n+1}∖Λ_n} F(d(x,z))`.
//!
//! The limit dynamics itself is never materialized; the largest computed
//! volume serves as the reference whenever a single answer is needed.

use crate::error::{Error, Result};
use crate::lieb_robinson::{decay_constants, interaction_norm, DecayFunction, LatticeGeometry};
use crate::lindblad::{
    evolve_observable, GeneratorSpec, InteractionTerm, StepControl, TimeDep,
};
use crate::linalg::{operator_norm, CMat};
use crate::operators::{embed, SiteLattice};

/// Translation-covariant chain rule: the same bond Hamiltonian on every
/// nearest-neighbour pair and the same on-site operators on every site.
#[derive(Debug, Clone)]
pub struct ChainTemplate {
    pub site_dim: usize,
    pub bond_hamiltonian: Option<CMat>,
    pub site_hamiltonian: Option<CMat>,
    pub site_jumps: Vec<CMat>,
}

impl ChainTemplate {
    pub fn spec_for(&self, sites: usize, horizon: f64) -> Result<GeneratorSpec> {
        let lattice = SiteLattice::new(vec![self.site_dim; sites]);
        let mut terms = Vec::new();
        if let Some(h) = &self.bond_hamiltonian {
            for i in 0..sites.saturating_sub(1) {
                terms.push(InteractionTerm::hamiltonian(vec![i, i + 1], h.clone()));
            }
        }
        for i in 0..sites {
            if let Some(h) = &self.site_hamiltonian {
                terms.push(InteractionTerm::hamiltonian(vec![i], h.clone()));
            }
            for l in &self.site_jumps {
                terms.push(InteractionTerm {
                    support: vec![i],
                    hamiltonian: None,
                    jumps: vec![TimeDep::Constant(l.clone())],
                });
            }
        }
        GeneratorSpec::new(lattice, terms, horizon)
    }
}

/// Nested centered chains `Λ_1 ⊂ Λ_2 ⊂ …` built from one [`ChainTemplate`].
#[derive(Debug, Clone)]
pub struct VolumeSequence {
    /// Odd site counts, non-decreasing so that every box contains the
    /// previous one centered (equal consecutive sizes are allowed and yield
    /// zero difference and zero tail bound).
    pub sizes: Vec<usize>,
    pub template: ChainTemplate,
    pub horizon: f64,
}

impl VolumeSequence {
    pub fn new(sizes: Vec<usize>, template: ChainTemplate, horizon: f64) -> Result<Self> {
        if sizes.windows(2).any(|w| w[0] > w[1])
            || sizes.iter().any(|&s| s % 2 == 0)
            || sizes.is_empty()
        {
            return Err(Error::InvalidParameter(
                "volume sizes must be odd and non-decreasing".into(),
            ));
        }
        Ok(VolumeSequence {
            sizes,
            template,
            horizon,
        })
    }
}

/// A local observable given relative to the chain center: `local` acts on
/// the sites `center + relative_support[..]` of each volume.
#[derive(Debug, Clone)]
pub struct CenteredObservable {
    pub local: CMat,
    /// Offsets from the center site, strictly ascending (e.g. `[0]`).
    pub relative_support: Vec<i64>,
}

impl CenteredObservable {
    fn absolute_support(&self, sites: usize) -> Vec<usize> {
        let center = (sites / 2) as i64;
        self.relative_support
            .iter()
            .map(|&r| (center + r) as usize)
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConvergencePoint {
    /// Site count of the smaller volume of the pair.
    pub volume_sites: usize,
    /// `‖γ^{(n+1)}_{t,0}(A) - γ^{(n)}_{t,0}(A)‖`
    pub difference: f64,
}

/// Successive differences of the evolved observable along the volume
/// sequence, with the smaller-volume result embedded into the larger space.
pub fn convergence_series(
    volseq: &VolumeSequence,
    obs: &CenteredObservable,
    t: f64,
    control: &StepControl,
) -> Result<Vec<ConvergencePoint>> {
    let mut evolved: Vec<(usize, CMat)> = Vec::new();
    for &sites in &volseq.sizes {
        let spec = volseq.template.spec_for(sites, volseq.horizon)?;
        let support = obs.absolute_support(sites);
        if support.iter().any(|&s| s >= sites) {
            return Err(Error::InvalidParameter(
                "observable support outside the smallest volume".into(),
            ));
        }
        let a0 = embed(&obs.local, &support, &spec.lattice)?;
        let at = evolve_observable(&spec, 0.0, t, &a0, control)?;
        evolved.push((sites, at));
    }

    let mut out = Vec::new();
    for w in evolved.windows(2) {
        let (n_small, small) = (&w[0].0, &w[0].1);
        let (n_large, large) = (&w[1].0, &w[1].1);
        let offset = (n_large - n_small) / 2;
        let block: Vec<usize> = (offset..offset + n_small).collect();
        let lattice_large = SiteLattice::new(vec![volseq.template.site_dim; *n_large]);
        let small_in_large = embed(small, &block, &lattice_large)?;
        out.push(ConvergencePoint {
            volume_sites: *n_small,
            difference: operator_norm(&(&small_in_large - large)),
        });
    }
    Ok(out)
}

/// The proof-side tail bound for each consecutive volume pair.
///
/// `‖Ψ‖_{t,μ}` and `C_μ` are evaluated on the larger box of each pair; both
/// grow monotonically with the box toward their infinite-volume values, so
/// the reported number is a valid upper bound for the pair's dynamics.
/// The time integral `∫_0^t e^{μ v_{r,μ} r} dr` is `(e^{μvt} - 1)/(μv)` in
/// closed form for time-independent interactions (the template is), which is
/// exact quadrature.
pub fn tail_bound(
    volseq: &VolumeSequence,
    obs: &CenteredObservable,
    t: f64,
    decay: &DecayFunction,
) -> Result<Vec<f64>> {
    let a_norm = operator_norm(&obs.local);
    let mut out = Vec::new();
    for w in volseq.sizes.windows(2) {
        let (n_small, n_large) = (w[0], w[1]);
        let spec = volseq.template.spec_for(n_large, volseq.horizon)?;
        let geom = LatticeGeometry::chain(n_large);
        let constants = decay_constants(&geom, decay);
        let psi = interaction_norm(&spec, t, &geom, decay);
        let velocity = psi * constants.c_mu / decay.mu;

        let integral = if velocity.abs() < 1e-300 {
            t
        } else {
            ((decay.mu * velocity * t).exp() - 1.0) / (decay.mu * velocity)
        };

        let offset = (n_large - n_small) / 2;
        let support = obs.absolute_support(n_large);
        let added: Vec<usize> = (0..n_large)
            .filter(|&z| z < offset || z >= offset + n_small)
            .collect();
        let mut sup_tail = 0.0f64;
        for &x in &support {
            let s: f64 = added.iter().map(|&z| decay.f(geom.distance(x, z))).sum();
            sup_tail = sup_tail.max(s);
        }

        out.push(a_norm * psi * integral * support.len() as f64 * sup_tail);
    }
    Ok(out)
}
