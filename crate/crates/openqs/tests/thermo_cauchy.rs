//! Cauchy stabilization of the volume series on the default weak chain: the
//! partial sums of the successive differences settle below 1e-6 within the
//! last computed volumes, and the decay is at least geometric.

use openqs::lieb_robinson::DecayFunction;
use openqs::lindblad::StepControl;
use openqs::linalg::{c, kron, CMat, I, ONE};
use openqs::thermo_limit::{
    convergence_series, tail_bound, CenteredObservable, ChainTemplate, VolumeSequence,
};

fn pauli_x() -> CMat {
    let mut m = CMat::zeros((2, 2));
    m[[0, 1]] = ONE;
    m[[1, 0]] = ONE;
    m
}

fn pauli_y() -> CMat {
    let mut m = CMat::zeros((2, 2));
    m[[0, 1]] = -I;
    m[[1, 0]] = I;
    m
}

fn pauli_z() -> CMat {
    let mut m = CMat::zeros((2, 2));
    m[[0, 0]] = ONE;
    m[[1, 1]] = -ONE;
    m
}

fn weak_default_chain() -> ChainTemplate {
    let bond = kron(&pauli_x(), &pauli_x()) + kron(&pauli_y(), &pauli_y());
    ChainTemplate {
        site_dim: 2,
        bond_hamiltonian: Some(bond.mapv(|z| z * c(0.02))),
        site_hamiltonian: None,
        site_jumps: vec![pauli_z().mapv(|z| z * c(0.05f64.sqrt()))],
    }
}

#[test]
fn volume_series_is_cauchy_on_default_chain() {
    let volseq = VolumeSequence::new(vec![3, 5, 7, 9], weak_default_chain(), 1.0).unwrap();
    let obs = CenteredObservable {
        local: pauli_z(),
        relative_support: vec![0],
    };
    let series = convergence_series(&volseq, &obs, 1.0, &StepControl::default()).unwrap();
    let diffs: Vec<f64> = series.iter().map(|p| p.difference).collect();
    // at least geometric decay with ratio well below one
    for w in diffs.windows(2) {
        assert!(w[1] < 0.5 * w[0], "not geometric: {diffs:?}");
    }
    // the partial sums have stabilized to below 1e-6 by the last volume
    assert!(
        *diffs.last().unwrap() < 1e-6,
        "last change {} not below 1e-6",
        diffs.last().unwrap()
    );

    // and the proof-side bound still dominates term by term
    let decay = DecayFunction::new(1, 1.0, 1.0);
    let bounds = tail_bound(&volseq, &obs, 1.0, &decay).unwrap();
    for (p, b) in series.iter().zip(&bounds) {
        assert!(p.difference <= b + 1e-9);
    }
}
