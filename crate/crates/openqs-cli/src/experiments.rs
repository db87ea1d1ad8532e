//! The eight named experiments. Each one resolves its settings, runs the
//! computation, buffers every series row in memory, then writes one or more
//! CSV files plus a JSON summary with config echo and pass/fail assertions.

use std::path::Path;

use num_complex::Complex64;
use openqs::lieb_robinson::{
    c_infinite_bound, decay_constants, interaction_norm, lr_bound, measure_signal, DecayFunction,
    LatticeGeometry, LocalMap,
};
use openqs::lindblad::{
    check_cp, dissipativity_defect, dissipativity_jump_form, euler_product, evolve_cocycle,
    StepControl,
};
use openqs::linalg::{c, dagger, min_eigenvalue_hermitian, operator_norm};
use openqs::micromaser::fullsys::{
    entropy_oracle, leaky_energy_oracle, perfect_energy_cumulative_oracle,
    perfect_energy_step_oracle,
};
use openqs::micromaser::{
    characteristic_function, energy_variation_leaky, energy_variation_perfect,
    entropy_production, gibbs_state, iterate, limiting_characteristic, photon_number_closed,
    photon_number_limit, quasifree_defect, slot_channel, CavityState, MicromaserParams,
};
use openqs::operators::{embed, weyl_op, FockSpace};
use openqs::thermo_limit::{
    convergence_series, tail_bound, CenteredObservable, ChainTemplate, VolumeSequence,
};
use rand::Rng;

use crate::output::{fmt_f64, now_micros, Csv, Summary};
use crate::specs;

pub enum RunError {
    Validation(String),
    Numeric(String),
}

impl From<openqs::Error> for RunError {
    fn from(e: openqs::Error) -> Self {
        match e {
            openqs::Error::InvalidParameter(_) | openqs::Error::DimensionMismatch { .. } => {
                RunError::Validation(e.to_string())
            }
            other => RunError::Numeric(other.to_string()),
        }
    }
}

fn io_err(e: std::io::Error) -> RunError {
    RunError::Numeric(format!("io: {e}"))
}

/// Least-squares slope of `ln y` against `ln x`; the empirical convergence
/// order is its negative.
fn empirical_order(ns: &[usize], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|&e| e.max(1e-300).ln()).collect();
    let m = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    -slope
}

pub fn euler_convergence(
    t: f64,
    ns: Vec<usize>,
    out: &Path,
    config_echo: Vec<(String, String)>,
) -> Result<Summary, RunError> {
    let stamp = now_micros();
    let mut summary = Summary::new("euler-convergence", None, stamp);
    for (k, v) in config_echo {
        summary.config_kv(&k, v);
    }
    if ns.is_empty() || t <= 0.0 {
        return Err(RunError::Validation(
            "euler-convergence needs t > 0 and a nonempty n list".into(),
        ));
    }

    let spec = specs::smooth_two_qubit_spec(t.max(1.0));
    let reference = evolve_cocycle(
        &spec,
        0.0,
        t,
        &StepControl {
            tol: 1e-11,
            min_steps: 64,
            max_refinements: 14,
        },
    )?;

    let mut errors = Vec::new();
    let mut csv = Csv::new(vec!["n", "error_norm"]);
    for &n in &ns {
        let tn = euler_product(&spec, t, n)?;
        let err = operator_norm(&(&tn.mat - &reference.mat));
        csv.row(vec![n.to_string(), fmt_f64(err)]);
        errors.push(err);
    }
    let order = empirical_order(&ns, &errors);
    summary.result("errors", &errors);
    summary.result("empirical_order", order);
    summary.check(
        "errors_strictly_decreasing",
        errors.windows(2).all(|w| w[1] < w[0]),
        format!("{errors:?}"),
    );
    summary.check(
        "empirical_order_at_least_0.9",
        order >= 0.9,
        format!("order = {order}"),
    );

    csv.write(&out.join("euler_convergence.csv"), stamp)
        .map_err(io_err)?;
    summary
        .write(&out.join("euler_convergence_summary.json"))
        .map_err(io_err)?;
    Ok(summary)
}

pub fn cp_certify(
    n_specs: usize,
    pairs: usize,
    qubits: usize,
    t: f64,
    seed: u64,
    out: &Path,
    config_echo: Vec<(String, String)>,
) -> Result<Summary, RunError> {
    let stamp = now_micros();
    let mut summary = Summary::new("cp-certify", Some(seed), stamp);
    for (k, v) in config_echo {
        summary.config_kv(&k, v);
    }
    if qubits == 0 || qubits > 4 {
        return Err(RunError::Validation(
            "cp-certify runs on 1..=4 qubits".into(),
        ));
    }

    let mut rng = openqs::linalg::random::rng(seed);
    let mut specs_list = Vec::new();
    let mut channels = Csv::new(vec![
        "spec_index",
        "choi_min_eigenvalue",
        "unitality_defect",
        "trace_preservation_defect",
    ]);
    let sc = StepControl::default();
    let mut worst_choi = f64::INFINITY;
    let mut worst_unitality = 0.0f64;
    for idx in 0..n_specs {
        let spec = specs::random_qubit_spec(&mut rng, qubits, t.max(1.0));
        let gamma = evolve_cocycle(&spec, 0.0, t, &sc)?;
        let report = check_cp(&gamma, 1e-9)?;
        let unitality = gamma.unitality_defect();
        let trace_defect = openqs::lindblad::trace_preservation_defect(&gamma);
        worst_choi = worst_choi.min(report.min_eigenvalue);
        worst_unitality = worst_unitality.max(unitality);
        channels.row(vec![
            idx.to_string(),
            fmt_f64(report.min_eigenvalue),
            fmt_f64(unitality),
            fmt_f64(trace_defect),
        ]);
        specs_list.push(spec);
    }

    let mut dissipativity = Csv::new(vec![
        "pair_index",
        "spec_index",
        "defect_min_eigenvalue",
        "identity_gap",
    ]);
    let mut worst_defect = f64::INFINITY;
    let mut worst_gap = 0.0f64;
    let t_probe = 0.5 * t;
    for pair in 0..pairs {
        let spec_idx = pair % specs_list.len().max(1);
        let spec = &specs_list[spec_idx];
        let a = specs::random_observable(&mut rng, spec);
        let defect = dissipativity_defect(spec, t_probe, &a)?;
        let herm = (&defect + &dagger(&defect)).mapv(|z| z * c(0.5));
        let min = min_eigenvalue_hermitian(&herm)?;
        let jumps = dissipativity_jump_form(spec, t_probe, &a)?;
        let gap = operator_norm(&(&defect - &jumps));
        worst_defect = worst_defect.min(min);
        worst_gap = worst_gap.max(gap);
        dissipativity.row(vec![
            pair.to_string(),
            spec_idx.to_string(),
            fmt_f64(min),
            fmt_f64(gap),
        ]);
    }

    summary.result("worst_choi_min_eigenvalue", worst_choi);
    summary.result("worst_unitality_defect", worst_unitality);
    summary.result("worst_dissipativity_min_eigenvalue", worst_defect);
    summary.result("worst_dissipativity_identity_gap", worst_gap);
    summary.check(
        "choi_min_eigenvalue_above_-1e-9",
        worst_choi >= -1e-9,
        format!("worst {worst_choi}"),
    );
    summary.check(
        "unitality_defect_below_1e-9",
        worst_unitality <= 1e-9,
        format!("worst {worst_unitality}"),
    );
    summary.check(
        "dissipativity_min_above_-1e-10",
        worst_defect >= -1e-10,
        format!("worst {worst_defect}"),
    );
    summary.check(
        "dissipativity_identity_gap_below_1e-10",
        worst_gap <= 1e-10,
        format!("worst {worst_gap}"),
    );

    channels
        .write(&out.join("cp_certify.csv"), stamp)
        .map_err(io_err)?;
    dissipativity
        .write(&out.join("cp_certify_dissipativity.csv"), stamp)
        .map_err(io_err)?;
    summary
        .write(&out.join("cp_certify_summary.json"))
        .map_err(io_err)?;
    Ok(summary)
}

#[allow(clippy::too_many_arguments)]
pub fn lr_scan(
    sites: usize,
    t_max: f64,
    points: usize,
    mu: f64,
    eps_f: f64,
    coupling: f64,
    dephasing: f64,
    out: &Path,
    config_echo: Vec<(String, String)>,
) -> Result<Summary, RunError> {
    let stamp = now_micros();
    let mut summary = Summary::new("lr-scan", None, stamp);
    for (k, v) in config_echo {
        summary.config_kv(&k, v);
    }
    if sites < 2 || points < 2 {
        return Err(RunError::Validation(
            "lr-scan needs at least 2 sites and 2 grid points".into(),
        ));
    }

    let spec = specs::xx_dephasing_chain(sites, coupling, dephasing, t_max);
    let geom = LatticeGeometry::chain(sites);
    let decay = DecayFunction::new(1, eps_f, mu);
    let constants = decay_constants(&geom, &decay);
    let psi = interaction_norm(&spec, t_max, &geom, &decay);

    let x_set = vec![0usize];
    let y_set = vec![sites - 1];
    let b = embed(&specs::pauli_z(), &y_set, &spec.lattice)?;
    let b_norm = operator_norm(&b);
    let k_comm = LocalMap::commutator(x_set.clone(), specs::pauli_z());
    let k_lind = LocalMap::lindblad_form(
        x_set.clone(),
        specs::pauli_z(),
        vec![specs::pauli_x().mapv(|z| z * c(0.5))],
    );

    let grid: Vec<f64> = (0..points)
        .map(|k| t_max * k as f64 / (points - 1) as f64)
        .collect();
    let sc = StepControl::default();
    let measured_comm = measure_signal(&spec, &k_comm, &b, 0.0, &grid, &sc)?;
    let measured_lind = measure_signal(&spec, &k_lind, &b, 0.0, &grid, &sc)?;

    let mut csv = Csv::new(vec![
        "t",
        "measured_commutator",
        "bound_commutator",
        "measured_lindblad",
        "bound_lindblad",
        "bound_commutator_exponential",
    ]);
    let mut dominated = true;
    let mut worst_margin = f64::INFINITY;
    for (i, &t) in grid.iter().enumerate() {
        let bc = lr_bound(&k_comm, b_norm, &x_set, &y_set, t, psi, &geom, &decay, &constants);
        let bl = lr_bound(&k_lind, b_norm, &x_set, &y_set, t, psi, &geom, &decay, &constants);
        dominated &= measured_comm[i] <= bc.direct + 1e-9 && measured_lind[i] <= bl.direct + 1e-9;
        worst_margin = worst_margin
            .min(bc.direct - measured_comm[i])
            .min(bl.direct - measured_lind[i]);
        csv.row(vec![
            fmt_f64(t),
            fmt_f64(measured_comm[i]),
            fmt_f64(bc.direct),
            fmt_f64(measured_lind[i]),
            fmt_f64(bl.direct),
            fmt_f64(bc.exponential),
        ]);
    }

    let velocity = psi * constants.c_mu / mu;
    summary.result("interaction_norm", psi);
    summary.result("c_mu", constants.c_mu);
    summary.result("c_infinite_lattice_bound", c_infinite_bound(&decay));
    summary.result("f_norm", constants.f_norm);
    summary.result("velocity", velocity);
    summary.result("worst_margin", worst_margin);
    summary.check(
        "measured_below_bound_everywhere",
        dominated,
        format!("worst margin {worst_margin}"),
    );

    csv.write(&out.join("lr_scan.csv"), stamp).map_err(io_err)?;
    summary
        .write(&out.join("lr_scan_summary.json"))
        .map_err(io_err)?;
    Ok(summary)
}

#[allow(clippy::too_many_arguments)]
pub fn thermo_limit(
    sizes: Vec<usize>,
    t: f64,
    coupling: f64,
    dephasing: f64,
    mu: f64,
    eps_f: f64,
    out: &Path,
    config_echo: Vec<(String, String)>,
) -> Result<Summary, RunError> {
    let stamp = now_micros();
    let mut summary = Summary::new("thermo-limit", None, stamp);
    for (k, v) in config_echo {
        summary.config_kv(&k, v);
    }

    let template = ChainTemplate {
        site_dim: 2,
        bond_hamiltonian: Some(specs::xx_bond().mapv(|z| z * c(coupling))),
        site_hamiltonian: None,
        site_jumps: vec![specs::pauli_z().mapv(|z| z * c(dephasing.sqrt()))],
    };
    let volseq = VolumeSequence::new(sizes, template, t.max(1.0))?;
    let obs = CenteredObservable {
        local: specs::pauli_z(),
        relative_support: vec![0],
    };
    let decay = DecayFunction::new(1, eps_f, mu);
    let series = convergence_series(&volseq, &obs, t, &StepControl::default())?;
    let bounds = tail_bound(&volseq, &obs, t, &decay)?;

    let mut csv = Csv::new(vec!["volume_sites", "difference", "tail_bound"]);
    for (p, b) in series.iter().zip(&bounds) {
        csv.row(vec![
            p.volume_sites.to_string(),
            fmt_f64(p.difference),
            fmt_f64(*b),
        ]);
    }
    let decreasing = series.windows(2).all(|w| w[1].difference < w[0].difference);
    let below = series
        .iter()
        .zip(&bounds)
        .all(|(p, b)| p.difference <= b + 1e-9);
    summary.result(
        "differences",
        series.iter().map(|p| p.difference).collect::<Vec<_>>(),
    );
    summary.result("tail_bounds", &bounds);
    summary.check("differences_strictly_decreasing", decreasing, String::new());
    summary.check("differences_below_tail_bound", below, String::new());

    csv.write(&out.join("thermo_limit.csv"), stamp)
        .map_err(io_err)?;
    summary
        .write(&out.join("thermo_limit_summary.json"))
        .map_err(io_err)?;
    Ok(summary)
}

pub struct MaserArgs {
    pub params: MicromaserParams,
    pub beta: Option<f64>,
    pub n_max: usize,
    pub seed: u64,
    pub tol: f64,
    pub tail_threshold: f64,
}

fn initial_state(args: &MaserArgs) -> CavityState {
    match args.beta {
        Some(beta) => gibbs_state(beta, args.params.epsilon, args.params.cutoff),
        None => CavityState::vacuum(args.params.cutoff),
    }
}

pub fn maser_photons(
    args: &MaserArgs,
    out: &Path,
    config_echo: Vec<(String, String)>,
) -> Result<Summary, RunError> {
    let stamp = now_micros();
    let mut summary = Summary::new("maser-photons", Some(args.seed), stamp);
    for (k, v) in config_echo {
        summary.config_kv(&k, v);
    }
    args.params.validate()?;

    let channel = slot_channel(&args.params)?;
    let rho0 = initial_state(args);
    let n0 = rho0.mean_photon_number();
    summary.result("initial_photon_number", n0);

    let mut csv = Csv::new(vec!["n", "closed_form", "oracle", "abs_error"]);
    let mut state = rho0;
    let mut worst = 0.0f64;
    for n in 0..=args.n_max {
        if n > 0 {
            state = iterate(&channel, &state, 1, args.tail_threshold)?;
        }
        let closed = photon_number_closed(&args.params, n, n0);
        let oracle = state.mean_photon_number();
        let err = (closed - oracle).abs();
        worst = worst.max(err);
        csv.row(vec![
            n.to_string(),
            fmt_f64(closed),
            fmt_f64(oracle),
            fmt_f64(err),
        ]);
    }
    summary.result("max_abs_error", worst);
    summary.check(
        "closed_form_matches_iteration",
        worst <= args.tol,
        format!("max error {worst} vs tol {}", args.tol),
    );
    if args.params.sigma > 0.0 {
        summary.result("photon_number_limit", photon_number_limit(&args.params)?);
    }

    csv.write(&out.join("maser_photons.csv"), stamp)
        .map_err(io_err)?;
    summary
        .write(&out.join("maser_photons_summary.json"))
        .map_err(io_err)?;
    Ok(summary)
}

pub fn maser_state(
    args: &MaserArgs,
    n_alphas: usize,
    out: &Path,
    config_echo: Vec<(String, String)>,
) -> Result<Summary, RunError> {
    let stamp = now_micros();
    let mut summary = Summary::new("maser-state", Some(args.seed), stamp);
    for (k, v) in config_echo {
        summary.config_kv(&k, v);
    }
    args.params.validate()?;
    let params = &args.params;

    let channel = slot_channel(params)?;
    let rho0 = initial_state(args);
    let evolved = iterate(&channel, &rho0, args.n_max, args.tail_threshold)?;
    let space = FockSpace::new(params.cutoff);

    let mut rng = openqs::linalg::random::rng(args.seed);
    let mut alphas = Vec::new();
    while alphas.len() < n_alphas {
        let cand = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if cand.norm() <= 1.0 {
            alphas.push(cand);
        }
    }

    let mut csv = Csv::new(vec![
        "alpha_re",
        "alpha_im",
        "product_re",
        "product_im",
        "oracle_re",
        "oracle_im",
        "abs_diff",
        "limiting_re",
        "limiting_im",
    ]);
    let mut worst = 0.0f64;
    let mut worst_modulus = 0.0f64;
    for &alpha in &alphas {
        let product = characteristic_function(params, args.n_max, alpha, &rho0)?;
        let w = weyl_op(space, alpha, args.tail_threshold.max(1e-6))?;
        let oracle = openqs::linalg::trace(&w.dot(evolved.density()));
        let diff = (product - oracle).norm();
        worst = worst.max(diff);
        worst_modulus = worst_modulus.max(product.norm());
        let limiting = if params.sigma > 0.0 {
            let v = limiting_characteristic(params, alpha, args.tol.min(1e-8))?;
            (fmt_f64(v.re), fmt_f64(v.im))
        } else {
            (String::new(), String::new())
        };
        csv.row(vec![
            fmt_f64(alpha.re),
            fmt_f64(alpha.im),
            fmt_f64(product.re),
            fmt_f64(product.im),
            fmt_f64(oracle.re),
            fmt_f64(oracle.im),
            fmt_f64(diff),
            limiting.0,
            limiting.1,
        ]);
    }

    summary.result("max_product_vs_oracle", worst);
    summary.check(
        "product_formula_matches_superoperator",
        worst <= args.tol.max(1e-5),
        format!("max diff {worst}"),
    );
    summary.check(
        "characteristic_modulus_below_one",
        worst_modulus <= 1.0 + 1e-12,
        format!("max modulus {worst_modulus}"),
    );

    if params.sigma > 0.0 {
        let defect = quasifree_defect(params)?;
        summary.result("quasifree_defect", defect);
        // initial-state independence probed through the two canonical starts
        let gibbs = gibbs_state(1.0, params.epsilon, params.cutoff);
        let vac = CavityState::vacuum(params.cutoff);
        let mut gap = 0.0f64;
        for &alpha in alphas.iter().take(5) {
            let a = characteristic_function(params, 400, alpha, &vac)?;
            let b = characteristic_function(params, 400, alpha, &gibbs)?;
            gap = gap.max((a - b).norm());
        }
        summary.result("initial_state_independence_gap", gap);
        summary.check(
            "limit_forgets_initial_state",
            gap <= 2e-6,
            format!("gap {gap}"),
        );
    }

    csv.write(&out.join("maser_state.csv"), stamp)
        .map_err(io_err)?;
    summary
        .write(&out.join("maser_state_summary.json"))
        .map_err(io_err)?;
    Ok(summary)
}

pub fn maser_energy(
    args: &MaserArgs,
    oracle_max: usize,
    out: &Path,
    config_echo: Vec<(String, String)>,
) -> Result<Summary, RunError> {
    let stamp = now_micros();
    let mut summary = Summary::new("maser-energy", Some(args.seed), stamp);
    for (k, v) in config_echo {
        summary.config_kv(&k, v);
    }
    args.params.validate()?;
    let params = &args.params;
    let rho0 = initial_state(args);
    let n0 = rho0.mean_photon_number();
    summary.result("initial_photon_number", n0);

    let mut worst_oracle_gap = 0.0f64;
    if params.sigma == 0.0 {
        let mut csv = Csv::new(vec![
            "n",
            "step_closed",
            "step_oracle",
            "cumulative_closed",
            "cumulative_oracle",
        ]);
        let mut telescoped = 0.0;
        for n in 2..=args.n_max.max(2) {
            let e = energy_variation_perfect(params, n)?;
            telescoped += e.step;
            let (step_oracle, cum_oracle) = if n <= oracle_max {
                let s = perfect_energy_step_oracle(params, n, &rho0)?;
                let q = perfect_energy_cumulative_oracle(params, n, &rho0)?;
                worst_oracle_gap = worst_oracle_gap.max((s - e.step).abs());
                worst_oracle_gap = worst_oracle_gap.max((q - e.cumulative).abs());
                (fmt_f64(s), fmt_f64(q))
            } else {
                (String::new(), String::new())
            };
            csv.row(vec![
                n.to_string(),
                fmt_f64(e.step),
                step_oracle,
                fmt_f64(e.cumulative),
                cum_oracle,
            ]);
            if n == args.n_max.max(2) {
                summary.check(
                    "cumulative_telescopes_steps",
                    (telescoped - e.cumulative).abs() <= 1e-12,
                    format!("gap {}", (telescoped - e.cumulative).abs()),
                );
            }
        }
        csv.write(&out.join("maser_energy.csv"), stamp)
            .map_err(io_err)?;
    } else {
        let mut csv = Csv::new(vec![
            "n",
            "in_cavity_closed",
            "in_cavity_oracle",
            "jump_closed",
            "jump_oracle",
            "extended_closed",
            "extended_oracle",
            "cumulative_closed",
            "cumulative_oracle",
        ]);
        let mut telescoped = 0.0;
        for n in 1..=args.n_max.max(1) {
            let e = energy_variation_leaky(params, n, n0)?;
            telescoped += e.extended_step;
            let oracle_cells = if n <= oracle_max {
                let o = leaky_energy_oracle(params, n, &rho0)?;
                worst_oracle_gap = worst_oracle_gap
                    .max((o.in_cavity_step - e.in_cavity_step).abs())
                    .max((o.jump - e.jump).abs())
                    .max((o.cumulative - e.cumulative).abs());
                (
                    fmt_f64(o.in_cavity_step),
                    fmt_f64(o.jump),
                    fmt_f64(o.extended_step),
                    fmt_f64(o.cumulative),
                )
            } else {
                Default::default()
            };
            csv.row(vec![
                n.to_string(),
                fmt_f64(e.in_cavity_step),
                oracle_cells.0,
                fmt_f64(e.jump),
                oracle_cells.1,
                fmt_f64(e.extended_step),
                oracle_cells.2,
                fmt_f64(e.cumulative),
                oracle_cells.3,
            ]);
            if n == args.n_max.max(1) {
                summary.check(
                    "cumulative_telescopes_steps",
                    (telescoped - e.cumulative).abs() <= 1e-12,
                    format!("gap {}", (telescoped - e.cumulative).abs()),
                );
                summary.result("energy_limit", e.limit);
                summary.result("energy_limit_upper_bound", e.limit_upper_bound);
                summary.result("energy_limit_lower_bound", e.limit_lower_bound);
            }
        }
        csv.write(&out.join("maser_energy.csv"), stamp)
            .map_err(io_err)?;
    }

    summary.result("worst_oracle_gap", worst_oracle_gap);
    summary.check(
        "closed_forms_match_full_system_oracle",
        worst_oracle_gap <= args.tol,
        format!("worst gap {worst_oracle_gap} vs tol {}", args.tol),
    );
    summary
        .write(&out.join("maser_energy_summary.json"))
        .map_err(io_err)?;
    Ok(summary)
}

pub fn maser_entropy(
    args: &MaserArgs,
    out: &Path,
    config_echo: Vec<(String, String)>,
) -> Result<Summary, RunError> {
    let stamp = now_micros();
    let mut summary = Summary::new("maser-entropy", Some(args.seed), stamp);
    for (k, v) in config_echo {
        summary.config_kv(&k, v);
    }
    args.params.validate()?;
    let beta = args
        .beta
        .ok_or_else(|| RunError::Validation("maser-entropy needs --beta".into()))?;
    if args.params.sigma != 0.0 {
        return Err(RunError::Validation(
            "maser-entropy covers the non-leaking cavity (sigma = 0)".into(),
        ));
    }

    let gibbs = gibbs_state(beta, args.params.epsilon, args.params.cutoff);
    let mut csv = Csv::new(vec!["n", "closed_form", "oracle", "abs_diff"]);
    let mut worst = 0.0f64;
    let mut all_nonneg = true;
    for n in 0..=args.n_max {
        let closed = entropy_production(&args.params, beta, n)?;
        let oracle = entropy_oracle(&args.params, n, &gibbs)?;
        let diff = (closed - oracle).abs();
        worst = worst.max(diff);
        all_nonneg &= closed >= -1e-12 && oracle >= -1e-10;
        csv.row(vec![
            n.to_string(),
            fmt_f64(closed),
            fmt_f64(oracle),
            fmt_f64(diff),
        ]);
    }
    summary.result("max_abs_diff", worst);
    summary.check(
        "closed_form_matches_relative_entropy_oracle",
        worst <= args.tol,
        format!("max diff {worst} vs tol {}", args.tol),
    );
    summary.check("entropy_production_nonnegative", all_nonneg, String::new());

    csv.write(&out.join("maser_entropy.csv"), stamp)
        .map_err(io_err)?;
    summary
        .write(&out.join("maser_entropy_summary.json"))
        .map_err(io_err)?;
    Ok(summary)
}
