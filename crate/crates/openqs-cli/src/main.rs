//! `openq` — batch experiment driver.
//!
//! One experiment per invocation; each run writes CSV series plus a JSON
//! summary into the output directory (`--out`, else `$OPENQS_OUT_DIR`, else
//! `./out`). Settings resolve as: command-line flag > config file entry >
//! built-in default. Exit status: 0 success, 1 validation failure, 2 runtime
//! numeric failure (truncation, CP violation, failed certification).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use openqs_cli::config::{parse_usize_list, Config};
use openqs_cli::experiments::{self, MaserArgs, RunError};
use openqs_cli::output;
use openqs::micromaser::MicromaserParams;

#[derive(Parser)]
#[command(name = "openq", version, about = "Lindblad lattice and cavity experiments")]
struct Cli {
    /// Flat key = value config file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (default: $OPENQS_OUT_DIR, else ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Euler-product error against the integrated cocycle on a smooth
    /// two-qubit spec.
    EulerConvergence {
        #[arg(long)]
        t: Option<f64>,
        /// Comma-separated factor counts, e.g. 8,16,32,64,128.
        #[arg(long)]
        n: Option<String>,
    },
    /// Choi positivity, unitality and complete dissipativity of cocycles
    /// from seeded random specs.
    CpCertify {
        #[arg(long)]
        specs: Option<usize>,
        #[arg(long)]
        pairs: Option<usize>,
        #[arg(long)]
        qubits: Option<usize>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Measured signal versus the Lieb-Robinson bound on a dissipative XX
    /// chain.
    LrScan {
        #[arg(long)]
        sites: Option<usize>,
        #[arg(long = "t-max")]
        t_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long = "eps-f")]
        eps_f: Option<f64>,
        #[arg(long)]
        coupling: Option<f64>,
        #[arg(long)]
        dephasing: Option<f64>,
    },
    /// Finite-volume Cauchy differences against the proof-side tail bound.
    ThermoLimit {
        /// Comma-separated odd chain sizes, e.g. 3,5,7,9.
        #[arg(long)]
        sizes: Option<String>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        coupling: Option<f64>,
        #[arg(long)]
        dephasing: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long = "eps-f")]
        eps_f: Option<f64>,
    },
    /// Photon number: closed form versus channel iteration.
    MaserPhotons(MaserFlags),
    /// Characteristic function: product formula versus superoperator
    /// evolution, the limiting state and its quasi-freeness defect.
    MaserState {
        #[command(flatten)]
        maser: MaserFlags,
        #[arg(long)]
        alphas: Option<usize>,
    },
    /// Energy variation: closed forms versus the cavity⊗atoms oracle.
    MaserEnergy {
        #[command(flatten)]
        maser: MaserFlags,
        /// Largest slot index checked against the full-system oracle.
        #[arg(long = "oracle-max")]
        oracle_max: Option<usize>,
    },
    /// Entropy production versus the relative-entropy oracle.
    MaserEntropy(MaserFlags),
}

#[derive(Args)]
struct MaserFlags {
    #[arg(long)]
    epsilon: Option<f64>,
    /// Atomic level spacing E (recorded; inert for cavity observables).
    #[arg(long = "atom-level")]
    atom_level: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    cutoff: Option<usize>,
    /// Run length in slots.
    #[arg(long)]
    n: Option<usize>,
    /// Inverse temperature of a Gibbs initial state (vacuum if absent);
    /// warm starts need a cutoff large enough for the thermal tail.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Agreement tolerance for the run's central cross-check.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long = "tail-threshold")]
    tail_threshold: Option<f64>,
}

struct EchoBuilder(Vec<(String, String)>);

impl EchoBuilder {
    fn new() -> Self {
        EchoBuilder(Vec::new())
    }
    fn kv(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.0.push((key.to_string(), value.to_string()));
        self
    }
}

fn resolve_maser(
    cfg: &Config,
    flags: &MaserFlags,
    defaults: (f64, f64, f64, f64, f64, usize, usize, f64, f64),
) -> Result<(MaserArgs, EchoBuilder), String> {
    let (epsilon_d, lambda_d, tau_d, p_d, sigma_d, cutoff_d, n_d, tol_d, tail_d) = defaults;
    let params = MicromaserParams {
        epsilon: cfg.resolve("epsilon", flags.epsilon, epsilon_d)?,
        atom_level: cfg.resolve("atom-level", flags.atom_level, 1.0)?,
        lambda: cfg.resolve("lambda", flags.lambda, lambda_d)?,
        tau: cfg.resolve("tau", flags.tau, tau_d)?,
        p: cfg.resolve("p", flags.p, p_d)?,
        sigma: cfg.resolve("sigma", flags.sigma, sigma_d)?,
        cutoff: cfg.resolve("cutoff", flags.cutoff, cutoff_d)?,
    };
    let args = MaserArgs {
        params,
        beta: cfg.resolve_opt("beta", flags.beta)?,
        n_max: cfg.resolve("n", flags.n, n_d)?,
        seed: cfg.resolve("seed", flags.seed, 42)?,
        tol: cfg.resolve("tol", flags.tol, tol_d)?,
        tail_threshold: cfg.resolve("tail-threshold", flags.tail_threshold, tail_d)?,
    };
    let mut echo = EchoBuilder::new();
    echo.kv("epsilon", params.epsilon)
        .kv("atom-level", params.atom_level)
        .kv("lambda", params.lambda)
        .kv("tau", params.tau)
        .kv("p", params.p)
        .kv("sigma", params.sigma)
        .kv("cutoff", params.cutoff)
        .kv("n", args.n_max)
        .kv("seed", args.seed)
        .kv("tol", args.tol)
        .kv("tail-threshold", args.tail_threshold);
    if let Some(beta) = args.beta {
        echo.kv("beta", beta);
    }
    Ok((args, echo))
}

fn run() -> Result<bool, RunError> {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            e.print().ok();
            return Ok(true);
        }
        // usage problems are validation failures (exit 1), not clap's
        // default exit code
        Err(e) => return Err(RunError::Validation(e.to_string())),
    };
    let cfg = Config::load(cli.config.as_deref()).map_err(RunError::Validation)?;
    let out = output::resolve_out_dir(cli.out.clone());

    let summary = match &cli.command {
        Command::EulerConvergence { t, n } => {
            let t = cfg
                .resolve("t", *t, 1.0)
                .map_err(RunError::Validation)?;
            let n_raw = cfg
                .resolve("n", n.clone(), "8,16,32,64,128".to_string())
                .map_err(RunError::Validation)?;
            let ns = parse_usize_list(&n_raw).map_err(RunError::Validation)?;
            let mut echo = EchoBuilder::new();
            echo.kv("t", t).kv("n", &n_raw);
            experiments::euler_convergence(t, ns, &out, echo.0)?
        }
        Command::CpCertify {
            specs,
            pairs,
            qubits,
            t,
            seed,
        } => {
            let specs = cfg.resolve("specs", *specs, 10).map_err(RunError::Validation)?;
            let pairs = cfg.resolve("pairs", *pairs, 50).map_err(RunError::Validation)?;
            let qubits = cfg.resolve("qubits", *qubits, 2).map_err(RunError::Validation)?;
            let t = cfg.resolve("t", *t, 1.0).map_err(RunError::Validation)?;
            let seed = cfg.resolve("seed", *seed, 42).map_err(RunError::Validation)?;
            let mut echo = EchoBuilder::new();
            echo.kv("specs", specs)
                .kv("pairs", pairs)
                .kv("qubits", qubits)
                .kv("t", t)
                .kv("seed", seed);
            experiments::cp_certify(specs, pairs, qubits, t, seed, &out, echo.0)?
        }
        Command::LrScan {
            sites,
            t_max,
            points,
            mu,
            eps_f,
            coupling,
            dephasing,
        } => {
            let sites = cfg.resolve("sites", *sites, 6).map_err(RunError::Validation)?;
            let t_max = cfg
                .resolve("t-max", *t_max, 2.0)
                .map_err(RunError::Validation)?;
            let points = cfg
                .resolve("points", *points, 100)
                .map_err(RunError::Validation)?;
            let mu = cfg.resolve("mu", *mu, 1.0).map_err(RunError::Validation)?;
            let eps_f = cfg
                .resolve("eps-f", *eps_f, 1.0)
                .map_err(RunError::Validation)?;
            let coupling = cfg
                .resolve("coupling", *coupling, 1.0)
                .map_err(RunError::Validation)?;
            let dephasing = cfg
                .resolve("dephasing", *dephasing, 0.3)
                .map_err(RunError::Validation)?;
            let mut echo = EchoBuilder::new();
            echo.kv("sites", sites)
                .kv("t-max", t_max)
                .kv("points", points)
                .kv("mu", mu)
                .kv("eps-f", eps_f)
                .kv("coupling", coupling)
                .kv("dephasing", dephasing);
            experiments::lr_scan(
                sites, t_max, points, mu, eps_f, coupling, dephasing, &out, echo.0,
            )?
        }
        Command::ThermoLimit {
            sizes,
            t,
            coupling,
            dephasing,
            mu,
            eps_f,
        } => {
            let sizes_raw = cfg
                .resolve("sizes", sizes.clone(), "3,5,7,9".to_string())
                .map_err(RunError::Validation)?;
            let sizes = parse_usize_list(&sizes_raw).map_err(RunError::Validation)?;
            let t = cfg.resolve("t", *t, 0.5).map_err(RunError::Validation)?;
            let coupling = cfg
                .resolve("coupling", *coupling, 1.0)
                .map_err(RunError::Validation)?;
            let dephasing = cfg
                .resolve("dephasing", *dephasing, 0.2)
                .map_err(RunError::Validation)?;
            let mu = cfg.resolve("mu", *mu, 1.0).map_err(RunError::Validation)?;
            let eps_f = cfg
                .resolve("eps-f", *eps_f, 1.0)
                .map_err(RunError::Validation)?;
            let mut echo = EchoBuilder::new();
            echo.kv("sizes", &sizes_raw)
                .kv("t", t)
                .kv("coupling", coupling)
                .kv("dephasing", dephasing)
                .kv("mu", mu)
                .kv("eps-f", eps_f);
            experiments::thermo_limit(sizes, t, coupling, dephasing, mu, eps_f, &out, echo.0)?
        }
        Command::MaserPhotons(flags) => {
            let (args, echo) = resolve_maser(
                &cfg,
                flags,
                (1.0, 0.2, 1.0, 0.5, 0.0, 40, 50, 1e-6, 1e-10),
            )
            .map_err(RunError::Validation)?;
            experiments::maser_photons(&args, &out, echo.0)?
        }
        Command::MaserState { maser, alphas } => {
            let (args, mut echo) = resolve_maser(
                &cfg,
                maser,
                (1.0, 0.3, 1.0, 0.5, 0.4, 30, 25, 1e-5, 1e-8),
            )
            .map_err(RunError::Validation)?;
            let n_alphas = cfg
                .resolve("alphas", *alphas, 20)
                .map_err(RunError::Validation)?;
            echo.kv("alphas", n_alphas);
            experiments::maser_state(&args, n_alphas, &out, echo.0)?
        }
        Command::MaserEnergy { maser, oracle_max } => {
            let (args, mut echo) = resolve_maser(
                &cfg,
                maser,
                (1.0, 0.25, 1.0, 0.4, 0.4, 20, 6, 1e-6, 1e-8),
            )
            .map_err(RunError::Validation)?;
            let oracle_max = cfg
                .resolve("oracle-max", *oracle_max, 3)
                .map_err(RunError::Validation)?;
            echo.kv("oracle-max", oracle_max);
            experiments::maser_energy(&args, oracle_max, &out, echo.0)?
        }
        Command::MaserEntropy(flags) => {
            let (mut args, mut echo) = resolve_maser(
                &cfg,
                flags,
                (1.0, 0.25, 1.0, 0.4, 0.0, 15, 2, 1e-6, 1e-5),
            )
            .map_err(RunError::Validation)?;
            if args.beta.is_none() {
                args.beta = Some(1.0);
                echo.kv("beta", 1.0);
            }
            experiments::maser_entropy(&args, &out, echo.0)?
        }
    };

    for a in &summary.assertions {
        println!(
            "[{}] {}: {}",
            if a.passed { "pass" } else { "FAIL" },
            a.name,
            a.detail
        );
    }
    Ok(summary.all_passed())
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::from(0),
        Ok(false) => {
            eprintln!("one or more certification checks failed");
            ExitCode::from(2)
        }
        Err(RunError::Validation(msg)) => {
            eprintln!("validation error: {msg}");
            ExitCode::from(1)
        }
        Err(RunError::Numeric(msg)) => {
            eprintln!("numeric failure: {msg}");
            ExitCode::from(2)
        }
    }
}
