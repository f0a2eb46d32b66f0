//! Command-line front end for the banded Lyapunov toolkit: model
//! generation, spectra, patterns, banded exponentials, sparse solves with
//! CSV/JSON reporting, and the dense reference solver.

mod config;
mod experiment;

use clap::{Args, Parser, Subcommand};
use config::{
    CliError, ExperimentConfig, MethodChoice, ModelKind, ModelSpec, PatternSpec, SweepSpec,
    SweepVariable,
};
use experiment::{build_model, run_experiment, ORACLE_DIM_CAP};
use lyapband::banded::BandedMatrix;
use lyapband::cheb::{cheb_expm, ChebOrder, ChebSettings};
use lyapband::decay::{decay_diag_p, decay_kron, empirical_decay, fit_decay_rate};
use lyapband::io::{read_matrix_market, write_matrix_market};
use lyapband::oracle;
use lyapband::pattern::PatternConfig;
use lyapband::spectral::extreme_eigs;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "lyapband", version, about = "Sparse banded Lyapunov equation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ModelArgs {
    /// Model family.
    #[arg(long, value_enum)]
    model: CliModelKind,
    /// Subsystem count N (heat2d, random).
    #[arg(long)]
    n: Option<usize>,
    /// Grid side N1 (heat3d).
    #[arg(long)]
    n1: Option<usize>,
    /// Coupling strength e (heat2d).
    #[arg(long)]
    coupling: Option<f64>,
    /// RNG seed (random).
    #[arg(long)]
    seed: Option<u64>,
    /// Stability margin (random).
    #[arg(long)]
    margin: Option<f64>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum CliModelKind {
    Heat2d,
    Heat3d,
    Random,
}

impl From<CliModelKind> for ModelKind {
    fn from(k: CliModelKind) -> Self {
        match k {
            CliModelKind::Heat2d => ModelKind::Heat2d,
            CliModelKind::Heat3d => ModelKind::Heat3d,
            CliModelKind::Random => ModelKind::Random,
        }
    }
}

impl ModelArgs {
    fn spec(&self) -> ModelSpec {
        ModelSpec {
            kind: self.model.into(),
            n: self.n,
            n1: self.n1,
            coupling: self.coupling,
            seed: self.seed,
            margin: self.margin,
        }
    }
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Generate a model and write A and P in Matrix Market format.
    Gen {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Extreme eigenvalues and condition number of a matrix.
    Spectrum {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        rel_tol: f64,
    },
    /// Build an a priori sparsity pattern and report its statistics.
    Pattern {
        #[arg(long)]
        matrix_a: PathBuf,
        #[arg(long)]
        matrix_p: PathBuf,
        /// Banded pattern bandwidth (even).
        #[arg(long, conflicts_with = "z1")]
        y: Option<usize>,
        /// Predicted multi-banded pattern power count.
        #[arg(long)]
        z1: Option<usize>,
        /// Write the pattern as a 0/1 matrix.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Banded approximation of exp(t A).
    Expm {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        t: f64,
        /// Fixed series degree; when absent the degree is chosen from --tol.
        #[arg(long)]
        order: Option<usize>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Drop bandwidth (even); absent disables dropping.
        #[arg(long)]
        drop: Option<usize>,
        #[arg(long, default_value_t = 1)]
        drop_period: usize,
        #[arg(long, default_value_t = 1e-6)]
        rel_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a configured solve or sweep; emits results.csv and manifest.json.
    Solve {
        /// JSON configuration file; flags override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        model: Option<CliModelKind>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        n1: Option<usize>,
        #[arg(long)]
        coupling: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        margin: Option<f64>,
        #[arg(long, value_enum)]
        method: Option<MethodChoice>,
        #[arg(long, conflicts_with = "z1")]
        y: Option<usize>,
        #[arg(long)]
        z1: Option<usize>,
        #[arg(long)]
        eta_tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        drop: Option<usize>,
        #[arg(long)]
        q: Option<usize>,
        #[arg(long)]
        eps1_rel: Option<f64>,
        #[arg(long)]
        gp_iters: Option<usize>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        zeta: Option<f64>,
        #[arg(long)]
        delta_bar: Option<f64>,
        #[arg(long)]
        gp_band: Option<usize>,
        #[arg(long, value_enum)]
        sweep_var: Option<SweepVariable>,
        /// Comma-separated sweep values.
        #[arg(long, value_delimiter = ',')]
        sweep_values: Option<Vec<usize>>,
        #[arg(long)]
        oracle: Option<bool>,
        #[arg(long)]
        eig_rel_tol: Option<f64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        write_solutions: Option<bool>,
    },
    /// Dense reference solve of A X + X A = P (dim <= 4096).
    Oracle {
        #[arg(long)]
        matrix_a: PathBuf,
        #[arg(long)]
        matrix_p: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Relative 2-norm accuracy of an approximation against a reference.
    Accuracy {
        #[arg(long)]
        approx: PathBuf,
        #[arg(long)]
        truth: PathBuf,
    },
    /// Off-diagonal decay estimates, bounds, and empirical fits.
    Decay {
        #[arg(long)]
        matrix_a: PathBuf,
        /// Diagonal right-hand side P = gamma I.
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<f64>,
        /// Kronecker-structured bound on the vectorized solution.
        #[arg(long)]
        kron: bool,
        /// Fit an empirical decay profile from a solution matrix.
        #[arg(long)]
        empirical: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-6)]
        rel_tol: f64,
    },
    /// Preset scaling sweep over model sizes, both methods.
    Bench {
        /// Comma-separated subsystem counts.
        #[arg(long, value_delimiter = ',', default_value = "100,200,400")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 150)]
        bandwidth: usize,
        #[arg(long, value_enum, default_value_t = MethodChoice::Both)]
        method: MethodChoice,
        #[arg(long)]
        oracle: Option<bool>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => {}
        Err(CliError::Run(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(1);
        }
        Err(CliError::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            std::process::exit(2);
        }
    }
}

fn read_mtx(path: &std::path::Path) -> Result<BandedMatrix, CliError> {
    read_matrix_market(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

fn run_err(e: lyapband::Error) -> CliError {
    CliError::Run(e.to_string())
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Gen { model, out_dir } => {
            let spec = model.spec();
            let inst = build_model(&spec)?;
            let dir = match std::env::var_os(config::OUT_DIR_ENV) {
                Some(d) if !d.is_empty() => PathBuf::from(d),
                _ => out_dir,
            };
            std::fs::create_dir_all(&dir)
                .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
            let a_path = dir.join(format!("{}_A.mtx", inst.label));
            let p_path = dir.join(format!("{}_P.mtx", inst.label));
            write_matrix_market(&inst.a, &a_path).map_err(run_err)?;
            write_matrix_market(&inst.p, &p_path).map_err(run_err)?;
            println!("wrote {}", a_path.display());
            println!("wrote {}", p_path.display());
            Ok(())
        }
        Command::Spectrum { matrix, rel_tol } => {
            let a = read_mtx(&matrix)?;
            let spec = extreme_eigs(&a, rel_tol).map_err(run_err)?;
            println!("{}", serde_json::to_string_pretty(&spec).unwrap());
            Ok(())
        }
        Command::Pattern {
            matrix_a,
            matrix_p,
            y,
            z1,
            out,
        } => {
            let a = read_mtx(&matrix_a)?;
            let p = read_mtx(&matrix_p)?;
            let cfg = match (y, z1) {
                (Some(y), None) => PatternConfig::Banded { y },
                (None, Some(z1)) => PatternConfig::Predicted { z1 },
                _ => return Err(CliError::Config("set exactly one of --y or --z1".into())),
            };
            let pattern = cfg.build(&a, &p).map_err(run_err)?;
            let dim = pattern.dim();
            println!(
                "{}",
                serde_json::json!({
                    "dim": dim,
                    "nnz": pattern.nnz(),
                    "density": pattern.nnz() as f64 / (dim * dim) as f64,
                    "max_offset": pattern.max_offset(),
                    "symmetric": pattern.is_symmetric(),
                })
            );
            if let Some(out) = out {
                let ones = vec![1.0; pattern.nnz()];
                let indicator = BandedMatrix::from_pattern_values(&pattern, &ones);
                write_matrix_market(&indicator, &out).map_err(run_err)?;
                println!("wrote {}", out.display());
            }
            Ok(())
        }
        Command::Expm {
            matrix,
            t,
            order,
            tol,
            drop,
            drop_period,
            rel_tol,
            out,
        } => {
            let a = read_mtx(&matrix)?;
            let spec = extreme_eigs(&a, rel_tol).map_err(run_err)?;
            let settings = ChebSettings {
                order: match order {
                    Some(m) => ChebOrder::Fixed(m),
                    None => ChebOrder::Auto { tol, max: 200 },
                },
                nodes: None,
                drop_bandwidth: drop,
                drop_period,
            };
            let (e, approximant) = cheb_expm(&a, t, &spec, &settings).map_err(run_err)?;
            println!(
                "{}",
                serde_json::json!({
                    "t": approximant.t,
                    "order": approximant.order,
                    "nodes": approximant.nodes,
                    "drop_bandwidth": approximant.drop_bandwidth,
                    "tail_bound": approximant.tail_bound,
                    "nnz": e.nnz(),
                })
            );
            if let Some(out) = out {
                write_matrix_market(&e, &out).map_err(run_err)?;
                println!("wrote {}", out.display());
            }
            Ok(())
        }
        Command::Solve {
            config,
            model,
            n,
            n1,
            coupling,
            seed,
            margin,
            method,
            y,
            z1,
            eta_tol,
            max_iter,
            order,
            drop,
            q,
            eps1_rel,
            gp_iters,
            sigma,
            zeta,
            delta_bar,
            gp_band,
            sweep_var,
            sweep_values,
            oracle,
            eig_rel_tol,
            out_dir,
            write_solutions,
        } => {
            let mut cfg = match config {
                Some(path) => ExperimentConfig::load(&path)?,
                None => ExperimentConfig::default(),
            };
            if let Some(kind) = model {
                cfg.model.kind = kind.into();
            }
            if n.is_some() {
                cfg.model.n = n;
            }
            if n1.is_some() {
                cfg.model.n1 = n1;
            }
            if coupling.is_some() {
                cfg.model.coupling = coupling;
            }
            if seed.is_some() {
                cfg.model.seed = seed;
            }
            if margin.is_some() {
                cfg.model.margin = margin;
            }
            if let Some(m) = method {
                cfg.method = m;
            }
            if y.is_some() {
                cfg.pattern = PatternSpec { y, z1: None };
            }
            if z1.is_some() {
                cfg.pattern = PatternSpec { y: None, z1 };
            }
            if let Some(v) = eta_tol {
                cfg.cgls.eta_tol = v;
            }
            if let Some(v) = max_iter {
                cfg.cgls.max_iter = v;
            }
            if order.is_some() {
                cfg.cheb.order = order;
            }
            if drop.is_some() {
                cfg.cheb.drop = drop;
            }
            if let Some(v) = q {
                cfg.quad.q = v;
            }
            if let Some(v) = eps1_rel {
                cfg.quad.eps1_rel = v;
            }
            if let Some(v) = gp_iters {
                cfg.gp.iters = v;
            }
            if let Some(v) = sigma {
                cfg.gp.sigma = v;
            }
            if let Some(v) = zeta {
                cfg.gp.zeta = v;
            }
            if delta_bar.is_some() {
                cfg.gp.delta_bar = delta_bar;
            }
            if gp_band.is_some() {
                cfg.gp.band = gp_band;
            }
            match (sweep_var, sweep_values) {
                (Some(variable), Some(values)) => {
                    cfg.sweep = Some(SweepSpec { variable, values });
                }
                (Some(_), None) | (None, Some(_)) => {
                    return Err(CliError::Config(
                        "--sweep-var and --sweep-values must be given together".into(),
                    ));
                }
                (None, None) => {}
            }
            if let Some(v) = oracle {
                cfg.oracle = v;
            }
            if let Some(v) = eig_rel_tol {
                cfg.eig_rel_tol = v;
            }
            if let Some(dir) = out_dir {
                cfg.out_dir = dir;
            }
            if let Some(v) = write_solutions {
                cfg.write_solutions = v;
            }
            run_experiment(&cfg)
        }
        Command::Oracle {
            matrix_a,
            matrix_p,
            out,
        } => {
            let a = read_mtx(&matrix_a)?;
            let p = read_mtx(&matrix_p)?;
            if a.dim() > ORACLE_DIM_CAP {
                return Err(CliError::Config(format!(
                    "dimension {} exceeds the dense cap {ORACLE_DIM_CAP}",
                    a.dim()
                )));
            }
            let x = oracle::dense_lyap(&a.to_dense(), &p.to_dense()).map_err(run_err)?;
            write_matrix_market(&BandedMatrix::from_dense(&x), &out).map_err(run_err)?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Accuracy { approx, truth } => {
            let x = read_mtx(&approx)?;
            let t = read_mtx(&truth)?;
            let eps = oracle::accuracy(&x.to_dense(), &t.to_dense()).map_err(run_err)?;
            println!("{}", serde_json::json!({ "epsilon": eps }));
            Ok(())
        }
        Command::Decay {
            matrix_a,
            gamma,
            kron,
            empirical,
            rel_tol,
        } => {
            let a = read_mtx(&matrix_a)?;
            let spec = extreme_eigs(&a, rel_tol).map_err(run_err)?;
            let m = 2 * a.max_offset().unwrap_or(0);
            let mut out = serde_json::Map::new();
            out.insert("kappa".into(), spec.kappa.into());
            if let Some(gamma) = gamma {
                let est = decay_diag_p(gamma, &spec, m).map_err(run_err)?;
                out.insert("diag_p".into(), serde_json::to_value(&est).unwrap());
            }
            if kron {
                let est = decay_kron(&spec, m, a.dim()).map_err(run_err)?;
                out.insert("kron".into(), serde_json::to_value(&est).unwrap());
            }
            if let Some(path) = empirical {
                let x = read_mtx(&path)?;
                let profile = empirical_decay(&x);
                let (tau, rho) = fit_decay_rate(&profile).map_err(run_err)?;
                out.insert(
                    "empirical".into(),
                    serde_json::json!({ "tau": tau, "rho": rho, "offsets": profile.len() }),
                );
            }
            println!("{}", serde_json::Value::Object(out));
            Ok(())
        }
        Command::Bench {
            sizes,
            bandwidth,
            method,
            oracle,
            out_dir,
        } => {
            let mut cfg = ExperimentConfig {
                method,
                pattern: PatternSpec {
                    y: Some(bandwidth),
                    z1: None,
                },
                sweep: Some(SweepSpec {
                    variable: SweepVariable::N,
                    values: sizes,
                }),
                oracle: oracle.unwrap_or(false),
                out_dir,
                write_solutions: false,
                ..ExperimentConfig::default()
            };
            cfg.cheb.drop = Some(bandwidth);
            run_experiment(&cfg)
        }
    }
}
