//! Sweep execution: builds models, runs the requested solver(s) per point,
//! and emits one CSV row per point plus a JSON run manifest.

use crate::config::{
    CliError, ExperimentConfig, MethodChoice, ModelKind, ModelSpec, SweepVariable,
};
use lyapband::banded::BandedMatrix;
use lyapband::cgls::{cgls_solve, CglsConfig};
use lyapband::cheb::{ChebOrder, ChebSettings};
use lyapband::flops::flop_estimates;
use lyapband::io::write_matrix_market;
use lyapband::models::{gen_heat2d, gen_heat2d_coupling, gen_heat3d, gen_random_stable};
use lyapband::models::ProblemInstance;
use lyapband::oracle;
use lyapband::pattern::PatternConfig;
use lyapband::quad_gp::{
    gp_refine, quad_lyap, quad_rule, GpProjection, GradientProjectionConfig,
};
use lyapband::spectral::extreme_eigs;
use lyapband::SolveReport;
use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

pub const ORACLE_DIM_CAP: usize = 4096;

pub fn build_model(spec: &ModelSpec) -> Result<ProblemInstance, CliError> {
    let model = match spec.kind {
        ModelKind::Heat2d => {
            let n = spec
                .n
                .ok_or_else(|| CliError::Config("model.n is required".into()))?;
            match spec.coupling {
                Some(e) => gen_heat2d_coupling(n, e),
                None => gen_heat2d(n),
            }
        }
        ModelKind::Heat3d => {
            let n1 = spec
                .n1
                .ok_or_else(|| CliError::Config("model.n1 is required".into()))?;
            gen_heat3d(n1)
        }
        ModelKind::Random => {
            let n = spec
                .n
                .ok_or_else(|| CliError::Config("model.n is required".into()))?;
            gen_random_stable(n, spec.seed.unwrap_or(0), spec.margin)
        }
    };
    model.map_err(|e| CliError::Config(e.to_string()))
}

/// One resolved sweep point: the config with the sweep variable substituted.
fn resolve_point(cfg: &ExperimentConfig, value: usize) -> ExperimentConfig {
    let mut point = cfg.clone();
    if let Some(sweep) = &cfg.sweep {
        match sweep.variable {
            SweepVariable::N => match cfg.model.kind {
                ModelKind::Heat3d => point.model.n1 = Some(value),
                _ => point.model.n = Some(value),
            },
            SweepVariable::Y => {
                point.pattern.y = Some(value);
                point.pattern.z1 = None;
            }
            SweepVariable::Z1 => {
                point.pattern.z1 = Some(value);
                point.pattern.y = None;
            }
            SweepVariable::Q => point.quad.q = value,
            SweepVariable::GpIters => point.gp.iters = value,
        }
    }
    point
}

fn run_cgls(
    model: &ProblemInstance,
    point: &ExperimentConfig,
) -> Result<(BandedMatrix, SolveReport), CliError> {
    let pattern = if let Some(z1) = point.pattern.z1 {
        PatternConfig::Predicted { z1 }
    } else if let Some(y) = point.pattern.y {
        PatternConfig::Banded { y }
    } else {
        return Err(CliError::Config("pattern: one of y or z1 is required".into()));
    };
    let mut cfg = CglsConfig::new(pattern);
    cfg.eta_tol = point.cgls.eta_tol;
    cfg.max_iter = point.cgls.max_iter;
    cgls_solve(&model.a, &model.p, &cfg).map_err(|e| CliError::Run(e.to_string()))
}

fn run_cheb_gp(
    model: &ProblemInstance,
    point: &ExperimentConfig,
) -> Result<(BandedMatrix, SolveReport), CliError> {
    let start = Instant::now();
    let run = |e: lyapband::Error| CliError::Run(e.to_string());
    let spec = extreme_eigs(&model.a, point.eig_rel_tol).map_err(run)?;
    let eps1 = point.quad.eps1_rel * spec.b.abs();
    let rule = quad_rule(point.quad.q, spec.b, eps1).map_err(run)?;
    let cheb = ChebSettings {
        order: match point.cheb.order {
            Some(m) => ChebOrder::Fixed(m),
            None => ChebOrder::Auto {
                tol: point.cheb.tol,
                max: point.cheb.max_order,
            },
        },
        nodes: point.cheb.nodes,
        drop_bandwidth: point.cheb.drop,
        drop_period: point.cheb.drop_period,
    };
    let (x0, approximants) = quad_lyap(&model.a, &model.p, &spec, &rule, &cheb).map_err(run)?;

    let p_band = 2 * model.p.max_offset().unwrap_or(0);
    let projection = match (point.gp.band, point.cheb.drop) {
        (Some(d1), _) => GpProjection::Band(d1),
        (None, Some(d)) => GpProjection::Band(2 * d + p_band),
        (None, None) => GpProjection::Band(2 * x0.max_offset().unwrap_or(0)),
    };
    let d1 = match &projection {
        GpProjection::Band(d) => *d,
        GpProjection::Pattern(_) => unreachable!(),
    };
    let mut gp_cfg = GradientProjectionConfig::defaults(projection, &spec);
    gp_cfg.sigma = point.gp.sigma;
    gp_cfg.zeta = point.gp.zeta;
    gp_cfg.max_iter = point.gp.iters;
    gp_cfg.max_backtracks = point.gp.max_backtracks;
    gp_cfg.rel_decrease_tol = point.gp.rel_decrease_tol;
    if let Some(d) = point.gp.delta_bar {
        gp_cfg.delta_bar = d;
    }
    let quad_peak = x0.nnz();
    let (x, mut report) = gp_refine(&model.a, &model.p, &x0, &gp_cfg).map_err(run)?;

    report.method = "cheb-gp".into();
    report.peak_nnz = report.peak_nnz.max(quad_peak);
    report.wall_seconds = start.elapsed().as_secs_f64();
    let worst_tail = approximants
        .iter()
        .map(|ap| ap.tail_bound)
        .fold(0.0f64, f64::max);
    let order = approximants.first().map_or(0, |ap| ap.order);
    let nodes = approximants.first().map_or(0, |ap| ap.nodes);
    let m_band = 2 * model.a.max_offset().unwrap_or(0);
    report.flops = Some(flop_estimates(
        model.a.dim(),
        m_band,
        point.cheb.drop.unwrap_or(d1),
        p_band,
        order,
        point.quad.q,
    ));
    if let serde_json::Value::Object(params) = &mut report.parameters {
        params.insert("q".into(), rule.q.into());
        params.insert("psi".into(), rule.psi.into());
        params.insert("eps1".into(), rule.eps1.into());
        params.insert("cheb_order".into(), order.into());
        params.insert("cheb_nodes".into(), nodes.into());
        params.insert("cheb_drop".into(), point.cheb.drop.into());
        params.insert("cheb_tail_bound_max".into(), worst_tail.into());
        params.insert("gp_band".into(), d1.into());
        params.insert("eig_rel_tol".into(), point.eig_rel_tol.into());
        params.insert("spectrum_a".into(), spec.a.into());
        params.insert("spectrum_b".into(), spec.b.into());
        params.insert("kappa".into(), spec.kappa.into());
    }
    Ok((x, report))
}

struct PointOutcome {
    variable: String,
    value: usize,
    method: String,
    dim: usize,
    report: SolveReport,
}

const CSV_HEADER: &str = "variable,value,method,dim,iterations,converged,wall_seconds,peak_nnz,final_nnz,epsilon,o1,o2,o3,flags";

fn csv_row(p: &PointOutcome) -> String {
    let eps = p
        .report
        .accuracy
        .map_or(String::new(), |e| format!("{e:.17e}"));
    let (o1, o2, o3) = p.report.flops.map_or((String::new(), String::new(), String::new()), |f| {
        (
            format!("{:.6e}", f.o1),
            format!("{:.6e}", f.o2),
            format!("{:.6e}", f.o3),
        )
    });
    format!(
        "{},{},{},{},{},{},{:.6},{},{},{},{},{},{},{}",
        p.variable,
        p.value,
        p.method,
        p.dim,
        p.report.history.len(),
        p.report.converged,
        p.report.wall_seconds,
        p.report.peak_nnz,
        p.report.final_nnz,
        eps,
        o1,
        o2,
        o3,
        p.report.flags.join(";")
    )
}

/// Executes the configured sweep. Per-point failures are logged to stderr
/// and skipped; returns Err(Run) after the sweep if any point failed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(), CliError> {
    cfg.validate()?;
    let out_dir = cfg.effective_out_dir();
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", out_dir.display())))?;

    let values: Vec<usize> = match &cfg.sweep {
        Some(s) => s.values.clone(),
        None => vec![0],
    };
    let variable = cfg
        .sweep
        .as_ref()
        .map_or("none".to_string(), |s| format!("{:?}", s.variable).to_lowercase());

    let mut outcomes = Vec::new();
    let mut failures = Vec::new();
    for &value in &values {
        let point = resolve_point(cfg, value);
        match run_point(&point, &out_dir, &variable, value, &mut outcomes) {
            Ok(()) => {}
            Err(e) => {
                eprintln!("point {variable} = {value} failed: {e}");
                failures.push(format!("{variable} = {value}: {e}"));
            }
        }
    }

    let csv_path = out_dir.join("results.csv");
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for o in &outcomes {
        csv.push_str(&csv_row(o));
        csv.push('\n');
    }
    std::fs::write(&csv_path, csv).map_err(|e| CliError::Run(e.to_string()))?;

    let manifest = serde_json::json!({
        "config": cfg,
        "environment": {
            "package": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "os": std::env::consts::OS,
            "arch": std::env::consts::ARCH,
        },
        "oracle_dim_cap": ORACLE_DIM_CAP,
        "points": outcomes.iter().map(|o| serde_json::json!({
            "variable": o.variable,
            "value": o.value,
            "method": o.method,
            "dim": o.dim,
            "parameters": o.report.parameters,
            "converged": o.report.converged,
            "flags": o.report.flags,
        })).collect::<Vec<_>>(),
        "failures": failures,
    });
    let manifest_path = out_dir.join("manifest.json");
    let mut f = std::fs::File::create(&manifest_path).map_err(|e| CliError::Run(e.to_string()))?;
    serde_json::to_writer_pretty(&mut f, &manifest).map_err(|e| CliError::Run(e.to_string()))?;
    f.write_all(b"\n").map_err(|e| CliError::Run(e.to_string()))?;

    println!("wrote {}", csv_path.display());
    println!("wrote {}", manifest_path.display());
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Run(format!(
            "{} of {} points failed",
            failures.len(),
            values.len()
        )))
    }
}

fn run_point(
    point: &ExperimentConfig,
    out_dir: &Path,
    variable: &str,
    value: usize,
    outcomes: &mut Vec<PointOutcome>,
) -> Result<(), CliError> {
    let model = build_model(&point.model)?;
    let dim = model.a.dim();

    let oracle_on = if point.oracle && dim > ORACLE_DIM_CAP {
        eprintln!(
            "warning: oracle disabled for {variable} = {value}: dimension {dim} exceeds {ORACLE_DIM_CAP}"
        );
        false
    } else {
        point.oracle
    };
    let truth = if oracle_on {
        Some(
            oracle::dense_lyap(&model.a.to_dense(), &model.p.to_dense())
                .map_err(|e| CliError::Run(e.to_string()))?,
        )
    } else {
        None
    };

    let methods: Vec<MethodChoice> = match point.method {
        MethodChoice::Both => vec![MethodChoice::Cgls, MethodChoice::ChebGp],
        m => vec![m],
    };
    for method in methods {
        let (x, mut report) = match method {
            MethodChoice::Cgls => run_cgls(&model, point)?,
            MethodChoice::ChebGp => run_cheb_gp(&model, point)?,
            MethodChoice::Both => unreachable!(),
        };
        if let Some(truth) = &truth {
            report.accuracy = Some(
                oracle::accuracy(&x.to_dense(), truth).map_err(|e| CliError::Run(e.to_string()))?,
            );
        }
        let method_name = report.method.clone();
        if point.write_solutions {
            let path = out_dir.join(format!("x_{variable}_{value}_{method_name}.mtx"));
            write_matrix_market(&x, &path).map_err(|e| CliError::Run(e.to_string()))?;
        }
        outcomes.push(PointOutcome {
            variable: variable.to_string(),
            value,
            method: method_name,
            dim,
            report,
        });
    }
    Ok(())
}
