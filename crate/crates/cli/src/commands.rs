//! Subcommand implementations.

use std::path::PathBuf;
use std::process::ExitCode;

use antiplane::diagnostics::{collocation_oracle, convergence_study, regularity_report, ENTRY_SLOPE_MAX};
use antiplane::kernel::{field_kernel, rho0, rho0_at_zero};
use antiplane::postprocess::sif;
use antiplane::{
    assemble_with, reduction_solve, Complex64, Error, KernelCache, MaterialParams, QuadOrders, SpectralSolution,
};
use anyhow::Result;
use rayon::prelude::*;
use serde_json::{Map, Value};

use crate::config::{ConfigError, Format, RunConfig};
use crate::output::{emit, json_bytes, Cell, Table};

/// Paths and format after applying command-line overrides.
pub struct Target {
    pub format: Format,
    pub path: Option<PathBuf>,
    pub t: f64,
}

impl Target {
    pub fn new(cfg: &RunConfig, out: Option<PathBuf>, format: Option<Format>, time: Option<f64>) -> Self {
        Target {
            format: format.unwrap_or(cfg.output.format),
            path: out.or_else(|| cfg.output.path.clone()),
            t: time.unwrap_or(cfg.output.t),
        }
    }

    fn sibling(&self, name: &str) -> Option<PathBuf> {
        self.path.as_deref().map(|p| p.with_file_name(name))
    }
}

fn solution_tables(sol: &SpectralSolution, mp: &MaterialParams, t: f64) -> (Table, Table, Table) {
    let k = sif(sol, mp, t);
    let mut main = Table::new(&["N", "K_re", "K_im", "K_abs", "residual"]);
    main.push(vec![
        sol.n.into(),
        k.k_complex.re.into(),
        k.k_complex.im.into(),
        k.magnitude.into(),
        sol.residual.into(),
    ]);
    let mut coeffs = Table::new(&["m", "a_re", "a_im"]);
    for (i, a) in sol.coeffs.iter().enumerate() {
        coeffs.push(vec![(i + 1).into(), a.re.into(), a.im.into()]);
    }
    let mut history = Table::new(&["N", "sum_re", "sum_im"]);
    for (n, s) in &sol.history {
        history.push(vec![(*n).into(), s.re.into(), s.im.into()]);
    }
    (main, coeffs, history)
}

fn write_solution(sol: &SpectralSolution, mp: &MaterialParams, target: &Target) -> Result<()> {
    let (main, coeffs, history) = solution_tables(sol, mp, target.t);
    match target.format {
        Format::Csv => match &target.path {
            Some(p) => {
                emit(Some(p), &main.to_csv()?)?;
                emit(target.sibling("coeffs.csv").as_deref(), &coeffs.to_csv()?)?;
                emit(target.sibling("history.csv").as_deref(), &history.to_csv()?)?;
                Ok(())
            }
            None => {
                let mut bytes = main.to_csv()?;
                for t in [&coeffs, &history] {
                    bytes.push(b'\n');
                    bytes.extend(t.to_csv()?);
                }
                emit(None, &bytes)
            }
        },
        Format::Json => {
            let Value::Object(mut obj) = main.first_json() else { unreachable!("single-row table") };
            obj.insert("coeffs".into(), coeffs.to_json());
            obj.insert("history".into(), history.to_json());
            emit(target.path.as_deref(), &json_bytes(&Value::Object(obj))?)
        }
    }
}

pub fn solve(cfg: &RunConfig, target: &Target) -> Result<ExitCode> {
    let s = &cfg.solver;
    match reduction_solve(&cfg.material, &cfg.quadrature, s.n0, s.n_max, s.sif_tol) {
        Ok(sol) => {
            write_solution(&sol, &cfg.material, target)?;
            Ok(ExitCode::SUCCESS)
        }
        Err(Error::NoConvergence { solution }) => {
            // the last rung is still the best available answer
            write_solution(&solution, &cfg.material, target)?;
            Err(Error::NoConvergence { solution }.into())
        }
        Err(e) => Err(e.into()),
    }
}

const AXES: [&str; 5] = ["G", "G0", "rho", "k", "tau0"];

fn set_axis(mp: &mut MaterialParams, axis: &str, v: f64) {
    match axis {
        "G" => mp.g = v,
        "G0" => mp.g0 = v,
        "rho" => mp.rho = v,
        "k" => mp.k = v,
        "tau0" => mp.tau0 = v,
        _ => unreachable!("axis names are checked up front"),
    }
}

/// `axis` is one name or several joined by `:`; every entry of `values`
/// carries one number per axis, joined the same way.
pub fn sweep(cfg: &RunConfig, target: &Target, axis: &str, values: &[String]) -> Result<ExitCode> {
    let axes: Vec<&str> = axis.split(':').map(str::trim).collect();
    if let Some(bad) = axes.iter().find(|a| !AXES.contains(a)) {
        return Err(
            ConfigError::Usage(format!("unknown sweep axis `{bad}`; expected one of {}", AXES.join(", "))).into()
        );
    }
    if values.is_empty() {
        return Err(ConfigError::Usage("--values needs at least one entry".into()).into());
    }
    let points: Vec<Vec<f64>> = values
        .iter()
        .map(|v| {
            let parts: Vec<&str> = v.split(':').collect();
            if parts.len() != axes.len() {
                return Err(ConfigError::Usage(format!("value `{v}` does not have {} component(s)", axes.len())));
            }
            parts
                .iter()
                .map(|p| {
                    p.trim().parse::<f64>().map_err(|_| ConfigError::Usage(format!("cannot parse `{p}` in `{v}`")))
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;

    let s = cfg.solver;
    let results: Vec<(Complex64, usize)> = points
        .par_iter()
        .map(|pt| {
            let mut mp = cfg.material;
            for (a, v) in axes.iter().zip(pt) {
                set_axis(&mut mp, a, *v);
            }
            let sol = reduction_solve(&mp, &cfg.quadrature, s.n0, s.n_max, s.sif_tol)?;
            Ok((sif(&sol, &mp, target.t).k_complex, sol.n))
        })
        .collect::<antiplane::Result<_>>()?;

    let mut header: Vec<&str> = axes.clone();
    header.extend(["K_I", "K_II", "K_abs", "N_used"]);
    let mut table = Table::new(&header);
    for (pt, (k, n)) in points.iter().zip(&results) {
        let mut row: Vec<Cell> = pt.iter().map(|v| Cell::Num(*v)).collect();
        row.extend([k.re.into(), k.im.into(), k.norm().into(), (*n).into()]);
        table.push(row);
    }
    emit(target.path.as_deref(), &table.render(target.format)?)?;
    Ok(ExitCode::SUCCESS)
}

pub fn convergence(cfg: &RunConfig, target: &Target, n_list: &[usize]) -> Result<ExitCode> {
    let study = convergence_study(&cfg.material, &cfg.quadrature, n_list)?;
    let mut table = Table::new(&["N", "sum_re", "sum_im", "K_abs", "increment"]);
    for r in &study.rows {
        table.push(vec![r.n.into(), r.coeff_sum.re.into(), r.coeff_sum.im.into(), r.k_abs.into(), r.increment.into()]);
    }
    let bytes = match target.format {
        Format::Csv => table.to_csv()?,
        Format::Json => {
            let mut obj = Map::new();
            obj.insert("rows".into(), table.to_json());
            obj.insert("fitted_order".into(), Cell::from(study.fitted_order).json());
            json_bytes(&Value::Object(obj))?
        }
    };
    emit(target.path.as_deref(), &bytes)?;
    match study.fitted_order {
        Some(p) => eprintln!("fitted order of increments: {p:.3}"),
        None => eprintln!("fitted order of increments: n/a (no non-zero increments)"),
    }
    Ok(ExitCode::SUCCESS)
}

pub fn kernel_probe(cfg: &RunConfig, target: &Target, s_list: &[f64], x_list: Option<&[f64]>) -> Result<ExitCode> {
    let wp = cfg.material.wave_params()?;
    let q = cfg.quadrature;
    let table = match x_list {
        None => {
            let mut t = Table::new(&["s", "value_re", "value_im", "est_error", "cutoff", "panels"]);
            for &s in s_list {
                let ev = rho0(s, &wp, &q)?;
                t.push(vec![
                    s.into(),
                    ev.value.re.into(),
                    ev.value.im.into(),
                    ev.est_error.into(),
                    ev.cutoff_used.into(),
                    ev.panels_used.into(),
                ]);
            }
            t
        }
        Some(xs) => {
            if xs.len() != s_list.len() {
                return Err(ConfigError::Usage(format!(
                    "--x-list has {} entries but --s-list has {}",
                    xs.len(),
                    s_list.len()
                ))
                .into());
            }
            let mut t = Table::new(&["x", "s", "value_re", "value_im", "est_error", "cutoff", "panels"]);
            for (&x, &s) in xs.iter().zip(s_list) {
                let ev = field_kernel(x, s, &wp, &q)?;
                t.push(vec![
                    x.into(),
                    s.into(),
                    ev.value.re.into(),
                    ev.value.im.into(),
                    ev.est_error.into(),
                    ev.cutoff_used.into(),
                    ev.panels_used.into(),
                ]);
            }
            t
        }
    };
    emit(target.path.as_deref(), &table.render(target.format)?)?;
    Ok(ExitCode::SUCCESS)
}

struct Check {
    name: &'static str,
    value: Option<f64>,
    threshold: f64,
    pass: bool,
}

/// Smallest truncation accepted by `validate` (the study needs four rungs
/// spaced by five, starting at four or more).
pub const VALIDATE_MIN_N: usize = 19;

pub fn validate(cfg: &RunConfig, target: &Target, n: usize) -> Result<ExitCode> {
    if n < VALIDATE_MIN_N {
        return Err(ConfigError::Usage(format!("validate needs --n >= {VALIDATE_MIN_N}, got {n}")).into());
    }
    let mp = &cfg.material;
    let q = cfg.quadrature;
    let wp = mp.wave_params()?;
    let mut checks = Vec::new();

    let closed = rho0_at_zero(&wp);
    let at_zero = rho0(0.0, &wp, &q.with_relative_floor(closed.norm()))?.value;
    let kernel_err = if closed.norm() == 0.0 { at_zero.norm() } else { (at_zero - closed).norm() / closed.norm() };
    checks.push(Check {
        name: "kernel_s0_rel_err",
        value: Some(kernel_err),
        threshold: 1e-9,
        pass: kernel_err <= 1e-9,
    });

    let cache = KernelCache::new(wp, q)?;
    let sys = assemble_with(n, mp, &cache, QuadOrders::for_size(n))?;
    let prev = assemble_with(n - 5, mp, &cache, QuadOrders::for_size(n - 5))?;
    let rep = regularity_report(&sys);
    let rep_prev = regularity_report(&prev);
    checks.push(Check { name: "rowsum_slope", value: Some(rep.slope_rowsum), threshold: 0.0, pass: rep.rowsum_pass });
    checks.push(Check {
        name: "entry_slope_n",
        value: Some(rep.slope_n),
        threshold: ENTRY_SLOPE_MAX,
        pass: rep.slope_n <= ENTRY_SLOPE_MAX,
    });
    checks.push(Check {
        name: "entry_slope_m",
        value: Some(rep.slope_m),
        threshold: ENTRY_SLOPE_MAX,
        pass: rep.slope_m <= ENTRY_SLOPE_MAX,
    });
    let frob =
        if rep.frobenius_sq == 0.0 { 0.0 } else { (rep.frobenius_sq - rep_prev.frobenius_sq).abs() / rep.frobenius_sq };
    checks.push(Check { name: "frobenius_rel_change", value: Some(frob), threshold: 0.01, pass: frob < 0.01 });

    let galerkin = antiplane::linsolve::solve_system(&sys)?;
    let colloc = collocation_oracle(mp, &q, n)?;
    let kg = sif(&galerkin, mp, 0.0).magnitude;
    let kc = sif(&colloc, mp, 0.0).magnitude;
    let oracle = (kc - kg).abs() / kg;
    checks.push(Check { name: "collocation_sif_rel_diff", value: Some(oracle), threshold: 1e-4, pass: oracle <= 1e-4 });

    let study = convergence_study(mp, &q, &[n - 15, n - 10, n - 5, n])?;
    let incs = study.increments();
    let last = *incs.last().expect("three increments");
    checks.push(Check { name: "stability_increment", value: Some(last), threshold: 1e-8, pass: last <= 1e-8 });
    let worst_ratio =
        incs.windows(2).map(|w| if w[0] == 0.0 && w[1] == 0.0 { 0.0 } else { w[1] / w[0] }).fold(0.0, f64::max);
    checks.push(Check {
        name: "increment_ratio_max",
        value: Some(worst_ratio),
        threshold: 1.0,
        pass: study.increments_decreasing(),
    });
    let all_zero = incs.iter().all(|d| *d == 0.0);
    checks.push(Check {
        name: "fitted_order",
        value: study.fitted_order,
        threshold: -1.0,
        pass: all_zero || study.fitted_order.is_some_and(|p| p <= -1.0),
    });

    let mut table = Table::new(&["check", "value", "threshold", "pass"]);
    for c in &checks {
        table.push(vec![Cell::Text(c.name.into()), c.value.into(), c.threshold.into(), Cell::Text(c.pass.to_string())]);
    }
    emit(target.path.as_deref(), &table.render(target.format)?)?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("validation failed: {}", failed.join(", "));
        Ok(ExitCode::from(1))
    }
}

/// Parses comma-separated numbers from a raw flag value.
pub fn parse_list<T: std::str::FromStr>(flag: &str, raw: &str) -> Result<Vec<T>, ConfigError> {
    let items: Vec<&str> = raw.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(ConfigError::Usage(format!("{flag} is empty")));
    }
    items.iter().map(|s| s.parse().map_err(|_| ConfigError::Usage(format!("cannot parse `{s}` in {flag}")))).collect()
}
