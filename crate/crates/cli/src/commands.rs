use cascade_core::continuum::{DensityTable, ModelParams};
use cascade_core::discrete::{
    cascade_pmf_table, discrete_extinction, discrete_moments, DiscretizationParams, TableLimit,
};
use cascade_core::simulate::{run_campaign, SimConfig, SimSummary};
use serde::Serialize;

use crate::args::{
    DensityArgs, ExtinctionArgs, Format, MomentsArgs, Output, PmfArgs, SimulateArgs, VerifyArgs,
};
use crate::error::CliError;
use crate::report::{emit, json, Cell, CsvTable};

fn write(
    output: &Output,
    default: Format,
    csv: impl FnOnce() -> String,
    json: impl FnOnce() -> String,
) -> Result<(), CliError> {
    let text = match output.format.unwrap_or(default) {
        Format::Csv => csv(),
        Format::Json => json(),
    };
    emit(&output.out, &text)
}

fn model(p: f64) -> Result<ModelParams<f64>, CliError> {
    Ok(ModelParams::new(p)?)
}

/// `name,value` table used by the scalar reports.
fn scalar_csv(rows: &[(&str, Cell)], params: Vec<(&str, Cell)>) -> String {
    let mut t = CsvTable::new(&["name", "value"], params);
    for (name, value) in rows {
        t.push(vec![Cell::from(*name), value.clone()]);
    }
    t.render()
}

#[derive(Serialize)]
struct PParams {
    p: f64,
}

#[derive(Serialize)]
struct PmParams {
    p: f64,
    m: Option<u64>,
}

#[derive(Serialize)]
struct DensityRow {
    x: f64,
    density: f64,
    asymptotic: f64,
}

#[derive(Serialize)]
struct DensityReport<'a> {
    params: PParams,
    rows: &'a [DensityRow],
}

pub fn density(a: &DensityArgs) -> Result<(), CliError> {
    let params = model(a.p)?;
    if !(a.x_min >= 1.0 && a.x_max > a.x_min && a.x_max.is_finite()) {
        return Err(CliError::Usage(format!(
            "need 1 <= x-min < x-max (got {} and {})",
            a.x_min, a.x_max
        )));
    }
    if a.steps < 2 {
        return Err(CliError::Usage(format!(
            "steps must be at least 2 (got {})",
            a.steps
        )));
    }
    let table = DensityTable::tabulate(params, a.x_min, a.x_max, a.steps)?;
    let rows = table
        .points
        .iter()
        .map(|&(x, g)| {
            Ok(DensityRow {
                x,
                density: g,
                asymptotic: params.asymptotic_log_density(x)?.exp(),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    write(
        &a.output,
        Format::Csv,
        || {
            let mut t = CsvTable::new(&["x", "density", "asymptotic"], vec![("p", a.p.into())]);
            for r in &rows {
                t.push(vec![r.x.into(), r.density.into(), r.asymptotic.into()]);
            }
            t.render()
        },
        || {
            json(&DensityReport {
                params: PParams { p: a.p },
                rows: &rows,
            })
        },
    )
}

#[derive(Serialize)]
struct PmfRow {
    n: u64,
    pmf: f64,
    rescaled_density: f64,
    cumulative: f64,
}

#[derive(Serialize)]
struct PmfReport<'a> {
    params: PmParams,
    total_mass: f64,
    truncated: bool,
    rows: &'a [PmfRow],
}

pub fn pmf(a: &PmfArgs) -> Result<(), CliError> {
    let d = DiscretizationParams::new(a.p, a.m)?;
    let limit = match a.n_max {
        Some(n) if n < a.m => {
            return Err(CliError::Usage(format!(
                "n-max ({n}) must be at least m ({})",
                a.m
            )));
        }
        Some(n) => TableLimit::UpTo(n),
        None => TableLimit::default(),
    };
    let table = cascade_pmf_table(&d, a.m, limit)?;
    let scale = a.m as f64;
    let rows: Vec<PmfRow> = table
        .iter()
        .zip(table.cumulative())
        .map(|((n, pr), cumulative)| PmfRow {
            n,
            pmf: pr,
            rescaled_density: scale * pr,
            cumulative,
        })
        .collect();
    write(
        &a.output,
        Format::Csv,
        || {
            let params = vec![("p", a.p.into()), ("m", a.m.into())];
            let mut t = CsvTable::new(&["n", "pmf", "rescaled_density", "cumulative"], params);
            for r in &rows {
                t.push(vec![
                    r.n.into(),
                    r.pmf.into(),
                    r.rescaled_density.into(),
                    r.cumulative.into(),
                ]);
            }
            t.render()
        },
        || {
            json(&PmfReport {
                params: PmParams {
                    p: a.p,
                    m: Some(a.m),
                },
                total_mass: table.total_mass(),
                truncated: table.truncated,
                rows: &rows,
            })
        },
    )
}

#[derive(Serialize)]
struct MomentsReport {
    params: PmParams,
    mean: f64,
    variance: f64,
    quadrature_mean: f64,
    quadrature_variance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    lattice_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lattice_variance: Option<f64>,
}

pub fn moments(a: &MomentsArgs) -> Result<(), CliError> {
    let params = model(a.p)?;
    let exact = params.moments()?;
    let quad = params.quadrature_moments(a.abs_tol)?;
    let lattice = match a.m {
        Some(m) => Some(discrete_moments(&DiscretizationParams::new(a.p, m)?)?.aggregate),
        None => None,
    };
    let report = MomentsReport {
        params: PmParams { p: a.p, m: a.m },
        mean: exact.mean,
        variance: exact.variance,
        quadrature_mean: quad.mean,
        quadrature_variance: quad.variance,
        lattice_mean: lattice.map(|l| l.mean),
        lattice_variance: lattice.map(|l| l.variance),
    };
    write(
        &a.output,
        Format::Csv,
        || {
            let mut rows = vec![
                ("mean", report.mean.into()),
                ("variance", report.variance.into()),
                ("quadrature_mean", report.quadrature_mean.into()),
                ("quadrature_variance", report.quadrature_variance.into()),
            ];
            if let Some(l) = lattice {
                rows.push(("lattice_mean", l.mean.into()));
                rows.push(("lattice_variance", l.variance.into()));
            }
            scalar_csv(&rows, vec![("p", a.p.into()), ("m", a.m.into())])
        },
        || json(&report),
    )
}

#[derive(Serialize)]
struct LatticeExtinction {
    alpha: f64,
    x_of_p: f64,
    prob_finite: f64,
}

#[derive(Serialize)]
struct ExtinctionOutput {
    params: PmParams,
    x_of_p: f64,
    chi: f64,
    prob_finite: f64,
    root_x_of_p: f64,
    root_prob_finite: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    lattice: Option<LatticeExtinction>,
}

pub fn extinction(a: &ExtinctionArgs) -> Result<(), CliError> {
    let params = model(a.p)?;
    let report = params.extinction();
    let root = params.extinction_exponent_by_root()?;
    let lattice = match a.m {
        Some(m) => {
            let d = DiscretizationParams::new(a.p, m)?;
            let r = discrete_extinction(&d)?;
            Some(LatticeExtinction {
                alpha: 1.0 - r.x_of_p * d.delta(),
                x_of_p: r.x_of_p,
                prob_finite: r.prob_finite,
            })
        }
        None => None,
    };
    let out = ExtinctionOutput {
        params: PmParams { p: a.p, m: a.m },
        x_of_p: report.x_of_p,
        chi: report.chi,
        prob_finite: report.prob_finite,
        root_x_of_p: root,
        root_prob_finite: (-root).exp(),
        lattice,
    };
    write(
        &a.output,
        Format::Csv,
        || {
            let mut rows = vec![
                ("x_of_p", out.x_of_p.into()),
                ("chi", out.chi.into()),
                ("prob_finite", out.prob_finite.into()),
                ("root_x_of_p", out.root_x_of_p.into()),
                ("root_prob_finite", out.root_prob_finite.into()),
            ];
            if let Some(l) = &out.lattice {
                rows.push(("lattice_alpha", l.alpha.into()));
                rows.push(("lattice_x_of_p", l.x_of_p.into()));
                rows.push(("lattice_prob_finite", l.prob_finite.into()));
            }
            scalar_csv(&rows, vec![("p", a.p.into()), ("m", a.m.into())])
        },
        || json(&out),
    )
}

#[derive(Serialize)]
struct Statistics {
    trials: u64,
    finite_fraction: f64,
    finite_fraction_se: f64,
    mean: f64,
    mean_se: f64,
    variance: f64,
}

impl Statistics {
    fn of(s: &SimSummary) -> Self {
        Self {
            trials: s.trials(),
            finite_fraction: s.finite_fraction(),
            finite_fraction_se: s.finite_fraction_se(),
            mean: s.mean(),
            mean_se: s.mean_se(),
            variance: s.variance(),
        }
    }
}

#[derive(Serialize)]
struct SimulateReport<'a> {
    #[serde(flatten)]
    summary: &'a SimSummary,
    statistics: Statistics,
}

fn sim_params(c: &SimConfig) -> Vec<(&'static str, Cell)> {
    vec![
        ("mode", Cell::Text(c.mode.to_string())),
        ("p", c.p.into()),
        ("m", c.m.into()),
        ("trials", c.trials.into()),
        ("seed", c.seed.into()),
        ("workers", (c.workers as u64).into()),
        ("cap", c.cap.into()),
        ("epsilon", c.epsilon.into()),
    ]
}

fn histogram_csv(s: &SimSummary) -> String {
    let h = s.histogram();
    let edges = h.edges();
    let mut t = CsvTable::new(&["bin_lo", "bin_hi", "count"], sim_params(&s.config));
    for (i, &count) in h.counts.iter().enumerate() {
        t.push(vec![edges[i].into(), edges[i + 1].into(), count.into()]);
    }
    t.push(vec![
        edges[h.counts.len()].into(),
        f64::INFINITY.into(),
        h.overflow.into(),
    ]);
    t.render()
}

pub fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let config = SimConfig {
        m: a.m,
        cap: a.cap,
        epsilon: a.epsilon,
        workers: a.workers,
        ..SimConfig::new(a.mode.into(), a.p, a.trials, a.seed)
    };
    let summary = run_campaign(&config)?;
    let stats = Statistics::of(&summary);
    eprintln!(
        "finite fraction {:.6} ± {:.6}; mean {:.6} ± {:.6} over {} finite trials",
        stats.finite_fraction,
        stats.finite_fraction_se,
        stats.mean,
        stats.mean_se,
        summary.n_finite()
    );
    if let Some(path) = &a.histogram {
        emit(path, &histogram_csv(&summary))?;
    }
    write(
        &a.output,
        Format::Json,
        || {
            let rows = [
                ("trials", stats.trials.into()),
                ("n_finite", summary.n_finite().into()),
                ("n_censored", summary.n_censored().into()),
                ("finite_fraction", stats.finite_fraction.into()),
                ("finite_fraction_se", stats.finite_fraction_se.into()),
                ("mean", stats.mean.into()),
                ("mean_se", stats.mean_se.into()),
                ("variance", stats.variance.into()),
            ];
            scalar_csv(&rows, sim_params(&config))
        },
        || {
            json(&SimulateReport {
                summary: &summary,
                statistics: Statistics::of(&summary),
            })
        },
    )
}

#[derive(Serialize)]
struct VerifyReport {
    params: PParams,
    abs_tol: f64,
    /// `None` when the quadrature failed.
    integral: Option<f64>,
    quadrature_error: Option<f64>,
    tail: Option<f64>,
    x_max: Option<f64>,
    lambert_target: f64,
    root_target: f64,
    integral_residual: Option<f64>,
    route_residual: f64,
    passed: bool,
}

pub fn verify(a: &VerifyArgs) -> Result<(), CliError> {
    let params = model(a.p)?;
    if !(a.abs_tol > 0.0 && a.abs_tol.is_finite()) {
        return Err(CliError::Usage(format!(
            "abs-tol must be positive (got {})",
            a.abs_tol
        )));
    }
    let lambert_target = params.extinction().prob_finite;
    let root_target = (-params.extinction_exponent_by_root()?).exp();
    let check = params.verify_normalization(a.abs_tol / 100.0);
    let ok = check.as_ref().ok();
    let integral_residual = ok.map(|c| (c.integral - lambert_target).abs());
    let route_residual = (lambert_target - root_target).abs();
    let passed = integral_residual.is_some_and(|r| r <= a.abs_tol) && route_residual <= a.abs_tol;
    let report = VerifyReport {
        params: PParams { p: a.p },
        abs_tol: a.abs_tol,
        integral: ok.map(|c| c.integral),
        quadrature_error: ok.map(|c| c.quadrature_error),
        tail: ok.map(|c| c.tail),
        x_max: ok.map(|c| c.x_max),
        lambert_target,
        root_target,
        integral_residual,
        route_residual,
        passed,
    };
    let opt = |v: Option<f64>| v.map_or(Cell::Empty, Cell::Real);
    write(
        &a.output,
        Format::Csv,
        || {
            let rows = [
                ("integral", opt(report.integral)),
                ("quadrature_error", opt(report.quadrature_error)),
                ("tail", opt(report.tail)),
                ("x_max", opt(report.x_max)),
                ("lambert_target", report.lambert_target.into()),
                ("root_target", report.root_target.into()),
                ("integral_residual", opt(report.integral_residual)),
                ("route_residual", report.route_residual.into()),
                ("passed", Cell::from(if passed { "true" } else { "false" })),
            ];
            scalar_csv(
                &rows,
                vec![("p", a.p.into()), ("abs_tol", a.abs_tol.into())],
            )
        },
        || json(&report),
    )?;
    match check {
        Err(e) => Err(CliError::Core(e)),
        Ok(_) if !passed => Err(CliError::CheckFailed(format!(
            "residuals exceed {}: integral {:?}, routes {}",
            a.abs_tol, integral_residual, route_residual
        ))),
        Ok(_) => Ok(()),
    }
}
