//! One function per command, each turning a config section into a table
//! and a chart.

use qmeter_core::analysis::{run_single_shot, SingleShot, SingleShotConfig};
use qmeter_core::fock::AncillaInit;
use qmeter_core::measurement::MeasurementParams;
use qmeter_core::metrics::{hierarchy_check, MetricsReport};
use qmeter_core::numerics::{poisson_weights, shannon_entropy};
use qmeter_core::sequence::{
    derive_seed, find_n_star, monte_carlo_oracle, scaling_predictions, sequence_metrics,
    single_step_work, total_work_sequence, NStar, ScalingModel, Thresholds,
};
use qmeter_core::{Base, MeterError, QubitState, SequenceSpec};
use rayon::prelude::*;

use crate::config::{Cell, PlotStyle, RunConfig, Tolerances};
use crate::error::CliError;
use crate::output::{Field, Heatmap, LinePlot, Series, Table};

/// Result of one command before anything is written.
pub struct Report {
    pub table: Table,
    pub svg: String,
    pub messages: Vec<String>,
    /// Cells whose N* search hit the cap.
    pub not_converged: usize,
}

/// Evaluates `f` on every item in the pool and returns the results in input
/// order; the first failing item (in input order) decides the error.
fn par_map<T, R, F>(pool: &rayon::ThreadPool, items: &[T], f: F) -> Result<Vec<R>, CliError>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> Result<R, CliError> + Sync,
{
    let results: Vec<Result<R, CliError>> = pool.install(|| {
        items
            .par_iter()
            .enumerate()
            .map(|(i, t)| f(i, t))
            .collect()
    });
    results.into_iter().collect()
}

fn section<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
    s.as_ref()
        .ok_or_else(|| CliError::config(format!("missing [{name}] section")))
}

fn check_hierarchy(m: &MetricsReport, tol: &Tolerances) -> Result<(), CliError> {
    for link in hierarchy_check(m) {
        if link.lhs + tol.hierarchy_slack < link.rhs {
            return Err(MeterError::Hierarchy {
                link: link.name.to_string(),
                lhs: link.lhs,
                rhs: link.rhs,
            }
            .into());
        }
    }
    Ok(())
}

fn row_label(ratio: bool, v: f64) -> String {
    if ratio {
        format!("alpha_bar = {v}·epsilon")
    } else {
        format!("alpha_bar = {v}")
    }
}

/// Groups a column of `table` into one series per grid row.
fn series_by_row(
    table: &Table,
    cells: &[Cell],
    outer: &[f64],
    ratio: bool,
    x: &str,
    y: &str,
) -> Vec<Series> {
    let xs = table.column(x).unwrap_or_default();
    let ys = table.column(y).unwrap_or_default();
    outer
        .iter()
        .enumerate()
        .map(|(row, &v)| Series {
            name: row_label(ratio, v),
            points: cells
                .iter()
                .zip(xs.iter().zip(&ys))
                .filter(|(c, _)| c.row == row)
                .filter_map(|(_, (x, y))| Some((x.as_f64()?, y.as_f64()?)))
                .collect(),
        })
        .collect()
}

fn known_column(table: &Table, name: &str) -> Result<(), CliError> {
    if table.columns.contains(&name) {
        Ok(())
    } else {
        Err(CliError::config(format!("plot: unknown column {name:?}")))
    }
}

pub const SINGLE_COLUMNS: [&str; 12] = [
    "alpha_bar",
    "epsilon",
    "xi",
    "eta",
    "eta_xr",
    "product",
    "chi_nats",
    "w_bound_dephasing",
    "w_bound_dissipation",
    "w_dr",
    "w_reset_a_min",
    "w_reset_m_min",
];

pub fn run_single(cfg: &RunConfig, pool: &rayon::ThreadPool) -> Result<Report, CliError> {
    let s = section(&cfg.single, "single")?;
    let (outer, ratio, cells) = s.cells()?;
    let coarse = s.coarse_graining.resolve()?;
    let init = match s.beta_omega {
        Some(bw) => AncillaInit::Thermal { beta_omega: bw },
        None => AncillaInit::Vacuum,
    };
    let shots = par_map(pool, &cells, |_, c| {
        let mut p = MeasurementParams::real(c.alpha_bar, c.epsilon)
            .with_init(init)
            .with_phi(s.phi);
        p.beta = s.beta;
        p.omega_a = s.omega_a;
        let mut sc = SingleShotConfig::new(p).with_coarse(coarse.clone());
        sc.basis = s.basis.into();
        let shot = run_single_shot(&sc)?;
        check_hierarchy(&shot.metrics, &cfg.tolerances)?;
        Ok(shot)
    })?;
    let mut table = Table::new(SINGLE_COLUMNS.to_vec());
    for (c, shot) in cells.iter().zip(&shots) {
        let (m, l) = (&shot.metrics, &shot.ledger);
        table.push(vec![
            c.alpha_bar.into(),
            c.epsilon.into(),
            m.xi.into(),
            m.eta.into(),
            m.eta_xr.into(),
            m.product.into(),
            m.chi.into(),
            l.w_bound_dephasing.into(),
            l.w_bound_dissipation.into(),
            l.w_dr.into(),
            l.w_reset_a_min.into(),
            l.w_reset_m_min.into(),
        ]);
    }
    let y = s.plot.as_deref().unwrap_or("xi");
    known_column(&table, y)?;
    let svg = match s.plot_style {
        PlotStyle::Lines => LinePlot {
            title: format!("{y} against epsilon"),
            x_label: "epsilon".into(),
            y_label: y.into(),
            log_x: false,
            log_y: false,
            series: series_by_row(&table, &cells, &outer, ratio, "epsilon", y),
        }
        .render(),
        PlotStyle::Heatmap => {
            let n_eps = cells.len() / outer.len();
            let col = table.column(y).unwrap_or_default();
            Heatmap {
                title: format!("{y} over the parameter plane"),
                x_label: "epsilon".into(),
                y_label: if ratio { "alpha_bar / epsilon" } else { "alpha_bar" }.into(),
                xs: cells[..n_eps].iter().map(|c| c.epsilon).collect(),
                ys: outer.clone(),
                values: col.chunks(n_eps).map(|r| r.iter().map(Field::as_f64).collect()).collect(),
            }
            .render()
        }
    };
    Ok(Report {
        table,
        svg,
        messages: Vec::new(),
        not_converged: 0,
    })
}

pub fn run_sequence(
    cfg: &RunConfig,
    pool: &rayon::ThreadPool,
    seed: u64,
) -> Result<Report, CliError> {
    let s = section(&cfg.sequence, "sequence")?;
    let (outer, ratio, cells) = s.cells()?;
    let ns = s.n_steps.values("n_steps")?;
    let jobs: Vec<(usize, Cell, u64)> = cells
        .iter()
        .enumerate()
        .flat_map(|(i, c)| ns.iter().map(move |&n| (i, *c, n)))
        .collect();
    let mc = s.monte_carlo_samples;
    let rows = par_map(pool, &jobs, |_, &(i, c, n)| {
        let mut p = MeasurementParams::real(c.alpha_bar, c.epsilon);
        p.beta = s.beta;
        let spec = SequenceSpec::new(n, p);
        let m = sequence_metrics(&spec)?;
        check_hierarchy(&m, &cfg.tolerances)?;
        let mut row: Vec<Field> = vec![
            c.alpha_bar.into(),
            c.epsilon.into(),
            n.into(),
            m.xi.into(),
            m.eta.into(),
            m.eta_xr.into(),
            m.product.into(),
            total_work_sequence(&spec)?.into(),
        ];
        if let Some(samples) = mc {
            let est = monte_carlo_oracle(&spec, samples, derive_seed(seed, &[i as u64, n]))?;
            row.extend::<[Field; 6]>([
                est.report.xi.into(),
                est.xi_se.into(),
                est.report.eta.into(),
                est.eta_se.into(),
                est.report.eta_xr.into(),
                est.eta_xr_se.into(),
            ]);
        }
        Ok(row)
    })?;
    let mut columns = vec![
        "alpha_bar",
        "epsilon",
        "n_steps",
        "xi",
        "eta",
        "eta_xr",
        "product",
        "w_total",
    ];
    if mc.is_some() {
        columns.extend([
            "mc_xi",
            "mc_xi_se",
            "mc_eta",
            "mc_eta_se",
            "mc_eta_xr",
            "mc_eta_xr_se",
        ]);
    }
    let mut table = Table::new(columns);
    for r in rows {
        table.push(r);
    }
    let y = s.plot.as_deref().unwrap_or("xi");
    known_column(&table, y)?;
    let col = table.column(y).unwrap_or_default();
    let series = cells
        .iter()
        .enumerate()
        .map(|(i, c)| Series {
            name: format!(
                "{}, epsilon = {}",
                row_label(ratio, outer[c.row]),
                c.epsilon
            ),
            points: ns
                .iter()
                .zip(&col[i * ns.len()..(i + 1) * ns.len()])
                .filter_map(|(&n, v)| Some((n as f64, v.as_f64()?)))
                .collect(),
        })
        .collect();
    let svg = LinePlot {
        title: format!("{y} against sequence length"),
        x_label: "N".into(),
        y_label: y.into(),
        log_x: false,
        log_y: false,
        series,
    }
    .render();
    Ok(Report {
        table,
        svg,
        messages: Vec::new(),
        not_converged: 0,
    })
}

pub fn run_rotation(cfg: &RunConfig, pool: &rayon::ThreadPool) -> Result<Report, CliError> {
    let s = section(&cfg.rotation, "rotation")?;
    let thetas = s.theta.values("theta")?;
    let values = par_map(pool, &thetas, |_, &theta| {
        let sc = SingleShotConfig::new(MeasurementParams::real(s.alpha_bar, s.epsilon))
            .with_rotation(theta);
        let shot = run_single_shot(&sc)?;
        check_hierarchy(&shot.metrics, &cfg.tolerances)?;
        Ok(shot.metrics.eta_xr)
    })?;
    let mut table = Table::new(vec!["theta", "eta_xr"]);
    let mut peak: Option<(f64, f64)> = None;
    for (&theta, &v) in thetas.iter().zip(&values) {
        table.push(vec![theta.into(), v.into()]);
        if let Some(v) = v {
            if peak.is_none_or(|(_, best)| v > best) {
                peak = Some((theta, v));
            }
        }
    }
    let messages = match peak {
        Some((theta, v)) => vec![format!("peak: theta = {theta:.6}, eta_xr = {v:.6}")],
        None => vec!["peak: eta_xr undefined on the whole grid".to_string()],
    };
    let svg = LinePlot {
        title: "eta_xr against rotation angle".into(),
        x_label: "theta".into(),
        y_label: "eta_xr".into(),
        log_x: false,
        log_y: false,
        series: vec![Series {
            name: format!("epsilon = {}", s.epsilon),
            points: thetas
                .iter()
                .zip(&values)
                .filter_map(|(&t, v)| Some((t, (*v)?)))
                .collect(),
        }],
    }
    .render();
    Ok(Report {
        table,
        svg,
        messages,
        not_converged: 0,
    })
}

pub const THERMAL_COLUMNS: [&str; 12] = [
    "alpha_bar",
    "epsilon",
    "beta_omega",
    "xi_vacuum",
    "xi_thermal",
    "eta_vacuum",
    "eta_thermal",
    "eta_xr_vacuum",
    "eta_xr_thermal",
    "w_bound_vacuum",
    "w_bound_thermal",
    "info_cost_thermal",
];

pub fn run_thermal(cfg: &RunConfig, pool: &rayon::ThreadPool) -> Result<Report, CliError> {
    let s = section(&cfg.thermal, "thermal")?;
    let (outer, ratio, cells) = s.cells()?;
    let coarse = s.coarse_graining.resolve()?;
    let bws = s.beta_omegas()?;
    let jobs: Vec<(f64, Cell)> = bws
        .iter()
        .flat_map(|&b| cells.iter().map(move |c| (b, *c)))
        .collect();
    let shot = |c: &Cell, init: AncillaInit| -> Result<SingleShot, CliError> {
        let mut p = MeasurementParams::real(c.alpha_bar, c.epsilon).with_init(init);
        p.beta = s.beta;
        let r = run_single_shot(&SingleShotConfig::new(p).with_coarse(coarse.clone()))?;
        check_hierarchy(&r.metrics, &cfg.tolerances)?;
        Ok(r)
    };
    let pairs = par_map(pool, &jobs, |_, (bw, c)| {
        Ok((
            shot(c, AncillaInit::Vacuum)?,
            shot(c, AncillaInit::Thermal { beta_omega: *bw })?,
        ))
    })?;
    let mut table = Table::new(THERMAL_COLUMNS.to_vec());
    for ((bw, c), (v, t)) in jobs.iter().zip(&pairs) {
        table.push(vec![
            c.alpha_bar.into(),
            c.epsilon.into(),
            (*bw).into(),
            v.metrics.xi.into(),
            t.metrics.xi.into(),
            v.metrics.eta.into(),
            t.metrics.eta.into(),
            v.metrics.eta_xr.into(),
            t.metrics.eta_xr.into(),
            v.ledger.w_bound_dephasing.into(),
            t.ledger.w_bound_dephasing.into(),
            (t.ledger.h_pn - t.ledger.s_a_t0).into(),
        ]);
    }
    let mut series = Vec::new();
    for (row, &o) in outer.iter().enumerate() {
        let pick = |k: usize| -> Vec<(f64, f64)> {
            jobs.iter()
                .zip(&pairs)
                .filter(|((b, c), _)| c.row == row && *b == bws[k])
                .map(|((_, c), (_, t))| (c.epsilon, t.metrics.xi))
                .collect()
        };
        series.push(Series {
            name: format!("{}, vacuum", row_label(ratio, o)),
            points: jobs
                .iter()
                .zip(&pairs)
                .filter(|((b, c), _)| c.row == row && *b == bws[0])
                .map(|((_, c), (v, _))| (c.epsilon, v.metrics.xi))
                .collect(),
        });
        for (k, bw) in bws.iter().enumerate() {
            series.push(Series {
                name: format!("{}, beta_omega = {bw}", row_label(ratio, o)),
                points: pick(k),
            });
        }
    }
    let svg = LinePlot {
        title: "strength with vacuum and thermal pointer".into(),
        x_label: "epsilon".into(),
        y_label: "xi".into(),
        log_x: false,
        log_y: false,
        series,
    }
    .render();
    Ok(Report {
        table,
        svg,
        messages: Vec::new(),
        not_converged: 0,
    })
}

fn n_star_work(
    c: &Cell,
    beta: f64,
    thresholds: &Thresholds,
) -> Result<(NStar, Option<f64>), CliError> {
    let mut p = MeasurementParams::real(c.alpha_bar, c.epsilon);
    p.beta = beta;
    let n = find_n_star(&p, &QubitState::reference(), thresholds)?;
    let w = match n {
        NStar::Converged(n) => Some(total_work_sequence(&SequenceSpec::new(n, p))?),
        NStar::NotConverged { .. } => None,
    };
    Ok((n, w))
}

fn n_star_field(n: &NStar) -> Field {
    n.value().map_or(Field::Null, Field::Int)
}

/// Least-squares slope of ln y against ln x.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub const SCALING_COLUMNS: [&str; 8] = [
    "alpha_bar",
    "epsilon",
    "n_star",
    "converged",
    "w_total",
    "w_total_eps2",
    "w_weak_predicted",
    "w_strong_predicted",
];

pub fn run_scaling(cfg: &RunConfig, pool: &rayon::ThreadPool) -> Result<Report, CliError> {
    let s = section(&cfg.scaling, "scaling")?;
    let cells = s.cells()?;
    if cells.iter().any(|c| c.epsilon <= 0.0) {
        return Err(CliError::config("scaling: epsilon must be positive"));
    }
    let th = Thresholds::uniform(cfg.tolerances.threshold);
    let results = par_map(pool, &cells, |_, c| n_star_work(c, s.beta, &th))?;
    let h0 = match s.h0 {
        Some(h) => h,
        None => {
            let smallest = cells
                .iter()
                .min_by(|a, b| a.epsilon.total_cmp(&b.epsilon))
                .map_or(0.0, |c| c.alpha_bar);
            shannon_entropy(&poisson_weights(smallest * smallest)?, Base::Natural).value
        }
    };
    let mut model = ScalingModel::new(h0, s.k_outcomes, s.l_exponent, s.sigma0)?;
    let measured: Vec<(f64, f64)> = cells
        .iter()
        .zip(&results)
        .filter_map(|(c, (_, w))| Some((c.epsilon, (*w)?)))
        .collect();
    let fitted = model.fit_weak_prefactor(&measured).is_ok();
    let mut table = Table::new(SCALING_COLUMNS.to_vec());
    let mut predicted = Vec::new();
    for (c, (n, w)) in cells.iter().zip(&results) {
        let (ww, ws) = scaling_predictions(&model, c.epsilon)?;
        let ww = fitted.then_some(ww);
        if let Some(ww) = ww {
            predicted.push((c.epsilon, ww));
        }
        table.push(vec![
            c.alpha_bar.into(),
            c.epsilon.into(),
            n_star_field(n),
            n.value().is_some().into(),
            (*w).into(),
            w.map(|w| w * c.epsilon * c.epsilon).into(),
            ww.into(),
            ws.into(),
        ]);
    }
    let not_converged = results.iter().filter(|(n, _)| n.value().is_none()).count();
    let mut messages = vec![format!("h0 = {h0:.6} nats")];
    if fitted {
        messages.push(format!("fitted weak prefactor = {:.6}", model.weak_prefactor));
    }
    match log_log_slope(&measured) {
        Some(sl) => messages.push(format!("log-log slope of w_total = {sl:.4}")),
        None => messages.push("log-log slope of w_total undefined".into()),
    }
    let svg = LinePlot {
        title: "total work of weak sequences".into(),
        x_label: "epsilon".into(),
        y_label: "work".into(),
        log_x: true,
        log_y: true,
        series: vec![
            Series {
                name: "measured".into(),
                points: measured,
            },
            Series {
                name: "fitted".into(),
                points: predicted,
            },
        ],
    }
    .render();
    Ok(Report {
        table,
        svg,
        messages,
        not_converged,
    })
}

pub const COMPARE_COLUMNS: [&str; 6] = [
    "epsilon_weak",
    "n_star",
    "w_total_weak",
    "w_single_strong",
    "ratio",
    "converged",
];

pub fn run_compare(cfg: &RunConfig, pool: &rayon::ThreadPool) -> Result<Report, CliError> {
    let s = section(&cfg.compare, "compare")?;
    let cells = s.cells()?;
    let th = Thresholds::uniform(cfg.tolerances.threshold);
    let mut strong = MeasurementParams::real(
        s.alpha_bar_strong.unwrap_or(s.epsilon_strong),
        s.epsilon_strong,
    );
    strong.beta = s.beta;
    let w_strong = single_step_work(&strong, &QubitState::reference())?;
    let results = par_map(pool, &cells, |_, c| n_star_work(c, s.beta, &th))?;
    let mut table = Table::new(COMPARE_COLUMNS.to_vec());
    let mut weak = Vec::new();
    for (c, (n, w)) in cells.iter().zip(&results) {
        if let Some(w) = w {
            weak.push((c.epsilon, *w));
        }
        table.push(vec![
            c.epsilon.into(),
            n_star_field(n),
            (*w).into(),
            w_strong.into(),
            w.map(|w| w / w_strong).into(),
            n.value().is_some().into(),
        ]);
    }
    let not_converged = results.iter().filter(|(n, _)| n.value().is_none()).count();
    let mut messages = vec![format!("w_single_strong = {w_strong:.6}")];
    if let Some(sl) = log_log_slope(&weak) {
        messages.push(format!("log-log slope of w_total_weak = {sl:.4}"));
    }
    let strong_line = cells.iter().map(|c| (c.epsilon, w_strong)).collect();
    let svg = LinePlot {
        title: "weak sequence against single strong measurement".into(),
        x_label: "epsilon_weak".into(),
        y_label: "work".into(),
        log_x: true,
        log_y: true,
        series: vec![
            Series {
                name: "weak sequence".into(),
                points: weak,
            },
            Series {
                name: "single strong".into(),
                points: strong_line,
            },
        ],
    }
    .render();
    Ok(Report {
        table,
        svg,
        messages,
        not_converged,
    })
}
