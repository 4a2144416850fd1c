//! Convergence studies over (r, s) and mesh sweeps over n, with CSV output.

use std::time::Instant;

use ndarray::Array1;
use rayon::prelude::*;
use thiserror::Error;

use fracrb_core::elliptic::decay_rate_c_star;
use fracrb_core::fem::{
    lshape_mesh, unit_interval_mesh, unit_square_mesh, FeOrder, FeSpace, FemError,
};
use fracrb_core::fractional::{
    build_reduced_space, estimate_spectral_bounds, BuildOptions, FractionalError, SpectralInterval,
    TruthBasis,
};
use fracrb_core::linalg::{gen_eig, LinalgError, SolveOptions, TRUTH_CAP};
use fracrb_core::rng::SplitMix64;
use fracrb_core::sparse::SparseSymMatrix;
use fracrb_core::DofVector;

use crate::config::{BoundsSpec, ConfigError, Domain, ExperimentConfig, RhsSpec};

#[derive(Debug, Error)]
pub enum StudyError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Fractional(#[from] FractionalError),
    #[error(transparent)]
    Elliptic(#[from] fracrb_core::elliptic::EllipticError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("eigenfunction index {0} exceeds the {1} available modes")]
    EigenfunctionIndex(usize, usize),
    #[error("refusing to run: {0} dofs exceed the desk-scale truth cap {1}")]
    TruthCapExceeded(usize, usize),
}

/// One CSV row: all error metrics for a single (r, s) pair.
#[derive(Debug, Clone)]
pub struct StudyRow {
    pub r: usize,
    pub s: f64,
    pub h: f64,
    pub n_dofs: usize,
    pub r_effective: usize,
    /// Signed dual norm error `||f||_{H*,r^{-s}} - ||f||_{H^{-s}}`.
    pub e_star: f64,
    /// Absolute extrapolation norm error.
    pub e: f64,
    /// `||u_r^*(s) - u(s)||_{L2}`.
    pub e_star_solution: f64,
    /// `||u_r(s) - u(s)||_{L2}`.
    pub e_solution: f64,
    pub kappa: f64,
    pub c_star: f64,
    pub t_offline_ms: f64,
    pub t_online_us: f64,
}

/// Least-squares slope of `ln(metric)` against `r` over the error window.
#[derive(Debug, Clone, Copy)]
pub struct RateFit {
    pub s: f64,
    pub metric: Metric,
    pub slope: Option<f64>,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    EStar,
    E,
    EStarSolution,
    ESolution,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::EStar,
        Metric::E,
        Metric::EStarSolution,
        Metric::ESolution,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::EStar => "e_star",
            Metric::E => "e",
            Metric::EStarSolution => "E_star",
            Metric::ESolution => "E",
        }
    }

    fn pick(self, row: &StudyRow) -> f64 {
        match self {
            Metric::EStar => row.e_star,
            Metric::E => row.e,
            Metric::EStarSolution => row.e_star_solution,
            Metric::ESolution => row.e_solution,
        }
    }
}

/// Error window for rate fits: excludes the pre-asymptotic head and the
/// roundoff floor.
const FIT_WINDOW: (f64, f64) = (1e-10, 1e-2);

#[derive(Debug)]
pub struct StudyOutput {
    pub config: ExperimentConfig,
    pub n_dofs: usize,
    pub h: f64,
    pub kappa: f64,
    pub c_star: f64,
    pub load_norm: f64,
    pub rows: Vec<StudyRow>,
    pub fits: Vec<RateFit>,
    /// Rows where the one-sided bound e_star >= -1e-12 ||f||_0^2 failed.
    pub one_sided_violations: usize,
}

impl StudyOutput {
    pub fn fitted_slope(&self, s: f64, metric: Metric) -> Option<f64> {
        self.fits
            .iter()
            .find(|f| f.s == s && f.metric == metric)
            .and_then(|f| f.slope)
    }

    /// CSV with the stable column schema. Error columns use scientific
    /// notation with 17 significant digits. Timing columns are zero in
    /// serial (deterministic) runs.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "r,s,h,N,r_effective,e_star,e,E_star,E,kappa,c_star_predicted,t_offline_ms,t_online_us\n",
        );
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{:.16e},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.3},{:.3}\n",
                row.r,
                row.s,
                row.h,
                row.n_dofs,
                row.r_effective,
                row.e_star,
                row.e,
                row.e_star_solution,
                row.e_solution,
                row.kappa,
                row.c_star,
                row.t_offline_ms,
                row.t_online_us,
            ));
        }
        out
    }
}

fn build_mesh(cfg: &ExperimentConfig) -> Result<fracrb_core::fem::Mesh, FemError> {
    match cfg.domain {
        Domain::Interval => unit_interval_mesh(cfg.n),
        Domain::Square => unit_square_mesh(cfg.n),
        Domain::Lshape => lshape_mesh(cfg.n),
    }
}

fn build_rhs(
    cfg: &ExperimentConfig,
    space: &FeSpace,
    m: &SparseSymMatrix,
    eig: &fracrb_core::linalg::GenEigBasis,
) -> Result<DofVector, StudyError> {
    match cfg.rhs {
        RhsSpec::ConstantOne => Ok(space.l2_project_with_mass(m, &|_, _| 1.0)?),
        RhsSpec::Eigenfunction { k } => {
            let modes = eig.eigenvalues.len();
            if k == 0 || k > modes {
                return Err(StudyError::EigenfunctionIndex(k, modes));
            }
            Ok(eig.vectors.column(k - 1).to_owned())
        }
        RhsSpec::Random { seed } => {
            let mut rng = SplitMix64::new(seed);
            let mut f: Array1<f64> = (0..m.dim()).map(|_| rng.uniform_pm1()).collect();
            let norm = m.quadratic_form(&f.view()).sqrt();
            f /= norm;
            Ok(f)
        }
    }
}

/// Runs the full (r, s) sweep for one configuration. With `serial = true`
/// everything executes single-threaded in deterministic order and the timing
/// columns are zeroed, making the CSV bytes reproducible.
pub fn run_convergence_study(
    cfg: &ExperimentConfig,
    serial: bool,
) -> Result<StudyOutput, StudyError> {
    cfg.validate()?;
    let mesh = build_mesh(cfg)?;
    let order = FeOrder::from_degree(cfg.order).expect("validated order");
    let space = FeSpace::new(&mesh, order)?;
    let n_dofs = space.n_dofs();
    if n_dofs > TRUTH_CAP {
        return Err(StudyError::TruthCapExceeded(n_dofs, TRUTH_CAP));
    }
    let (m, a) = space.assemble()?;
    let eig = gen_eig(&a, &m)?;
    let f = build_rhs(cfg, &space, &m, &eig)?;
    let truth = TruthBasis::new(eig, &m, &f)?;

    let interval = match cfg.bounds {
        BoundsSpec::Auto { safety } => estimate_spectral_bounds(&m, &a, safety)?,
        BoundsSpec::Manual {
            lambda_lo_sq,
            lambda_hi_sq,
        } => SpectralInterval::new(lambda_lo_sq, lambda_hi_sq)?,
    };
    let kappa = interval.kappa();
    let c_star = decay_rate_c_star(kappa)?;
    let load_norm = m.quadratic_form(&f.view()).sqrt();

    let truth_norms: Vec<f64> = cfg
        .s_list
        .iter()
        .map(|&s| truth.dual_norm(s))
        .collect::<Result<_, _>>()?;
    let truth_solutions: Vec<DofVector> = cfg
        .s_list
        .iter()
        .map(|&s| truth.solve(s))
        .collect::<Result<_, _>>()?;

    let build_opts = BuildOptions {
        solve: SolveOptions {
            rel_tol: cfg.solver_rel_tol,
            ..Default::default()
        },
        drop_tol: cfg.drop_tol,
        parallel: !serial,
    };

    let h = mesh.h();
    let per_r = |r: usize| -> Result<Vec<StudyRow>, StudyError> {
        let started = Instant::now();
        let reduced = build_reduced_space(&m, &a, &f, r, &interval, &build_opts)?;
        let t_offline_ms = if serial {
            0.0
        } else {
            started.elapsed().as_secs_f64() * 1e3
        };
        let mut rows = Vec::with_capacity(cfg.s_list.len());
        for (si, &s) in cfg.s_list.iter().enumerate() {
            let online = Instant::now();
            let dual = reduced.dual_norm(s)?;
            let extrap = reduced.extrap_norm(s)?;
            let t_online_us = if serial {
                0.0
            } else {
                online.elapsed().as_secs_f64() * 1e6
            };
            let du = reduced.dual_solve(s)?;
            let eu = reduced.extrap_solve(s)?;
            let dd = &du - &truth_solutions[si];
            let ee = &eu - &truth_solutions[si];
            rows.push(StudyRow {
                r,
                s,
                h,
                n_dofs,
                r_effective: reduced.effective_dim(),
                e_star: dual - truth_norms[si],
                e: (extrap - truth_norms[si]).abs(),
                e_star_solution: m.quadratic_form(&dd.view()).sqrt(),
                e_solution: m.quadratic_form(&ee.view()).sqrt(),
                kappa,
                c_star,
                t_offline_ms,
                t_online_us,
            });
        }
        Ok(rows)
    };

    let r_values: Vec<usize> = (0..=cfg.r_max).collect();
    let nested: Vec<Vec<StudyRow>> = if serial {
        r_values
            .iter()
            .map(|&r| per_r(r))
            .collect::<Result<_, _>>()?
    } else {
        r_values
            .par_iter()
            .map(|&r| per_r(r))
            .collect::<Result<_, _>>()?
    };
    let rows: Vec<StudyRow> = nested.into_iter().flatten().collect();

    // dual^2 - truth^2 = e_star (e_star + 2 truth) must stay above
    // -1e-12 ||f||_0^2 on every row.
    let one_sided_violations = rows
        .iter()
        .filter(|row| {
            let tn = truth_norm_for(&truth_norms, cfg, row);
            row.e_star * (row.e_star + 2.0 * tn) < -1e-12 * load_norm * load_norm
        })
        .count();

    let fits = fit_rates(&rows, &cfg.s_list);
    Ok(StudyOutput {
        config: cfg.clone(),
        n_dofs,
        h,
        kappa,
        c_star,
        load_norm,
        rows,
        fits,
        one_sided_violations,
    })
}

fn truth_norm_for(truth_norms: &[f64], cfg: &ExperimentConfig, row: &StudyRow) -> f64 {
    cfg.s_list
        .iter()
        .position(|&s| s == row.s)
        .map(|i| truth_norms[i])
        .unwrap_or(0.0)
}

fn fit_rates(rows: &[StudyRow], s_list: &[f64]) -> Vec<RateFit> {
    let mut fits = Vec::new();
    for &s in s_list {
        for metric in Metric::ALL {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|row| row.s == s && row.r >= 1)
                .filter_map(|row| {
                    let v = metric.pick(row);
                    (FIT_WINDOW.0..=FIT_WINDOW.1)
                        .contains(&v)
                        .then(|| (row.r as f64, v.ln()))
                })
                .collect();
            let slope = (pts.len() >= 2).then(|| least_squares_slope(&pts));
            fits.push(RateFit {
                s,
                metric,
                slope,
                points: pts.len(),
            });
        }
    }
    fits
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[derive(Debug)]
pub struct SweepOutput {
    pub studies: Vec<StudyOutput>,
}

impl SweepOutput {
    /// Summary table: one row per (n, s) with all four fitted rates.
    pub fn summary_csv(&self) -> String {
        let mut out =
            String::from("n,h,N,kappa,c_star_predicted,s,slope_e_star,slope_e,slope_E_star,slope_E\n");
        for study in &self.studies {
            for &s in &study.config.s_list {
                let cell = |m: Metric| {
                    study
                        .fitted_slope(s, m)
                        .map(|v| format!("{v:.16e}"))
                        .unwrap_or_default()
                };
                out.push_str(&format!(
                    "{},{:.16e},{},{:.16e},{:.16e},{},{},{},{},{}\n",
                    study.config.n,
                    study.h,
                    study.n_dofs,
                    study.kappa,
                    study.c_star,
                    s,
                    cell(Metric::EStar),
                    cell(Metric::E),
                    cell(Metric::EStarSolution),
                    cell(Metric::ESolution),
                ));
            }
        }
        out
    }
}

/// One study per mesh resolution; each study is independent of sweep order.
pub fn run_mesh_sweep(
    cfg: &ExperimentConfig,
    n_list: &[usize],
    serial: bool,
) -> Result<SweepOutput, StudyError> {
    let mut studies = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let mut local = cfg.clone();
        local.n = n;
        studies.push(run_convergence_study(&local, serial)?);
    }
    Ok(SweepOutput { studies })
}
