//! Experiment execution: multi-instance solves with trace/aggregate CSV
//! output, the stepsize grid-search protocol, certificate runs, and problem
//! snapshots.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use exgrad::solvers::certify::{
    certify_geg2, certify_geg_ne, certify_gfbfs2, certify_gr2, certify_rfbs2, CertifyReport,
};
use exgrad::solvers::{fmt17, run, EtaChoice, SolverFamily, StopStatus, Trace};
use exgrad::stepsizes::check_interval_lemmas;
use exgrad::{DenseMatrix, Point};

use crate::config::{
    build_problem, reduce_problem, AlgoSpec, AxisMode, BuiltProblem, ExperimentConfig, GridScale,
    Snapshot,
};

/// Marker error: every stepsize candidate diverged (exit code 4).
#[derive(Debug)]
pub struct AllDiverged(pub String);

impl fmt::Display for AllDiverged {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "all stepsize candidates diverged for {}", self.0)
    }
}

impl std::error::Error for AllDiverged {}

fn instance(cfg: &ExperimentConfig, seed: u64, for_ne: bool) -> Result<BuiltProblem> {
    let problem = build_problem(&cfg.problem, seed, cfg.x0_constant)?;
    match (cfg.reduction_lambda, for_ne) {
        (Some(lambda), true) => reduce_problem(problem, lambda),
        _ => Ok(problem),
    }
}

fn file_label(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '+' || c == '-' { c } else { '-' })
        .collect()
}

pub struct AlgoOutcome {
    pub label: String,
    pub statuses: Vec<StopStatus>,
    pub mean_final_rel: f64,
    pub traces: Vec<Trace>,
}

/// Runs every (algorithm, instance) pair, writing one trace CSV per run and
/// one aggregate CSV per algorithm.
pub fn cmd_solve(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Vec<AlgoOutcome>> {
    std::fs::create_dir_all(out_dir)?;
    let mut outcomes = Vec::new();
    for algo in &cfg.algorithms {
        outcomes.push(solve_algorithm(cfg, algo, out_dir, None)?);
    }
    Ok(outcomes)
}

/// As [`cmd_solve`], but grid-tunes each algorithm's stepsize first (the
/// benchmark protocol: search, then run at the winner).
pub fn cmd_solve_tuned(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Vec<AlgoOutcome>> {
    std::fs::create_dir_all(out_dir)?;
    let mut outcomes = Vec::new();
    for algo in &cfg.algorithms {
        let table = grid_for_algorithm(cfg, algo, None)?;
        let winner = table
            .winner()
            .ok_or_else(|| anyhow::Error::new(AllDiverged(algo.label.clone())))?;
        outcomes.push(solve_algorithm(cfg, algo, out_dir, Some(winner))?);
    }
    Ok(outcomes)
}

fn solve_algorithm(
    cfg: &ExperimentConfig,
    algo: &AlgoSpec,
    out_dir: &Path,
    eta_override: Option<f64>,
) -> Result<AlgoOutcome> {
    let mut solver_cfg = algo.solver_config(cfg)?;
    if let Some(eta) = eta_override {
        solver_cfg.eta = EtaChoice::Fixed(eta);
    }
    let for_ne = !solver_cfg.family.needs_resolvent();
    let mut traces = Vec::new();
    let mut statuses = Vec::new();
    for i in 0..cfg.instances {
        let problem = instance(cfg, cfg.seed_base + i as u64, for_ne)?;
        let out = run(
            &solver_cfg,
            &problem.forward,
            problem.resolvent.as_ref(),
            &problem.x0,
            problem.x_star.as_ref(),
        )?;
        let path = out_dir.join(format!("{}_inst{}.csv", file_label(&algo.label), i));
        out.trace.write_csv_file(&path)?;
        statuses.push(out.status);
        traces.push(out.trace);
    }
    let mean_path = out_dir.join(format!("{}_mean.csv", file_label(&algo.label)));
    let mean_final_rel = write_aggregate(&traces, cfg.mode, &mean_path)?;
    Ok(AlgoOutcome {
        label: algo.label.clone(),
        statuses,
        mean_final_rel,
        traces,
    })
}

/// Aggregate CSV `k,mean_rel_residual[,mean_fevals]`: row r averages the
/// per-instance values at row r, summed in instance order. Returns the final
/// row's mean relative residual.
fn write_aggregate(traces: &[Trace], mode: AxisMode, path: &Path) -> Result<f64> {
    let rows = traces.iter().map(|t| t.records.len()).min().unwrap_or(0);
    let n = traces.len() as f64;
    let mut out = String::new();
    match mode {
        AxisMode::Iterations => out.push_str("k,mean_rel_residual\n"),
        AxisMode::Fevals => out.push_str("k,mean_rel_residual,mean_fevals\n"),
    }
    let mut last_mean = f64::NAN;
    for r in 0..rows {
        let k = traces[0].records[r].k;
        let mut sum = 0.0;
        let mut fevals = 0.0;
        for t in traces {
            sum += t.records[r].rel_residual;
            fevals += t.records[r].fevals as f64;
        }
        last_mean = sum / n;
        match mode {
            AxisMode::Iterations => {
                out.push_str(&format!("{k},{}\n", fmt17(last_mean)));
            }
            AxisMode::Fevals => {
                out.push_str(&format!("{k},{},{}\n", fmt17(last_mean), fmt17(fevals / n)));
            }
        }
    }
    std::fs::write(path, out)?;
    Ok(last_mean)
}

#[derive(Debug, Clone, Copy)]
pub struct GridRow {
    pub eta: f64,
    pub final_rel: f64,
    pub status: StopStatus,
}

#[derive(Debug, Clone)]
pub struct GridTable {
    pub label: String,
    pub rows: Vec<GridRow>,
}

impl GridTable {
    /// Best candidate by final relative residual among non-diverged rows;
    /// ties break toward the smaller stepsize.
    pub fn winner(&self) -> Option<f64> {
        let mut best: Option<GridRow> = None;
        let mut sorted = self.rows.clone();
        sorted.sort_by(|a, b| a.eta.partial_cmp(&b.eta).unwrap());
        for row in sorted {
            if row.status == StopStatus::Diverged || !row.final_rel.is_finite() {
                continue;
            }
            if best.map_or(true, |b| row.final_rel < b.final_rel) {
                best = Some(row);
            }
        }
        best.map(|b| b.eta)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("eta,final_rel_residual,status\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{}\n",
                fmt17(row.eta),
                fmt17(row.final_rel),
                row.status.as_str()
            ));
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

fn grid_candidates(
    cfg: &ExperimentConfig,
    algo: &AlgoSpec,
    override_etas: Option<&[f64]>,
    lipschitz: Option<f64>,
) -> Result<Vec<f64>> {
    // Command-line candidates are absolute stepsizes; the config grid is
    // interpreted per eta_grid_scale.
    if let Some(etas) = override_etas {
        if etas.is_empty() {
            bail!("empty stepsize grid for {:?}", algo.label);
        }
        return Ok(etas.to_vec());
    }
    let raw: Vec<f64> = if let Some(etas) = &algo.eta_grid {
        etas.clone()
    } else if let Some(etas) = &cfg.eta_grid {
        etas.clone()
    } else {
        bail!("no stepsize grid for {:?} (set eta_grid)", algo.label);
    };
    if raw.is_empty() {
        bail!("empty stepsize grid for {:?}", algo.label);
    }
    match cfg.eta_grid_scale {
        GridScale::Absolute => Ok(raw),
        GridScale::InverseLipschitz => {
            let l = lipschitz.ok_or_else(|| {
                anyhow::anyhow!(
                    "grid scale inverse-lipschitz needs a Lipschitz estimate for {:?}",
                    algo.label
                )
            })?;
            Ok(raw.into_iter().map(|v| v / l).collect())
        }
    }
}

/// Runs the tuning protocol for one algorithm: each candidate stepsize for a
/// reduced budget on the first instance.
pub fn grid_for_algorithm(
    cfg: &ExperimentConfig,
    algo: &AlgoSpec,
    override_etas: Option<&[f64]>,
) -> Result<GridTable> {
    let mut solver_cfg = algo.solver_config(cfg)?;
    solver_cfg.max_iters = cfg.grid_iters;
    let for_ne = !solver_cfg.family.needs_resolvent();
    let problem = instance(cfg, cfg.seed_base, for_ne)?;
    let candidates = grid_candidates(cfg, algo, override_etas, problem.forward.lipschitz())?;
    let mut rows = Vec::new();
    for eta in candidates {
        solver_cfg.eta = EtaChoice::Fixed(eta);
        let out = run(
            &solver_cfg,
            &problem.forward,
            problem.resolvent.as_ref(),
            &problem.x0,
            None,
        )?;
        rows.push(GridRow {
            eta,
            final_rel: out.trace.final_record().rel_residual,
            status: out.status,
        });
    }
    Ok(GridTable {
        label: algo.label.clone(),
        rows,
    })
}

pub fn cmd_grid(
    cfg: &ExperimentConfig,
    override_etas: Option<&[f64]>,
    out_dir: &Path,
) -> Result<Vec<GridTable>> {
    std::fs::create_dir_all(out_dir)?;
    let mut tables = Vec::new();
    for algo in &cfg.algorithms {
        let table = grid_for_algorithm(cfg, algo, override_etas)?;
        table.write_csv(&out_dir.join(format!("grid_{}.csv", file_label(&algo.label))))?;
        tables.push(table);
    }
    if tables.iter().all(|t| t.winner().is_none()) {
        bail!(AllDiverged("every algorithm".into()));
    }
    Ok(tables)
}

/// Certificate tolerances: equation checks at 1e-9, inclusion checks at 1e-8
/// (matching the acceptance thresholds).
const NE_CERT_TOL: f64 = 1e-9;
const NI_CERT_TOL: f64 = 1e-8;

pub struct CertifyOutcome {
    pub label: String,
    pub report: CertifyReport,
}

/// Runs the Lyapunov certificates for every algorithm on a known-solution
/// instance, plus the stepsize interval lemma checks.
pub fn cmd_certify(cfg: &ExperimentConfig, iters: usize) -> Result<(Vec<CertifyOutcome>, bool)> {
    let mut outcomes = Vec::new();
    let mut all_passed = true;

    let lemmas = check_interval_lemmas(1000, cfg.seed_base);
    let lemma_line = match &lemmas {
        Ok(report) => format!(
            "PASS: interval-lemmas ({} trials, {} intersections, cases a/b/c {}/{}/{})",
            report.trials, report.intersection_pass, report.case_a, report.case_b, report.case_c
        ),
        Err(e) => {
            all_passed = false;
            format!("FAIL: interval-lemmas ({e})")
        }
    };
    println!("{lemma_line}");

    for algo in &cfg.algorithms {
        let solver_cfg = algo.solver_config(cfg)?;
        let for_ne = !solver_cfg.family.needs_resolvent();
        let problem = instance(cfg, cfg.seed_base, for_ne)?;
        let x_star = match &problem.x_star {
            Some(x) => x.clone(),
            None => bail!(
                "certify requires a known solution (known-solution spec or unconstrained \
                 monotone quadratic with with_solution)"
            ),
        };
        let eta = solver_cfg.resolve_eta(&problem.forward)?;
        let report = match run_certificate(cfg, algo, &solver_cfg, &problem, &x_star, eta, iters) {
            Ok(report) => report,
            Err(e) => {
                // An inadmissible stepsize or a violated inequality is a
                // certificate failure, not a harness error.
                println!("{}: FAIL: {e}", algo.label);
                all_passed = false;
                continue;
            }
        };
        if let Some(report) = report {
            for check in &report.checks {
                println!("{}: {}", algo.label, check.line());
            }
            all_passed &= report.passed();
            outcomes.push(CertifyOutcome {
                label: algo.label.clone(),
                report,
            });
        } else {
            println!("SKIP: {} (no certificate for the baselines)", algo.label);
        }
    }
    Ok((outcomes, all_passed))
}

fn run_certificate(
    solver_cfg: &exgrad::solvers::SolverConfig,
    problem: &BuiltProblem,
    x_star: &Point,
    eta: f64,
    iters: usize,
) -> Result<Option<CertifyReport>> {
    let report = match solver_cfg.family {
        SolverFamily::Geg => certify_geg_ne(
            &problem.forward,
            &problem.x0,
            x_star,
            solver_cfg.direction,
            solver_cfg.beta,
            eta,
            iters,
            solver_cfg.rho,
            NE_CERT_TOL,
        )?,
        SolverFamily::Geg2 => certify_geg2(
            &problem.forward,
            problem.resolvent.as_ref().unwrap(),
            &problem.x0,
            x_star,
            solver_cfg.direction,
            solver_cfg.beta,
            eta,
            iters,
            NI_CERT_TOL,
        )?,
        SolverFamily::Gfbfs2 => certify_gfbfs2(
            &problem.forward,
            problem.resolvent.as_ref().unwrap(),
            &problem.x0,
            x_star,
            solver_cfg.direction,
            solver_cfg.beta,
            eta,
            iters,
            NI_CERT_TOL,
        )?,
        SolverFamily::Rfbs2 => certify_rfbs2(
            &problem.forward,
            problem.resolvent.as_ref().unwrap(),
            &problem.x0,
            x_star,
            eta,
            iters,
            NI_CERT_TOL,
        )?,
        SolverFamily::Gr2 => certify_gr2(
            &problem.forward,
            problem.resolvent.as_ref().unwrap(),
            &problem.x0,
            x_star,
            eta,
            solver_cfg.tau.unwrap(),
            iters,
            NI_CERT_TOL,
        )?,
        SolverFamily::Forward | SolverFamily::ForwardBackward => return Ok(None),
    };
    Ok(Some(report))
}

fn write_matrix_csv(matrix: &DenseMatrix, path: &Path) -> Result<()> {
    let mut out = String::new();
    for i in 0..matrix.rows() {
        let row: Vec<String> = matrix.row(i).iter().map(|v| fmt17(*v)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn write_vector_csv(v: &Point, path: &Path) -> Result<()> {
    let mut out = String::new();
    for x in v.as_slice() {
        out.push_str(&fmt17(*x));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Emits the problem data of the first instance as CSV matrices.
pub fn cmd_gen(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let problem = build_problem(&cfg.problem, cfg.seed_base, cfg.x0_constant)
        .context("problem generation failed")?;
    let mut written = Vec::new();
    match &problem.snapshot {
        Snapshot::Affine { matrix, offset } => {
            let m_path = out_dir.join("matrix.csv");
            write_matrix_csv(matrix, &m_path)?;
            let f_path = out_dir.join("offset.csv");
            write_vector_csv(offset, &f_path)?;
            written.push(m_path);
            written.push(f_path);
        }
        Snapshot::Payoff(matrix) => {
            let path = out_dir.join("payoff.csv");
            write_matrix_csv(matrix, &path)?;
            written.push(path);
        }
        Snapshot::Logit { rows, labels } => {
            let f_path = out_dir.join("features.csv");
            let mut out = String::new();
            for row in rows {
                let cells: Vec<String> = row.iter().map(|v| fmt17(*v)).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            std::fs::write(&f_path, out)?;
            let l_path = out_dir.join("labels.csv");
            let labels_point = Point::new(labels.clone());
            write_vector_csv(&labels_point, &l_path)?;
            written.push(f_path);
            written.push(l_path);
        }
    }
    Ok(written)
}
