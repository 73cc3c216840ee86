//! Configuration-driven experiments: run a scheme over a grid setup, collect
//! one row per eigenvalue, estimate convergence orders and compare against
//! the published reference tables.

mod config;
mod rates;
mod reference;
mod table;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{build_structured_mesh, refine_levels, DomainSpec, TriMesh};
use crate::solvers::{scheme1_multi, scheme2_multi, scheme3_multi, solve_direct, SchemeKind, SchemeResult};

pub use config::{ExperimentConfig, OutputFormat};
pub use rates::{convergence_rates, direct_sweep, RateReport};
pub use reference::{reproduce_table, Comparison, Scale, TableReport, DEFAULT_TOL, STRICT_TOL};
pub use table::{emit, ResultRow, ResultTable, CSV_HEADER};

/// Runs one experiment. Errors carry a description of the configuration.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultTable> {
    Ok(run_detailed(config)?.0)
}

/// [`run_experiment`] that also returns the full scheme results; these are
/// empty for direct solves.
pub fn run_detailed(config: &ExperimentConfig) -> Result<(ResultTable, Vec<SchemeResult>)> {
    config.validate()?;
    run(config).map_err(|e| e.context(describe(config)))
}

fn run(cfg: &ExperimentConfig) -> Result<(ResultTable, Vec<SchemeResult>)> {
    let coeff = cfg.coefficients()?;
    let opts = cfg.solver_options();
    let domain = DomainSpec::new(cfg.domain);
    let coarse = Arc::new(build_structured_mesh(domain, cfg.coarse)?);
    let indices = cfg.indices();
    let results = match cfg.scheme {
        SchemeKind::Direct => {
            let top = indices.iter().copied().max().unwrap_or(1).max(cfg.count);
            let sol = solve_direct(&coarse, &coeff, top, &opts)?;
            let rows = indices
                .iter()
                .map(|&j| {
                    Ok(ResultRow {
                        lambda_re: Some(sol.pair(j)?.lambda.re),
                        lambda_im: Some(sol.pair(j)?.lambda.im),
                        t_step1: sol.seconds,
                        t_total: sol.seconds,
                        ..blank_row(cfg, coarse.node_count(), j)
                    })
                })
                .collect::<Result<_>>()?;
            return Ok((ResultTable { rows }, Vec::new()));
        }
        SchemeKind::TwoGrid1 | SchemeKind::TwoGrid2 => {
            let fine = descendant(&coarse, cfg.coarse, cfg.fine.expect("validated"))?;
            if cfg.scheme == SchemeKind::TwoGrid1 {
                scheme1_multi(&coarse, &fine, &coeff, &indices, &opts)?
            } else {
                scheme2_multi(&coarse, &fine, &coeff, &indices, &opts)?
            }
        }
        SchemeKind::Local3 => {
            let meso = descendant(&coarse, cfg.coarse, cfg.meso.expect("validated"))?;
            let region = domain
                .default_local_region()
                .ok_or_else(|| Error::invalid("domain has no local region"))?;
            scheme3_multi(&coarse, &meso, &region, cfg.local_levels, &coeff, &indices, &opts)?
        }
    };
    let rows = results.iter().map(|r| scheme_row(cfg, &coarse, r)).collect();
    Ok((ResultTable { rows }, results))
}

/// Mesh `fine` intervals per side obtained by refining `coarse`, so that coarse
/// functions can be interpolated onto it.
fn descendant(coarse: &Arc<TriMesh>, n_coarse: usize, n_fine: usize) -> Result<Arc<TriMesh>> {
    let steps = config::refinement_steps(n_coarse, n_fine)?;
    Ok(refine_levels(coarse, steps)?.pop().expect("at least one refinement"))
}

fn blank_row(cfg: &ExperimentConfig, dof_coarse: usize, j: usize) -> ResultRow {
    let (n_fine, levels) = match cfg.scheme {
        SchemeKind::Direct => (None, None),
        SchemeKind::TwoGrid1 | SchemeKind::TwoGrid2 => (cfg.fine, None),
        SchemeKind::Local3 => (cfg.meso, Some(cfg.local_levels)),
    };
    ResultRow {
        domain: cfg.domain.name().to_string(),
        scheme: cfg.scheme.name().to_string(),
        n_coarse: cfg.coarse,
        n_fine,
        levels,
        dof_coarse,
        dof_fine: None,
        dof_local: None,
        j,
        lambda_re: None,
        lambda_im: None,
        t_step1: 0.0,
        t_step2: 0.0,
        t_step3: 0.0,
        t_total: 0.0,
        note: None,
    }
}

fn scheme_row(cfg: &ExperimentConfig, coarse: &TriMesh, r: &SchemeResult) -> ResultRow {
    let lambda = r.lambda();
    ResultRow {
        dof_fine: r.dof_fine,
        dof_local: r.dof_local,
        lambda_re: Some(lambda.re),
        lambda_im: Some(lambda.im),
        t_step1: r.times.step1,
        t_step2: r.times.step2,
        t_step3: r.times.step3,
        t_total: r.times.total(),
        ..blank_row(cfg, coarse.node_count(), r.index)
    }
}

/// Row recording a configuration whose computation could not proceed.
pub(crate) fn failed_row(cfg: &ExperimentConfig, j: usize, err: &Error) -> ResultRow {
    ResultRow {
        note: Some(err.to_string()),
        ..blank_row(cfg, 0, j)
    }
}

fn describe(cfg: &ExperimentConfig) -> String {
    let mut s = format!("{} on {} with N_H={}", cfg.scheme, cfg.domain, cfg.coarse);
    if let Some(f) = cfg
        .fine
        .filter(|_| matches!(cfg.scheme, SchemeKind::TwoGrid1 | SchemeKind::TwoGrid2))
    {
        s.push_str(&format!(", N_w={f}"));
    }
    if cfg.scheme == SchemeKind::Local3 {
        s.push_str(&format!(", N_w={}, levels={}", cfg.meso.unwrap_or(0), cfg.local_levels));
    }
    s.push_str(&format!(", n={}", cfg.n()));
    s
}
