use std::sync::Arc;

use serde::Serialize;

use crate::assembly::CoefficientField;
use crate::error::{Error, Result};
use crate::mesh::{build_structured_mesh, DomainKind, DomainSpec};
use crate::solvers::{solve_direct, RateModel, SolverOptions};
use crate::C64;

/// Empirical convergence of an eigenvalue sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    /// Richardson extrapolation from the two finest values.
    pub reference: C64,
    /// Observed order between consecutive grids, coarsest pair first.
    pub orders: Vec<f64>,
    pub mean_order: f64,
}

/// Observed orders of `(spacing, λ)` values assuming `|λ_h − λ| ~ h^order`
/// for the extrapolated reference.
pub fn convergence_rates(values: &[(f64, C64)], order: f64) -> Result<RateReport> {
    if values.len() < 3 {
        return Err(Error::invalid(format!("need at least 3 grids, got {}", values.len())));
    }
    if !(order > 0.0) {
        return Err(Error::invalid("model order must be positive"));
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.0.total_cmp(&a.0));
    if v.windows(2).any(|w| !(w[1].0 > 0.0 && w[1].0 < w[0].0)) {
        return Err(Error::invalid("spacings must be positive and distinct"));
    }
    let [(hc, lc), (hf, lf)] = [v[v.len() - 2], v[v.len() - 1]];
    let gain = (hc / hf).powf(order);
    let reference = (lf * gain - lc) / (gain - 1.0);
    let orders: Vec<f64> = v
        .windows(2)
        .map(|w| ((w[0].1 - reference).norm() / (w[1].1 - reference).norm()).ln() / (w[0].0 / w[1].0).ln())
        .collect();
    let mean_order = orders.iter().sum::<f64>() / orders.len() as f64;
    Ok(RateReport {
        reference,
        orders,
        mean_order,
    })
}

/// Direct solves of eigenvalue `index` on each grid of `subdivs`, with the
/// domain's expected order used for the extrapolation.
pub fn direct_sweep(
    kind: DomainKind,
    coeff: &CoefficientField,
    index: usize,
    subdivs: &[usize],
    opts: &SolverOptions,
) -> Result<(Vec<(f64, C64)>, RateReport)> {
    let values = subdivs
        .iter()
        .map(|&n| {
            let mesh = Arc::new(build_structured_mesh(DomainSpec::new(kind), n)?);
            let sol = solve_direct(&mesh, coeff, index.max(4), opts)?;
            Ok((mesh.spacing(), sol.pair(index)?.lambda))
        })
        .collect::<Result<Vec<_>>>()?;
    let report = convergence_rates(&values, RateModel::for_domain(kind).eigenvalue_order())?;
    Ok((values, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manufactured_sequence_has_exact_order() {
        let values: Vec<(f64, C64)> = (0..5)
            .map(|i| {
                let h = 0.5f64.powi(i);
                (h, C64::new(1.0 + 0.3 * h * h, -0.2 * h * h))
            })
            .collect();
        let r = convergence_rates(&values, 2.0).unwrap();
        assert!((r.reference - C64::new(1.0, 0.0)).norm() < 1e-12);
        for o in &r.orders {
            assert!((o - 2.0).abs() < 1e-6, "{o}");
        }
        assert!((r.mean_order - 2.0).abs() < 1e-6);
    }

    #[test]
    fn too_few_entries() {
        let v = [(0.5, C64::new(1.0, 0.0)), (0.25, C64::new(1.1, 0.0))];
        assert!(convergence_rates(&v, 2.0).is_err());
    }
}
