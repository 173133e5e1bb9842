//! Exact optimal transport between integral histograms, and the
//! (indefinite) pseudo-kernel `exp(-d_M(r, c))` built from it.

use crate::error::Result;
use crate::histogram::{check_dim, check_mass, ContingencyTable, Histogram};
use crate::northwest::nw_table;
use crate::polytope::{enumerate_tables, EnumerationBudget};
use crate::weights::WeightSpec;

/// An integral optimal plan and its cost `⟨X, M⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportSolution {
    pub plan: ContingencyTable,
    pub cost: f64,
}

/// `m_ij + m_{i+1,j+1} <= m_{i,j+1} + m_{i+1,j}` for every adjacent 2×2 block.
///
/// Adjacent blocks imply the inequality for all `i < k`, `j < l`.
pub fn monge_check(w: &WeightSpec) -> bool {
    let d = w.dim();
    (0..d.saturating_sub(1)).all(|i| {
        (0..d - 1).all(|j| {
            w.cost_at(i, j) + w.cost_at(i + 1, j + 1) <= w.cost_at(i, j + 1) + w.cost_at(i + 1, j)
        })
    })
}

/// `d_M(r, c)` with an integral minimizer.
///
/// Monge costs take the Northwestern corner table directly; anything else is
/// minimized over the full enumeration, keeping the first optimum found.
pub fn ot_cost(
    r: &Histogram,
    c: &Histogram,
    w: &WeightSpec,
    budget: EnumerationBudget,
) -> Result<TransportSolution> {
    check_mass(r, c)?;
    check_dim(r.dim(), w.dim())?;
    if monge_check(w) {
        let plan = nw_table(r, c)?;
        let cost = plan.inner_product(w.cost());
        return Ok(TransportSolution { plan, cost });
    }
    brute_force_ot(r, c, w, budget)
}

/// Minimum of `⟨X, M⟩` over every table of `𝕌(r, c)`, ignoring Monge structure.
pub fn brute_force_ot(
    r: &Histogram,
    c: &Histogram,
    w: &WeightSpec,
    budget: EnumerationBudget,
) -> Result<TransportSolution> {
    check_dim(r.dim(), w.dim())?;
    let mut best: Option<TransportSolution> = None;
    for x in enumerate_tables(r, c, budget)? {
        let plan = x?;
        let cost = plan.inner_product(w.cost());
        if best.as_ref().is_none_or(|b| cost < b.cost) {
            best = Some(TransportSolution { plan, cost });
        }
    }
    Ok(best.expect("the polytope of equal-mass histograms is never empty"))
}

/// `exp(-d_M(r, c))`. Not positive definite in general.
pub fn pseudo_kernel(
    r: &Histogram,
    c: &Histogram,
    w: &WeightSpec,
    budget: EnumerationBudget,
) -> Result<f64> {
    Ok((-ot_cost(r, c, w, budget)?.cost).exp())
}
