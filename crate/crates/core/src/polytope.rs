//! Contingency tables with prescribed margins: enumeration, exact counting,
//! the weighted volume `T(r, c; K)`, the generating function `V(r, c; M)` and
//! the Fisher–Yates statistic.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::histogram::{check_dim, check_mass, ContingencyTable, Histogram};
use crate::numeric::{factorial_product, LogSumExp};
use crate::weights::WeightSpec;

/// Hard cap on the number of tables an enumeration may visit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBudget {
    max_tables: u64,
}

impl EnumerationBudget {
    pub const DEFAULT_MAX_TABLES: u64 = 10_000_000;

    pub fn new(max_tables: u64) -> Result<Self> {
        if max_tables == 0 {
            return Err(Error::InvalidHistogram(
                "enumeration budget must be positive".into(),
            ));
        }
        Ok(Self { max_tables })
    }

    pub fn max_tables(&self) -> u64 {
        self.max_tables
    }

    /// Fails if `count` tables would not fit in the budget.
    pub fn admit(&self, count: &BigUint) -> Result<()> {
        if *count > BigUint::from(self.max_tables) {
            return Err(Error::BudgetExceeded {
                limit: self.max_tables,
            });
        }
        Ok(())
    }
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self {
            max_tables: Self::DEFAULT_MAX_TABLES,
        }
    }
}

/// Stream over `𝕌(r, c)` in row-major lexicographic order.
///
/// Yields `Err(BudgetExceeded)` once, in place of table `max_tables + 1`,
/// and then stops.
#[derive(Debug, Clone)]
pub struct TableStream {
    d: usize,
    rows: Vec<u64>,
    cols: Vec<u64>,
    current: Vec<u64>,
    upper: Vec<u64>,
    free: Vec<usize>,
    pending: bool,
    yielded: u64,
    limit: u64,
    finished: bool,
}

impl TableStream {
    fn new(r: &Histogram, c: &Histogram, budget: EnumerationBudget) -> Self {
        let d = r.dim();
        let free = (0..d.saturating_sub(1))
            .flat_map(|i| (0..d - 1).map(move |j| i * d + j))
            .collect();
        let mut stream = Self {
            d,
            rows: r.counts().to_vec(),
            cols: c.counts().to_vec(),
            current: vec![0; d * d],
            upper: vec![0; d * d],
            free,
            pending: true,
            yielded: 0,
            limit: budget.max_tables(),
            finished: false,
        };
        stream.fill_from(0);
        stream
    }

    /// Number of tables yielded so far.
    pub fn yielded(&self) -> u64 {
        self.yielded
    }

    /// Resets every position at or after flat index `from` to its smallest
    /// feasible value given the prefix, filling forced positions.
    fn fill_from(&mut self, from: usize) {
        let d = self.d;
        if from >= d * d {
            return;
        }
        let (i0, j0) = (from / d, from % d);
        let mut colrem = self.cols.clone();
        for row in self.current[..i0 * d].chunks(d) {
            for (rem, x) in colrem.iter_mut().zip(row) {
                *rem -= x;
            }
        }
        let mut rowrem = self.rows[i0];
        for (rem, x) in colrem.iter_mut().zip(&self.current[i0 * d..i0 * d + j0]) {
            rowrem -= x;
            *rem -= x;
        }
        let mut suffix = vec![0u64; d];
        for i in i0..d {
            let start = if i == i0 { j0 } else { 0 };
            if i != i0 {
                rowrem = self.rows[i];
            }
            // capacity strictly right of each column, untouched in this row
            let mut acc = 0;
            for l in (start..d).rev() {
                suffix[l] = acc;
                acc += colrem[l];
            }
            for j in start..d {
                let p = i * d + j;
                let x = if i == d - 1 {
                    colrem[j]
                } else if j == d - 1 {
                    rowrem
                } else {
                    self.upper[p] = rowrem.min(colrem[j]);
                    rowrem.saturating_sub(suffix[j])
                };
                self.current[p] = x;
                rowrem -= x;
                colrem[j] -= x;
            }
        }
    }

    fn advance(&mut self) -> bool {
        for k in (0..self.free.len()).rev() {
            let p = self.free[k];
            if self.current[p] < self.upper[p] {
                self.current[p] += 1;
                self.fill_from(p + 1);
                return true;
            }
        }
        false
    }
}

impl Iterator for TableStream {
    type Item = Result<ContingencyTable>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.finished {
            return None;
        }
        if !self.pending && !self.advance() {
            self.finished = true;
            return None;
        }
        self.pending = false;
        if self.yielded == self.limit {
            self.finished = true;
            return Some(Err(Error::BudgetExceeded { limit: self.limit }));
        }
        self.yielded += 1;
        Some(Ok(ContingencyTable::from_entries_unchecked(
            self.d,
            self.current.clone(),
        )))
    }
}

/// Every element of `𝕌(r, c)` exactly once, row-major lexicographic.
pub fn enumerate_tables(
    r: &Histogram,
    c: &Histogram,
    budget: EnumerationBudget,
) -> Result<TableStream> {
    check_mass(r, c)?;
    Ok(TableStream::new(r, c, budget))
}

/// `|𝕌(r, c)|` by dynamic programming over rows, memoized on the multiset
/// of residual column sums.
pub fn count_tables(r: &Histogram, c: &Histogram) -> Result<BigUint> {
    check_mass(r, c)?;
    let rows: Vec<u64> = r.counts().iter().copied().filter(|&x| x > 0).collect();
    let mut memo = HashMap::new();
    Ok(count_rows(&rows, 0, residual_key(c.counts()), &mut memo))
}

type Memo = HashMap<(usize, Vec<u64>), BigUint>;

fn residual_key(cols: &[u64]) -> Vec<u64> {
    let mut key: Vec<u64> = cols.iter().copied().filter(|&x| x > 0).collect();
    key.sort_unstable();
    key
}

fn count_rows(rows: &[u64], i: usize, cols: Vec<u64>, memo: &mut Memo) -> BigUint {
    if i + 1 >= rows.len() {
        return BigUint::from(1u32);
    }
    if i + 2 == rows.len() {
        // the last row is forced: count bounded compositions of this row
        return bounded_compositions(rows[i], &cols);
    }
    let key = (i, cols);
    if let Some(v) = memo.get(&key) {
        return v.clone();
    }
    let cols = &key.1;
    let mut suffix = vec![0u64; cols.len() + 1];
    for l in (0..cols.len()).rev() {
        suffix[l] = suffix[l + 1] + cols[l];
    }
    let mut total = BigUint::zero();
    let mut next = cols.clone();
    compose_row(rows[i], cols, &suffix, 0, &mut next, &mut |residual| {
        total += count_rows(rows, i + 1, residual_key(residual), memo);
    });
    memo.insert(key, total.clone());
    total
}

/// `#{x : 0 <= x_j <= bound_j, Σ x_j = amount}` by inclusion–exclusion over
/// the violated upper bounds.
fn bounded_compositions(amount: u64, bounds: &[u64]) -> BigUint {
    let k = bounds.len();
    if k == 0 {
        return BigUint::from(u32::from(amount == 0));
    }
    let mut total = num_bigint::BigInt::zero();
    let mut stack: Vec<(usize, u64, bool)> = vec![(0, 0, false)];
    // depth-first over subsets, pruning once the excess exceeds the amount
    while let Some((j, excess, odd)) = stack.pop() {
        if j == k {
            let rest = amount - excess;
            let term = num_bigint::BigInt::from(binomial(rest + k as u64 - 1, k as u64 - 1));
            if odd {
                total -= term;
            } else {
                total += term;
            }
            continue;
        }
        stack.push((j + 1, excess, odd));
        let bumped = excess + bounds[j] + 1;
        if bumped <= amount {
            stack.push((j + 1, bumped, !odd));
        }
    }
    total.to_biguint().expect("a count is nonnegative")
}

fn binomial(n: u64, k: u64) -> BigUint {
    let k = k.min(n - k);
    (0..k).fold(BigUint::from(1u32), |acc, t| acc * (n - t) / (t + 1))
}

/// Visits every way of writing `amount` as a sum bounded by `cols`, passing
/// the residual columns to `visit`.
fn compose_row(
    amount: u64,
    cols: &[u64],
    suffix: &[u64],
    j: usize,
    residual: &mut Vec<u64>,
    visit: &mut dyn FnMut(&[u64]),
) {
    if j == cols.len() {
        if amount == 0 {
            visit(residual);
        }
        return;
    }
    let lo = amount.saturating_sub(suffix[j + 1]);
    let hi = amount.min(cols[j]);
    for x in lo..=hi {
        residual[j] = cols[j] - x;
        compose_row(amount - x, cols, suffix, j + 1, residual, visit);
    }
    residual[j] = cols[j];
}

/// Whether products of weights can be accumulated directly without
/// underflow concerns.
fn plain_regime(mass: u64, w: &WeightSpec) -> bool {
    mass <= 64 && w.min_weight() >= 1e-12
}

/// `Π k_ij^{x_ij}` with the convention `0^0 = 1`.
pub fn table_weight(x: &ContingencyTable, w: &WeightSpec) -> f64 {
    x.entries()
        .iter()
        .zip(w.weight())
        .filter(|(&n, _)| n > 0)
        .map(|(&n, &k)| k.powi(n as i32))
        .product()
}

/// `Σ x_ij log k_ij`, `-inf` when a positive entry meets a zero weight.
pub fn table_log_weight(x: &ContingencyTable, w: &WeightSpec) -> f64 {
    x.entries()
        .iter()
        .zip(w.weight())
        .filter(|(&n, _)| n > 0)
        .map(|(&n, &k)| n as f64 * k.ln())
        .sum()
}

fn admit(r: &Histogram, c: &Histogram, w: &WeightSpec, budget: EnumerationBudget) -> Result<()> {
    check_mass(r, c)?;
    check_dim(r.dim(), w.dim())?;
    budget.admit(&count_tables(r, c)?)
}

/// `T(r, c; K) = Σ_{X ∈ 𝕌(r,c)} Π k_ij^{x_ij}`.
///
/// Products are accumulated directly when `N <= 64` and every weight is at
/// least `1e-12`; otherwise each table contributes its log-weight to a
/// log-sum-exp accumulator.
pub fn weighted_volume(
    r: &Histogram,
    c: &Histogram,
    w: &WeightSpec,
    budget: EnumerationBudget,
) -> Result<f64> {
    admit(r, c, w, budget)?;
    let tables = enumerate_tables(r, c, budget)?;
    if plain_regime(r.mass(), w) {
        let mut total = 0.0;
        for x in tables {
            total += table_weight(&x?, w);
        }
        Ok(total)
    } else {
        let mut acc = LogSumExp::new();
        for x in tables {
            acc.push(table_log_weight(&x?, w));
        }
        Ok(acc.log_sum().exp())
    }
}

/// `V(r, c; M) = Σ_{X ∈ 𝕌(r,c)} exp(-⟨X, M⟩)`, computed from the cost side.
pub fn generating_function(
    r: &Histogram,
    c: &Histogram,
    w: &WeightSpec,
    budget: EnumerationBudget,
) -> Result<f64> {
    admit(r, c, w, budget)?;
    let mut total = 0.0;
    let mut acc = LogSumExp::new();
    for x in enumerate_tables(r, c, budget)? {
        let cost = x?.inner_product(w.cost());
        total += (-cost).exp();
        acc.push(-cost);
    }
    if total.is_normal() || acc.log_sum() == f64::NEG_INFINITY {
        Ok(total)
    } else {
        Ok(acc.log_sum().exp())
    }
}

/// Transport costs `⟨X, M⟩` of every table, in enumeration order.
pub fn table_costs(
    r: &Histogram,
    c: &Histogram,
    w: &WeightSpec,
    budget: EnumerationBudget,
) -> Result<Vec<f64>> {
    admit(r, c, w, budget)?;
    enumerate_tables(r, c, budget)?
        .map(|x| x.map(|x| x.inner_product(w.cost())))
        .collect()
}

/// The Fisher–Yates statistic `n(X) = Π r_i! Π c_j! / Π x_ij!`: the number
/// of permutations whose pattern is `X`.
///
/// # Panics
///
/// Panics if the division is inexact, which cannot happen for a table whose
/// margins are its own row and column sums.
pub fn fisher_yates(x: &ContingencyTable) -> BigUint {
    let numerator =
        factorial_product(x.row_sums().counts()) * factorial_product(x.col_sums().counts());
    let (q, rem) = numerator.div_rem(&factorial_product(x.entries()));
    assert!(rem.is_zero(), "inexact Fisher-Yates division for {x}");
    q
}

/// Converts a count to `f64`, saturating at infinity.
pub fn count_to_f64(n: &BigUint) -> f64 {
    n.to_f64().unwrap_or(f64::INFINITY)
}
