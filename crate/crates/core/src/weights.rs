//! Paired cost / weight matrices with `k_ij = exp(-m_ij)`.

use crate::error::{Error, Result};

/// Which side of the pair was supplied by the caller; the other is derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightOrigin {
    Cost,
    Weight,
}

impl WeightOrigin {
    pub fn as_str(self) -> &'static str {
        match self {
            WeightOrigin::Cost => "cost",
            WeightOrigin::Weight => "weight",
        }
    }
}

/// A `d × d` cost matrix `M` and weight matrix `K`, stored row-major.
///
/// A zero weight corresponds to an infinite cost.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpec {
    d: usize,
    cost: Vec<f64>,
    weight: Vec<f64>,
    origin: WeightOrigin,
}

impl WeightSpec {
    pub fn from_cost(d: usize, cost: Vec<f64>) -> Result<Self> {
        check_shape(d, cost.len())?;
        if let Some(m) = cost.iter().find(|m| m.is_nan() || **m == f64::NEG_INFINITY) {
            return Err(Error::InvalidWeights(format!(
                "cost entry {m} is not allowed"
            )));
        }
        let weight = cost.iter().map(|&m| (-m).exp()).collect();
        Ok(Self {
            d,
            cost,
            weight,
            origin: WeightOrigin::Cost,
        })
    }

    pub fn from_weight(d: usize, weight: Vec<f64>) -> Result<Self> {
        check_shape(d, weight.len())?;
        if let Some(k) = weight.iter().find(|k| !k.is_finite() || **k < 0.0) {
            return Err(Error::InvalidWeights(format!(
                "weight entry {k} must be finite and nonnegative"
            )));
        }
        let cost = weight.iter().map(|&k| -k.ln()).collect();
        Ok(Self {
            d,
            cost,
            weight,
            origin: WeightOrigin::Weight,
        })
    }

    pub fn from_cost_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let (d, flat) = flatten(rows)?;
        Self::from_cost(d, flat)
    }

    pub fn from_weight_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let (d, flat) = flatten(rows)?;
        Self::from_weight(d, flat)
    }

    /// The all-ones weight matrix (all-zeros cost).
    pub fn ones(d: usize) -> Self {
        Self::from_weight(d, vec![1.0; d * d]).expect("valid shape")
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn origin(&self) -> WeightOrigin {
        self.origin
    }

    pub fn cost(&self) -> &[f64] {
        &self.cost
    }

    pub fn weight(&self) -> &[f64] {
        &self.weight
    }

    #[inline]
    pub fn cost_at(&self, i: usize, j: usize) -> f64 {
        self.cost[i * self.d + j]
    }

    #[inline]
    pub fn weight_at(&self, i: usize, j: usize) -> f64 {
        self.weight[i * self.d + j]
    }

    /// The supplied matrix, row by row.
    pub fn supplied_rows(&self) -> Vec<Vec<f64>> {
        let m = match self.origin {
            WeightOrigin::Cost => &self.cost,
            WeightOrigin::Weight => &self.weight,
        };
        m.chunks(self.d).map(<[f64]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Self {
        let d = self.d;
        let t = |v: &[f64]| {
            let mut out = vec![0.0; d * d];
            for i in 0..d {
                for j in 0..d {
                    out[j * d + i] = v[i * d + j];
                }
            }
            out
        };
        Self {
            d,
            cost: t(&self.cost),
            weight: t(&self.weight),
            origin: self.origin,
        }
    }

    /// Largest `|k_ij - k_ji|` relative to the largest `|k_ij|`.
    pub fn weight_asymmetry(&self) -> f64 {
        relative_asymmetry(&self.weight, self.d)
    }

    pub fn is_symmetric(&self) -> bool {
        self.weight_asymmetry() <= 1e-12
    }

    pub fn min_weight(&self) -> f64 {
        self.weight.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn relative_asymmetry(values: &[f64], n: usize) -> f64 {
    let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((values[i * n + j] - values[j * n + i]).abs());
        }
    }
    worst / scale
}

fn check_shape(d: usize, len: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidWeights("dimension must be at least 1".into()));
    }
    if len != d * d {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            found: len,
        });
    }
    Ok(())
}

fn flatten(rows: &[Vec<f64>]) -> Result<(usize, Vec<f64>)> {
    let d = rows.len();
    let mut flat = Vec::with_capacity(d * d);
    for row in rows {
        if row.len() != d {
            return Err(Error::InvalidWeights(format!(
                "expected a square matrix, found a row of length {} in a {d}-row matrix",
                row.len()
            )));
        }
        flat.extend_from_slice(row);
    }
    Ok((d, flat))
}
