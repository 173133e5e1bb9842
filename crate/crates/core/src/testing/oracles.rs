//! Brute-force oracles for the identities behind positive definiteness of
//! the weighted volume. They iterate over `S_N` explicitly and are meant for
//! tests only; nothing in the production paths calls them.
//!
//! Notation: `ρ` and `γ` are index sequences whose contents are `r` and `c`,
//! `X = χ(ρ; γ)` is their pattern, and
//!
//! ```text
//! k1(ρ, γ) = Π_t k_{ρ_t γ_t}
//! k2(ρ, γ) = Π_ij x_ij! / (Π_i r_i! · Π_j c_j!)
//! ```

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::histogram::{
    canonical_sequence, check_dim, check_mass, chi, Histogram, IndexSequence, Permutation,
};
use crate::numeric::{factorial, factorial_product};
use crate::psd::{dataset_hash, validate_dataset, GramMatrix, KernelId};
use crate::weights::WeightSpec;

/// Largest `N` for which `S_N` is iterated.
pub const MAX_PERMUTATION_MASS: usize = 8;

/// Largest `N` accepted by [`symmetrization_oracle`].
pub const MAX_SYMMETRIZATION_MASS: usize = 6;

/// A vector over `{0, 1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryVector(Vec<u8>);

impl BinaryVector {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidHistogram(format!(
                "binary entry {b} is not 0 or 1"
            )));
        }
        Ok(Self(bits))
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `⟨a_{1..t}, b_{1..t}⟩`.
    pub fn prefix_dot(&self, other: &BinaryVector, t: usize) -> u64 {
        self.0[..t]
            .iter()
            .zip(&other.0[..t])
            .map(|(&a, &b)| u64::from(a & b))
            .sum()
    }

    pub fn dot(&self, other: &BinaryVector) -> u64 {
        self.prefix_dot(other, self.len().min(other.len()))
    }
}

fn check_pair(rho: &IndexSequence, gamma: &IndexSequence) -> Result<()> {
    if rho.len() != gamma.len() {
        return Err(Error::LengthMismatch {
            left: rho.len(),
            right: gamma.len(),
        });
    }
    check_dim(rho.alphabet(), gamma.alphabet())
}

/// `Π_t k_{ρ_t γ_t}`, position by position.
pub fn k1(rho: &IndexSequence, gamma: &IndexSequence, w: &WeightSpec) -> Result<f64> {
    check_pair(rho, gamma)?;
    check_dim(rho.alphabet(), w.dim())?;
    Ok(rho
        .symbols()
        .iter()
        .zip(gamma.symbols())
        .map(|(&i, &j)| w.weight_at(i, j))
        .product())
}

/// `Π x_ij! / (Π r_i! Π c_j!)` exactly, the inverse Fisher–Yates statistic.
pub fn k2(rho: &IndexSequence, gamma: &IndexSequence) -> Result<BigRational> {
    check_pair(rho, gamma)?;
    let x = chi(rho, gamma)?;
    let numer = factorial_product(x.entries());
    let denom = factorial_product(x.row_sums().counts()) * factorial_product(x.col_sums().counts());
    Ok(BigRational::new(numer.into(), denom.into()))
}

/// `κ = k1 · k2`.
pub fn kappa(rho: &IndexSequence, gamma: &IndexSequence, w: &WeightSpec) -> Result<f64> {
    let k2 = k2(rho, gamma)?.to_f64().expect("finite ratio");
    Ok(k1(rho, gamma, w)? * k2)
}

/// `(⟨a, b⟩!, Π_{t=1}^{N-1} (a_{t+1} b_{t+1} ⟨a_{1..t}, b_{1..t}⟩ + 1))`.
pub fn factorial_kernel_expansion(
    a: &BinaryVector,
    b: &BinaryVector,
) -> Result<(BigUint, BigUint)> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let direct = factorial(a.dot(b));
    let product = (1..a.len()).fold(BigUint::one(), |acc, t| {
        let both = u64::from(a.bits()[t] & b.bits()[t]);
        acc * (both * a.prefix_dot(b, t) + 1)
    });
    Ok((direct, product))
}

/// `ρ^1, ..., ρ^d` with `ρ^i_t = 1` iff `ρ_t = i`.
pub fn indicator_vectors(rho: &IndexSequence) -> Vec<BinaryVector> {
    (0..rho.alphabet())
        .map(|i| BinaryVector(rho.symbols().iter().map(|&s| u8::from(s == i)).collect()))
        .collect()
}

/// `Π_ij ⟨ρ^i, γ^j⟩!`.
pub fn factorial_product_via_indicators(
    rho: &IndexSequence,
    gamma: &IndexSequence,
) -> Result<BigUint> {
    check_pair(rho, gamma)?;
    let (ri, gj) = (indicator_vectors(rho), indicator_vectors(gamma));
    Ok(ri
        .iter()
        .flat_map(|a| gj.iter().map(move |b| factorial(a.dot(b))))
        .product())
}

/// `Π_{t=1}^{N-1} (1 + Σ_ij ρ^i_{t+1} γ^j_{t+1} ⟨ρ^i_{1..t}, γ^j_{1..t}⟩)`.
pub fn factorial_product_via_recursion(
    rho: &IndexSequence,
    gamma: &IndexSequence,
) -> Result<BigUint> {
    check_pair(rho, gamma)?;
    let (ri, gj) = (indicator_vectors(rho), indicator_vectors(gamma));
    Ok((1..rho.len()).fold(BigUint::one(), |acc, t| {
        let s: u64 = ri
            .iter()
            .flat_map(|a| gj.iter().map(move |b| (a, b)))
            .map(|(a, b)| u64::from(a.bits()[t] & b.bits()[t]) * a.prefix_dot(b, t))
            .sum();
        acc * (1 + s)
    }))
}

/// `Π_i r_i! · Π_j c_j!`.
pub fn marginal_factorials(r: &Histogram, c: &Histogram) -> BigUint {
    factorial_product(r.counts()) * factorial_product(c.counts())
}

fn check_small(r: &Histogram, c: &Histogram, max: usize) -> Result<usize> {
    check_mass(r, c)?;
    let n = r.mass() as usize;
    if n > max {
        return Err(Error::TooLarge {
            what: "N",
            value: n,
            max,
        });
    }
    Ok(n)
}

/// Sums `f(ρ, γ_π)` over all `π ∈ S_N` in lexicographic order.
fn sum_over_symmetric_group(
    r: &Histogram,
    c: &Histogram,
    max: usize,
    mut f: impl FnMut(&IndexSequence, &IndexSequence) -> Result<f64>,
) -> Result<f64> {
    let n = check_small(r, c, max)?;
    let rho = canonical_sequence(r);
    let gamma = canonical_sequence(c);
    let mut pi = Permutation::identity(n);
    let mut total = 0.0;
    loop {
        total += f(&rho, &gamma.permuted(&pi)?)?;
        if !pi.next_lexicographic() {
            break;
        }
    }
    Ok(total)
}

/// `Σ_{π ∈ S_N} k1(ρ, γ_π) · Π x_ij!` with `X = χ(ρ; γ_π)`.
///
/// This equals `Π r_i! · Π c_j! · T(r, c; K)`: dividing by
/// [`marginal_factorials`] recovers the weighted volume. `N <= 8`.
pub fn permutation_sum_oracle(r: &Histogram, c: &Histogram, w: &WeightSpec) -> Result<f64> {
    check_dim(r.dim(), w.dim())?;
    sum_over_symmetric_group(r, c, MAX_PERMUTATION_MASS, |rho, gamma_pi| {
        let x = chi(rho, gamma_pi)?;
        let fact = factorial_product(x.entries())
            .to_f64()
            .expect("small factorials");
        Ok(k1(rho, gamma_pi, w)? * fact)
    })
}

/// `Σ_{π ∈ S_N} κ(ρ, γ_π)` with `κ = k1 · k2`; equals `T(r, c; K)`. `N <= 8`.
pub fn normalized_permutation_sum(r: &Histogram, c: &Histogram, w: &WeightSpec) -> Result<f64> {
    check_dim(r.dim(), w.dim())?;
    sum_over_symmetric_group(r, c, MAX_PERMUTATION_MASS, |rho, gamma_pi| {
        kappa(rho, gamma_pi, w)
    })
}

/// Gram matrix of `(ρ, γ) ↦ Σ_{π ∈ S_N} κ(ρ, γ_π)` over a histogram set with
/// common mass `N <= 6`.
pub fn symmetrization_oracle(histograms: &[Histogram], w: &WeightSpec) -> Result<GramMatrix> {
    validate_dataset(histograms)?;
    let m = histograms.len();
    let mut values = vec![0.0; m * m];
    for p in 0..m {
        for q in p..m {
            let v = sum_over_symmetric_group(
                &histograms[p],
                &histograms[q],
                MAX_SYMMETRIZATION_MASS,
                |rho, gamma_pi| kappa(rho, gamma_pi, w),
            )?;
            values[p * m + q] = v;
            values[q * m + p] = v;
        }
    }
    GramMatrix::new(m, values, KernelId::Oracle, dataset_hash(histograms))
}
