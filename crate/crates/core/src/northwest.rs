//! The Northwestern corner rule and the Northwestern kernel.
//!
//! [`nw_table`] builds the greedy vertex of `U(r, c)` that starts in the
//! top-left cell and walks right or down as columns or rows saturate. Permuting
//! the margins first and undoing the permutation afterwards
//! ([`nw_permuted`]) reaches other vertices. The kernel
//!
//! ```text
//! N(r, c; K, R) = Σ_{σ, σ' ∈ R} exp(-⟨M, NW_{σ⁻¹σ'⁻¹}(r_σ, c_σ')⟩)
//! ```
//!
//! sums one term per ordered pair of permutations from `R`. Every term costs
//! at most `2d - 1` multiply-adds, so a kernel evaluation is `O(d |R|²)`.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::histogram::{check_dim, check_mass, ContingencyTable, Histogram, Permutation};
use crate::numeric::LogSumExp;
use crate::weights::WeightSpec;

/// Walks the Northwestern corner rule over margins given by accessors,
/// calling `place(i, j, amount)` for every positive assignment.
///
/// When a row and a column saturate together the walk moves diagonally.
#[inline]
fn walk(
    d: usize,
    rows: impl Fn(usize) -> u64,
    cols: impl Fn(usize) -> u64,
    mut place: impl FnMut(usize, usize, u64),
) {
    let (mut i, mut j) = (0, 0);
    let (mut ri, mut cj) = (rows(0), cols(0));
    while i < d && j < d {
        let v = ri.min(cj);
        if v > 0 {
            place(i, j, v);
        }
        ri -= v;
        cj -= v;
        if ri == 0 {
            i += 1;
            if i < d {
                ri = rows(i);
            }
        }
        if cj == 0 {
            j += 1;
            if j < d {
                cj = cols(j);
            }
        }
    }
}

/// `NW(r, c)`: the Northwestern corner table, with at most `2d - 1` nonzeros.
pub fn nw_table(r: &Histogram, c: &Histogram) -> Result<ContingencyTable> {
    check_mass(r, c)?;
    let d = r.dim();
    let mut entries = vec![0u64; d * d];
    walk(
        d,
        |i| r.counts()[i],
        |j| c.counts()[j],
        |i, j, v| entries[i * d + j] = v,
    );
    ContingencyTable::from_entries(d, entries)
}

/// `NW_{σ⁻¹σ'⁻¹}(r_σ, c_σ')`: run the rule on permuted margins, then move
/// entry `(k, l)` back to `(σ(k), σ'(l))`. The result lies in `𝕌(r, c)`.
pub fn nw_permuted(
    r: &Histogram,
    c: &Histogram,
    sigma: &Permutation,
    sigma_p: &Permutation,
) -> Result<ContingencyTable> {
    check_mass(r, c)?;
    let d = r.dim();
    check_dim(d, sigma.len())?;
    check_dim(d, sigma_p.len())?;
    let mut entries = vec![0u64; d * d];
    walk(
        d,
        |k| r.counts()[sigma.apply(k)],
        |l| c.counts()[sigma_p.apply(l)],
        |k, l, v| entries[sigma.apply(k) * d + sigma_p.apply(l)] = v,
    );
    ContingencyTable::from_entries(d, entries)
}

/// A finite set `R ⊂ S_d` of distinct permutations, identity first.
///
/// Sampled sets are reproducible from `(d, size_target, seed)` alone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationSet {
    perms: Vec<Permutation>,
    seed: u64,
    size_target: usize,
}

impl PermutationSet {
    /// The identity followed by uniformly shuffled permutations, discarding
    /// repeats, until `size_target` distinct permutations are collected.
    pub fn sample(d: usize, size_target: usize, seed: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidPermutation(
                "dimension must be at least 1".into(),
            ));
        }
        if size_target == 0 {
            return Err(Error::SizeTarget {
                requested: 0,
                available: 0,
            });
        }
        if let Some(available) = factorial_u64(d) {
            if size_target as u64 > available {
                return Err(Error::SizeTarget {
                    requested: size_target as u64,
                    available,
                });
            }
        }
        let identity = Permutation::identity(d);
        let mut seen = HashSet::with_capacity(size_target);
        seen.insert(identity.image().to_vec());
        let mut perms = vec![identity];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut image: Vec<usize> = (0..d).collect();
        while perms.len() < size_target {
            image.shuffle(&mut rng);
            if seen.insert(image.clone()) {
                perms.push(Permutation::from_image(image.clone())?);
            }
        }
        Ok(Self {
            perms,
            seed,
            size_target,
        })
    }

    /// All of `S_d` in lexicographic order (identity first).
    pub fn exhaustive(d: usize) -> Result<Self> {
        const MAX_D: usize = 8;
        if d > MAX_D {
            return Err(Error::TooLarge {
                what: "d",
                value: d,
                max: MAX_D,
            });
        }
        let perms: Vec<_> = crate::histogram::all_permutations(d).collect();
        let size_target = perms.len();
        Ok(Self {
            perms,
            seed: 0,
            size_target,
        })
    }

    /// An explicit set; permutations must be distinct, of equal length, and
    /// start with the identity.
    pub fn from_permutations(perms: Vec<Permutation>) -> Result<Self> {
        let first = perms.first().ok_or(Error::Empty("permutation set"))?;
        if !first.is_identity() {
            return Err(Error::InvalidPermutation(
                "the first permutation must be the identity".into(),
            ));
        }
        let d = first.len();
        let mut seen = HashSet::new();
        for p in &perms {
            check_dim(d, p.len())?;
            if !seen.insert(p.clone()) {
                return Err(Error::InvalidPermutation(format!("{p} appears twice")));
            }
        }
        let size_target = perms.len();
        Ok(Self {
            perms,
            seed: 0,
            size_target,
        })
    }

    pub fn perms(&self) -> &[Permutation] {
        &self.perms
    }

    pub fn len(&self) -> usize {
        self.perms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.perms[0].len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn size_target(&self) -> usize {
        self.size_target
    }
}

fn factorial_u64(n: usize) -> Option<u64> {
    (1..=n as u64).try_fold(1u64, |acc, k| acc.checked_mul(k))
}

/// `sample(d, size_target, seed)`.
pub fn sample_permutations(d: usize, size_target: usize, seed: u64) -> Result<PermutationSet> {
    PermutationSet::sample(d, size_target, seed)
}

/// Result of a kernel evaluation with its bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NwEvaluation {
    pub value: f64,
    /// Number of `(σ, σ')` terms summed.
    pub summands: u64,
}

/// `N(r, c; K, R)`, unnormalized.
pub fn nw_kernel(
    r: &Histogram,
    c: &Histogram,
    w: &WeightSpec,
    set: &PermutationSet,
) -> Result<f64> {
    nw_kernel_eval(r, c, w, set, false).map(|e| e.value)
}

/// `N(r, c; K, R)`, optionally divided by `|R|²`.
///
/// Terms are indexed by permutation pairs, not by distinct tables: pairs that
/// produce the same vertex each contribute.
pub fn nw_kernel_eval(
    r: &Histogram,
    c: &Histogram,
    w: &WeightSpec,
    set: &PermutationSet,
    normalize: bool,
) -> Result<NwEvaluation> {
    check_mass(r, c)?;
    let d = r.dim();
    check_dim(d, w.dim())?;
    check_dim(d, set.dim())?;
    let cost = w.cost();
    let permuted = |h: &Histogram| -> Vec<Vec<u64>> {
        set.perms().iter().map(|s| s.permute(h.counts())).collect()
    };
    let rows_by_sigma = permuted(r);
    let cols_by_sigma = permuted(c);

    let mut acc = LogSumExp::new();
    let mut summands = 0u64;
    for (sigma, rows) in set.perms().iter().zip(&rows_by_sigma) {
        for (sigma_p, cols) in set.perms().iter().zip(&cols_by_sigma) {
            let mut total = 0.0;
            walk(
                d,
                |k| rows[k],
                |l| cols[l],
                |k, l, v| total += v as f64 * cost[sigma.apply(k) * d + sigma_p.apply(l)],
            );
            acc.push(-total);
            summands += 1;
        }
    }
    let mut log_value = acc.log_sum();
    if normalize {
        log_value -= 2.0 * (set.len() as f64).ln();
    }
    Ok(NwEvaluation {
        value: log_value.exp(),
        summands,
    })
}
