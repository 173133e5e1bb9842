//! Integral histograms, index sequences, permutations and contingency tables.
//!
//! A histogram `r` of dimension `d` and mass `N` can be written as a sequence
//! of `N` symbols over `{1, ..., d}` that repeats `i` exactly `r_i` times.
//! Pairs of such sequences (generalized permutations) map onto contingency
//! tables through [`chi`], which counts co-occurring index pairs.
//!
//! All user-facing indices are 1-based; storage is 0-based.

use std::fmt;

use crate::error::{Error, Result};

/// A nonnegative integer vector of fixed dimension `d >= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Histogram {
    counts: Vec<u64>,
    mass: u64,
}

impl Histogram {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidHistogram(
                "dimension must be at least 1".into(),
            ));
        }
        let mass = counts
            .iter()
            .try_fold(0u64, |acc, &x| acc.checked_add(x))
            .ok_or_else(|| Error::InvalidHistogram("total mass overflows u64".into()))?;
        Ok(Self { counts, mass })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn mass(&self) -> u64 {
        self.mass
    }

    /// `r_σ`: the histogram whose `k`-th bin is `r_{σ(k)}`.
    pub fn permuted(&self, sigma: &Permutation) -> Result<Histogram> {
        check_dim(self.dim(), sigma.len())?;
        Ok(Histogram {
            counts: sigma.permute(&self.counts),
            mass: self.mass,
        })
    }
}

impl fmt::Display for Histogram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_list(f, &self.counts)
    }
}

/// A bijection on `{0, ..., n-1}` stored as its image array.
///
/// The same type represents permutations of bins (`S_d`) and permutations of
/// sequence positions (`S_N`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            image: (0..n).collect(),
        }
    }

    /// Builds a permutation from a 0-based image array.
    pub fn from_image(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &x in &image {
            if x >= n || seen[x] {
                return Err(Error::InvalidPermutation(format!(
                    "{image:?} is not a bijection on 0..{n}"
                )));
            }
            seen[x] = true;
        }
        Ok(Self { image })
    }

    /// Builds a permutation from 1-based notation, e.g. `[3, 1, 2]`.
    pub fn from_one_based(image: &[usize]) -> Result<Self> {
        let zero: Option<Vec<usize>> = image.iter().map(|&x| x.checked_sub(1)).collect();
        let zero = zero.ok_or_else(|| {
            Error::InvalidPermutation(format!("{image:?} contains 0 in 1-based notation"))
        })?;
        Self::from_image(zero).map_err(|_| {
            Error::InvalidPermutation(format!(
                "{image:?} is not a bijection on 1..={}",
                image.len()
            ))
        })
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.image.iter().map(|&x| x + 1).collect()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.image[i]
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &x)| i == x)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (i, &x) in self.image.iter().enumerate() {
            inv[x] = i;
        }
        Self { image: inv }
    }

    /// `self ∘ other`, i.e. `i ↦ self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Result<Self> {
        check_dim(self.len(), other.len())?;
        Ok(Self {
            image: other.image.iter().map(|&i| self.image[i]).collect(),
        })
    }

    /// `α_π = [α_{π(1)}, ..., α_{π(n)}]`.
    ///
    /// # Panics
    ///
    /// Panics if `values.len() != self.len()`.
    pub fn permute<T: Clone>(&self, values: &[T]) -> Vec<T> {
        assert_eq!(values.len(), self.len(), "permutation length mismatch");
        self.image.iter().map(|&i| values[i].clone()).collect()
    }

    /// Advances to the next permutation in lexicographic order. Returns
    /// `false` (leaving `self` as the last permutation) when there is none.
    pub fn next_lexicographic(&mut self) -> bool {
        let v = &mut self.image;
        let n = v.len();
        if n < 2 {
            return false;
        }
        let mut i = n - 1;
        while i > 0 && v[i - 1] >= v[i] {
            i -= 1;
        }
        if i == 0 {
            return false;
        }
        let mut j = n - 1;
        while v[j] <= v[i - 1] {
            j -= 1;
        }
        v.swap(i - 1, j);
        v[i..].reverse();
        true
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, x) in self.image.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", x + 1)?;
        }
        write!(f, ")")
    }
}

/// Iterates over all of `S_n` in lexicographic order, starting at the identity.
pub fn all_permutations(n: usize) -> impl Iterator<Item = Permutation> {
    let mut current = Some(Permutation::identity(n));
    std::iter::from_fn(move || {
        let out = current.take()?;
        let mut next = out.clone();
        if next.next_lexicographic() {
            current = Some(next);
        }
        Some(out)
    })
}

/// A word of length `N` over the alphabet `{1, ..., d}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndexSequence {
    entries: Vec<usize>,
    alphabet: usize,
}

impl IndexSequence {
    /// Builds a sequence from 1-based symbols.
    pub fn from_one_based(alphabet: usize, symbols: &[usize]) -> Result<Self> {
        let entries = symbols
            .iter()
            .map(|&s| {
                if s == 0 || s > alphabet {
                    Err(Error::IndexOutOfRange { index: s, alphabet })
                } else {
                    Ok(s - 1)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { entries, alphabet })
    }

    pub(crate) fn from_zero_based(alphabet: usize, entries: Vec<usize>) -> Self {
        debug_assert!(entries.iter().all(|&e| e < alphabet));
        Self { entries, alphabet }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    /// 0-based symbols.
    pub fn symbols(&self) -> &[usize] {
        &self.entries
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.entries.iter().map(|&e| e + 1).collect()
    }

    /// The histogram counting each symbol.
    pub fn content(&self) -> Histogram {
        let mut counts = vec![0u64; self.alphabet.max(1)];
        for &e in &self.entries {
            counts[e] += 1;
        }
        Histogram::new(counts).expect("alphabet is at least 1")
    }

    /// Reorders positions by a permutation of `S_N`.
    pub fn permuted(&self, pi: &Permutation) -> Result<Self> {
        if pi.len() != self.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: pi.len(),
            });
        }
        Ok(Self {
            entries: pi.permute(&self.entries),
            alphabet: self.alphabet,
        })
    }
}

/// The sorted sequence `ρ` that repeats symbol `i` exactly `r_i` times.
pub fn canonical_sequence(r: &Histogram) -> IndexSequence {
    let entries = r
        .counts()
        .iter()
        .enumerate()
        .flat_map(|(i, &n)| std::iter::repeat_n(i, n as usize))
        .collect();
    IndexSequence::from_zero_based(r.dim(), entries)
}

/// `ρ_σ`: blocks of `σ(1)` repeated `r_{σ(1)}` times, then `σ(2)`, and so on.
pub fn permuted_sequence(r: &Histogram, sigma: &Permutation) -> Result<IndexSequence> {
    check_dim(r.dim(), sigma.len())?;
    let entries = sigma
        .image()
        .iter()
        .flat_map(|&i| std::iter::repeat_n(i, r.counts()[i] as usize))
        .collect();
    Ok(IndexSequence::from_zero_based(r.dim(), entries))
}

/// The pattern of a generalized permutation: entry `(i, j)` counts the
/// positions `t` with `ρ_t = i` and `γ_t = j`.
pub fn chi(rho: &IndexSequence, gamma: &IndexSequence) -> Result<ContingencyTable> {
    if rho.len() != gamma.len() {
        return Err(Error::LengthMismatch {
            left: rho.len(),
            right: gamma.len(),
        });
    }
    check_dim(rho.alphabet(), gamma.alphabet())?;
    let d = rho.alphabet().max(1);
    let mut entries = vec![0u64; d * d];
    for (&i, &j) in rho.symbols().iter().zip(gamma.symbols()) {
        entries[i * d + j] += 1;
    }
    Ok(ContingencyTable::from_entries_unchecked(d, entries))
}

/// A `d × d` nonnegative integer matrix together with its marginals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ContingencyTable {
    d: usize,
    entries: Vec<u64>,
    row_sums: Histogram,
    col_sums: Histogram,
}

impl ContingencyTable {
    /// Row-major entries of a `d × d` table.
    pub fn from_entries(d: usize, entries: Vec<u64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidHistogram(
                "dimension must be at least 1".into(),
            ));
        }
        if entries.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                found: entries.len(),
            });
        }
        Ok(Self::from_entries_unchecked(d, entries))
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let d = rows.len();
        let mut entries = Vec::with_capacity(d * d);
        for row in rows {
            check_dim(d, row.len())?;
            entries.extend_from_slice(row);
        }
        Self::from_entries(d, entries)
    }

    pub(crate) fn from_entries_unchecked(d: usize, entries: Vec<u64>) -> Self {
        let mut rows = vec![0u64; d];
        let mut cols = vec![0u64; d];
        for i in 0..d {
            for j in 0..d {
                let x = entries[i * d + j];
                rows[i] += x;
                cols[j] += x;
            }
        }
        Self {
            d,
            entries,
            row_sums: Histogram::new(rows).expect("d >= 1"),
            col_sums: Histogram::new(cols).expect("d >= 1"),
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.d + j]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.entries.chunks(self.d).map(<[u64]>::to_vec).collect()
    }

    pub fn row_sums(&self) -> &Histogram {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &Histogram {
        &self.col_sums
    }

    pub fn mass(&self) -> u64 {
        self.row_sums.mass()
    }

    pub fn has_marginals(&self, r: &Histogram, c: &Histogram) -> bool {
        &self.row_sums == r && &self.col_sums == c
    }

    pub fn nonzero_count(&self) -> usize {
        self.entries.iter().filter(|&&x| x > 0).count()
    }

    pub fn transpose(&self) -> Self {
        let d = self.d;
        let mut entries = vec![0u64; d * d];
        for i in 0..d {
            for j in 0..d {
                entries[j * d + i] = self.entries[i * d + j];
            }
        }
        Self {
            d,
            entries,
            row_sums: self.col_sums.clone(),
            col_sums: self.row_sums.clone(),
        }
    }

    /// Moves entry `(k, l)` to `(σ(k), σ'(l))`.
    pub fn relabel(&self, sigma: &Permutation, sigma_p: &Permutation) -> Result<Self> {
        check_dim(self.d, sigma.len())?;
        check_dim(self.d, sigma_p.len())?;
        let d = self.d;
        let mut entries = vec![0u64; d * d];
        for k in 0..d {
            for l in 0..d {
                entries[sigma.apply(k) * d + sigma_p.apply(l)] = self.entries[k * d + l];
            }
        }
        Ok(Self::from_entries_unchecked(d, entries))
    }

    /// Frobenius inner product `⟨X, M⟩` over a row-major `d × d` matrix.
    /// Zero entries of `X` contribute nothing, even against infinite costs.
    pub fn inner_product(&self, matrix: &[f64]) -> f64 {
        debug_assert_eq!(matrix.len(), self.entries.len());
        self.entries
            .iter()
            .zip(matrix)
            .filter(|(&x, _)| x > 0)
            .map(|(&x, &m)| x as f64 * m)
            .sum()
    }
}

impl fmt::Display for ContingencyTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.entries.chunks(self.d).enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write_list(f, row)?;
        }
        write!(f, "]")
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, xs: &[u64]) -> fmt::Result {
    write!(f, "[")?;
    for (k, x) in xs.iter().enumerate() {
        if k > 0 {
            write!(f, ",")?;
        }
        write!(f, "{x}")?;
    }
    write!(f, "]")
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

pub(crate) fn check_mass(r: &Histogram, c: &Histogram) -> Result<()> {
    check_dim(r.dim(), c.dim())?;
    if r.mass() != c.mass() {
        return Err(Error::MassMismatch {
            row: r.mass(),
            col: c.mass(),
        });
    }
    Ok(())
}
