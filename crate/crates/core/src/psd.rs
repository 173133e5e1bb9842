//! Gram matrices over histogram datasets and positive semidefiniteness
//! certificates from a full symmetric eigendecomposition.

use std::fmt;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::histogram::Histogram;
use crate::northwest::{nw_kernel_eval, PermutationSet};
use crate::ot::pseudo_kernel;
use crate::polytope::{weighted_volume, EnumerationBudget};
use crate::weights::{relative_asymmetry, WeightSpec};

/// Default certification tolerance, relative to `max(1, λ_max)`.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// Asymmetry above this (relative to the largest entry) is an error.
const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelId {
    Volume,
    Nw,
    Pseudo,
    Oracle,
}

impl KernelId {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelId::Volume => "volume",
            KernelId::Nw => "nw",
            KernelId::Pseudo => "pseudo",
            KernelId::Oracle => "oracle",
        }
    }
}

impl fmt::Display for KernelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A kernel together with its parameters.
#[derive(Debug, Clone)]
pub enum KernelSpec {
    /// The weighted volume `T(r, c; K)`.
    Volume {
        weights: WeightSpec,
        budget: EnumerationBudget,
    },
    /// The Northwestern kernel `N(r, c; K, R)`.
    Nw {
        weights: WeightSpec,
        perms: PermutationSet,
        normalize: bool,
    },
    /// `exp(-d_M(r, c))`.
    Pseudo {
        weights: WeightSpec,
        budget: EnumerationBudget,
    },
}

impl KernelSpec {
    pub fn id(&self) -> KernelId {
        match self {
            KernelSpec::Volume { .. } => KernelId::Volume,
            KernelSpec::Nw { .. } => KernelId::Nw,
            KernelSpec::Pseudo { .. } => KernelId::Pseudo,
        }
    }

    pub fn weights(&self) -> &WeightSpec {
        match self {
            KernelSpec::Volume { weights, .. }
            | KernelSpec::Nw { weights, .. }
            | KernelSpec::Pseudo { weights, .. } => weights,
        }
    }

    pub fn evaluate(&self, r: &Histogram, c: &Histogram) -> Result<f64> {
        match self {
            KernelSpec::Volume { weights, budget } => weighted_volume(r, c, weights, *budget),
            KernelSpec::Nw {
                weights,
                perms,
                normalize,
            } => nw_kernel_eval(r, c, weights, perms, *normalize).map(|e| e.value),
            KernelSpec::Pseudo { weights, budget } => pseudo_kernel(r, c, weights, *budget),
        }
    }
}

/// A symmetric `m × m` matrix of kernel values, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    m: usize,
    values: Vec<f64>,
    kernel_id: KernelId,
    dataset_hash: String,
}

impl GramMatrix {
    pub fn new(
        m: usize,
        values: Vec<f64>,
        kernel_id: KernelId,
        dataset_hash: String,
    ) -> Result<Self> {
        if values.len() != m * m {
            return Err(Error::DimensionMismatch {
                expected: m * m,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let asymmetry = relative_asymmetry(&values, m);
        if asymmetry > SYMMETRY_TOLERANCE {
            return Err(Error::NonSymmetric { asymmetry });
        }
        Ok(Self {
            m,
            values,
            kernel_id,
            dataset_hash,
        })
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.values[p * self.m + q]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.m.max(1))
    }

    pub fn kernel_id(&self) -> KernelId {
        self.kernel_id
    }

    pub fn dataset_hash(&self) -> &str {
        &self.dataset_hash
    }

    /// `(G + Gᵀ) / 2`.
    pub fn symmetrized(&self) -> Vec<f64> {
        let m = self.m;
        let mut out = self.values.clone();
        for p in 0..m {
            for q in (p + 1)..m {
                let avg = 0.5 * (self.values[p * m + q] + self.values[q * m + p]);
                out[p * m + q] = avg;
                out[q * m + p] = avg;
            }
        }
        out
    }
}

/// SHA-256 over a canonical text rendering of the histograms.
pub fn dataset_hash(histograms: &[Histogram]) -> String {
    let mut hasher = Sha256::new();
    for h in histograms {
        let line = h
            .counts()
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join(",");
        hasher.update(line.as_bytes());
        hasher.update(b"\n");
    }
    hex::encode(hasher.finalize())
}

/// Checks that every histogram shares the first one's dimension and mass.
pub fn validate_dataset(histograms: &[Histogram]) -> Result<()> {
    let first = histograms
        .first()
        .ok_or(Error::Empty("histogram dataset"))?;
    for (index, h) in histograms.iter().enumerate().skip(1) {
        let source = if h.dim() != first.dim() {
            Error::DimensionMismatch {
                expected: first.dim(),
                found: h.dim(),
            }
        } else if h.mass() != first.mass() {
            Error::MassMismatch {
                row: first.mass(),
                col: h.mass(),
            }
        } else {
            continue;
        };
        return Err(Error::Dataset {
            index,
            source: Box::new(source),
        });
    }
    Ok(())
}

/// Evaluates the kernel on the upper triangle (in parallel) and mirrors it.
///
/// All histograms must share one dimension and one total mass, and the
/// weight matrix must be symmetric.
pub fn build_gram(histograms: &[Histogram], kernel: &KernelSpec) -> Result<GramMatrix> {
    validate_dataset(histograms)?;
    let weights = kernel.weights();
    if weights.dim() != histograms[0].dim() {
        return Err(Error::DimensionMismatch {
            expected: histograms[0].dim(),
            found: weights.dim(),
        });
    }
    if !weights.is_symmetric() {
        return Err(Error::NonSymmetric {
            asymmetry: weights.weight_asymmetry(),
        });
    }
    let m = histograms.len();
    let cells: Vec<(usize, usize)> = (0..m).flat_map(|p| (p..m).map(move |q| (p, q))).collect();
    let computed: Vec<Result<f64>> = cells
        .par_iter()
        .map(|&(p, q)| {
            kernel
                .evaluate(&histograms[p], &histograms[q])
                .map_err(|e| Error::Kernel {
                    p,
                    q,
                    source: Box::new(e),
                })
        })
        .collect();
    let mut values = vec![0.0; m * m];
    for (&(p, q), v) in cells.iter().zip(computed) {
        let v = v?;
        values[p * m + q] = v;
        values[q * m + p] = v;
    }
    GramMatrix::new(m, values, kernel.id(), dataset_hash(histograms))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        }
    }
}

/// Extreme eigenvalues of a symmetric matrix and the resulting verdict:
/// pass iff `λ_min >= -tolerance · max(1, λ_max)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdCertificate {
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl PsdCertificate {
    pub fn from_eigenvalues(min: f64, max: f64, tolerance: f64) -> Self {
        let verdict = if min >= -tolerance * max.max(1.0) {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Self {
            min_eigenvalue: min,
            max_eigenvalue: max,
            tolerance,
            verdict,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

pub fn certify_psd(g: &GramMatrix, tolerance: f64) -> Result<PsdCertificate> {
    certify_values(&g.symmetrized(), g.size(), tolerance)
}

/// Certifies the weight matrix `K` itself.
pub fn psd_weight_check(w: &WeightSpec) -> Result<PsdCertificate> {
    if !w.is_symmetric() {
        return Err(Error::NonSymmetric {
            asymmetry: w.weight_asymmetry(),
        });
    }
    let d = w.dim();
    let mut k = w.weight().to_vec();
    for i in 0..d {
        for j in (i + 1)..d {
            let avg = 0.5 * (k[i * d + j] + k[j * d + i]);
            k[i * d + j] = avg;
            k[j * d + i] = avg;
        }
    }
    certify_values(&k, d, DEFAULT_TOLERANCE)
}

fn certify_values(values: &[f64], n: usize, tolerance: f64) -> Result<PsdCertificate> {
    if n == 0 {
        return Err(Error::Empty("matrix"));
    }
    let eig = symmetric_eigen(values, n)?;
    Ok(PsdCertificate::from_eigenvalues(
        eig.values[0],
        eig.values[n - 1],
        tolerance,
    ))
}

/// Eigenvalues in ascending order and the matching orthonormal eigenvectors,
/// stored as the columns of a row-major `n × n` matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
}

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm falls below
/// `1e-14 · ‖A‖_F` (or a sweep changes nothing).
pub fn symmetric_eigen(matrix: &[f64], n: usize) -> Result<SymmetricEigen> {
    const MAX_SWEEPS: usize = 100;
    if matrix.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            found: matrix.len(),
        });
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let target = 1e-14 * norm;

    for _ in 0..MAX_SWEEPS {
        let off = off_diagonal_norm(&a, n);
        if off <= target || off == 0.0 {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                if s == 0.0 {
                    continue;
                }
                rotated = true;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (col, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[k * n + col] = v[k * n + src];
        }
    }
    Ok(SymmetricEigen { values, vectors })
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j] * a[i * n + j];
            }
        }
    }
    s.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gram(m: usize, values: Vec<f64>) -> GramMatrix {
        GramMatrix::new(m, values, KernelId::Oracle, String::new()).unwrap()
    }

    #[test]
    fn identity_passes() {
        let cert = certify_psd(&gram(3, vec![1., 0., 0., 0., 1., 0., 0., 0., 1.]), 1e-8).unwrap();
        assert_eq!(cert.min_eigenvalue, 1.0);
        assert_eq!(cert.max_eigenvalue, 1.0);
        assert!(cert.passed());
    }

    #[test]
    fn indefinite_fails() {
        let cert = certify_psd(&gram(2, vec![1., 2., 2., 1.]), 1e-8).unwrap();
        assert!((cert.min_eigenvalue + 1.0).abs() < 1e-14);
        assert!((cert.max_eigenvalue - 3.0).abs() < 1e-14);
        assert_eq!(cert.verdict, Verdict::Fail);
    }

    #[test]
    fn gram_construction_rejects_bad_input() {
        assert!(matches!(
            GramMatrix::new(2, vec![1., 2., 2.5, 1.], KernelId::Nw, String::new()),
            Err(Error::NonSymmetric { .. })
        ));
        assert!(matches!(
            GramMatrix::new(1, vec![f64::NAN], KernelId::Nw, String::new()),
            Err(Error::NonFinite)
        ));
        assert!(GramMatrix::new(2, vec![1.0], KernelId::Nw, String::new()).is_err());
        // asymmetry within 1e-12 relative is accepted and averaged away
        let g = gram(2, vec![1.0, 0.5, 0.5 + 1e-14, 1.0]);
        assert_eq!(g.symmetrized()[1], g.symmetrized()[2]);
    }

    #[test]
    fn weight_checks() {
        let id = WeightSpec::from_weight_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(psd_weight_check(&id).unwrap().passed());
        assert!(psd_weight_check(&WeightSpec::ones(4)).unwrap().passed());
        let swap = WeightSpec::from_weight_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let cert = psd_weight_check(&swap).unwrap();
        assert!(!cert.passed());
        assert!((cert.min_eigenvalue + 1.0).abs() < 1e-14);
        let skew = WeightSpec::from_weight_rows(&[vec![1.0, 0.2], vec![0.3, 1.0]]).unwrap();
        assert!(matches!(
            psd_weight_check(&skew),
            Err(Error::NonSymmetric { .. })
        ));
    }

    #[test]
    fn dataset_validation_names_the_offender() {
        let hs = vec![
            Histogram::new(vec![1, 1]).unwrap(),
            Histogram::new(vec![2, 0]).unwrap(),
            Histogram::new(vec![2, 1]).unwrap(),
        ];
        match validate_dataset(&hs) {
            Err(Error::Dataset { index: 2, source }) => {
                assert!(matches!(*source, Error::MassMismatch { .. }))
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(validate_dataset(&[]).is_err());
    }

    #[test]
    fn hash_depends_on_content_and_order() {
        let a = Histogram::new(vec![1, 2]).unwrap();
        let b = Histogram::new(vec![2, 1]).unwrap();
        let h1 = dataset_hash(&[a.clone(), b.clone()]);
        assert_eq!(h1.len(), 64);
        assert_eq!(h1, dataset_hash(&[a.clone(), b.clone()]));
        assert_ne!(h1, dataset_hash(&[b, a]));
    }

    fn symmetric_matrix() -> impl Strategy<Value = (usize, Vec<f64>)> {
        (1usize..=12).prop_flat_map(|n| {
            proptest::collection::vec(-10.0f64..10.0, n * n).prop_map(move |raw| {
                let mut a = raw.clone();
                for i in 0..n {
                    for j in 0..n {
                        a[i * n + j] = raw[i * n + j] + raw[j * n + i];
                    }
                }
                (n, a)
            })
        })
    }

    proptest! {
        #[test]
        fn jacobi_reconstructs_its_input((n, a) in symmetric_matrix()) {
            let eig = symmetric_eigen(&a, n).unwrap();
            let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
            let mut err = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let rebuilt: f64 = (0..n)
                        .map(|k| eig.vectors[i * n + k] * eig.values[k] * eig.vectors[j * n + k])
                        .sum();
                    err += (rebuilt - a[i * n + j]).powi(2);
                }
            }
            prop_assert!(err.sqrt() <= 1e-10 * norm);
            prop_assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
            let trace: f64 = (0..n).map(|i| a[i * n + i]).sum();
            let sum: f64 = eig.values.iter().sum();
            prop_assert!((trace - sum).abs() <= 1e-12 * norm.max(trace.abs()));
        }
    }
}
