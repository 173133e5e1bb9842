//! Run configuration and the JSON artifacts written next to a Gram matrix.

use std::path::{Path, PathBuf};

use nwkernel::psd::PsdCertificate;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum KernelChoice {
    Volume,
    Nw,
    Pseudo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum WeightsMode {
    Cost,
    Weight,
}

impl From<WeightsMode> for nwkernel::WeightOrigin {
    fn from(m: WeightsMode) -> Self {
        match m {
            WeightsMode::Cost => nwkernel::WeightOrigin::Cost,
            WeightsMode::Weight => nwkernel::WeightOrigin::Weight,
        }
    }
}

/// Everything needed to replay a `gram` run. The output directory is not
/// part of the record, so a replay may write elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub input: PathBuf,
    pub weights: PathBuf,
    pub weights_mode: Option<WeightsMode>,
    pub kernel: KernelChoice,
    pub seed: u64,
    pub r_size: usize,
    pub budget: u64,
    pub tolerance: f64,
    pub normalize: bool,
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub tolerance: f64,
    pub verdict: String,
}

impl From<&PsdCertificate> for CertificateRecord {
    fn from(c: &PsdCertificate) -> Self {
        Self {
            min_eigenvalue: c.min_eigenvalue,
            max_eigenvalue: c.max_eigenvalue,
            tolerance: c.tolerance,
            verdict: c.verdict.as_str().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub kernel_id: String,
    pub dataset_hash: String,
    pub histograms: usize,
    pub dimension: usize,
    pub mass: u64,
    pub config: RunConfig,
    pub certificate: CertificateRecord,
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn parse_manifest(text: &str) -> Result<Manifest, serde_json::Error> {
    serde_json::from_str(text)
}

pub fn read_manifest(path: &Path) -> Result<Manifest, CliError> {
    let text = crate::read_file(path)?;
    parse_manifest(&text)
        .map_err(|e| CliError::Input(format!("{}: invalid manifest: {e}", path.display())))
}
