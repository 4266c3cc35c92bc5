//! Input matrix resolution: load from a file, build a kernel from a point
//! set, or synthesize from the deterministic generator.

use std::path::{Path, PathBuf};

use parsketch_core::io::{read_matrix, MatrixFormat};
use parsketch_core::kernels::{kernel_linear, kernel_rbf, rbf_sigma_frobenius};
use parsketch_core::matrix::gemm;
use parsketch_core::rng::{gen_block, Distribution, SketchSeed};
use parsketch_core::DenseMatrix;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaSpec {
    Value(f64),
    /// `||X||_F / sqrt(points)`.
    Frobenius,
}

impl std::str::FromStr for SigmaSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s == "frob" {
            return Ok(SigmaSpec::Frobenius);
        }
        s.parse::<f64>()
            .map(SigmaSpec::Value)
            .map_err(|_| format!("sigma must be a number or `frob`, got `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Linear,
    Rbf,
}

impl std::str::FromStr for KernelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "linear" => Ok(KernelKind::Linear),
            "rbf" => Ok(KernelKind::Rbf),
            other => Err(format!("unknown kernel `{other}` (expected linear or rbf)")),
        }
    }
}

pub fn load_matrix(path: &Path, format: Option<MatrixFormat>) -> Result<DenseMatrix> {
    let format = format.unwrap_or_else(|| MatrixFormat::from_path(path));
    Ok(read_matrix(path, format)?)
}

pub fn build_kernel(points: &DenseMatrix, kind: KernelKind, sigma: SigmaSpec) -> Result<DenseMatrix> {
    match kind {
        KernelKind::Linear => Ok(kernel_linear(points)?),
        KernelKind::Rbf => {
            let sigma = match sigma {
                SigmaSpec::Value(v) => v,
                SigmaSpec::Frobenius => rbf_sigma_frobenius(points),
            };
            Ok(kernel_rbf(points, sigma)?)
        }
    }
}

/// Dense uniform test matrix from the deterministic generator.
pub fn synthetic_dense(rows: usize, cols: usize, key: u64) -> Result<DenseMatrix> {
    Ok(gen_block(
        SketchSeed::new(key, Distribution::Uniform),
        0,
        rows as u64,
        0,
        cols as u64,
        rows as u64,
    )?)
}

/// Symmetric positive semi-definite `G G^T` with `G` gaussian `n x rank`.
pub fn synthetic_spsd(n: usize, rank: usize, key: u64) -> Result<DenseMatrix> {
    let g = gen_block(
        SketchSeed::new(key, Distribution::Gaussian),
        0,
        n as u64,
        0,
        rank as u64,
        n as u64,
    )?;
    Ok(gemm(&g, &g.transpose(), false)?)
}

/// Exactly one of the three input sources for the pipeline commands.
pub struct MatrixSource<'a> {
    pub input: Option<&'a PathBuf>,
    pub format: Option<MatrixFormat>,
    pub points: Option<&'a PathBuf>,
    pub kernel: Option<KernelKind>,
    pub sigma: SigmaSpec,
    pub synthetic_dims: Option<(usize, usize)>,
    pub synthetic_rank: Option<usize>,
    pub synthetic_seed: u64,
}

impl MatrixSource<'_> {
    pub fn resolve(&self, symmetric: bool) -> Result<(DenseMatrix, String)> {
        match (self.input, self.points, self.synthetic_dims) {
            (Some(path), None, None) => {
                Ok((load_matrix(path, self.format)?, format!("file:{}", path.display())))
            }
            (None, Some(path), None) => {
                let kind = self.kernel.ok_or_else(|| {
                    CliError::Config("--points requires --kernel linear|rbf".to_string())
                })?;
                let points = load_matrix(path, self.format)?;
                let k = build_kernel(&points, kind, self.sigma)?;
                Ok((k, format!("kernel:{}", path.display())))
            }
            (None, None, Some((rows, cols))) => {
                if symmetric {
                    let rank = self.synthetic_rank.unwrap_or_else(|| rows.min(64));
                    Ok((
                        synthetic_spsd(rows, rank, self.synthetic_seed)?,
                        format!("synthetic-spsd:n={rows},rank={rank}"),
                    ))
                } else {
                    Ok((
                        synthetic_dense(rows, cols, self.synthetic_seed)?,
                        format!("synthetic:{rows}x{cols}"),
                    ))
                }
            }
            (None, None, None) => Err(CliError::Config(
                "no input: pass --input, --points, or the synthetic dimensions".to_string(),
            )),
            _ => Err(CliError::Config(
                "pass exactly one input source (--input | --points | synthetic dimensions)"
                    .to_string(),
            )),
        }
    }
}
