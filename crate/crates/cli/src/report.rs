//! Evaluation report schema: JSON with a per-pair array and batch summary,
//! plus a CSV companion whose column order matches the JSON field order.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::{Serialize, Serializer};

use edgekit::ame::FrozenWeights;
use edgekit::detectors::DetectorId;

use crate::config::RunConfig;

/// A dB value that may be infinite; JSON has no infinity literal, so the
/// sentinel serializes as the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decibels(pub f64);

impl Serialize for Decibels {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl std::fmt::Display for Decibels {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Loss components of one detector for one pair.
#[derive(Debug, Clone, Serialize)]
pub struct EdgeEntry {
    pub detector: DetectorId,
    pub l1: f64,
    pub ssim_loss: f64,
}

/// Per-pair metrics, in report field order.
#[derive(Debug, Clone, Serialize)]
pub struct PairReport {
    pub sr: PathBuf,
    pub gt: PathBuf,
    pub psnr: Decibels,
    pub ssim: f64,
    pub edge: Vec<EdgeEntry>,
    pub ame: f64,
    /// Ingested perceptual score, when the manifest provides one.
    pub perceptual: Option<f64>,
    /// Hybrid total, present exactly when `perceptual` is.
    pub hybrid: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BatchReport {
    pub entropies: Vec<f64>,
    pub constant_columns: Vec<bool>,
    pub weights: FrozenWeights,
    pub mean_ame: f64,
    pub mean_psnr: Decibels,
    pub mean_ssim: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub config: RunConfig,
    pub version: String,
    pub timestamp: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub pairs: Vec<PairReport>,
    pub batch: BatchReport,
    pub provenance: Provenance,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }

    /// One row per pair; the column order mirrors the JSON field order. The
    /// decimal separator is always '.' and infinite PSNR prints as `inf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sr,gt,psnr,ssim");
        for e in &self.pairs[0].edge {
            let _ = write!(out, ",{d}_l1,{d}_ssim_loss", d = e.detector);
        }
        out.push_str(",ame,perceptual,hybrid\n");
        for p in &self.pairs {
            let _ = write!(
                out,
                "{},{},{},{}",
                p.sr.display(),
                p.gt.display(),
                p.psnr,
                p.ssim
            );
            for e in &p.edge {
                let _ = write!(out, ",{},{}", e.l1, e.ssim_loss);
            }
            let _ = write!(out, ",{}", p.ame);
            match p.perceptual {
                Some(v) => {
                    let _ = write!(out, ",{v}");
                }
                None => out.push(','),
            }
            match p.hybrid {
                Some(v) => {
                    let _ = write!(out, ",{v}");
                }
                None => out.push(','),
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decibels_serialize_inf_as_string() {
        assert_eq!(serde_json::to_string(&Decibels(20.5)).unwrap(), "20.5");
        assert_eq!(
            serde_json::to_string(&Decibels(f64::INFINITY)).unwrap(),
            "\"inf\""
        );
    }

    #[test]
    fn csv_has_stable_columns_and_empty_optionals() {
        let pair = PairReport {
            sr: PathBuf::from("a_sr.pgm"),
            gt: PathBuf::from("a_gt.pgm"),
            psnr: Decibels(f64::INFINITY),
            ssim: 1.0,
            edge: vec![
                EdgeEntry {
                    detector: DetectorId::Sobel,
                    l1: 0.0,
                    ssim_loss: 0.0,
                },
                EdgeEntry {
                    detector: DetectorId::Canny,
                    l1: 0.25,
                    ssim_loss: 0.5,
                },
            ],
            ame: 0.125,
            perceptual: None,
            hybrid: None,
        };
        let report = EvalReport {
            pairs: vec![pair],
            batch: BatchReport {
                entropies: vec![1.0; 4],
                constant_columns: vec![true; 4],
                weights: FrozenWeights {
                    labels: vec!["sobel:l1".into()],
                    weights: vec![1.0],
                    entropies: vec![0.0],
                    fallback: false,
                    n_samples: 2,
                },
                mean_ame: 0.125,
                mean_psnr: Decibels(f64::INFINITY),
                mean_ssim: 1.0,
            },
            provenance: Provenance {
                config: crate::test_support::dummy_config(),
                version: "0.0.0".into(),
                timestamp: "t".into(),
            },
        };
        let csv = report.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "sr,gt,psnr,ssim,sobel_l1,sobel_ssim_loss,canny_l1,canny_ssim_loss,ame,perceptual,hybrid"
        );
        assert_eq!(
            lines.next().unwrap(),
            "a_sr.pgm,a_gt.pgm,inf,1,0,0,0.25,0.5,0.125,,"
        );
    }
}
