//! Run configuration: JSON file plus command-line overrides, materialized
//! into effective parameters that are echoed verbatim into every report.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use edgekit::ame::HybridWeights;
use edgekit::detectors::{CannyParams, DetectorId, DEFAULT_LOG_SIGMA};
use edgekit::metrics::SsimParams;

/// Weight computation mode for `evaluate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum WeightMode {
    /// Compute entropy weights from the pairs of this run.
    #[serde(rename = "per-batch")]
    #[clap(name = "per-batch")]
    PerBatch,
    /// Load previously frozen weights from a file.
    #[serde(rename = "frozen")]
    Frozen,
}

/// On-disk config schema; every field except `manifest` has a default.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    manifest: Option<PathBuf>,
    detectors: Option<Vec<DetectorId>>,
    canny: Option<CannyParams>,
    log_sigma: Option<f64>,
    ssim: Option<SsimParams>,
    hybrid: Option<HybridWeights>,
    mode: Option<WeightMode>,
    weights_path: Option<PathBuf>,
    hed_manifest: Option<PathBuf>,
    out_dir: Option<PathBuf>,
    jobs: Option<usize>,
    upsample_sr: Option<bool>,
}

/// Fully resolved configuration. Serialized as the report's config echo.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub manifest: PathBuf,
    pub detectors: Vec<DetectorId>,
    /// True when the detector set came from the default rather than the
    /// config file; a defaulted HED may be dropped with a warning instead of
    /// failing when no maps are available.
    pub detectors_defaulted: bool,
    pub canny: CannyParams,
    pub log_sigma: f64,
    pub ssim: SsimParams,
    pub hybrid: HybridWeights,
    pub mode: WeightMode,
    pub weights_path: Option<PathBuf>,
    pub hed_manifest: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// 0 means "use all available cores". Excluded from the report echo:
    /// results are independent of parallelism by contract, so reports stay
    /// byte-identical across any `--jobs` value.
    #[serde(skip)]
    pub jobs: usize,
    pub upsample_sr: bool,
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub weights: Option<PathBuf>,
    pub mode: Option<WeightMode>,
}

impl RunConfig {
    /// Loads and resolves a config file. Relative paths inside the file are
    /// interpreted relative to the file's directory.
    pub fn load(path: &Path, overrides: &Overrides) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let file: ConfigFile = serde_json::from_str(&text)
            .with_context(|| format!("invalid config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));

        let manifest = match file.manifest {
            Some(m) => resolve(base, &m),
            None => bail!("config {} is missing the 'manifest' field", path.display()),
        };
        let detectors_defaulted = file.detectors.is_none();
        let detectors = file.detectors.unwrap_or_else(|| DetectorId::ALL.to_vec());
        if detectors.is_empty() {
            bail!("detector set must not be empty");
        }
        let mut seen = std::collections::HashSet::new();
        for d in &detectors {
            if !seen.insert(*d) {
                bail!("detector {d} listed twice");
            }
        }
        let canny = file.canny.unwrap_or_default();
        canny.validate().context("invalid canny parameters")?;
        let ssim = file.ssim.unwrap_or_default();
        ssim.validate().context("invalid ssim parameters")?;
        let hybrid = file.hybrid.unwrap_or_default();
        hybrid.validate().context("invalid hybrid weights")?;
        let log_sigma = file.log_sigma.unwrap_or(DEFAULT_LOG_SIGMA);
        if log_sigma <= 0.0 {
            bail!("log_sigma must be > 0");
        }

        let mode = overrides.mode.or(file.mode).unwrap_or(WeightMode::PerBatch);
        let weights_path = overrides
            .weights
            .clone()
            .or_else(|| file.weights_path.as_ref().map(|w| resolve(base, w)));
        if mode == WeightMode::Frozen && weights_path.is_none() {
            bail!("frozen mode needs a weights file (--weights or config weights_path)");
        }

        Ok(RunConfig {
            manifest,
            detectors,
            detectors_defaulted,
            canny,
            log_sigma,
            ssim,
            hybrid,
            mode,
            weights_path,
            hed_manifest: file.hed_manifest.as_ref().map(|h| resolve(base, h)),
            out_dir: overrides
                .out
                .clone()
                .unwrap_or_else(|| file.out_dir.map(|o| resolve(base, &o)).unwrap_or_else(|| PathBuf::from("out"))),
            jobs: overrides.jobs.or(file.jobs).unwrap_or(0),
            upsample_sr: file.upsample_sr.unwrap_or(true),
        })
    }

    pub fn detector_bank(&self, detectors: Vec<DetectorId>) -> edgekit::ame::DetectorBank {
        edgekit::ame::DetectorBank {
            detectors,
            canny: self.canny.clone(),
            log_sigma: self.log_sigma,
        }
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_materializes_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"manifest": "pairs.json"}"#).unwrap();
        let cfg = RunConfig::load(&path, &Overrides::default()).unwrap();
        assert_eq!(cfg.detectors, DetectorId::ALL.to_vec());
        assert!(cfg.detectors_defaulted);
        assert_eq!(cfg.canny, CannyParams::default());
        assert_eq!(cfg.mode, WeightMode::PerBatch);
        assert_eq!(cfg.manifest, dir.path().join("pairs.json"));
        assert!(cfg.upsample_sr);
    }

    #[test]
    fn overrides_win_over_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(
            &path,
            r#"{"manifest": "m.json", "jobs": 4, "out_dir": "file_out", "mode": "per-batch"}"#,
        )
        .unwrap();
        let ov = Overrides {
            out: Some(PathBuf::from("cli_out")),
            jobs: Some(2),
            weights: Some(dir.path().join("w.json")),
            mode: Some(WeightMode::Frozen),
        };
        let cfg = RunConfig::load(&path, &ov).unwrap();
        assert_eq!(cfg.jobs, 2);
        assert_eq!(cfg.out_dir, PathBuf::from("cli_out"));
        assert_eq!(cfg.mode, WeightMode::Frozen);
    }

    #[test]
    fn frozen_mode_without_weights_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"manifest": "m.json", "mode": "frozen"}"#).unwrap();
        assert!(RunConfig::load(&path, &Overrides::default()).is_err());
    }

    #[test]
    fn bad_fields_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"manifest": "m.json", "detectors": []}"#).unwrap();
        assert!(RunConfig::load(&path, &Overrides::default()).is_err());
        std::fs::write(&path, r#"{"manifest": "m.json", "typo_field": 1}"#).unwrap();
        assert!(RunConfig::load(&path, &Overrides::default()).is_err());
        std::fs::write(
            &path,
            r#"{"manifest": "m.json", "detectors": ["sobel", "sobel"]}"#,
        )
        .unwrap();
        assert!(RunConfig::load(&path, &Overrides::default()).is_err());
    }
}
