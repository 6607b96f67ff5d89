//! The four-detector edge bank: Sobel, Laplacian-of-Gaussian, the staged
//! Canny pipeline, and HED via precomputed-map ingestion.
//!
//! Every detector maps a [`GrayImage`] to an edge map of identical
//! dimensions with values in `[0, 1]`. Sobel and LoG produce magnitude maps
//! normalized by their own maximum, Canny produces a binary `{0, 1}` map,
//! and HED yields the ingested soft probabilities.

mod canny;
mod clahe;
mod hed;
mod log;
mod sobel;

use serde::{Deserialize, Serialize};

pub use canny::{canny, CannyParams};
pub(crate) use clahe::clahe_u8;
pub use hed::ingest_hed;
pub use log::{log_kernel, log_response, LogResponse};
pub use sobel::{sobel, GradientField};

use crate::error::{Error, Result};
use crate::image::{resize_bicubic, GrayImage};

/// Default LoG scale when none is configured.
pub const DEFAULT_LOG_SIGMA: f64 = 1.4;

/// The fixed detector set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorId {
    Sobel,
    Log,
    Canny,
    Hed,
}

impl DetectorId {
    /// All four detectors, in canonical order.
    pub const ALL: [DetectorId; 4] = [
        DetectorId::Sobel,
        DetectorId::Log,
        DetectorId::Canny,
        DetectorId::Hed,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            DetectorId::Sobel => "sobel",
            DetectorId::Log => "log",
            DetectorId::Canny => "canny",
            DetectorId::Hed => "hed",
        }
    }
}

impl std::fmt::Display for DetectorId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for DetectorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sobel" => Ok(DetectorId::Sobel),
            "log" => Ok(DetectorId::Log),
            "canny" => Ok(DetectorId::Canny),
            "hed" => Ok(DetectorId::Hed),
            other => Err(Error::Config(format!("unknown detector '{other}'"))),
        }
    }
}

/// Per-call detector configuration for [`detect`].
#[derive(Debug, Clone, Default)]
pub struct DetectConfig {
    pub canny: CannyParams,
    /// LoG scale; `None` uses [`DEFAULT_LOG_SIGMA`].
    pub log_sigma: Option<f64>,
    /// Preloaded HED soft edge map; required when dispatching to HED.
    pub hed_map: Option<GrayImage>,
}

/// Dispatches to one of the four detectors.
///
/// HED requires a preloaded map in the config; the map is bicubic-resized to
/// the input dimensions when they differ.
pub fn detect(id: DetectorId, img: &GrayImage, config: &DetectConfig) -> Result<GrayImage> {
    match id {
        DetectorId::Sobel => Ok(sobel(img).magnitude),
        DetectorId::Log => {
            Ok(log_response(img, config.log_sigma.unwrap_or(DEFAULT_LOG_SIGMA))?.edge_map)
        }
        DetectorId::Canny => canny(img, &config.canny),
        DetectorId::Hed => {
            let map = config.hed_map.as_ref().ok_or_else(|| {
                Error::Config("HED detector requested but no edge map was provided".into())
            })?;
            if map.dims() == img.dims() {
                Ok(map.clone())
            } else {
                resize_bicubic(map, img.width(), img.height())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detect_dispatches_and_checks_hed_config() {
        let img = GrayImage::constant(8, 8, 0.5).unwrap();
        let cfg = DetectConfig::default();
        for id in [DetectorId::Sobel, DetectorId::Log, DetectorId::Canny] {
            let map = detect(id, &img, &cfg).unwrap();
            assert_eq!(map.dims(), img.dims());
            assert!(map.as_slice().iter().all(|&v| v == 0.0), "{id}");
        }
        assert!(matches!(
            detect(DetectorId::Hed, &img, &cfg),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn detect_hed_resizes_to_input_dims() {
        let img = GrayImage::constant(16, 16, 0.5).unwrap();
        let map = GrayImage::from_fn(8, 8, |x, _| x as f64 / 7.0).unwrap();
        let cfg = DetectConfig {
            hed_map: Some(map),
            ..Default::default()
        };
        let out = detect(DetectorId::Hed, &img, &cfg).unwrap();
        assert_eq!(out.dims(), (16, 16));
        assert!(out.as_slice().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn detector_names_round_trip() {
        for id in DetectorId::ALL {
            let parsed: DetectorId = id.name().parse().unwrap();
            assert_eq!(parsed, id);
        }
        assert!("hough".parse::<DetectorId>().is_err());
    }
}
