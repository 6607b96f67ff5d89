//! One-step diffusion algebra: forward noising `z_t = a_t z + b_t eps`,
//! single-step denoising `z0 = (z_t - b_t eps_hat) / a_t`, and the LQ-to-HQ
//! latent transform that applies the denoising step at the final timestep
//! with a pluggable noise predictor and no added noise.
//!
//! Timesteps are 1-indexed. Schedules are plain per-timestep scalar pairs;
//! the default builder produces a variance-preserving linear schedule with
//! `a_t^2 + b_t^2 = 1`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::latent::{LatentTensor, SemanticVector};

/// Per-timestep scalar pairs `(alpha_t, beta_t)`, `t` in `1..=T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleFile", into = "ScheduleFile")]
pub struct DiffusionSchedule {
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ScheduleFile {
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl TryFrom<ScheduleFile> for DiffusionSchedule {
    type Error = Error;

    fn try_from(f: ScheduleFile) -> Result<Self> {
        DiffusionSchedule::from_scalars(f.alpha, f.beta)
    }
}

impl From<DiffusionSchedule> for ScheduleFile {
    fn from(s: DiffusionSchedule) -> Self {
        ScheduleFile {
            alpha: s.alpha,
            beta: s.beta,
        }
    }
}

impl DiffusionSchedule {
    /// Builds a schedule from raw scalars. Every `alpha_t` must be positive
    /// so the denoising division is defined; any `(alpha, beta)` convention
    /// is accepted.
    pub fn from_scalars(alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() || alpha.len() != beta.len() {
            return Err(Error::Shape(format!(
                "schedule needs matching non-empty alpha/beta, got {} and {}",
                alpha.len(),
                beta.len()
            )));
        }
        // NaN fails the range test.
        if !alpha.iter().all(|&a| a.is_finite() && a > 0.0) {
            return Err(Error::Domain("schedule alphas must be positive".into()));
        }
        if beta.iter().any(|&b| !b.is_finite()) {
            return Err(Error::Domain("schedule betas must be finite".into()));
        }
        Ok(Self { alpha, beta })
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// `alpha_t` for a 1-indexed timestep.
    pub fn alpha(&self, t: usize) -> Result<f64> {
        self.check_t(t)?;
        Ok(self.alpha[t - 1])
    }

    /// `beta_t` for a 1-indexed timestep.
    pub fn beta(&self, t: usize) -> Result<f64> {
        self.check_t(t)?;
        Ok(self.beta[t - 1])
    }

    fn check_t(&self, t: usize) -> Result<()> {
        if t == 0 || t > self.alpha.len() {
            return Err(Error::Domain(format!(
                "timestep {t} outside 1..={}",
                self.alpha.len()
            )));
        }
        Ok(())
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Format(format!("schedule serialization failed: {e}")))?;
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: invalid schedule: {e}", path.display())))
    }
}

/// Variance-preserving linear schedule: diffusion rates interpolate from
/// `beta_start` to `beta_end`, and `alpha_t = sqrt(prod (1 - rate_s))`,
/// `beta_t = sqrt(1 - alpha_t^2)`.
pub fn build_vp_schedule(t_count: usize, beta_start: f64, beta_end: f64) -> Result<DiffusionSchedule> {
    if t_count == 0 {
        return Err(Error::Domain("schedule needs at least one timestep".into()));
    }
    if !(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0) {
        return Err(Error::Domain(format!(
            "need 0 < beta_start <= beta_end < 1, got {beta_start} and {beta_end}"
        )));
    }
    let mut alpha = Vec::with_capacity(t_count);
    let mut beta = Vec::with_capacity(t_count);
    let mut alpha_bar = 1.0_f64;
    for t in 0..t_count {
        let rate = if t_count == 1 {
            beta_start
        } else {
            beta_start + (beta_end - beta_start) * t as f64 / (t_count - 1) as f64
        };
        alpha_bar *= 1.0 - rate;
        alpha.push(alpha_bar.sqrt());
        beta.push((1.0 - alpha_bar).sqrt());
    }
    DiffusionSchedule::from_scalars(alpha, beta)
}

/// Forward noising `alpha_t * z + beta_t * eps`, elementwise.
pub fn forward_diffuse(
    z: &LatentTensor,
    t: usize,
    eps: &LatentTensor,
    s: &DiffusionSchedule,
) -> Result<LatentTensor> {
    let a = s.alpha(t)?;
    let b = s.beta(t)?;
    z.zip_map(eps, |zv, ev| a * zv + b * ev)
}

/// Single-step denoising `(z_t - beta_t * eps_hat) / alpha_t`, elementwise.
pub fn denoise_step(
    z_t: &LatentTensor,
    eps_hat: &LatentTensor,
    t: usize,
    s: &DiffusionSchedule,
) -> Result<LatentTensor> {
    let a = s.alpha(t)?;
    let b = s.beta(t)?;
    z_t.zip_map(eps_hat, |zv, ev| (zv - b * ev) / a)
}

/// Abstract noise predictor contract: same-shape, finite output.
pub trait NoisePredictor {
    fn predict(
        &self,
        z: &LatentTensor,
        t: usize,
        c: &SemanticVector,
        guidance: Option<&LatentTensor>,
    ) -> Result<LatentTensor>;
}

/// One-step LQ-to-HQ latent transform: denoises the LQ latent at the final
/// timestep `T` without adding noise.
pub fn one_step_sr(
    z_l: &LatentTensor,
    predictor: &dyn NoisePredictor,
    c: &SemanticVector,
    s: &DiffusionSchedule,
) -> Result<LatentTensor> {
    one_step_sr_guided(z_l, predictor, c, None, s)
}

/// [`one_step_sr`] with an optional guidance tensor forwarded to the
/// predictor (e.g. fused ControlNet features).
pub fn one_step_sr_guided(
    z_l: &LatentTensor,
    predictor: &dyn NoisePredictor,
    c: &SemanticVector,
    guidance: Option<&LatentTensor>,
    s: &DiffusionSchedule,
) -> Result<LatentTensor> {
    let t_final = s.len();
    let eps_hat = predictor.predict(z_l, t_final, c, guidance)?;
    if eps_hat.shape() != z_l.shape() {
        return Err(Error::Contract(format!(
            "predictor returned shape {:?} for input {:?}",
            eps_hat.shape(),
            z_l.shape()
        )));
    }
    denoise_step(z_l, &eps_hat, t_final, s)
}

/// Predictor that always returns zeros; turns [`one_step_sr`] into a pure
/// `1/alpha_T` scaling.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroPredictor;

impl NoisePredictor for ZeroPredictor {
    fn predict(
        &self,
        z: &LatentTensor,
        _t: usize,
        _c: &SemanticVector,
        _guidance: Option<&LatentTensor>,
    ) -> Result<LatentTensor> {
        let (c, h, w) = z.shape();
        Ok(LatentTensor::zeros(c, h, w))
    }
}

/// Toy depthwise 3x3 convolutional predictor with loadable weights; enough
/// to exercise the full latent path end to end. The timestep and semantic
/// vector are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvPredictor {
    /// Row-major 3x3 kernel applied per channel with replicate padding.
    pub kernel: [f64; 9],
    pub bias: f64,
}

impl ConvPredictor {
    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Format(format!("predictor serialization failed: {e}")))?;
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: invalid predictor: {e}", path.display())))
    }
}

impl NoisePredictor for ConvPredictor {
    fn predict(
        &self,
        z: &LatentTensor,
        _t: usize,
        _c: &SemanticVector,
        _guidance: Option<&LatentTensor>,
    ) -> Result<LatentTensor> {
        let (channels, h, w) = z.shape();
        let mut out = Vec::with_capacity(channels * h * w);
        for c in 0..channels {
            for y in 0..h as isize {
                for x in 0..w as isize {
                    let mut acc = self.bias;
                    for dy in -1..=1_isize {
                        for dx in -1..=1_isize {
                            let sx = (x + dx).clamp(0, w as isize - 1) as usize;
                            let sy = (y + dy).clamp(0, h as isize - 1) as usize;
                            acc += self.kernel[((dy + 1) * 3 + (dx + 1)) as usize]
                                * z.get(c, sy, sx);
                        }
                    }
                    out.push(acc);
                }
            }
        }
        LatentTensor::new(channels, h, w, out)
    }
}
