//! Edge-guidance toolkit for diffusion-based super-resolution.
//!
//! The crate bundles four pieces that usually live deep inside SR training
//! code, as plain deterministic functions over float images and latents:
//!
//! - [`detectors`]: a four-detector edge bank (Sobel, LoG, a staged Canny
//!   pipeline with CLAHE and median auto-thresholds, and HED via
//!   precomputed-map ingestion).
//! - [`ame`]: the entropy-weighted adaptive multi-detector edge loss over a
//!   batch of SR/GT pairs, plus the hybrid pixel/perceptual/edge total.
//! - [`gate`]: a semantic control gate blending two guidance feature tensors
//!   through softmax weights from a small MLP.
//! - [`onestep`]: variance-preserving schedules and the one-step latent
//!   denoising update with a pluggable noise predictor.
//!
//! Everything is pure and thread-safe; batch work can run data-parallel
//! with results independent of evaluation order.

pub mod ame;
pub mod detectors;
pub mod error;
pub mod filter;
pub mod gate;
pub mod image;
pub mod io;
pub mod latent;
pub mod metrics;
pub mod onestep;

pub use ame::{
    ame_loss, build_loss_matrix, hybrid_loss, DetectorBank, EntropyReport, FrozenWeights,
    HybridWeights, LossItem, LossKind, LossMatrix, PairInput, WeightVector,
};
pub use detectors::{canny, detect, ingest_hed, CannyParams, DetectConfig, DetectorId};
pub use error::{Error, Result};
pub use gate::{fuse, gate_pipeline, mlp_forward, softmax_gate, GateMlp, GateWeights};
pub use image::{resize_bicubic, GrayImage, Grid};
pub use io::{load_image, save_image};
pub use latent::{read_latent, write_latent, LatentTensor, SemanticVector};
pub use metrics::{l1_loss, l2_loss, psnr, ssim, ssim_loss, SsimParams};
pub use onestep::{
    build_vp_schedule, denoise_step, forward_diffuse, one_step_sr, ConvPredictor,
    DiffusionSchedule, NoisePredictor, ZeroPredictor,
};
