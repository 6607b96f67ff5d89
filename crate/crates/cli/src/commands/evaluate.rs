//! `edgekit evaluate` and `edgekit weights`: batch SR/GT evaluation with
//! entropy-weighted AME reporting, and standalone dataset-level weight
//! freezing.

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use edgekit::ame::{
    ame_loss, edge_loss_row, entropy, hybrid_loss, minmax_normalize, DetectorBank, FrozenWeights,
    LossMatrix, PairInput, WeightVector,
};
use edgekit::image::{resize_bicubic, GrayImage};
use edgekit::metrics::{l2_loss, psnr, ssim};

use super::{resolve_detectors, thread_pool};
use crate::config::{RunConfig, WeightMode};
use crate::manifest::{load_pairs, PairRecord};
use crate::report::{BatchReport, Decibels, EdgeEntry, EvalReport, PairReport, Provenance};
use crate::util::ensure_out_dir;

struct PairMetrics {
    record: PairRecord,
    row: Vec<f64>,
    psnr: f64,
    ssim: f64,
    l2: f64,
}

/// Loads a pair, brings the SR side to GT resolution if configured, ingests
/// HED maps, and computes the per-pair metrics and loss-matrix row.
fn compute_pair(record: &PairRecord, bank: &DetectorBank, cfg: &RunConfig) -> Result<PairMetrics> {
    let context = || format!("pair ({}, {})", record.sr.display(), record.gt.display());

    let gt = edgekit::io::load_image(&record.gt).with_context(context)?;
    let mut sr = edgekit::io::load_image(&record.sr).with_context(context)?;
    if sr.dims() != gt.dims() {
        if cfg.upsample_sr {
            sr = resize_bicubic(&sr, gt.width(), gt.height()).with_context(context)?;
        } else {
            bail!(
                "{}: SR is {}x{} but GT is {}x{} (upsample_sr is disabled)",
                context(),
                sr.width(),
                sr.height(),
                gt.width(),
                gt.height()
            );
        }
    }
    let ingest = |path: &Option<std::path::PathBuf>| -> Result<Option<GrayImage>> {
        path.as_ref()
            .map(|p| edgekit::ingest_hed(p, gt.width(), gt.height()))
            .transpose()
            .map_err(anyhow::Error::from)
    };
    let pair = PairInput {
        hed_sr: ingest(&record.hed_sr).with_context(context)?,
        hed_gt: ingest(&record.hed_gt).with_context(context)?,
        sr,
        gt,
    };
    let row = edge_loss_row(&pair, bank, &cfg.ssim).with_context(context)?;
    Ok(PairMetrics {
        record: record.clone(),
        row,
        psnr: psnr(&pair.sr, &pair.gt)?,
        ssim: ssim(&pair.sr, &pair.gt, &cfg.ssim)?,
        l2: l2_loss(&pair.sr, &pair.gt)?,
    })
}

/// Shared front half of `evaluate` and `weights`: load pairs, resolve the
/// bank, compute rows in parallel (collected in manifest order), and build
/// the loss matrix.
fn compute_batch(cfg: &RunConfig) -> Result<(Vec<PairMetrics>, DetectorBank, LossMatrix)> {
    let records = load_pairs(&cfg.manifest, cfg.hed_manifest.as_deref())?;
    if records.len() < 2 {
        bail!(
            "entropy weights need at least 2 pairs, manifest {} lists {}",
            cfg.manifest.display(),
            records.len()
        );
    }
    let hed_available = records
        .iter()
        .all(|r| r.hed_sr.is_some() && r.hed_gt.is_some());
    let detectors = resolve_detectors(cfg, hed_available, "some pairs have no HED maps")?;
    let bank = cfg.detector_bank(detectors);

    let pool = thread_pool(cfg.jobs)?;
    let metrics: Vec<PairMetrics> = pool
        .install(|| {
            records
                .par_iter()
                .map(|r| compute_pair(r, &bank, cfg))
                .collect::<Result<Vec<_>>>()
        })?;

    let rows: Vec<Vec<f64>> = metrics.iter().map(|m| m.row.clone()).collect();
    let matrix = LossMatrix::from_rows(bank.columns(), &rows)?;
    Ok((metrics, bank, matrix))
}

/// Computes dataset-level entropy weights over every manifest pair and
/// freezes them to `<out>/weights.json`.
pub fn cmd_weights(cfg: &RunConfig) -> Result<()> {
    let (_, _, matrix) = compute_batch(cfg)?;
    let (report, weights) = edgekit::ame::weights_from_matrix(&matrix)?;
    let frozen = FrozenWeights::from_parts(&report, &weights);
    ensure_out_dir(&cfg.out_dir)?;
    let path = cfg.out_dir.join("weights.json");
    let mut json = serde_json::to_string_pretty(&frozen)?;
    json.push('\n');
    std::fs::write(&path, json).with_context(|| format!("cannot write {}", path.display()))?;
    println!(
        "weights: {} columns over {} pairs{} ({})",
        frozen.labels.len(),
        frozen.n_samples,
        if frozen.fallback { ", uniform fallback" } else { "" },
        path.display()
    );
    Ok(())
}

/// Full evaluation: per-pair PSNR/SSIM and edge losses, AME under per-batch
/// or frozen weights, JSON + CSV reports.
pub fn cmd_evaluate(cfg: &RunConfig) -> Result<()> {
    let (metrics, bank, matrix) = compute_batch(cfg)?;
    let columns = bank.columns();

    let norm = minmax_normalize(&matrix);
    let entropy_report = entropy(&norm)?;

    let weights: WeightVector = match cfg.mode {
        WeightMode::PerBatch => edgekit::ame::entropy_weights(&entropy_report, &columns)?,
        WeightMode::Frozen => {
            let path = cfg
                .weights_path
                .as_ref()
                .expect("frozen mode implies a weights path");
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read weights file {}", path.display()))?;
            let frozen: FrozenWeights = serde_json::from_str(&text)
                .with_context(|| format!("malformed weights file {}", path.display()))?;
            let w = frozen.to_weight_vector()?;
            if w.labels() != columns.as_slice() {
                bail!(
                    "weights file {} labels do not match the configured detector set",
                    path.display()
                );
            }
            w
        }
    };

    let mut pairs = Vec::with_capacity(metrics.len());
    let mut ame_sum = 0.0;
    let mut psnr_sum = 0.0;
    let mut ssim_sum = 0.0;
    for m in &metrics {
        let ame = ame_loss(&columns, &m.row, &weights)?;
        ame_sum += ame;
        psnr_sum += m.psnr;
        ssim_sum += m.ssim;
        let edge = columns
            .chunks(2)
            .zip(m.row.chunks(2))
            .map(|(labels, values)| EdgeEntry {
                detector: labels[0].detector,
                l1: values[0],
                ssim_loss: values[1],
            })
            .collect();
        let hybrid = m
            .record
            .perceptual
            .map(|p| hybrid_loss(m.l2, p, ame, &cfg.hybrid))
            .transpose()?;
        pairs.push(PairReport {
            sr: m.record.sr.clone(),
            gt: m.record.gt.clone(),
            psnr: Decibels(m.psnr),
            ssim: m.ssim,
            edge,
            ame,
            perceptual: m.record.perceptual,
            hybrid,
        });
    }
    let n = metrics.len() as f64;

    let report = EvalReport {
        pairs,
        batch: BatchReport {
            entropies: entropy_report.entropies.clone(),
            constant_columns: entropy_report.constant.clone(),
            weights: FrozenWeights::from_parts(&entropy_report, &weights),
            mean_ame: ame_sum / n,
            mean_psnr: Decibels(psnr_sum / n),
            mean_ssim: ssim_sum / n,
        },
        provenance: Provenance {
            config: RunConfig {
                detectors: bank.detectors.clone(),
                ..cfg.clone()
            },
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
        },
    };

    ensure_out_dir(&cfg.out_dir)?;
    let json_path = cfg.out_dir.join("report.json");
    std::fs::write(&json_path, report.to_json())
        .with_context(|| format!("cannot write {}", json_path.display()))?;
    let csv_path = cfg.out_dir.join("report.csv");
    std::fs::write(&csv_path, report.to_csv())
        .with_context(|| format!("cannot write {}", csv_path.display()))?;

    println!(
        "evaluate: {} pairs, mean psnr {}, mean ssim {:.6}, mean ame {:.6} ({})",
        metrics.len(),
        report.batch.mean_psnr,
        report.batch.mean_ssim,
        report.batch.mean_ame,
        json_path.display()
    );
    Ok(())
}
