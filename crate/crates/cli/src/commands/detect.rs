//! `edgekit detect`: run the edge bank over a manifest of images, writing
//! one PGM per (image, detector) plus an index JSON.

use std::path::PathBuf;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use edgekit::detectors::{detect, DetectConfig, DetectorId};
use edgekit::io::save_image;

use super::{resolve_detectors, thread_pool};
use crate::config::RunConfig;
use crate::manifest::{load_images, ImageRecord};
use crate::util::ensure_out_dir;

#[derive(Debug, Serialize)]
struct IndexEntry {
    image: PathBuf,
    detector: DetectorId,
    output: PathBuf,
}

#[derive(Debug, Serialize)]
struct FailureEntry {
    image: PathBuf,
    error: String,
}

#[derive(Debug, Serialize)]
struct DetectIndex {
    outputs: Vec<IndexEntry>,
    failures: Vec<FailureEntry>,
}

/// Returns the number of failed items; per-item failures are recorded in the
/// index instead of aborting the batch.
pub fn cmd_detect(cfg: &RunConfig) -> Result<usize> {
    let records = load_images(&cfg.manifest, cfg.hed_manifest.as_deref())?;
    if records.is_empty() {
        anyhow::bail!("manifest {} lists no images", cfg.manifest.display());
    }
    let hed_available = records.iter().all(|r| r.hed.is_some());
    let detectors = resolve_detectors(cfg, hed_available, "some images have no HED map")?;
    ensure_out_dir(&cfg.out_dir)?;

    let pool = thread_pool(cfg.jobs)?;
    let results: Vec<std::result::Result<Vec<IndexEntry>, FailureEntry>> = pool.install(|| {
        records
            .par_iter()
            .map(|record| process_image(record, &detectors, cfg))
            .collect()
    });

    let mut index = DetectIndex {
        outputs: Vec::new(),
        failures: Vec::new(),
    };
    for r in results {
        match r {
            Ok(entries) => index.outputs.extend(entries),
            Err(f) => index.failures.push(f),
        }
    }
    let index_path = cfg.out_dir.join("detect_index.json");
    let mut json = serde_json::to_string_pretty(&index)?;
    json.push('\n');
    std::fs::write(&index_path, json)
        .with_context(|| format!("cannot write {}", index_path.display()))?;

    println!(
        "detect: {} maps written, {} failures ({})",
        index.outputs.len(),
        index.failures.len(),
        index_path.display()
    );
    Ok(index.failures.len())
}

fn process_image(
    record: &ImageRecord,
    detectors: &[DetectorId],
    cfg: &RunConfig,
) -> std::result::Result<Vec<IndexEntry>, FailureEntry> {
    let run = || -> Result<Vec<IndexEntry>> {
        let img = edgekit::io::load_image(&record.image)
            .with_context(|| format!("cannot load {}", record.image.display()))?;
        let hed_map = record
            .hed
            .as_ref()
            .map(|p| edgekit::ingest_hed(p, img.width(), img.height()))
            .transpose()
            .with_context(|| format!("cannot ingest HED map for {}", record.image.display()))?;
        let dconf = DetectConfig {
            canny: cfg.canny.clone(),
            log_sigma: Some(cfg.log_sigma),
            hed_map,
        };
        let stem = record
            .image
            .file_stem()
            .unwrap_or_default()
            .to_string_lossy()
            .into_owned();
        let mut entries = Vec::with_capacity(detectors.len());
        for &d in detectors {
            let map = detect(d, &img, &dconf)?;
            let output = cfg.out_dir.join(format!("{stem}.{d}.pgm"));
            save_image(&map, &output)?;
            entries.push(IndexEntry {
                image: record.image.clone(),
                detector: d,
                output,
            });
        }
        Ok(entries)
    };
    run().map_err(|e| FailureEntry {
        image: record.image.clone(),
        error: format!("{e:#}"),
    })
}
