//! Input manifests: explicit JSON pair/image lists, directory conventions,
//! and the optional HED map manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

/// One SR/GT record after path resolution.
#[derive(Debug, Clone)]
pub struct PairRecord {
    pub sr: PathBuf,
    pub gt: PathBuf,
    pub hed_sr: Option<PathBuf>,
    pub hed_gt: Option<PathBuf>,
    /// Externally computed perceptual score (e.g. LPIPS), passed through to
    /// the report and the hybrid total.
    pub perceptual: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairEntry {
    sr: PathBuf,
    gt: PathBuf,
    hed_sr: Option<PathBuf>,
    hed_gt: Option<PathBuf>,
    perceptual: Option<f64>,
}

/// Loads SR/GT pairs from a JSON manifest, or from a directory containing
/// `sr/` and `gt/` subdirectories paired by filename stem. Relative paths in
/// a JSON manifest resolve against the manifest's directory.
pub fn load_pairs(manifest: &Path, hed_manifest: Option<&Path>) -> Result<Vec<PairRecord>> {
    let hed_map = hed_manifest.map(load_hed_manifest).transpose()?;
    let mut pairs = if manifest.is_dir() {
        pairs_from_directory(manifest)?
    } else {
        pairs_from_json(manifest)?
    };
    if let Some(hed) = &hed_map {
        for p in &mut pairs {
            if p.hed_sr.is_none() {
                p.hed_sr = hed.get(&p.sr).cloned();
            }
            if p.hed_gt.is_none() {
                p.hed_gt = hed.get(&p.gt).cloned();
            }
        }
    }
    Ok(pairs)
}

fn pairs_from_json(manifest: &Path) -> Result<Vec<PairRecord>> {
    let text = std::fs::read_to_string(manifest)
        .with_context(|| format!("cannot read manifest {}", manifest.display()))?;
    let entries: Vec<PairEntry> = serde_json::from_str(&text)
        .with_context(|| format!("invalid pair manifest {}", manifest.display()))?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    Ok(entries
        .into_iter()
        .map(|e| PairRecord {
            sr: resolve(base, &e.sr),
            gt: resolve(base, &e.gt),
            hed_sr: e.hed_sr.as_deref().map(|p| resolve(base, p)),
            hed_gt: e.hed_gt.as_deref().map(|p| resolve(base, p)),
            perceptual: e.perceptual,
        })
        .collect())
}

fn pairs_from_directory(dir: &Path) -> Result<Vec<PairRecord>> {
    let sr_dir = dir.join("sr");
    let gt_dir = dir.join("gt");
    if !sr_dir.is_dir() || !gt_dir.is_dir() {
        bail!(
            "manifest directory {} must contain sr/ and gt/ subdirectories",
            dir.display()
        );
    }
    let gt_by_stem: BTreeMap<String, PathBuf> = raster_files(&gt_dir)?
        .into_iter()
        .map(|p| (stem_of(&p), p))
        .collect();
    let mut pairs = Vec::new();
    for sr in raster_files(&sr_dir)? {
        let stem = stem_of(&sr);
        let gt = gt_by_stem
            .get(&stem)
            .with_context(|| format!("no gt counterpart for sr stem '{stem}'"))?;
        pairs.push(PairRecord {
            sr,
            gt: gt.clone(),
            hed_sr: None,
            hed_gt: None,
            perceptual: None,
        });
    }
    Ok(pairs)
}

/// One input image for `detect`: either a bare path string or a record with
/// an optional HED map.
#[derive(Debug, Clone)]
pub struct ImageRecord {
    pub image: PathBuf,
    pub hed: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ImageEntry {
    Bare(PathBuf),
    Record {
        image: PathBuf,
        hed: Option<PathBuf>,
    },
}

/// Loads the detect-command manifest: a JSON array of paths or records, or a
/// directory of raster files (taken in sorted order).
pub fn load_images(manifest: &Path, hed_manifest: Option<&Path>) -> Result<Vec<ImageRecord>> {
    let hed_map = hed_manifest.map(load_hed_manifest).transpose()?;
    let mut records: Vec<ImageRecord> = if manifest.is_dir() {
        raster_files(manifest)?
            .into_iter()
            .map(|image| ImageRecord { image, hed: None })
            .collect()
    } else {
        let text = std::fs::read_to_string(manifest)
            .with_context(|| format!("cannot read manifest {}", manifest.display()))?;
        let entries: Vec<ImageEntry> = serde_json::from_str(&text)
            .with_context(|| format!("invalid image manifest {}", manifest.display()))?;
        let base = manifest.parent().unwrap_or(Path::new("."));
        entries
            .into_iter()
            .map(|e| match e {
                ImageEntry::Bare(p) => ImageRecord {
                    image: resolve(base, &p),
                    hed: None,
                },
                ImageEntry::Record { image, hed } => ImageRecord {
                    image: resolve(base, &image),
                    hed: hed.as_deref().map(|p| resolve(base, p)),
                },
            })
            .collect()
    };
    if let Some(hed) = &hed_map {
        for r in &mut records {
            if r.hed.is_none() {
                r.hed = hed.get(&r.image).cloned();
            }
        }
    }
    Ok(records)
}

/// The HED manifest maps image paths to soft edge map paths. Both sides
/// resolve relative to the manifest file.
fn load_hed_manifest(path: &Path) -> Result<BTreeMap<PathBuf, PathBuf>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read HED manifest {}", path.display()))?;
    let raw: BTreeMap<PathBuf, PathBuf> = serde_json::from_str(&text)
        .with_context(|| format!("invalid HED manifest {}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    Ok(raw
        .into_iter()
        .map(|(k, v)| (resolve(base, &k), resolve(base, &v)))
        .collect())
}

fn raster_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("cannot list {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .map(|e| e.eq_ignore_ascii_case("png") || e.eq_ignore_ascii_case("pgm"))
                .unwrap_or(false)
        })
        .collect();
    files.sort();
    Ok(files)
}

fn stem_of(p: &Path) -> String {
    p.file_stem().unwrap_or_default().to_string_lossy().into_owned()
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
    fn json_pairs_resolve_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = dir.path().join("pairs.json");
        std::fs::write(
            &manifest,
            r#"[{"sr": "a_sr.pgm", "gt": "a_gt.pgm", "perceptual": 0.12}]"#,
        )
        .unwrap();
        let pairs = load_pairs(&manifest, None).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].sr, dir.path().join("a_sr.pgm"));
        assert_eq!(pairs[0].perceptual, Some(0.12));
    }

    #[test]
    fn directory_convention_pairs_by_stem() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir_all(dir.path().join("sr")).unwrap();
        std::fs::create_dir_all(dir.path().join("gt")).unwrap();
        for name in ["x.pgm", "y.pgm"] {
            std::fs::write(dir.path().join("sr").join(name), b"").unwrap();
            std::fs::write(dir.path().join("gt").join(name), b"").unwrap();
        }
        let pairs = load_pairs(dir.path(), None).unwrap();
        assert_eq!(pairs.len(), 2);
        assert_eq!(stem_of(&pairs[0].sr), stem_of(&pairs[0].gt));
        // Unpaired SR is an error.
        std::fs::write(dir.path().join("sr/z.pgm"), b"").unwrap();
        assert!(load_pairs(dir.path(), None).is_err());
    }

    #[test]
    fn hed_manifest_fills_missing_map_paths() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = dir.path().join("pairs.json");
        std::fs::write(&manifest, r#"[{"sr": "a_sr.pgm", "gt": "a_gt.pgm"}]"#).unwrap();
        let hed = dir.path().join("hed.json");
        std::fs::write(
            &hed,
            r#"{"a_sr.pgm": "hed/a_sr.pgm", "a_gt.pgm": "hed/a_gt.pgm"}"#,
        )
        .unwrap();
        let pairs = load_pairs(&manifest, Some(&hed)).unwrap();
        assert_eq!(pairs[0].hed_sr, Some(dir.path().join("hed/a_sr.pgm")));
        assert_eq!(pairs[0].hed_gt, Some(dir.path().join("hed/a_gt.pgm")));
    }

    #[test]
    fn image_manifest_accepts_bare_paths_and_records() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = dir.path().join("imgs.json");
        std::fs::write(
            &manifest,
            r#"["a.pgm", {"image": "b.pgm", "hed": "b_hed.pgm"}]"#,
        )
        .unwrap();
        let imgs = load_images(&manifest, None).unwrap();
        assert_eq!(imgs.len(), 2);
        assert!(imgs[0].hed.is_none());
        assert_eq!(imgs[1].hed, Some(dir.path().join("b_hed.pgm")));
    }
}
