mod detect;
mod evaluate;
mod fuse_demo;

pub use detect::cmd_detect;
pub use evaluate::{cmd_evaluate, cmd_weights};
pub use fuse_demo::cmd_fuse_demo;

use anyhow::Result;

use crate::config::RunConfig;
use crate::util::warn;
use edgekit::detectors::DetectorId;

/// Resolves the effective detector set given whether every input carries a
/// HED map. A defaulted detector set silently drops HED with a warning when
/// maps are missing; an explicitly configured HED without maps is an error.
pub(crate) fn resolve_detectors(
    cfg: &RunConfig,
    hed_available: bool,
    missing_detail: &str,
) -> Result<Vec<DetectorId>> {
    let mut detectors = cfg.detectors.clone();
    if detectors.contains(&DetectorId::Hed) && !hed_available {
        if cfg.detectors_defaulted {
            warn(&format!(
                "dropping HED from the detector set: {missing_detail}"
            ));
            detectors.retain(|&d| d != DetectorId::Hed);
        } else {
            anyhow::bail!("HED requested but {missing_detail}");
        }
    }
    Ok(detectors)
}

/// Builds a rayon pool honoring the configured parallelism degree
/// (0 = all cores).
pub(crate) fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| anyhow::anyhow!("cannot build thread pool: {e}"))
}
