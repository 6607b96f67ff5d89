//! `edgekit fuse-demo`: run the semantic gate end to end on saved tensors.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use edgekit::gate::{gate_pipeline, GateMlp};
use edgekit::latent::{read_latent, write_latent, SemanticVector};

use crate::util::ensure_out_dir;

/// Loads the MLP, semantic vector (a JSON array of numbers), and the two
/// guidance tensors; prints the gate weights and writes the fused tensor to
/// `<out>/f_edge.lat`.
pub fn cmd_fuse_demo(
    mlp: &Path,
    z_sem: &Path,
    f_c: &Path,
    f_h: &Path,
    out: &Path,
) -> Result<PathBuf> {
    let mlp = GateMlp::load_json(mlp)?;
    let sem_text = std::fs::read_to_string(z_sem)
        .with_context(|| format!("cannot read semantic vector {}", z_sem.display()))?;
    let sem_data: Vec<f64> = serde_json::from_str(&sem_text)
        .with_context(|| format!("semantic vector {} must be a JSON array", z_sem.display()))?;
    let z = SemanticVector::new(sem_data)?;
    let f_c = read_latent(f_c)?;
    let f_h = read_latent(f_h)?;

    let (gate, fused) = gate_pipeline(&mlp, &z, &f_c, &f_h)?;
    println!("beta_c = {}", gate.beta_c);
    println!("beta_h = {}", gate.beta_h);

    ensure_out_dir(out)?;
    let path = out.join("f_edge.lat");
    write_latent(&fused, &path)?;
    println!("fused tensor written to {}", path.display());
    Ok(path)
}
