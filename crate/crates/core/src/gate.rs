//! Semantic control gate: a three-layer MLP maps a pooled semantic vector to
//! two softmax fusion weights, which convexly blend two guidance feature
//! tensors.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::latent::{LatentTensor, SemanticVector};

/// One dense layer: row-major weight matrix (`out x in`) plus bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl DenseLayer {
    fn forward(&self, input: &[f64], out_dim: usize) -> Vec<f64> {
        let in_dim = input.len();
        (0..out_dim)
            .map(|o| {
                let row = &self.w[o * in_dim..(o + 1) * in_dim];
                row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>() + self.b[o]
            })
            .collect()
    }
}

/// The gating MLP: `d_sem -> h1 -> h2 -> 2` with rectifier activations
/// between layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GateMlpFile", into = "GateMlpFile")]
pub struct GateMlp {
    dims: [usize; 4],
    layers: [DenseLayer; 3],
}

/// JSON wire form: `{dims: [d_sem, h1, h2, 2], layers: [{w, b}; 3]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct GateMlpFile {
    dims: Vec<usize>,
    layers: Vec<DenseLayer>,
}

impl TryFrom<GateMlpFile> for GateMlp {
    type Error = Error;

    fn try_from(f: GateMlpFile) -> Result<Self> {
        let dims: [usize; 4] = f
            .dims
            .as_slice()
            .try_into()
            .map_err(|_| Error::Config(format!("gate MLP needs 4 dims, got {}", f.dims.len())))?;
        let layers: [DenseLayer; 3] = f
            .layers
            .try_into()
            .map_err(|v: Vec<DenseLayer>| {
                Error::Config(format!("gate MLP needs 3 layers, got {}", v.len()))
            })?;
        GateMlp::new(dims, layers)
    }
}

impl From<GateMlp> for GateMlpFile {
    fn from(m: GateMlp) -> Self {
        GateMlpFile {
            dims: m.dims.to_vec(),
            layers: m.layers.to_vec(),
        }
    }
}

impl GateMlp {
    /// Validates that layer shapes chain `d_sem -> h1 -> h2 -> 2` and all
    /// parameters are finite.
    pub fn new(dims: [usize; 4], layers: [DenseLayer; 3]) -> Result<Self> {
        if dims[3] != 2 {
            return Err(Error::Config(format!(
                "gate MLP output dim must be 2, got {}",
                dims[3]
            )));
        }
        if dims.contains(&0) {
            return Err(Error::Config("gate MLP dims must all be >= 1".into()));
        }
        for (l, layer) in layers.iter().enumerate() {
            let (in_dim, out_dim) = (dims[l], dims[l + 1]);
            if layer.w.len() != in_dim * out_dim {
                return Err(Error::Config(format!(
                    "layer {l}: weight length {} does not match {out_dim}x{in_dim}",
                    layer.w.len()
                )));
            }
            if layer.b.len() != out_dim {
                return Err(Error::Config(format!(
                    "layer {l}: bias length {} does not match {out_dim}",
                    layer.b.len()
                )));
            }
            if layer.w.iter().chain(layer.b.iter()).any(|v| !v.is_finite()) {
                return Err(Error::Config(format!("layer {l}: non-finite parameter")));
            }
        }
        Ok(Self { dims, layers })
    }

    pub fn dims(&self) -> [usize; 4] {
        self.dims
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    /// Default layer sizing for a given semantic dimension:
    /// `d_sem -> 128 -> 64 -> 2`.
    pub fn default_dims(d_sem: usize) -> [usize; 4] {
        [d_sem, 128, 64, 2]
    }

    /// All-zero parameters: always produces logits (0, 0).
    pub fn zeros(dims: [usize; 4]) -> Result<Self> {
        let layers = [0, 1, 2].map(|l| DenseLayer {
            w: vec![0.0; dims[l] * dims[l + 1]],
            b: vec![0.0; dims[l + 1]],
        });
        Self::new(dims, layers)
    }

    /// Seeded random initialization, uniform in `+-1/sqrt(fan_in)` per layer.
    pub fn seeded_random(dims: [usize; 4], seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = [0, 1, 2].map(|l| {
            let (fan_in, fan_out) = (dims[l], dims[l + 1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            DenseLayer {
                w: (0..fan_in * fan_out)
                    .map(|_| rng.random_range(-bound..bound))
                    .collect(),
                b: (0..fan_out).map(|_| rng.random_range(-bound..bound)).collect(),
            }
        });
        Self::new(dims, layers)
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Format(format!("gate MLP serialization failed: {e}")))?;
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: invalid gate MLP file: {e}", path.display())))
    }
}

/// Fusion weights; both strictly inside `(0, 1)` and summing to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateWeights {
    pub beta_c: f64,
    pub beta_h: f64,
}

/// Forward pass `L3(relu(L2(relu(L1(z)))))`, returning the two raw logits.
pub fn mlp_forward(m: &GateMlp, z_sem: &SemanticVector) -> Result<[f64; 2]> {
    if z_sem.dim() != m.input_dim() {
        return Err(Error::Shape(format!(
            "semantic vector dim {} does not match MLP input dim {}",
            z_sem.dim(),
            m.input_dim()
        )));
    }
    let mut current = z_sem.as_slice().to_vec();
    for (l, layer) in m.layers.iter().enumerate() {
        current = layer.forward(&current, m.dims[l + 1]);
        if l < 2 {
            for v in &mut current {
                *v = v.max(0.0);
            }
        }
    }
    Ok([current[0], current[1]])
}

/// Numerically stable two-way softmax.
///
/// Works on the shifted logit difference, and saturates it at `+-36.7` so
/// both weights stay strictly inside `(0, 1)` no matter how extreme the
/// logits get (unclamped, `exp` underflow would pin one weight to exactly 0).
pub fn softmax_gate(logits: [f64; 2]) -> Result<GateWeights> {
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("gate logits must be finite".into()));
    }
    const SATURATION: f64 = 36.7;
    let d = (logits[0] - logits[1]).clamp(-SATURATION, SATURATION);
    Ok(GateWeights {
        beta_c: 1.0 / (1.0 + (-d).exp()),
        beta_h: 1.0 / (1.0 + d.exp()),
    })
}

/// Convex blend `beta_c * f_c + beta_h * f_h`, elementwise.
pub fn fuse(f_c: &LatentTensor, f_h: &LatentTensor, g: &GateWeights) -> Result<LatentTensor> {
    f_c.zip_map(f_h, |a, b| g.beta_c * a + g.beta_h * b)
}

/// End-to-end gate: logits, softmax, fusion.
pub fn gate_pipeline(
    m: &GateMlp,
    z_sem: &SemanticVector,
    f_c: &LatentTensor,
    f_h: &LatentTensor,
) -> Result<(GateWeights, LatentTensor)> {
    let g = softmax_gate(mlp_forward(m, z_sem)?)?;
    let fused = fuse(f_c, f_h, &g)?;
    Ok((g, fused))
}
