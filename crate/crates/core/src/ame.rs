//! The adaptive multi-detector edge loss: loss-matrix construction over a
//! batch, per-column min-max normalization, entropy weighting, and the
//! weighted aggregation plus the hybrid total.
//!
//! The weighting pipeline assigns each loss column a weight
//! `w_j = (1 - e_j) / sum_k (1 - e_k)` where `e_j` is the normalized Shannon
//! entropy of the column's min-max-normalized values. Columns that do not
//! discriminate between samples (constant, or all zero after normalization)
//! carry entropy 1 and therefore weight 0; if every column is uninformative
//! the weights fall back to uniform and the result is flagged.

use serde::{Deserialize, Serialize};

use crate::detectors::{detect, DetectConfig, DetectorId};
use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::metrics::{l1_loss, ssim_loss, SsimParams};

/// Which scalar a loss column carries for its detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    L1,
    Ssim,
}

impl std::fmt::Display for LossKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LossKind::L1 => "l1",
            LossKind::Ssim => "ssim",
        })
    }
}

/// Column label: one detector paired with one loss kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LossItem {
    pub detector: DetectorId,
    pub kind: LossKind,
}

impl LossItem {
    /// The `(d, L1), (d, SSIM)` column order for a detector list.
    pub fn columns(detectors: &[DetectorId]) -> Vec<LossItem> {
        detectors
            .iter()
            .flat_map(|&d| {
                [
                    LossItem {
                        detector: d,
                        kind: LossKind::L1,
                    },
                    LossItem {
                        detector: d,
                        kind: LossKind::Ssim,
                    },
                ]
            })
            .collect()
    }

    pub fn label(&self) -> String {
        format!("{}:{}", self.detector, self.kind)
    }

    pub fn parse(s: &str) -> Result<LossItem> {
        let (d, k) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("malformed loss label '{s}'")))?;
        let detector = d.parse()?;
        let kind = match k {
            "l1" => LossKind::L1,
            "ssim" => LossKind::Ssim,
            other => return Err(Error::Config(format!("unknown loss kind '{other}'"))),
        };
        Ok(LossItem { detector, kind })
    }
}

/// An `N x M` nonnegative matrix of per-sample loss components.
#[derive(Debug, Clone)]
pub struct LossMatrix {
    labels: Vec<LossItem>,
    n_samples: usize,
    /// Row-major `n_samples x labels.len()`.
    entries: Vec<f64>,
}

impl LossMatrix {
    pub fn from_rows(labels: Vec<LossItem>, rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::BatchTooSmall(rows.len()));
        }
        let m = labels.len();
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            if !seen.insert(*l) {
                return Err(Error::Config(format!("duplicate loss column {}", l.label())));
            }
        }
        let mut entries = Vec::with_capacity(rows.len() * m);
        for row in rows {
            if row.len() != m {
                return Err(Error::Shape(format!(
                    "loss row has {} entries, expected {m}",
                    row.len()
                )));
            }
            for &v in row {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::Domain(format!(
                        "loss entries must be finite and >= 0, got {v}"
                    )));
                }
                entries.push(v);
            }
        }
        Ok(Self {
            labels,
            n_samples: rows.len(),
            entries,
        })
    }

    pub fn labels(&self) -> &[LossItem] {
        &self.labels
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_items(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.labels.len() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let m = self.labels.len();
        &self.entries[row * m..(row + 1) * m]
    }
}

/// Min-max normalization output: `r` in `[0, 1]` plus per-column
/// constant-column flags. Flagged columns keep zeros in `r` and are resolved
/// by the entropy convention downstream.
#[derive(Debug, Clone)]
pub struct MinMaxNorm {
    pub r: Vec<f64>,
    pub n_samples: usize,
    pub n_items: usize,
    pub constant: Vec<bool>,
}

/// Per-column min-max standardization: `r_ij = (x_ij - min_j) / (max_j - min_j)`.
pub fn minmax_normalize(x: &LossMatrix) -> MinMaxNorm {
    let (n, m) = (x.n_samples(), x.n_items());
    let mut r = vec![0.0; n * m];
    let mut constant = vec![false; m];
    for j in 0..m {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            lo = lo.min(x.get(i, j));
            hi = hi.max(x.get(i, j));
        }
        if hi == lo {
            constant[j] = true;
            continue;
        }
        let span = hi - lo;
        for i in 0..n {
            r[i * m + j] = (x.get(i, j) - lo) / span;
        }
    }
    MinMaxNorm {
        r,
        n_samples: n,
        n_items: m,
        constant,
    }
}

/// Entropy computation output.
#[derive(Debug, Clone)]
pub struct EntropyReport {
    /// The normalized matrix the entropies were computed from.
    pub r: Vec<f64>,
    /// Column-stochastic proportions `p_ij = r_ij / sum_i r_ij` (zeros for
    /// degenerate columns).
    pub p: Vec<f64>,
    /// Normalized entropies `e_j`, each in `[0, 1]`; degenerate columns get 1.
    pub entropies: Vec<f64>,
    /// Constant-column flags carried through from normalization.
    pub constant: Vec<bool>,
    pub n_samples: usize,
}

/// Computes `e_j = -(1 / ln N) * sum_i p_ij ln p_ij` per column, with
/// `0 ln 0 = 0`. Constant columns and columns whose normalized sum is zero
/// receive `e_j = 1` (no information).
pub fn entropy(norm: &MinMaxNorm) -> Result<EntropyReport> {
    let (n, m) = (norm.n_samples, norm.n_items);
    if n < 2 {
        return Err(Error::BatchTooSmall(n));
    }
    let ln_n = (n as f64).ln();
    let mut p = vec![0.0; n * m];
    let mut entropies = vec![0.0; m];
    for j in 0..m {
        if norm.constant[j] {
            entropies[j] = 1.0;
            continue;
        }
        let col_sum: f64 = (0..n).map(|i| norm.r[i * m + j]).sum();
        if col_sum == 0.0 {
            entropies[j] = 1.0;
            continue;
        }
        let mut h = 0.0;
        for i in 0..n {
            let pij = norm.r[i * m + j] / col_sum;
            p[i * m + j] = pij;
            if pij > 0.0 {
                h -= pij * pij.ln();
            }
        }
        entropies[j] = h / ln_n;
    }
    Ok(EntropyReport {
        r: norm.r.clone(),
        p,
        entropies,
        constant: norm.constant.clone(),
        n_samples: n,
    })
}

/// Weights over loss columns: nonnegative, summing to one.
#[derive(Debug, Clone)]
pub struct WeightVector {
    labels: Vec<LossItem>,
    weights: Vec<f64>,
    /// True when every column was uninformative and the uniform fallback was
    /// used.
    fallback: bool,
}

impl WeightVector {
    pub fn new(labels: Vec<LossItem>, weights: Vec<f64>, fallback: bool) -> Result<Self> {
        if labels.len() != weights.len() {
            return Err(Error::Shape(format!(
                "{} labels vs {} weights",
                labels.len(),
                weights.len()
            )));
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|&w| !(0.0..=1.0).contains(&w)) || (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "weights must lie in [0,1] and sum to 1, got sum {sum}"
            )));
        }
        Ok(Self {
            labels,
            weights,
            fallback,
        })
    }

    pub fn labels(&self) -> &[LossItem] {
        &self.labels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_fallback(&self) -> bool {
        self.fallback
    }
}

/// Turns an entropy report into weights: `w_j = (1 - e_j) / sum_k (1 - e_k)`,
/// falling back to uniform when the denominator vanishes.
pub fn entropy_weights(report: &EntropyReport, labels: &[LossItem]) -> Result<WeightVector> {
    let m = report.entropies.len();
    if labels.len() != m {
        return Err(Error::Shape(format!(
            "{} labels for {m} entropy columns",
            labels.len()
        )));
    }
    let divergences: Vec<f64> = report.entropies.iter().map(|e| 1.0 - e).collect();
    let total: f64 = divergences.iter().sum();
    if total <= 0.0 {
        let uniform = vec![1.0 / m as f64; m];
        return WeightVector::new(labels.to_vec(), uniform, true);
    }
    let weights: Vec<f64> = divergences
        .iter()
        .map(|d| (d / total).clamp(0.0, 1.0))
        .collect();
    WeightVector::new(labels.to_vec(), weights, false)
}

/// Full pipeline: min-max normalize, entropy, weights.
pub fn weights_from_matrix(x: &LossMatrix) -> Result<(EntropyReport, WeightVector)> {
    let norm = minmax_normalize(x);
    let report = entropy(&norm)?;
    let weights = entropy_weights(&report, x.labels())?;
    Ok((report, weights))
}

/// Weighted sum of one sample's loss components. Labels must match the
/// weight labels exactly (same order).
pub fn ame_loss(labels: &[LossItem], values: &[f64], weights: &WeightVector) -> Result<f64> {
    if labels != weights.labels() {
        return Err(Error::Config(
            "loss row labels do not match weight labels".into(),
        ));
    }
    if values.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} values for {} labels",
            values.len(),
            labels.len()
        )));
    }
    Ok(values
        .iter()
        .zip(weights.weights())
        .map(|(v, w)| v * w)
        .sum())
}

/// Scalar weights of the hybrid objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HybridWeights {
    pub lambda_l2: f64,
    pub lambda_perceptual: f64,
    pub lambda_ame: f64,
}

impl Default for HybridWeights {
    fn default() -> Self {
        Self {
            lambda_l2: 1.0,
            lambda_perceptual: 1.0,
            lambda_ame: 1.0,
        }
    }
}

impl HybridWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [self.lambda_l2, self.lambda_perceptual, self.lambda_ame];
        // NaN fails the range test.
        if !all.iter().all(|&l| l.is_finite() && l >= 0.0) {
            return Err(Error::Domain("hybrid lambdas must be finite and >= 0".into()));
        }
        if all.iter().all(|&l| l == 0.0) {
            return Err(Error::Domain("at least one hybrid lambda must be > 0".into()));
        }
        Ok(())
    }
}

/// `lambda_l2 * l2 + lambda_perceptual * perceptual + lambda_ame * ame`.
/// The perceptual term is externally supplied (e.g. an ingested LPIPS score).
pub fn hybrid_loss(l2: f64, perceptual: f64, ame: f64, w: &HybridWeights) -> Result<f64> {
    w.validate()?;
    for (name, v) in [("l2", l2), ("perceptual", perceptual), ("ame", ame)] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::Domain(format!(
                "{name} term must be finite and >= 0, got {v}"
            )));
        }
    }
    Ok(w.lambda_l2 * l2 + w.lambda_perceptual * perceptual + w.lambda_ame * ame)
}

/// One SR/GT pair plus optional preloaded HED maps (required if HED is in
/// the detector set).
#[derive(Debug, Clone)]
pub struct PairInput {
    pub sr: GrayImage,
    pub gt: GrayImage,
    pub hed_sr: Option<GrayImage>,
    pub hed_gt: Option<GrayImage>,
}

/// Detector bank configuration shared across a batch.
#[derive(Debug, Clone)]
pub struct DetectorBank {
    pub detectors: Vec<DetectorId>,
    pub canny: crate::detectors::CannyParams,
    pub log_sigma: f64,
}

impl Default for DetectorBank {
    fn default() -> Self {
        Self {
            detectors: DetectorId::ALL.to_vec(),
            canny: crate::detectors::CannyParams::default(),
            log_sigma: crate::detectors::DEFAULT_LOG_SIGMA,
        }
    }
}

impl DetectorBank {
    pub fn columns(&self) -> Vec<LossItem> {
        LossItem::columns(&self.detectors)
    }
}

/// Computes one loss-matrix row for a pair: for each detector `d`, the L1
/// then SSIM discrepancy between `E_d(gt)` and `E_d(sr)`.
pub fn edge_loss_row(
    pair: &PairInput,
    bank: &DetectorBank,
    ssim_params: &SsimParams,
) -> Result<Vec<f64>> {
    pair.sr.check_same_dims(&pair.gt)?;
    let mut row = Vec::with_capacity(bank.detectors.len() * 2);
    for &d in &bank.detectors {
        let (map_gt, map_sr) = detect_pair(pair, d, bank)?;
        row.push(l1_loss(&map_gt, &map_sr)?);
        // Near-identical maps can round SSIM a hair past 1; keep the loss
        // inside its [0, 2] contract.
        row.push(ssim_loss(&map_gt, &map_sr, ssim_params)?.max(0.0));
    }
    Ok(row)
}

/// Edge maps for both sides of a pair under one detector.
pub fn detect_pair(
    pair: &PairInput,
    d: DetectorId,
    bank: &DetectorBank,
) -> Result<(GrayImage, GrayImage)> {
    let config_for = |hed: &Option<GrayImage>| -> Result<DetectConfig> {
        if d == DetectorId::Hed && hed.is_none() {
            return Err(Error::Config(
                "HED is in the detector set but the pair carries no HED map".into(),
            ));
        }
        Ok(DetectConfig {
            canny: bank.canny.clone(),
            log_sigma: Some(bank.log_sigma),
            hed_map: hed.clone(),
        })
    };
    let map_gt = detect(d, &pair.gt, &config_for(&pair.hed_gt)?)?;
    let map_sr = detect(d, &pair.sr, &config_for(&pair.hed_sr)?)?;
    Ok((map_gt, map_sr))
}

/// Builds the batch loss matrix: one row per sample, columns
/// `(d, L1), (d, SSIM)` per detector in bank order.
pub fn build_loss_matrix(
    pairs: &[PairInput],
    bank: &DetectorBank,
    ssim_params: &SsimParams,
) -> Result<LossMatrix> {
    if pairs.len() < 2 {
        return Err(Error::BatchTooSmall(pairs.len()));
    }
    let rows: Vec<Vec<f64>> = pairs
        .iter()
        .map(|p| edge_loss_row(p, bank, ssim_params))
        .collect::<Result<_>>()?;
    LossMatrix::from_rows(bank.columns(), &rows)
}

/// Serialized form of a frozen weight vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrozenWeights {
    pub labels: Vec<String>,
    pub weights: Vec<f64>,
    pub entropies: Vec<f64>,
    pub fallback: bool,
    pub n_samples: usize,
}

impl FrozenWeights {
    pub fn from_parts(report: &EntropyReport, weights: &WeightVector) -> Self {
        Self {
            labels: weights.labels().iter().map(|l| l.label()).collect(),
            weights: weights.weights().to_vec(),
            entropies: report.entropies.clone(),
            fallback: weights.is_fallback(),
            n_samples: report.n_samples,
        }
    }

    /// Validates and converts back into a typed weight vector.
    pub fn to_weight_vector(&self) -> Result<WeightVector> {
        if self.labels.len() != self.weights.len() {
            return Err(Error::Config(
                "weights file: labels and weights lengths differ".into(),
            ));
        }
        let labels: Vec<LossItem> = self
            .labels
            .iter()
            .map(|s| LossItem::parse(s))
            .collect::<Result<_>>()?;
        WeightVector::new(labels, self.weights.clone(), self.fallback)
            .map_err(|e| Error::Config(format!("weights file invalid: {e}")))
    }
}
