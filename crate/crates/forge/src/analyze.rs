//! Crafted-vs-original analysis pipeline: encode two feature CSVs against the
//! reference set and compute the similarity, distance, and divergence
//! metrics.
//!
//! Encoding mirrors the usual NIDS preprocessing: raw payload columns
//! (tcp.payload, tcp.options, mqtt.msg, mqtt.msg_decoded_as) and frame.time
//! are dropped, a small set of string columns is one-hot encoded, and
//! everything else (including 0x-hex fields) is parsed numerically and
//! z-scored against the reference set.

use fpa_core::stats::{
    cosine, euclidean, kl_divergence_kde, pearson, principal_axes, FeatureMatrix, GridSpec,
    ReferenceDistribution, StatsError,
};
use fpa_core::surrogate::{encode, fit_encoder, EncoderMode, SurrogateError};

use crate::csvio::CsvTable;

#[derive(Debug, thiserror::Error)]
pub enum AnalyzeError {
    #[error("reference and target column headers differ (IID requirement)")]
    HeaderMismatch,
    #[error("reference and target must both be non-empty")]
    Empty,
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Encoder(#[from] SurrogateError),
}

/// Columns never fed to the encoder.
const DROPPED: [&str; 7] = [
    "frame.time",
    "tcp.payload",
    "tcp.options",
    "mqtt.msg",
    "mqtt.msg_decoded_as",
    "Attack_label",
    "Attack_type",
];

/// Default one-hot columns; the rest are parsed numerically.
const DEFAULT_CATEGORICAL: [&str; 4] =
    ["ip.src_host", "ip.dst_host", "mqtt.protoname", "mqtt.topic"];

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    /// One-hot columns; None selects the defaults present in the header.
    pub categorical: Option<Vec<String>>,
    /// Dimensions of the PCA-reduced joint KL estimate.
    pub pca_dims: usize,
    /// Sample cap per side for pairwise metric averaging.
    pub pairwise_cap: usize,
    /// Ridge scale for the covariance inverse.
    pub epsilon_scale: f64,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            categorical: None,
            pca_dims: 2,
            pairwise_cap: 200,
            epsilon_scale: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnalyzeReport {
    pub metrics: Vec<(String, f64)>,
}

impl AnalyzeReport {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.metrics
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }
}

/// Column names that survive preprocessing, preserving order. The label
/// column is always removed on top of the fixed drop list.
pub fn kept_column_names(columns: &[String], label_column: &str) -> Vec<String> {
    columns
        .iter()
        .filter(|c| !DROPPED.contains(&c.as_str()) && c.as_str() != label_column)
        .cloned()
        .collect()
}

/// The default one-hot columns among a kept set.
pub fn default_categorical(kept: &[String]) -> Vec<String> {
    DEFAULT_CATEGORICAL
        .iter()
        .filter(|c| kept.iter().any(|n| n == *c))
        .map(|c| c.to_string())
        .collect()
}

fn kept_columns(table: &CsvTable) -> (Vec<String>, Vec<usize>) {
    let mut names = Vec::new();
    let mut indices = Vec::new();
    for (i, name) in table.columns.iter().enumerate() {
        if !DROPPED.contains(&name.as_str()) {
            names.push(name.clone());
            indices.push(i);
        }
    }
    (names, indices)
}

fn select_rows(table: &CsvTable, indices: &[usize]) -> Vec<Vec<String>> {
    table
        .rows
        .iter()
        .map(|row| indices.iter().map(|&i| row[i].clone()).collect())
        .collect()
}

fn stride_sample(rows: usize, cap: usize) -> Vec<usize> {
    if rows <= cap {
        return (0..rows).collect();
    }
    (0..cap).map(|i| i * rows / cap).collect()
}

fn matrix_from(
    name: &str,
    encoded: Vec<Vec<f64>>,
    dims: usize,
) -> Result<FeatureMatrix, AnalyzeError> {
    let rows = encoded.len();
    let data: Vec<f64> = encoded.into_iter().flatten().collect();
    let names = (0..dims).map(|i| format!("{name}{i}")).collect();
    Ok(FeatureMatrix::new(rows, dims, data, names)?)
}

pub fn analyze_tables(
    reference: &CsvTable,
    target: &CsvTable,
    opts: &AnalyzeOptions,
) -> Result<AnalyzeReport, AnalyzeError> {
    if reference.columns != target.columns {
        return Err(AnalyzeError::HeaderMismatch);
    }
    if reference.rows.is_empty() || target.rows.is_empty() {
        return Err(AnalyzeError::Empty);
    }
    let (names, indices) = kept_columns(reference);
    let ref_rows = select_rows(reference, &indices);
    let tgt_rows = select_rows(target, &indices);

    let categorical: Vec<String> = match &opts.categorical {
        Some(cols) => cols.clone(),
        None => default_categorical(&names),
    };
    let vocab = fit_encoder(&names, &ref_rows, &categorical, EncoderMode::Strict)?;
    let dims = vocab.dim();

    let ref_encoded: Vec<Vec<f64>> = ref_rows.iter().map(|r| encode(&vocab, r)).collect();
    let tgt_encoded: Vec<Vec<f64>> = tgt_rows.iter().map(|r| encode(&vocab, r)).collect();
    let ref_matrix = matrix_from("f", ref_encoded, dims)?;
    let tgt_matrix = matrix_from("f", tgt_encoded, dims)?;

    let mut metrics: Vec<(String, f64)> = Vec::new();
    metrics.push(("encoded_dims".into(), dims as f64));
    metrics.push(("reference_rows".into(), ref_matrix.rows as f64));
    metrics.push(("target_rows".into(), tgt_matrix.rows as f64));

    // centroid mode
    let ref_mean = ref_matrix.mean();
    let tgt_mean = tgt_matrix.mean();
    push_ok(
        &mut metrics,
        "cosine_centroid",
        cosine(&tgt_mean, &ref_mean),
    );
    push_ok(
        &mut metrics,
        "pearson_centroid",
        pearson(&tgt_mean, &ref_mean),
    );
    push_ok(
        &mut metrics,
        "euclidean_centroid",
        euclidean(&tgt_mean, &ref_mean),
    );

    // pairwise-averaged mode over strided subsamples
    let ref_idx = stride_sample(ref_matrix.rows, opts.pairwise_cap);
    let tgt_idx = stride_sample(tgt_matrix.rows, opts.pairwise_cap);
    let mut sums = [0.0f64; 3];
    let mut counts = [0usize; 3];
    for &i in &tgt_idx {
        for &j in &ref_idx {
            let t = tgt_matrix.row(i);
            let r = ref_matrix.row(j);
            if let Ok(v) = cosine(t, r) {
                sums[0] += v;
                counts[0] += 1;
            }
            if let Ok(v) = pearson(t, r) {
                sums[1] += v;
                counts[1] += 1;
            }
            if let Ok(v) = euclidean(t, r) {
                sums[2] += v;
                counts[2] += 1;
            }
        }
    }
    for (k, name) in [
        "cosine_pairwise_mean",
        "pearson_pairwise_mean",
        "euclidean_pairwise_mean",
    ]
    .iter()
    .enumerate()
    {
        if counts[k] > 0 {
            metrics.push(((*name).into(), sums[k] / counts[k] as f64));
        }
    }

    // Mahalanobis of targets against the reference distribution
    let reference_dist = ReferenceDistribution::fit(&ref_matrix, opts.epsilon_scale)?;
    let mut sum_sqrt = 0.0;
    let mut sum_sq = 0.0;
    for row in tgt_matrix.rows_iter() {
        sum_sq += reference_dist.mahalanobis_squared(row)?;
        sum_sqrt += reference_dist.mahalanobis(row)?;
    }
    metrics.push(("mahalanobis_mean".into(), sum_sqrt / tgt_matrix.rows as f64));
    metrics.push((
        "mahalanobis_squared_mean".into(),
        sum_sq / tgt_matrix.rows as f64,
    ));
    let mut base_sqrt = 0.0;
    for row in ref_matrix.rows_iter() {
        base_sqrt += reference_dist.mahalanobis(row)?;
    }
    metrics.push((
        "mahalanobis_reference_baseline".into(),
        base_sqrt / ref_matrix.rows as f64,
    ));

    // per-feature 1-D KL(target || reference)
    let grid = GridSpec::default();
    let mut kl_sum = 0.0;
    let mut kl_max = 0.0f64;
    let mut used = 0usize;
    let mut skipped = 0usize;
    for d in 0..dims {
        let p: Vec<f64> = tgt_matrix.rows_iter().map(|r| r[d]).collect();
        let q: Vec<f64> = ref_matrix.rows_iter().map(|r| r[d]).collect();
        match kl_divergence_kde(&p, &q, &grid) {
            Ok(kl) => {
                kl_sum += kl;
                kl_max = kl_max.max(kl);
                used += 1;
            }
            Err(_) => skipped += 1,
        }
    }
    if used > 0 {
        metrics.push(("kl_per_feature_mean".into(), kl_sum / used as f64));
        metrics.push(("kl_per_feature_max".into(), kl_max));
    }
    metrics.push(("kl_features_used".into(), used as f64));
    metrics.push(("kl_features_skipped".into(), skipped as f64));

    // PCA-reduced joint KL over the reference's principal axes
    let k = opts.pca_dims.min(dims).max(1);
    let axes = principal_axes(&reference_dist.covariance, dims, k);
    let project = |m: &FeatureMatrix| -> Vec<Vec<f64>> {
        m.rows_iter()
            .map(|row| {
                (0..k)
                    .map(|c| {
                        (0..dims)
                            .map(|j| (row[j] - reference_dist.mean[j]) * axes[c * dims + j])
                            .sum()
                    })
                    .collect()
            })
            .collect()
    };
    let p_proj = project(&tgt_matrix);
    let q_proj = project(&ref_matrix);
    let joint = if k >= 2 {
        kl_joint_product_kde(&p_proj, &q_proj, 96, grid.floor)
    } else {
        None
    };
    match joint {
        Some(kl) => metrics.push(("kl_pca_joint".into(), kl)),
        None => {
            // degenerate higher components: fall back to the leading axis
            let p: Vec<f64> = p_proj.iter().map(|r| r[0]).collect();
            let q: Vec<f64> = q_proj.iter().map(|r| r[0]).collect();
            if let Ok(kl) = kl_divergence_kde(&p, &q, &grid) {
                metrics.push(("kl_pca_joint".into(), kl));
            }
        }
    }

    Ok(AnalyzeReport { metrics })
}

fn push_ok(metrics: &mut Vec<(String, f64)>, name: &str, value: Result<f64, StatsError>) {
    if let Ok(v) = value {
        metrics.push((name.into(), v));
    }
}

/// Joint KL over d-dimensional points (d = 2 in practice) with a
/// product-Gaussian KDE and tensor-grid trapezoid quadrature. Samples are
/// strided down to keep the grid evaluation cheap. Returns None when either
/// side is degenerate.
fn kl_joint_product_kde(
    p: &[Vec<f64>],
    q: &[Vec<f64>],
    grid_per_dim: usize,
    floor: f64,
) -> Option<f64> {
    let d = p.first()?.len();
    if d != 2 || q.is_empty() {
        return None;
    }
    let cap = 400;
    let p_idx = stride_sample(p.len(), cap);
    let q_idx = stride_sample(q.len(), cap);
    let p_sub: Vec<&Vec<f64>> = p_idx.iter().map(|&i| &p[i]).collect();
    let q_sub: Vec<&Vec<f64>> = q_idx.iter().map(|&i| &q[i]).collect();

    let bandwidth = |set: &[&Vec<f64>], dim: usize| -> Option<f64> {
        let n = set.len() as f64;
        if n < 2.0 {
            return None;
        }
        let mean = set.iter().map(|r| r[dim]).sum::<f64>() / n;
        let var = set.iter().map(|r| (r[dim] - mean).powi(2)).sum::<f64>() / (n - 1.0);
        if var <= 0.0 {
            return None;
        }
        Some(var.sqrt() * (3.0 * n / 4.0).powf(-1.0 / 6.0))
    };
    let hp = [bandwidth(&p_sub, 0)?, bandwidth(&p_sub, 1)?];
    let hq = [bandwidth(&q_sub, 0)?, bandwidth(&q_sub, 1)?];

    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for row in p_sub.iter().chain(q_sub.iter()) {
        for dim in 0..2 {
            lo[dim] = lo[dim].min(row[dim]);
            hi[dim] = hi[dim].max(row[dim]);
        }
    }
    for dim in 0..2 {
        let pad = 0.25 * (hi[dim] - lo[dim]).max(f64::MIN_POSITIVE) + 3.0 * hp[dim].max(hq[dim]);
        lo[dim] -= pad;
        hi[dim] += pad;
    }
    let n = grid_per_dim;
    let step = [
        (hi[0] - lo[0]) / (n - 1) as f64,
        (hi[1] - lo[1]) / (n - 1) as f64,
    ];

    let density = |set: &[&Vec<f64>], h: &[f64; 2], x: f64, y: f64| -> f64 {
        let norm = 1.0 / (set.len() as f64 * h[0] * h[1] * 2.0 * std::f64::consts::PI);
        let mut total = 0.0;
        for row in set {
            let zx = (x - row[0]) / h[0];
            let zy = (y - row[1]) / h[1];
            total += (-0.5 * (zx * zx + zy * zy)).exp();
        }
        total * norm
    };

    let mut kl = 0.0;
    for i in 0..n {
        let x = lo[0] + step[0] * i as f64;
        let wi = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        for j in 0..n {
            let y = lo[1] + step[1] * j as f64;
            let wj = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
            let px = density(&p_sub, &hp, x, y).max(floor);
            let qx = density(&q_sub, &hq, x, y).max(floor);
            kl += wi * wj * px * (px / qx).ln();
        }
    }
    Some(kl * step[0] * step[1])
}
