//! Similarity, distance, and divergence metrics over traffic feature sets,
//! plus classifier-output statistics (confidence, entropy, attack success
//! rate). Entropy and divergence are in nats.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::num;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StatsError {
    ZeroVector,
    ZeroVariance,
    DimMismatch,
    /// NaN or infinity in the input.
    NonFinite,
    DegenerateSamples,
    SingularCovariance,
    InvalidProbVector(&'static str),
    InvalidParam(&'static str),
}

impl fmt::Display for StatsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatsError::ZeroVector => write!(f, "zero-norm vector"),
            StatsError::ZeroVariance => write!(f, "input has zero variance"),
            StatsError::DimMismatch => write!(f, "dimension mismatch"),
            StatsError::NonFinite => write!(f, "non-finite value in input"),
            StatsError::DegenerateSamples => write!(f, "too few or degenerate samples"),
            StatsError::SingularCovariance => write!(f, "covariance matrix is singular"),
            StatsError::InvalidProbVector(what) => write!(f, "invalid probability vector: {what}"),
            StatsError::InvalidParam(what) => write!(f, "invalid parameter: {what}"),
        }
    }
}

impl core::error::Error for StatsError {}

/// Dense row-major numeric matrix with named columns. Construction rejects
/// NaN and infinity so downstream metrics never see them.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<f64>,
    pub column_names: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(
        rows: usize,
        cols: usize,
        data: Vec<f64>,
        column_names: Vec<String>,
    ) -> Result<Self, StatsError> {
        if data.len() != rows * cols || column_names.len() != cols {
            return Err(StatsError::DimMismatch);
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite);
        }
        Ok(FeatureMatrix {
            rows,
            cols,
            data,
            column_names,
        })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows_iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols)
    }

    /// Column-wise mean vector.
    pub fn mean(&self) -> Vec<f64> {
        let mut mean = alloc::vec![0.0; self.cols];
        for row in self.rows_iter() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        let n = self.rows.max(1) as f64;
        for m in &mut mean {
            *m /= n;
        }
        mean
    }
}

/// Cosine similarity: u.v / (|u||v|).
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, StatsError> {
    if u.len() != v.len() {
        return Err(StatsError::DimMismatch);
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu: f64 = num::sqrt(u.iter().fold(0.0, |acc, x| num::hypot_sq(acc, *x)));
    let nv: f64 = num::sqrt(v.iter().fold(0.0, |acc, x| num::hypot_sq(acc, *x)));
    if nu == 0.0 || nv == 0.0 {
        return Err(StatsError::ZeroVector);
    }
    Ok(dot / (nu * nv))
}

fn centered(v: &[f64]) -> Vec<f64> {
    let mean: f64 = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| x - mean).collect()
}

/// Pearson product-moment correlation: cosine of the mean-centered inputs.
pub fn pearson(u: &[f64], v: &[f64]) -> Result<f64, StatsError> {
    if u.len() != v.len() {
        return Err(StatsError::DimMismatch);
    }
    if u.is_empty() {
        return Err(StatsError::DegenerateSamples);
    }
    match cosine(&centered(u), &centered(v)) {
        Ok(r) => Ok(r),
        Err(StatsError::ZeroVector) => Err(StatsError::ZeroVariance),
        Err(e) => Err(e),
    }
}

/// Euclidean distance |u - v|.
pub fn euclidean(u: &[f64], v: &[f64]) -> Result<f64, StatsError> {
    if u.len() != v.len() {
        return Err(StatsError::DimMismatch);
    }
    Ok(num::sqrt(
        u.iter()
            .zip(v)
            .fold(0.0, |acc, (a, b)| num::hypot_sq(acc, a - b)),
    ))
}

mod linalg {
    use super::num;
    use alloc::vec::Vec;

    /// Cholesky factor L (lower triangular, row-major) of a symmetric
    /// positive-definite matrix, or None when not positive definite.
    pub fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
        let mut l = alloc::vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = a[i * n + j];
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if sum <= 0.0 {
                        return None;
                    }
                    l[i * n + i] = num::sqrt(sum);
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Some(l)
    }

    /// Inverse of a symmetric positive-definite matrix via its Cholesky
    /// factor: solve L L^T X = I column by column.
    pub fn spd_inverse(a: &[f64], n: usize) -> Option<Vec<f64>> {
        let l = cholesky(a, n)?;
        let mut inv = alloc::vec![0.0; n * n];
        let mut y = alloc::vec![0.0; n];
        for col in 0..n {
            for i in 0..n {
                let mut sum = if i == col { 1.0 } else { 0.0 };
                for k in 0..i {
                    sum -= l[i * n + k] * y[k];
                }
                y[i] = sum / l[i * n + i];
            }
            for i in (0..n).rev() {
                let mut sum = y[i];
                for k in i + 1..n {
                    sum -= l[k * n + i] * inv[k * n + col];
                }
                inv[i * n + col] = sum / l[i * n + i];
            }
        }
        Some(inv)
    }

    /// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
    /// Returns (eigenvalues, row-major matrix with eigenvectors in rows),
    /// sorted by descending eigenvalue.
    pub fn jacobi_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
        let mut m = a.to_vec();
        let mut v = alloc::vec![0.0; n * n];
        for i in 0..n {
            v[i * n + i] = 1.0;
        }
        for _ in 0..100 {
            let mut off = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    off += m[i * n + j] * m[i * n + j];
                }
            }
            if off < 1e-24 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = m[p * n + q];
                    if num::abs(apq) < 1e-30 {
                        continue;
                    }
                    let app = m[p * n + p];
                    let aqq = m[q * n + q];
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + num::sqrt(1.0 + theta * theta))
                    } else {
                        -1.0 / (-theta + num::sqrt(1.0 + theta * theta))
                    };
                    let c = 1.0 / num::sqrt(1.0 + t * t);
                    let s = t * c;
                    for k in 0..n {
                        let mkp = m[k * n + p];
                        let mkq = m[k * n + q];
                        m[k * n + p] = c * mkp - s * mkq;
                        m[k * n + q] = s * mkp + c * mkq;
                    }
                    for k in 0..n {
                        let mpk = m[p * n + k];
                        let mqk = m[q * n + k];
                        m[p * n + k] = c * mpk - s * mqk;
                        m[q * n + k] = s * mpk + c * mqk;
                    }
                    for k in 0..n {
                        let vpk = v[p * n + k];
                        let vqk = v[q * n + k];
                        v[p * n + k] = c * vpk - s * vqk;
                        v[q * n + k] = s * vpk + c * vqk;
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            m[j * n + j]
                .partial_cmp(&m[i * n + i])
                .unwrap_or(core::cmp::Ordering::Equal)
        });
        let eigenvalues: Vec<f64> = order.iter().map(|&i| m[i * n + i]).collect();
        let mut eigenvectors = alloc::vec![0.0; n * n];
        for (row, &i) in order.iter().enumerate() {
            for k in 0..n {
                eigenvectors[row * n + k] = v[i * n + k];
            }
        }
        (eigenvalues, eigenvectors)
    }
}

/// Reference distribution fitted from a sample matrix: mean, covariance, and
/// the ridge-regularized inverse used by the Mahalanobis distance.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceDistribution {
    pub mean: Vec<f64>,
    pub covariance: Vec<f64>,
    pub inverse_covariance: Vec<f64>,
    pub regularization_epsilon: f64,
    pub dim: usize,
}

impl ReferenceDistribution {
    /// Fit from samples. `epsilon_scale` controls the ridge added before
    /// inversion: eps = epsilon_scale * trace / dim (one-hot blocks make the
    /// raw sample covariance singular). Pass 0.0 to disable regularization.
    pub fn fit(matrix: &FeatureMatrix, epsilon_scale: f64) -> Result<Self, StatsError> {
        if matrix.rows < 2 {
            return Err(StatsError::DegenerateSamples);
        }
        let n = matrix.cols;
        let mean = matrix.mean();
        let mut cov = alloc::vec![0.0; n * n];
        for row in matrix.rows_iter() {
            for i in 0..n {
                let di = row[i] - mean[i];
                for j in i..n {
                    cov[i * n + j] += di * (row[j] - mean[j]);
                }
            }
        }
        let denom = (matrix.rows - 1) as f64;
        for i in 0..n {
            for j in i..n {
                cov[i * n + j] /= denom;
                cov[j * n + i] = cov[i * n + j];
            }
        }
        Self::from_moments(mean, cov, epsilon_scale)
    }

    /// Build from explicit moments (useful for closed-form oracles).
    pub fn from_moments(
        mean: Vec<f64>,
        covariance: Vec<f64>,
        epsilon_scale: f64,
    ) -> Result<Self, StatsError> {
        let n = mean.len();
        if covariance.len() != n * n {
            return Err(StatsError::DimMismatch);
        }
        let trace: f64 = (0..n).map(|i| covariance[i * n + i]).sum();
        let epsilon = epsilon_scale * trace / n as f64;
        let mut regularized = covariance.clone();
        for i in 0..n {
            regularized[i * n + i] += epsilon;
        }
        let inverse = linalg::spd_inverse(&regularized, n).ok_or(StatsError::SingularCovariance)?;
        Ok(ReferenceDistribution {
            mean,
            covariance,
            inverse_covariance: inverse,
            regularization_epsilon: epsilon,
            dim: n,
        })
    }

    /// Squared Mahalanobis distance (x - mean)^T C^-1 (x - mean).
    pub fn mahalanobis_squared(&self, x: &[f64]) -> Result<f64, StatsError> {
        if x.len() != self.dim {
            return Err(StatsError::DimMismatch);
        }
        let n = self.dim;
        let d: Vec<f64> = x.iter().zip(&self.mean).map(|(a, b)| a - b).collect();
        let mut total = 0.0;
        for i in 0..n {
            let acc: f64 = self.inverse_covariance[i * n..(i + 1) * n]
                .iter()
                .zip(&d)
                .map(|(m, dj)| m * dj)
                .sum();
            total += d[i] * acc;
        }
        // clamp tiny negative round-off
        Ok(total.max(0.0))
    }

    pub fn mahalanobis(&self, x: &[f64]) -> Result<f64, StatsError> {
        Ok(num::sqrt(self.mahalanobis_squared(x)?))
    }
}

/// Bandwidth selection for the 1-D Gaussian KDE (scipy's conventions:
/// Scott h = sigma n^(-1/5), Silverman h = sigma (3n/4)^(-1/5)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    Scott,
    Silverman,
    Fixed(f64),
}

/// One-dimensional Gaussian kernel density estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Kde1d {
    samples: Vec<f64>,
    pub bandwidth: f64,
}

impl Kde1d {
    pub fn fit(samples: &[f64], bandwidth: Bandwidth) -> Result<Self, StatsError> {
        if samples.len() < 2 {
            return Err(StatsError::DegenerateSamples);
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite);
        }
        let n = samples.len() as f64;
        let h = match bandwidth {
            Bandwidth::Fixed(h) => {
                if h <= 0.0 {
                    return Err(StatsError::InvalidParam("bandwidth must be positive"));
                }
                h
            }
            rule => {
                let mean = samples.iter().sum::<f64>() / n;
                let var = samples
                    .iter()
                    .fold(0.0, |acc, x| num::hypot_sq(acc, x - mean))
                    / (n - 1.0);
                if var <= 0.0 {
                    return Err(StatsError::DegenerateSamples);
                }
                let sigma = num::sqrt(var);
                let factor = match rule {
                    Bandwidth::Scott => num::powf(n, -0.2),
                    Bandwidth::Silverman => num::powf(3.0 * n / 4.0, -0.2),
                    Bandwidth::Fixed(_) => unreachable!(),
                };
                sigma * factor
            }
        };
        Ok(Kde1d {
            samples: samples.to_vec(),
            bandwidth: h,
        })
    }

    /// Density at x: mean of Gaussian kernels centered at the samples.
    pub fn pdf(&self, x: f64) -> f64 {
        let inv_norm = 1.0 / (self.bandwidth * num::sqrt(2.0 * core::f64::consts::PI));
        let mut total = 0.0;
        for &s in &self.samples {
            let z = (x - s) / self.bandwidth;
            total += num::exp(-0.5 * z * z);
        }
        total * inv_norm / self.samples.len() as f64
    }

    pub fn min_sample(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_sample(&self) -> f64 {
        self.samples
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Quadrature grid for KDE-based divergence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub points: usize,
    /// Fractional range padding on each side of the pooled sample range.
    pub padding: f64,
    /// Density floor preventing log blowup where either estimate vanishes.
    pub floor: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            points: 1024,
            padding: 0.25,
            floor: 1e-12,
        }
    }
}

/// KL(p || q) between two sample sets via 1-D Gaussian KDE (Silverman rule)
/// and trapezoid quadrature over a shared grid.
pub fn kl_divergence_kde(
    p_samples: &[f64],
    q_samples: &[f64],
    grid: &GridSpec,
) -> Result<f64, StatsError> {
    if grid.points < 2 {
        return Err(StatsError::InvalidParam("grid needs at least 2 points"));
    }
    let p = Kde1d::fit(p_samples, Bandwidth::Silverman)?;
    let q = Kde1d::fit(q_samples, Bandwidth::Silverman)?;
    let lo0 = p.min_sample().min(q.min_sample());
    let hi0 = p.max_sample().max(q.max_sample());
    let span = (hi0 - lo0).max(f64::MIN_POSITIVE);
    let lo = lo0 - grid.padding * span - 3.0 * p.bandwidth.max(q.bandwidth);
    let hi = hi0 + grid.padding * span + 3.0 * p.bandwidth.max(q.bandwidth);
    let step = (hi - lo) / (grid.points - 1) as f64;

    let mut kl = 0.0;
    let mut prev: Option<f64> = None;
    for i in 0..grid.points {
        let x = lo + step * i as f64;
        let px = p.pdf(x).max(grid.floor);
        let qx = q.pdf(x).max(grid.floor);
        let integrand = px * num::ln(px / qx);
        if let Some(last) = prev {
            kl += 0.5 * (last + integrand) * step;
        }
        prev = Some(integrand);
    }
    Ok(kl)
}

/// KL(P || Q) between two discrete distributions, in nats. Terms with p_i = 0
/// contribute nothing; q_i = 0 with p_i > 0 is rejected.
pub fn kl_divergence_discrete(p: &[f64], q: &[f64]) -> Result<f64, StatsError> {
    if p.len() != q.len() {
        return Err(StatsError::DimMismatch);
    }
    let mut kl = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi < 0.0 || qi < 0.0 {
            return Err(StatsError::InvalidProbVector("negative entry"));
        }
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Err(StatsError::InvalidProbVector("q vanishes where p does not"));
        }
        kl += pi * num::ln(pi / qi);
    }
    Ok(kl)
}

/// Softmax output vector: entries in [0, 1] summing to 1 within 1e-9.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(probabilities: Vec<f64>) -> Result<Self, StatsError> {
        if probabilities.is_empty() {
            return Err(StatsError::InvalidProbVector("empty"));
        }
        if probabilities
            .iter()
            .any(|&p| !(0.0..=1.0 + 1e-9).contains(&p))
        {
            return Err(StatsError::InvalidProbVector("entry outside [0, 1]"));
        }
        let sum: f64 = probabilities.iter().sum();
        if num::abs(sum - 1.0) > 1e-9 {
            return Err(StatsError::InvalidProbVector("does not sum to 1"));
        }
        Ok(ProbVector(probabilities))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Index of the most probable class.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.0.iter().enumerate() {
            if p > self.0[best] {
                best = i;
            }
        }
        best
    }
}

/// Confidence score, Shannon entropy, and the threshold flags: confidence
/// strictly above 0.9 counts as high, entropy below 0.5 as low and above 1.5
/// as high, overconfident = high confidence with low entropy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceEntropy {
    pub confidence: f64,
    pub entropy: f64,
    pub high_confidence: bool,
    pub low_entropy: bool,
    pub high_entropy: bool,
    pub overconfident: bool,
}

pub fn confidence_entropy(p: &ProbVector) -> ConfidenceEntropy {
    let confidence = p.as_slice().iter().copied().fold(0.0, f64::max);
    let entropy = -p
        .as_slice()
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * num::ln(x))
        .sum::<f64>();
    let high_confidence = confidence > 0.9;
    let low_entropy = entropy < 0.5;
    ConfidenceEntropy {
        confidence,
        entropy,
        high_confidence,
        low_entropy,
        high_entropy: entropy > 1.5,
        overconfident: high_confidence && low_entropy,
    }
}

/// Attack success rate: percentage of predictions that are not the benign
/// label, over the number of crafted samples.
pub fn attack_success_rate<T: PartialEq>(
    predictions: &[T],
    benign: &T,
    n_attack: usize,
) -> Result<f64, StatsError> {
    if n_attack == 0 {
        return Err(StatsError::InvalidParam("n_attack must be positive"));
    }
    let misclassified = predictions.iter().filter(|p| *p != benign).count();
    Ok(100.0 * misclassified as f64 / n_attack as f64)
}

/// Principal components of a sample matrix: project rows onto the top-k
/// eigenvectors of the sample covariance. Column names become pc1..pck.
pub fn pca_project(matrix: &FeatureMatrix, k: usize) -> Result<FeatureMatrix, StatsError> {
    if k == 0 || k > matrix.cols {
        return Err(StatsError::InvalidParam("component count out of range"));
    }
    if matrix.rows < 2 {
        return Err(StatsError::DegenerateSamples);
    }
    let reference = ReferenceDistribution::fit(matrix, 0.0)
        .or_else(|_| ReferenceDistribution::fit(matrix, 1e-9))?;
    let components = principal_axes(&reference.covariance, matrix.cols, k);
    project_rows(matrix, &reference.mean, &components, k)
}

/// Top-k eigenvectors (rows) of a covariance matrix.
pub fn principal_axes(covariance: &[f64], dim: usize, k: usize) -> Vec<f64> {
    let (_, vectors) = linalg::jacobi_eigen(covariance, dim);
    vectors[..k * dim].to_vec()
}

fn project_rows(
    matrix: &FeatureMatrix,
    mean: &[f64],
    components: &[f64],
    k: usize,
) -> Result<FeatureMatrix, StatsError> {
    let d = matrix.cols;
    let mut data = Vec::with_capacity(matrix.rows * k);
    for row in matrix.rows_iter() {
        for c in 0..k {
            let mut acc = 0.0;
            for j in 0..d {
                acc += (row[j] - mean[j]) * components[c * d + j];
            }
            data.push(acc);
        }
    }
    let names = (1..=k).map(|i| alloc::format!("pc{i}")).collect();
    FeatureMatrix::new(matrix.rows, k, data, names)
}
