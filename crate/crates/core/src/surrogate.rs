//! Desk-scale surrogate classifier: one-hot + z-score encoding of feature
//! rows and a multinomial logistic (softmax) model trained by gradient
//! descent. It exists to exercise the categorical-distortion mechanism that
//! whitespace-padded topics introduce, and to feed probability vectors into
//! the statistics suite. It makes no claim of matching any production NIDS.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::num;
use crate::stats::{attack_success_rate, confidence_entropy, ProbVector, StatsError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SurrogateError {
    /// Fewer than two distinct labels in the training set.
    DegenerateLabels,
    DimMismatch,
    EmptyInput,
    UnknownColumn(String),
    ParseError(String),
    Stats(StatsError),
}

impl fmt::Display for SurrogateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurrogateError::DegenerateLabels => write!(f, "need at least two distinct labels"),
            SurrogateError::DimMismatch => write!(f, "feature dimension mismatch"),
            SurrogateError::EmptyInput => write!(f, "empty input"),
            SurrogateError::UnknownColumn(c) => write!(f, "unknown column: {c}"),
            SurrogateError::ParseError(what) => write!(f, "parse error: {what}"),
            SurrogateError::Stats(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for SurrogateError {}

impl From<StatsError> for SurrogateError {
    fn from(e: StatsError) -> Self {
        SurrogateError::Stats(e)
    }
}

/// How the encoder treats categories unseen at fit time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncoderMode {
    /// Dimension frozen at fit; unseen categories encode as an all-zero block.
    Strict,
    /// Unseen categories append new columns, deliberately breaking the
    /// train-time feature space.
    Extended,
}

/// Per-column encoding state: category vocabularies in first-seen order for
/// categorical columns, mean/std for numeric ones.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderVocab {
    pub mode: EncoderMode,
    /// (column name, source column index, categories in first-seen order)
    categorical: Vec<(String, usize, Vec<String>)>,
    /// (column name, source column index, mean, std)
    numeric: Vec<(String, usize, f64, f64)>,
}

impl EncoderVocab {
    /// Total encoded dimension.
    pub fn dim(&self) -> usize {
        self.categorical
            .iter()
            .map(|(_, _, cats)| cats.len())
            .sum::<usize>()
            + self.numeric.len()
    }

    /// Number of one-hot columns for a categorical source column.
    pub fn categories(&self, column: &str) -> Option<&[String]> {
        self.categorical
            .iter()
            .find(|(name, _, _)| name == column)
            .map(|(_, _, cats)| cats.as_slice())
    }

    /// Offset of a categorical column's one-hot block in the encoded vector.
    pub fn block_range(&self, column: &str) -> Option<(usize, usize)> {
        let mut offset = 0;
        for (name, _, cats) in &self.categorical {
            if name == column {
                return Some((offset, offset + cats.len()));
            }
            offset += cats.len();
        }
        None
    }
}

fn parse_number(raw: &str) -> f64 {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return 0.0;
    }
    if let Some(hex) = trimmed.strip_prefix("0x") {
        if let Ok(v) = u64::from_str_radix(hex, 16) {
            return v as f64;
        }
    }
    trimmed.parse::<f64>().unwrap_or(0.0)
}

/// Fit the encoder: category vocabularies in first-seen row order for the
/// named categorical columns, mean and standard deviation for the rest.
pub fn fit_encoder(
    columns: &[String],
    rows: &[Vec<String>],
    categorical_columns: &[String],
    mode: EncoderMode,
) -> Result<EncoderVocab, SurrogateError> {
    if rows.is_empty() {
        return Err(SurrogateError::EmptyInput);
    }
    for c in categorical_columns {
        if !columns.contains(c) {
            return Err(SurrogateError::UnknownColumn(c.clone()));
        }
    }
    let mut categorical = Vec::new();
    let mut numeric = Vec::new();
    for (idx, name) in columns.iter().enumerate() {
        if categorical_columns.contains(name) {
            let mut cats: Vec<String> = Vec::new();
            for row in rows {
                let value = row.get(idx).cloned().unwrap_or_default();
                if !cats.contains(&value) {
                    cats.push(value);
                }
            }
            categorical.push((name.clone(), idx, cats));
        } else {
            let n = rows.len() as f64;
            let mean = rows.iter().map(|r| parse_number(&r[idx])).sum::<f64>() / n;
            let var = rows
                .iter()
                .map(|r| parse_number(&r[idx]))
                .fold(0.0, |acc, v| num::hypot_sq(acc, v - mean))
                / n;
            numeric.push((name.clone(), idx, mean, num::sqrt(var)));
        }
    }
    Ok(EncoderVocab {
        mode,
        categorical,
        numeric,
    })
}

/// Extend a vocabulary with categories appearing in new rows (the Extended
/// mode's feature-space growth). Numeric statistics stay frozen.
pub fn extend_vocab(vocab: &mut EncoderVocab, rows: &[Vec<String>]) {
    for (_, idx, cats) in &mut vocab.categorical {
        for row in rows {
            let value = row.get(*idx).cloned().unwrap_or_default();
            if !cats.contains(&value) {
                cats.push(value);
            }
        }
    }
}

/// Encode one row: one-hot blocks for categorical columns (presence 1,
/// absence 0), z-scored values for numeric ones. In strict mode an unseen
/// category yields an all-zero block.
pub fn encode(vocab: &EncoderVocab, row: &[String]) -> Vec<f64> {
    let mut out = Vec::with_capacity(vocab.dim());
    for (_, idx, cats) in &vocab.categorical {
        let value = row.get(*idx).map(String::as_str).unwrap_or("");
        for cat in cats {
            out.push(if cat == value { 1.0 } else { 0.0 });
        }
    }
    for (_, idx, mean, std) in &vocab.numeric {
        let v = row.get(*idx).map(|s| parse_number(s)).unwrap_or(0.0);
        out.push(if *std > 0.0 { (v - mean) / std } else { 0.0 });
    }
    out
}

/// Softmax model parameters: class-major weight matrix (K x d) plus bias.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub classes: usize,
    pub dim: usize,
}

impl ModelParams {
    pub fn zeros(classes: usize, dim: usize) -> Self {
        ModelParams {
            weights: alloc::vec![0.0; classes * dim],
            bias: alloc::vec![0.0; classes],
            classes,
            dim,
        }
    }
}

/// Training hyperparameters. The seed is recorded in the model metadata; with
/// full-batch descent from zero initialization the fit itself is already
/// deterministic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainParams {
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            epochs: 300,
            learning_rate: 0.5,
            l2: 0.0,
            seed: 0,
        }
    }
}

/// A fitted softmax linear classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxModel {
    pub params: ModelParams,
    pub labels: Vec<String>,
    pub hyper: TrainParams,
}

fn softmax_row(logits: &[f64]) -> Vec<f64> {
    // max-logit subtraction keeps exp() in range
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| num::exp(z - max)).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn logits(params: &ModelParams, x: &[f64]) -> Vec<f64> {
    params
        .weights
        .chunks_exact(params.dim)
        .zip(&params.bias)
        .map(|(row, b)| row.iter().zip(x).fold(*b, |z, (w, v)| z + w * v))
        .collect()
}

/// Mean cross-entropy loss over a dataset (plus L2 penalty).
pub fn cross_entropy_loss(params: &ModelParams, x: &[Vec<f64>], y: &[usize], l2: f64) -> f64 {
    let n = x.len() as f64;
    let mut loss = 0.0;
    for (xi, &yi) in x.iter().zip(y) {
        let p = softmax_row(&logits(params, xi));
        loss -= num::ln(p[yi].max(1e-300));
    }
    let penalty: f64 = params.weights.iter().map(|w| w * w).sum::<f64>();
    loss / n + 0.5 * l2 * penalty
}

/// Analytic gradient of the loss: ((softmax - onehot) x^T) / n per class,
/// plus the L2 term on weights.
pub fn cross_entropy_grad(
    params: &ModelParams,
    x: &[Vec<f64>],
    y: &[usize],
    l2: f64,
) -> ModelParams {
    let n = x.len() as f64;
    let mut grad = ModelParams::zeros(params.classes, params.dim);
    for (xi, &yi) in x.iter().zip(y) {
        let p = softmax_row(&logits(params, xi));
        for (k, &pk) in p.iter().enumerate() {
            let delta = pk - if k == yi { 1.0 } else { 0.0 };
            grad.bias[k] += delta;
            let row = &mut grad.weights[k * params.dim..(k + 1) * params.dim];
            for (g, v) in row.iter_mut().zip(xi) {
                *g += delta * v;
            }
        }
    }
    for g in &mut grad.bias {
        *g /= n;
    }
    for (g, w) in grad.weights.iter_mut().zip(&params.weights) {
        *g = *g / n + l2 * w;
    }
    grad
}

/// Train by full-batch gradient descent on the convex cross-entropy
/// objective, starting from zeros.
pub fn train(
    x: &[Vec<f64>],
    labels: &[String],
    hyper: TrainParams,
) -> Result<SoftmaxModel, SurrogateError> {
    if x.is_empty() || x.len() != labels.len() {
        return Err(SurrogateError::EmptyInput);
    }
    let dim = x[0].len();
    if x.iter().any(|r| r.len() != dim) {
        return Err(SurrogateError::DimMismatch);
    }
    let mut class_names: Vec<String> = Vec::new();
    let mut y = Vec::with_capacity(labels.len());
    for label in labels {
        let idx = match class_names.iter().position(|c| c == label) {
            Some(i) => i,
            None => {
                class_names.push(label.clone());
                class_names.len() - 1
            }
        };
        y.push(idx);
    }
    if class_names.len() < 2 {
        return Err(SurrogateError::DegenerateLabels);
    }

    let mut params = ModelParams::zeros(class_names.len(), dim);
    for _ in 0..hyper.epochs {
        let grad = cross_entropy_grad(&params, x, &y, hyper.l2);
        for (w, g) in params.weights.iter_mut().zip(&grad.weights) {
            *w -= hyper.learning_rate * g;
        }
        for (b, g) in params.bias.iter_mut().zip(&grad.bias) {
            *b -= hyper.learning_rate * g;
        }
    }
    Ok(SoftmaxModel {
        params,
        labels: class_names,
        hyper,
    })
}

/// Class probabilities for one encoded sample.
pub fn predict_proba(model: &SoftmaxModel, x: &[f64]) -> Result<ProbVector, SurrogateError> {
    if x.len() != model.params.dim {
        return Err(SurrogateError::DimMismatch);
    }
    let p = softmax_row(&logits(&model.params, x));
    Ok(ProbVector::new(p)?)
}

/// Predicted label for one encoded sample.
pub fn predict_label<'m>(model: &'m SoftmaxModel, x: &[f64]) -> Result<&'m str, SurrogateError> {
    let p = predict_proba(model, x)?;
    Ok(&model.labels[p.argmax()])
}

/// Per-class slice of an evaluation report.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassReport {
    pub label: String,
    pub count: usize,
    pub mean_confidence: f64,
    pub geo_mean_confidence: f64,
    pub mean_entropy: f64,
    pub geo_mean_entropy: f64,
    pub high_confidence: usize,
    pub low_entropy: usize,
    pub high_entropy: usize,
    pub overconfident: usize,
}

/// Evaluation of crafted traffic against a fitted model: attack success rate
/// plus confidence/entropy statistics per misclassification target.
#[derive(Debug, Clone, PartialEq)]
pub struct FpaReport {
    pub asr_percent: f64,
    pub total: usize,
    pub misclassified: usize,
    pub per_class: Vec<ClassReport>,
}

fn geometric_mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    if values.iter().any(|&v| v <= 0.0) {
        return 0.0;
    }
    let log_sum: f64 = values.iter().map(|&v| num::ln(v)).sum();
    num::exp(log_sum / values.len() as f64)
}

/// Classify crafted rows and aggregate the report. Rows are encoded with the
/// vocabulary in strict mode, as a deployed pipeline would.
pub fn evaluate_fpa(
    model: &SoftmaxModel,
    vocab: &EncoderVocab,
    crafted_rows: &[Vec<String>],
    benign_label: &str,
) -> Result<FpaReport, SurrogateError> {
    if crafted_rows.is_empty() {
        return Err(SurrogateError::EmptyInput);
    }
    let mut predictions: Vec<String> = Vec::with_capacity(crafted_rows.len());
    let mut by_class: Vec<(String, Vec<f64>, Vec<f64>)> = Vec::new();
    for row in crafted_rows {
        let encoded = encode(vocab, row);
        let proba = predict_proba(model, &encoded)?;
        let ce = confidence_entropy(&proba);
        let label = model.labels[proba.argmax()].clone();
        if label != benign_label {
            match by_class.iter_mut().find(|(l, _, _)| *l == label) {
                Some((_, confs, ents)) => {
                    confs.push(ce.confidence);
                    ents.push(ce.entropy);
                }
                None => by_class.push((
                    label.clone(),
                    alloc::vec![ce.confidence],
                    alloc::vec![ce.entropy],
                )),
            }
        }
        predictions.push(label);
    }
    let benign_owned = benign_label.to_string();
    let asr = attack_success_rate(&predictions, &benign_owned, crafted_rows.len())?;
    let misclassified = predictions.iter().filter(|p| **p != benign_owned).count();

    let per_class = by_class
        .into_iter()
        .map(|(label, confs, ents)| {
            let n = confs.len();
            let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
            let count_if = |v: &[f64], f: &dyn Fn(f64) -> bool| v.iter().filter(|&&x| f(x)).count();
            ClassReport {
                label,
                count: n,
                mean_confidence: mean(&confs),
                geo_mean_confidence: geometric_mean(&confs),
                mean_entropy: mean(&ents),
                geo_mean_entropy: geometric_mean(&ents),
                high_confidence: count_if(&confs, &|c| c > 0.9),
                low_entropy: count_if(&ents, &|e| e < 0.5),
                high_entropy: count_if(&ents, &|e| e > 1.5),
                overconfident: confs
                    .iter()
                    .zip(&ents)
                    .filter(|(&c, &e)| c > 0.9 && e < 0.5)
                    .count(),
            }
        })
        .collect();

    Ok(FpaReport {
        asr_percent: asr,
        total: crafted_rows.len(),
        misclassified,
        per_class,
    })
}

/// Percent-encode the bytes that would break the line-oriented text format:
/// '%', ',', whitespace, and control characters.
fn escape_value(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for b in s.bytes() {
        if b <= 0x20 || b == b'%' || b == b',' || b >= 0x7F {
            out.push_str(&format!("%{b:02X}"));
        } else {
            out.push(b as char);
        }
    }
    out
}

fn unescape_value(s: &str) -> Result<String, SurrogateError> {
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' {
            if i + 2 > bytes.len() {
                return Err(SurrogateError::ParseError("dangling escape".to_string()));
            }
            let hex = core::str::from_utf8(&bytes[i + 1..i + 3])
                .map_err(|_| SurrogateError::ParseError("bad escape".to_string()))?;
            let b = u8::from_str_radix(hex, 16)
                .map_err(|_| SurrogateError::ParseError("bad escape".to_string()))?;
            out.push(b);
            i += 3;
        } else {
            out.push(bytes[i]);
            i += 1;
        }
    }
    String::from_utf8(out).map_err(|_| SurrogateError::ParseError("bad UTF-8".to_string()))
}

/// Serialize an encoder vocabulary as a self-describing text block. Category
/// values are percent-escaped so padded topics survive byte-exactly.
pub fn vocab_to_text(vocab: &EncoderVocab) -> String {
    let mut out = String::new();
    out.push_str("fpa-encoder v1\n");
    out.push_str(&format!(
        "mode: {}\n",
        match vocab.mode {
            EncoderMode::Strict => "strict",
            EncoderMode::Extended => "extended",
        }
    ));
    for (name, idx, cats) in &vocab.categorical {
        let values: Vec<String> = cats.iter().map(|c| escape_value(c)).collect();
        out.push_str(&format!("cat {idx} {name}: {}\n", values.join(",")));
    }
    for (name, idx, mean, std) in &vocab.numeric {
        out.push_str(&format!("num {idx} {name}: {mean:e} {std:e}\n"));
    }
    out
}

/// Parse a vocabulary previously written by `vocab_to_text`.
pub fn vocab_from_text(text: &str) -> Result<EncoderVocab, SurrogateError> {
    let bad = |what: &str| SurrogateError::ParseError(what.to_string());
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("fpa-encoder v1") {
        return Err(bad("unrecognized encoder header"));
    }
    let mut mode = EncoderMode::Strict;
    let mut categorical = Vec::new();
    let mut numeric = Vec::new();
    for line in lines {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("mode:") {
            mode = match rest.trim() {
                "strict" => EncoderMode::Strict,
                "extended" => EncoderMode::Extended,
                other => return Err(SurrogateError::ParseError(format!("bad mode {other}"))),
            };
        } else if let Some(rest) = line.strip_prefix("cat ") {
            let (head, values) = rest
                .split_once(':')
                .ok_or_else(|| bad("cat line missing ':'"))?;
            let mut parts = head.split_whitespace();
            let idx: usize = parts
                .next()
                .ok_or_else(|| bad("cat line missing index"))?
                .parse()
                .map_err(|_| bad("bad cat index"))?;
            let name = parts.next().ok_or_else(|| bad("cat line missing name"))?;
            // values are percent-escaped, so trimming cannot eat content; an
            // empty segment is the legitimate empty-string category
            let cats = values
                .trim()
                .split(',')
                .map(unescape_value)
                .collect::<Result<Vec<_>, _>>()?;
            categorical.push((name.to_string(), idx, cats));
        } else if let Some(rest) = line.strip_prefix("num ") {
            let (head, values) = rest
                .split_once(':')
                .ok_or_else(|| bad("num line missing ':'"))?;
            let mut parts = head.split_whitespace();
            let idx: usize = parts
                .next()
                .ok_or_else(|| bad("num line missing index"))?
                .parse()
                .map_err(|_| bad("bad num index"))?;
            let name = parts.next().ok_or_else(|| bad("num line missing name"))?;
            let mut vals = values.split_whitespace();
            let mean: f64 = vals
                .next()
                .ok_or_else(|| bad("num line missing mean"))?
                .parse()
                .map_err(|_| bad("bad mean"))?;
            let std: f64 = vals
                .next()
                .ok_or_else(|| bad("num line missing std"))?
                .parse()
                .map_err(|_| bad("bad std"))?;
            numeric.push((name.to_string(), idx, mean, std));
        } else {
            return Err(SurrogateError::ParseError(format!(
                "unexpected line {line}"
            )));
        }
    }
    Ok(EncoderVocab {
        mode,
        categorical,
        numeric,
    })
}

/// Serialize a model as a self-describing text block (decimal weights).
pub fn model_to_text(model: &SoftmaxModel) -> String {
    let mut out = String::new();
    out.push_str("fpa-softmax v1\n");
    out.push_str(&format!("classes: {}\n", model.labels.join(",")));
    out.push_str(&format!("dim: {}\n", model.params.dim));
    out.push_str(&format!(
        "meta: epochs={} lr={:e} l2={:e} seed={}\n",
        model.hyper.epochs, model.hyper.learning_rate, model.hyper.l2, model.hyper.seed
    ));
    out.push_str("bias:");
    for b in &model.params.bias {
        out.push_str(&format!(" {b:e}"));
    }
    out.push('\n');
    for k in 0..model.params.classes {
        out.push_str(&format!("w{k}:"));
        for w in &model.params.weights[k * model.params.dim..(k + 1) * model.params.dim] {
            out.push_str(&format!(" {w:e}"));
        }
        out.push('\n');
    }
    out
}

/// Parse a model previously written by `model_to_text`.
pub fn model_from_text(text: &str) -> Result<SoftmaxModel, SurrogateError> {
    let bad = |what: &str| SurrogateError::ParseError(what.to_string());
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty input"))?;
    if header.trim() != "fpa-softmax v1" {
        return Err(bad("unrecognized header"));
    }
    let mut labels: Vec<String> = Vec::new();
    let mut dim = 0usize;
    let mut hyper = TrainParams::default();
    let mut bias: Vec<f64> = Vec::new();
    let mut weight_rows: Vec<Vec<f64>> = Vec::new();

    let parse_floats = |s: &str| -> Result<Vec<f64>, SurrogateError> {
        s.split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| SurrogateError::ParseError(format!("bad float {tok}")))
            })
            .collect()
    };

    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("classes:") {
            labels = rest
                .trim()
                .split(',')
                .map(|s| s.trim().to_string())
                .collect();
        } else if let Some(rest) = line.strip_prefix("dim:") {
            dim = rest.trim().parse().map_err(|_| bad("bad dim"))?;
        } else if let Some(rest) = line.strip_prefix("meta:") {
            for field in rest.split_whitespace() {
                let mut parts = field.splitn(2, '=');
                let key = parts.next().unwrap_or("");
                let value = parts.next().unwrap_or("");
                match key {
                    "epochs" => hyper.epochs = value.parse().map_err(|_| bad("bad epochs"))?,
                    "lr" => {
                        hyper.learning_rate = value.parse().map_err(|_| bad("bad lr"))?;
                    }
                    "l2" => hyper.l2 = value.parse().map_err(|_| bad("bad l2"))?,
                    "seed" => hyper.seed = value.parse().map_err(|_| bad("bad seed"))?,
                    _ => {}
                }
            }
        } else if let Some(rest) = line.strip_prefix("bias:") {
            bias = parse_floats(rest)?;
        } else if line.starts_with('w') {
            let rest = line
                .split_once(':')
                .map(|(_, rest)| rest)
                .ok_or_else(|| bad("weight row missing ':'"))?;
            weight_rows.push(parse_floats(rest)?);
        } else {
            return Err(SurrogateError::ParseError(format!(
                "unexpected line {line}"
            )));
        }
    }

    if labels.len() < 2 {
        return Err(bad("need at least two classes"));
    }
    if bias.len() != labels.len() || weight_rows.len() != labels.len() {
        return Err(bad("class count disagrees with parameters"));
    }
    if weight_rows.iter().any(|r| r.len() != dim) {
        return Err(bad("weight row length disagrees with dim"));
    }
    let weights = weight_rows.concat();
    Ok(SoftmaxModel {
        params: ModelParams {
            weights,
            bias,
            classes: labels.len(),
            dim,
        },
        labels,
        hyper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn strings(values: &[&str]) -> Vec<String> {
        values.iter().map(|s| s.to_string()).collect()
    }

    fn toy_rows() -> (Vec<String>, Vec<Vec<String>>) {
        let columns = strings(&["mqtt.topic", "tcp.len"]);
        let rows = vec![
            strings(&["x", "10"]),
            strings(&["y", "20"]),
            strings(&["z", "30"]),
            strings(&["x", "12"]),
        ];
        (columns, rows)
    }

    #[test]
    fn vocab_first_seen_order() {
        let (columns, rows) = toy_rows();
        let vocab = fit_encoder(
            &columns,
            &rows,
            &strings(&["mqtt.topic"]),
            EncoderMode::Strict,
        )
        .unwrap();
        assert_eq!(
            vocab.categories("mqtt.topic").unwrap(),
            &strings(&["x", "y", "z"])[..]
        );
        assert_eq!(vocab.dim(), 4); // 3 one-hot + 1 numeric
        let again = fit_encoder(
            &columns,
            &rows,
            &strings(&["mqtt.topic"]),
            EncoderMode::Strict,
        )
        .unwrap();
        assert_eq!(vocab, again);
    }

    #[test]
    fn encode_known_and_unseen() {
        let (columns, rows) = toy_rows();
        let vocab = fit_encoder(
            &columns,
            &rows,
            &strings(&["mqtt.topic"]),
            EncoderMode::Strict,
        )
        .unwrap();
        let known = encode(&vocab, &strings(&["x", "18"]));
        assert_eq!(&known[..3], &[1.0, 0.0, 0.0]);
        // unseen padded variant maps to the zero block in strict mode
        let unseen = encode(&vocab, &strings(&["x ", "18"]));
        assert_eq!(&unseen[..3], &[0.0, 0.0, 0.0]);
        assert_ne!(known, unseen);
    }

    #[test]
    fn numeric_at_mean_encodes_to_zero() {
        let (columns, rows) = toy_rows();
        let vocab = fit_encoder(
            &columns,
            &rows,
            &strings(&["mqtt.topic"]),
            EncoderMode::Strict,
        )
        .unwrap();
        let mean = (10.0 + 20.0 + 30.0 + 12.0) / 4.0;
        let encoded = encode(&vocab, &strings(&["x", &mean.to_string()]));
        assert!(num::abs(encoded[3]) < 1e-12);
    }

    #[test]
    fn extended_mode_grows_topic_block() {
        let (columns, rows) = toy_rows();
        let mut vocab = fit_encoder(
            &columns,
            &rows,
            &strings(&["mqtt.topic"]),
            EncoderMode::Extended,
        )
        .unwrap();
        let padded: Vec<Vec<String>> = [
            "x ", "x  ", "x   ", "y ", "y  ", "y   ", "z ", "z  ", "z   ",
        ]
        .iter()
        .map(|t| strings(&[t, "10"]))
        .collect();
        extend_vocab(&mut vocab, &padded);
        // {x,y,z} each with three padded variants: 12 topic columns
        assert_eq!(vocab.categories("mqtt.topic").unwrap().len(), 12);
        let encoded = encode(&vocab, &strings(&["x ", "10"]));
        let (lo, hi) = vocab.block_range("mqtt.topic").unwrap();
        assert_eq!(encoded[lo..hi].iter().filter(|&&v| v == 1.0).count(), 1);
    }

    fn separable_training_set() -> (Vec<Vec<f64>>, Vec<String>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..20 {
            let t = i as f64 / 10.0;
            x.push(vec![1.0 + t, 0.0]);
            y.push("benign".to_string());
            x.push(vec![-1.0 - t, 0.5]);
            y.push("attack".to_string());
        }
        (x, y)
    }

    #[test]
    fn separable_set_fits_perfectly() {
        let (x, y) = separable_training_set();
        let model = train(&x, &y, TrainParams::default()).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert_eq!(predict_label(&model, xi).unwrap(), yi);
        }
    }

    #[test]
    fn loss_non_increasing() {
        let (x, y) = separable_training_set();
        let labels: Vec<usize> = y.iter().map(|l| usize::from(l == "attack")).collect();
        let mut params = ModelParams::zeros(2, 2);
        let mut last = cross_entropy_loss(&params, &x, &labels, 0.0);
        for _ in 0..60 {
            let grad = cross_entropy_grad(&params, &x, &labels, 0.0);
            for (w, g) in params.weights.iter_mut().zip(&grad.weights) {
                *w -= 0.3 * g;
            }
            for (b, g) in params.bias.iter_mut().zip(&grad.bias) {
                *b -= 0.3 * g;
            }
            let loss = cross_entropy_loss(&params, &x, &labels, 0.0);
            assert!(loss <= last + 1e-12, "loss rose from {last} to {loss}");
            last = loss;
        }
    }

    #[test]
    fn zero_epochs_is_uniform() {
        let (x, y) = separable_training_set();
        let model = train(
            &x,
            &y,
            TrainParams {
                epochs: 0,
                ..Default::default()
            },
        )
        .unwrap();
        let p = predict_proba(&model, &x[0]).unwrap();
        let ce = confidence_entropy(&p);
        assert!(num::abs(ce.entropy - num::ln(2.0)) < 1e-12);
        assert!(num::abs(p.as_slice()[0] - 0.5) < 1e-12);
    }

    #[test]
    fn analytic_gradient_matches_central_differences() {
        // 3-class toy problem
        let x = vec![
            vec![0.5, -1.0, 2.0],
            vec![1.5, 0.3, -0.7],
            vec![-0.2, 0.9, 0.1],
            vec![0.0, -0.4, 1.1],
            vec![2.0, 1.0, 0.0],
        ];
        let y = vec![0usize, 1, 2, 1, 0];
        let mut params = ModelParams::zeros(3, 3);
        // non-trivial point
        for (i, w) in params.weights.iter_mut().enumerate() {
            *w = libm::sin(i as f64 * 0.37);
        }
        for (i, b) in params.bias.iter_mut().enumerate() {
            *b = 0.1 * (i as f64 + 1.0);
        }
        let grad = cross_entropy_grad(&params, &x, &y, 0.01);
        let h = 1e-6;
        let mut max_diff = 0.0f64;
        for i in 0..params.weights.len() {
            let mut plus = params.clone();
            plus.weights[i] += h;
            let mut minus = params.clone();
            minus.weights[i] -= h;
            let fd = (cross_entropy_loss(&plus, &x, &y, 0.01)
                - cross_entropy_loss(&minus, &x, &y, 0.01))
                / (2.0 * h);
            max_diff = max_diff.max(num::abs(fd - grad.weights[i]));
        }
        for i in 0..params.bias.len() {
            let mut plus = params.clone();
            plus.bias[i] += h;
            let mut minus = params.clone();
            minus.bias[i] -= h;
            let fd = (cross_entropy_loss(&plus, &x, &y, 0.01)
                - cross_entropy_loss(&minus, &x, &y, 0.01))
                / (2.0 * h);
            max_diff = max_diff.max(num::abs(fd - grad.bias[i]));
        }
        assert!(max_diff < 1e-5, "max gradient deviation {max_diff}");
    }

    #[test]
    fn probabilities_sum_to_one_and_shift_invariant() {
        let logits_base = [0.3, -1.2, 2.5, 0.0];
        let p1 = softmax_row(&logits_base);
        assert!(num::abs(p1.iter().sum::<f64>() - 1.0) < 1e-12);
        let shifted: Vec<f64> = logits_base.iter().map(|z| z + 123.456).collect();
        let p2 = softmax_row(&shifted);
        for (a, b) in p1.iter().zip(&p2) {
            assert!(num::abs(a - b) < 1e-9);
        }
        let large = [1000.0, 0.0];
        let p = softmax_row(&large);
        assert!(p[0] > 0.999_999);
    }

    #[test]
    fn degenerate_labels_rejected() {
        let x = vec![vec![1.0], vec![2.0]];
        let y = strings(&["only", "only"]);
        assert_eq!(
            train(&x, &y, TrainParams::default()),
            Err(SurrogateError::DegenerateLabels)
        );
    }

    #[test]
    fn model_text_round_trip() {
        let (x, y) = separable_training_set();
        let model = train(
            &x,
            &y,
            TrainParams {
                epochs: 50,
                ..Default::default()
            },
        )
        .unwrap();
        let text = model_to_text(&model);
        let parsed = model_from_text(&text).unwrap();
        assert_eq!(parsed.labels, model.labels);
        assert_eq!(parsed.params.dim, model.params.dim);
        for (a, b) in parsed.params.weights.iter().zip(&model.params.weights) {
            assert!(num::abs(a - b) < 1e-12);
        }
        assert!(model_from_text("garbage").is_err());
    }

    #[test]
    fn evaluate_fpa_all_benign_is_zero_asr() {
        let (columns, rows) = toy_rows();
        let vocab = fit_encoder(
            &columns,
            &rows,
            &strings(&["mqtt.topic"]),
            EncoderMode::Strict,
        )
        .unwrap();
        let x: Vec<Vec<f64>> = rows.iter().map(|r| encode(&vocab, r)).collect();
        // all topic rows benign, plus a clearly different attack cluster
        let mut labels = strings(&["benign", "benign", "benign", "benign"]);
        let mut x_all = x.clone();
        for _ in 0..4 {
            x_all.push(vec![0.0, 0.0, 0.0, 8.0]);
            labels.push("attack".to_string());
        }
        let model = train(&x_all, &labels, TrainParams::default()).unwrap();
        let report = evaluate_fpa(&model, &vocab, &rows, "benign").unwrap();
        assert_eq!(report.asr_percent, 0.0);
        assert!(report.per_class.is_empty());
    }

    #[test]
    fn padded_topics_measurably_shift_predictions() {
        // Train only on exact topics {x,y,z}; evaluate padded variants. The
        // zeroed one-hot block moves samples off the training manifold, so an
        // ASR becomes measurable (its exact value is data-dependent).
        let (columns, rows) = toy_rows();
        let vocab = fit_encoder(
            &columns,
            &rows,
            &strings(&["mqtt.topic"]),
            EncoderMode::Strict,
        )
        .unwrap();
        let mut x: Vec<Vec<f64>> = rows.iter().map(|r| encode(&vocab, r)).collect();
        let mut labels = strings(&["benign", "benign", "benign", "benign"]);
        // attack class: same numeric range but no topic block set
        for len in ["40", "44", "48", "52"] {
            x.push(encode(&vocab, &strings(&["attack-topic", len])));
            labels.push("Uploading".to_string());
        }
        let model = train(&x, &labels, TrainParams::default()).unwrap();
        let crafted: Vec<Vec<String>> = ["x ", "x  ", "x   ", "y ", "y  "]
            .iter()
            .map(|t| strings(&[t, "40"]))
            .collect();
        let report = evaluate_fpa(&model, &vocab, &crafted, "benign").unwrap();
        assert!(report.asr_percent > 0.0);
        assert_eq!(
            report.per_class.iter().map(|c| c.count).sum::<usize>(),
            report.misclassified
        );
    }

    #[test]
    fn geometric_mean_with_zero_entropy() {
        assert_eq!(geometric_mean(&[0.0, 0.5]), 0.0);
        assert!(num::abs(geometric_mean(&[2.0, 8.0]) - 4.0) < 1e-12);
        assert_eq!(geometric_mean(&[]), 0.0);
    }

    #[test]
    fn vocab_text_round_trip_preserves_padded_topics() {
        let columns = strings(&["mqtt.topic", "tcp.len"]);
        let rows = vec![
            strings(&["Building1/Floor3/Sensor1", "60"]),
            strings(&["Building1/Floor3/Sensor1 ", "61"]),
            strings(&["Building1/Floor3/Sensor1  ", "62"]),
            strings(&["a,b%c", "63"]),
            strings(&["", "64"]), // absent-field sentinel is a real category
        ];
        let vocab = fit_encoder(
            &columns,
            &rows,
            &strings(&["mqtt.topic"]),
            EncoderMode::Strict,
        )
        .unwrap();
        let text = vocab_to_text(&vocab);
        let parsed = vocab_from_text(&text).unwrap();
        assert_eq!(parsed, vocab);
        let cats = parsed.categories("mqtt.topic").unwrap();
        assert_eq!(cats[1], "Building1/Floor3/Sensor1 ");
        assert_eq!(cats[2], "Building1/Floor3/Sensor1  ");
        assert_eq!(cats[3], "a,b%c");
        assert_eq!(cats[4], "");
        assert_eq!(parsed.dim(), vocab.dim());
        assert!(vocab_from_text("nope").is_err());
    }
}
