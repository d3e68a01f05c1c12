//! Single-file model bundle: the softmax parameters, the encoder vocabulary,
//! and the feature column layout they were fitted on.

use fpa_core::surrogate::{
    model_from_text, model_to_text, vocab_from_text, vocab_to_text, EncoderVocab, SoftmaxModel,
    SurrogateError,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ModelBundle {
    pub model: SoftmaxModel,
    pub vocab: EncoderVocab,
    /// Kept feature columns, in the order the encoder indexes them.
    pub columns: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum BundleError {
    #[error("not a model bundle: missing header")]
    BadHeader,
    #[error("bundle column names must not contain commas")]
    BadColumnName,
    #[error("bundle is missing its {0} section")]
    MissingSection(&'static str),
    #[error(transparent)]
    Surrogate(#[from] SurrogateError),
}

pub fn bundle_to_text(bundle: &ModelBundle) -> Result<String, BundleError> {
    if bundle.columns.iter().any(|c| c.contains(',')) {
        return Err(BundleError::BadColumnName);
    }
    let mut out = String::new();
    out.push_str("fpa-bundle v1\n");
    out.push_str(&format!("columns: {}\n", bundle.columns.join(",")));
    out.push_str(&model_to_text(&bundle.model));
    out.push_str(&vocab_to_text(&bundle.vocab));
    Ok(out)
}

pub fn bundle_from_text(text: &str) -> Result<ModelBundle, BundleError> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("fpa-bundle v1") {
        return Err(BundleError::BadHeader);
    }
    let columns_line = lines.next().unwrap_or_default();
    let columns: Vec<String> = columns_line
        .strip_prefix("columns:")
        .ok_or(BundleError::MissingSection("columns"))?
        .trim()
        .split(',')
        .filter(|c| !c.is_empty())
        .map(String::from)
        .collect();

    let model_start = text
        .find("fpa-softmax v1")
        .ok_or(BundleError::MissingSection("model"))?;
    let encoder_start = text
        .find("fpa-encoder v1")
        .ok_or(BundleError::MissingSection("encoder"))?;
    let model = model_from_text(&text[model_start..encoder_start])?;
    let vocab = vocab_from_text(&text[encoder_start..])?;
    Ok(ModelBundle {
        model,
        vocab,
        columns,
    })
}
