//! Fine-tuning manifest emission.
//!
//! The QLoRA recipe here is fixed — these hyperparameters are part of the
//! method, not knobs — so the manifest type hardcodes everything except the
//! model id. The file format is a flat `key=value` document, one pair per
//! line, stable key order.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct FinetuneManifest {
    pub quantization: String,
    pub double_quantization: bool,
    pub compute_precision: String,
    pub lora_rank: u32,
    pub lora_alpha: u32,
    pub lora_dropout: f64,
    pub bias: String,
    pub optimizer: String,
    pub learning_rate: f64,
    pub epochs: u32,
    pub batch_size: u32,
    pub gradient_accumulation: u32,
    pub scheduler: String,
    pub warmup_ratio: f64,
    pub model_id: String,
}

#[derive(Debug, Error, PartialEq)]
pub enum ManifestError {
    #[error("model id must be nonempty")]
    EmptyModelId,
    #[error("malformed manifest: {reason}")]
    MalformedManifest { reason: String },
}

/// Builds the fixed-recipe manifest for a model.
pub fn emit_finetune_manifest(model_id: &str) -> Result<FinetuneManifest, ManifestError> {
    if model_id.is_empty() {
        return Err(ManifestError::EmptyModelId);
    }
    Ok(FinetuneManifest {
        quantization: "nf4-4bit".into(),
        double_quantization: false,
        compute_precision: "fp16".into(),
        lora_rank: 64,
        lora_alpha: 16,
        lora_dropout: 0.0,
        bias: "none".into(),
        optimizer: "paged-adamw".into(),
        learning_rate: 2e-4,
        epochs: 7,
        batch_size: 1,
        gradient_accumulation: 8,
        scheduler: "cosine".into(),
        warmup_ratio: 0.03,
        model_id: model_id.into(),
    })
}

impl FinetuneManifest {
    /// Renders the flat key=value form, keys in declaration order.
    pub fn to_key_value_string(&self) -> String {
        let mut out = String::new();
        let mut push = |key: &str, value: String| {
            out.push_str(key);
            out.push('=');
            out.push_str(&value);
            out.push('\n');
        };
        push("quantization", self.quantization.clone());
        push("double_quantization", self.double_quantization.to_string());
        push("compute_precision", self.compute_precision.clone());
        push("lora_rank", self.lora_rank.to_string());
        push("lora_alpha", self.lora_alpha.to_string());
        push("lora_dropout", self.lora_dropout.to_string());
        push("bias", self.bias.clone());
        push("optimizer", self.optimizer.clone());
        push("learning_rate", format!("{:e}", self.learning_rate));
        push("epochs", self.epochs.to_string());
        push("batch_size", self.batch_size.to_string());
        push("gradient_accumulation", self.gradient_accumulation.to_string());
        push("scheduler", self.scheduler.clone());
        push("warmup_ratio", self.warmup_ratio.to_string());
        push("model_id", self.model_id.clone());
        out
    }

    /// Parses the key=value form back into a manifest.
    pub fn parse_key_value(text: &str) -> Result<FinetuneManifest, ManifestError> {
        use std::collections::HashMap;

        let malformed = |reason: String| ManifestError::MalformedManifest { reason };
        let mut pairs: HashMap<&str, &str> = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| malformed(format!("line {}: missing '='", lineno + 1)))?;
            if pairs.insert(key, value).is_some() {
                return Err(malformed(format!("duplicate key {key:?}")));
            }
        }

        let take = |key: &str| -> Result<&str, ManifestError> {
            pairs
                .get(key)
                .copied()
                .ok_or_else(|| ManifestError::MalformedManifest {
                    reason: format!("missing key {key:?}"),
                })
        };
        let parse_u32 = |key: &str| -> Result<u32, ManifestError> {
            take(key)?.parse().map_err(|_| ManifestError::MalformedManifest {
                reason: format!("key {key:?} is not an integer"),
            })
        };
        let parse_f64 = |key: &str| -> Result<f64, ManifestError> {
            take(key)?.parse().map_err(|_| ManifestError::MalformedManifest {
                reason: format!("key {key:?} is not a number"),
            })
        };
        let parse_bool = |key: &str| -> Result<bool, ManifestError> {
            take(key)?.parse().map_err(|_| ManifestError::MalformedManifest {
                reason: format!("key {key:?} is not a boolean"),
            })
        };

        Ok(FinetuneManifest {
            quantization: take("quantization")?.to_string(),
            double_quantization: parse_bool("double_quantization")?,
            compute_precision: take("compute_precision")?.to_string(),
            lora_rank: parse_u32("lora_rank")?,
            lora_alpha: parse_u32("lora_alpha")?,
            lora_dropout: parse_f64("lora_dropout")?,
            bias: take("bias")?.to_string(),
            optimizer: take("optimizer")?.to_string(),
            learning_rate: parse_f64("learning_rate")?,
            epochs: parse_u32("epochs")?,
            batch_size: parse_u32("batch_size")?,
            gradient_accumulation: parse_u32("gradient_accumulation")?,
            scheduler: take("scheduler")?.to_string(),
            warmup_ratio: parse_f64("warmup_ratio")?,
            model_id: take("model_id")?.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_recipe_values() {
        let m = emit_finetune_manifest("llama-3.1-8b").unwrap();
        assert_eq!(m.quantization, "nf4-4bit");
        assert!(!m.double_quantization);
        assert_eq!(m.compute_precision, "fp16");
        assert_eq!(m.lora_rank, 64);
        assert_eq!(m.lora_alpha, 16);
        assert_eq!(m.lora_dropout, 0.0);
        assert_eq!(m.bias, "none");
        assert_eq!(m.optimizer, "paged-adamw");
        assert_eq!(m.learning_rate, 2e-4);
        assert_eq!(m.epochs, 7);
        assert_eq!(m.batch_size, 1);
        assert_eq!(m.gradient_accumulation, 8);
        assert_eq!(m.scheduler, "cosine");
        assert_eq!(m.warmup_ratio, 0.03);
        assert_eq!(m.model_id, "llama-3.1-8b");
    }

    #[test]
    fn empty_model_id_is_rejected() {
        assert_eq!(emit_finetune_manifest(""), Err(ManifestError::EmptyModelId));
    }

    #[test]
    fn rendered_form_is_pinned() {
        let rendered = emit_finetune_manifest("deepseek-v3").unwrap().to_key_value_string();
        let expected = "\
quantization=nf4-4bit
double_quantization=false
compute_precision=fp16
lora_rank=64
lora_alpha=16
lora_dropout=0
bias=none
optimizer=paged-adamw
learning_rate=2e-4
epochs=7
batch_size=1
gradient_accumulation=8
scheduler=cosine
warmup_ratio=0.03
model_id=deepseek-v3
";
        assert_eq!(rendered, expected);
    }

    #[test]
    fn round_trips_through_text() {
        let m = emit_finetune_manifest("gpt-4o").unwrap();
        let parsed = FinetuneManifest::parse_key_value(&m.to_key_value_string()).unwrap();
        assert_eq!(parsed, m);
    }

    #[test]
    fn parse_rejects_broken_documents() {
        assert!(matches!(
            FinetuneManifest::parse_key_value("no equals sign"),
            Err(ManifestError::MalformedManifest { .. })
        ));
        assert!(matches!(
            FinetuneManifest::parse_key_value("model_id=x"),
            Err(ManifestError::MalformedManifest { .. })
        ));
        let doubled = "model_id=a\nmodel_id=b";
        assert!(matches!(
            FinetuneManifest::parse_key_value(doubled),
            Err(ManifestError::MalformedManifest { .. })
        ));
    }
}
