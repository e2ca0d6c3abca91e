//! `train`: fit the linear veracity classifier on assembled inputs.

use quantcheck_core::classify::{train, FeatureVector, Featurizer};
use quantcheck_core::config::PipelineConfig;
use quantcheck_core::corpus::{Split, VeracityLabel};
use quantcheck_core::{Error, Result};

use crate::commands::{load_assembled, load_claims};
use crate::manifest::ManifestBuilder;

pub fn run(config: &PipelineConfig) -> Result<()> {
    let mut manifest = ManifestBuilder::start("train", config);
    manifest.input(&config.claims)?;

    let claims = load_claims(config)?;
    let inputs = load_assembled(config)?;
    manifest.input(&crate::commands::assembled_path(config))?;

    let labels: std::collections::HashMap<&str, (VeracityLabel, Split)> = claims
        .iter()
        .filter_map(|c| c.label.map(|l| (c.claim_id.as_str(), (l, c.split))))
        .collect();

    let featurizer = Featurizer {
        mode: config.digit_mode()?,
        budget: config.context_budget()?,
    };
    let mut train_set: Vec<(FeatureVector, VeracityLabel)> = Vec::new();
    let mut val_set: Vec<(FeatureVector, VeracityLabel)> = Vec::new();
    for input in &inputs {
        let Some(&(label, split)) = labels.get(input.claim_id.as_str()) else {
            continue;
        };
        let features = featurizer.featurize(input)?;
        match split {
            Split::Train => train_set.push((features, label)),
            Split::Validation => val_set.push((features, label)),
            Split::Test => {}
        }
    }
    if train_set.is_empty() {
        return Err(Error::data(
            "no labeled training inputs (check claim splits and labels)",
        ));
    }

    let cfg = config.train_config()?;
    let validation = if val_set.is_empty() {
        None
    } else {
        Some(val_set.as_slice())
    };
    let outcome = train(&train_set, validation, &cfg)?;
    outcome.model.save(&config.model)?;

    println!(
        "trained on {} examples for {} epochs (best validation macro-F1 {:.4}, {} prob clamps) -> {}",
        train_set.len(),
        outcome.epochs_run,
        outcome.best_validation_macro_f1,
        outcome.clamp_warnings,
        config.model.display()
    );
    manifest.finish(&config.model)
}
