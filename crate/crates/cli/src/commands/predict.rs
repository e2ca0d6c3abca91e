//! `predict`: label assembled inputs with the trained model (optionally
//! a single claim), applying prior logit biases when configured.

use quantcheck_core::classify::{
    nli_server_predict, predict, ClassifierModel, NliServerClient, PriorBias,
};
use quantcheck_core::config::PipelineConfig;
use quantcheck_core::corpus::label_distribution;
use quantcheck_core::{Error, Result};

use crate::commands::{load_assembled, load_claims, predictions_path, Prediction, ProbMap};
use crate::manifest::ManifestBuilder;

pub fn run(config: &PipelineConfig, claim_id: Option<&str>) -> Result<()> {
    let mut manifest = ManifestBuilder::start("predict", config);

    let mut inputs = load_assembled(config)?;
    manifest.input(&crate::commands::assembled_path(config))?;
    if let Some(id) = claim_id {
        inputs.retain(|i| i.claim_id == id);
        if inputs.is_empty() {
            return Err(Error::data(format!(
                "claim '{id}' not found in assembled inputs"
            )));
        }
    }

    // Prior bias derives from the labeled claims when enabled.
    let bias = if config.prior_bias_alpha > 0.0 {
        let claims = load_claims(config)?;
        let dist = label_distribution(&claims)?;
        Some(PriorBias::new(dist.priors, config.prior_bias_alpha)?)
    } else {
        None
    };

    let mut predictions = Vec::with_capacity(inputs.len());
    if config.use_nli_server {
        let base_url = config
            .nli_url
            .clone()
            .ok_or_else(|| Error::config("use_nli_server needs QC_NLI_URL"))?;
        let client = NliServerClient {
            base_url,
            token: None,
            policy: config.http_policy(),
            offline: config.offline,
        };
        for input in &inputs {
            let (label, probs) = nli_server_predict(&client, input)?;
            predictions.push(Prediction {
                claim_id: input.claim_id.clone(),
                label: label.as_str().to_string(),
                probs: ProbMap {
                    true_: probs[0],
                    false_: probs[1],
                    conflicting: probs[2],
                },
            });
        }
    } else {
        let model = ClassifierModel::load(&config.model)?;
        let featurizer = model.featurizer();
        for input in &inputs {
            let features = featurizer.featurize(input)?;
            let (label, probs) = predict(&model, &features, bias.as_ref());
            predictions.push(Prediction {
                claim_id: input.claim_id.clone(),
                label: label.as_str().to_string(),
                probs: ProbMap {
                    true_: probs[0],
                    false_: probs[1],
                    conflicting: probs[2],
                },
            });
        }
    }

    let path = predictions_path(config);
    crate::commands::write_jsonl(&predictions, &path)?;
    for prediction in &predictions {
        if claim_id.is_some() {
            println!(
                "{}",
                serde_json::to_string(prediction).map_err(|e| Error::data(e.to_string()))?
            );
        }
    }
    if claim_id.is_none() {
        println!(
            "predicted {} claims -> {}",
            predictions.len(),
            path.display()
        );
    }
    manifest.finish(&path)
}
