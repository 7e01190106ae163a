use serde::{Deserialize, Serialize};

use crate::{MlError, RandomForestModel};

const FORMAT: &str = "rf-json-v1";

#[derive(Serialize)]
struct EnvelopeRef<'a> {
    format: &'a str,
    model: &'a RandomForestModel,
}

#[derive(Deserialize)]
struct Envelope {
    format: String,
    model: RandomForestModel,
}

pub fn forest_to_json(model: &RandomForestModel) -> String {
    serde_json::to_string_pretty(&EnvelopeRef { format: FORMAT, model })
        .expect("forest serializes")
}

pub fn forest_from_json(text: &str) -> Result<RandomForestModel, MlError> {
    let env: Envelope =
        serde_json::from_str(text).map_err(|e| MlError::BadModelFile(e.to_string()))?;
    if env.format != FORMAT {
        return Err(MlError::BadModelFile(format!("unsupported format {:?}", env.format)));
    }
    Ok(env.model)
}
