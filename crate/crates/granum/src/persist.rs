//! Weight documents on disk.

use std::path::Path;

use granum_core::models::ModelId;
use granum_core::{weights, Network};

use crate::error::{Error, Result};

pub fn save_weights(id: ModelId, net: &Network, path: &Path) -> Result<()> {
    crate::data::csv::write_string(path, &weights::encode(id, net))
}

pub fn load_weights(path: &Path) -> Result<(ModelId, Network)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(weights::decode(&text)?)
}
