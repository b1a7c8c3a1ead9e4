use mflab_core::zoo::{self, NamedModel};

use crate::CliError;

pub const PRESET_IDS: &[&str] = &["furstenberg:<p>", "xor:<p>", "wl4", "pos3"];

/// Resolves a preset identifier such as `furstenberg:0.7` or `wl4`.
pub fn load(id: &str) -> Result<NamedModel, CliError> {
    zoo::preset(id).map_err(|e| CliError::Input(format!("preset `{id}`: {e} (known: {})", PRESET_IDS.join(", "))))
}
