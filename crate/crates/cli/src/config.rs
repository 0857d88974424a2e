use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use rtmix::experiments::{preset, ExperimentConfig, PRESET_NAMES};
use toml::{Table, Value};

/// Loads a config file, or a preset when `source` names one and no such
/// file exists, then applies `key.path=value` overrides.
pub fn load(source: &str, overrides: &[String]) -> Result<ExperimentConfig> {
    let mut tree: Table = if Path::new(source).is_file() {
        let text = std::fs::read_to_string(source).with_context(|| format!("reading {source}"))?;
        text.parse::<Table>()
            .map_err(|e| anyhow!("{source}: {e}"))?
    } else if PRESET_NAMES.contains(&source) {
        let cfg = preset(source)?;
        Table::try_from(&cfg).context("serializing preset")?
    } else {
        bail!(
            "`{source}` is neither a config file nor a preset (known presets: {})",
            PRESET_NAMES.join(", ")
        );
    };
    for ov in overrides {
        apply_override(&mut tree, ov)?;
    }
    let text = toml::to_string(&tree)?;
    ExperimentConfig::from_toml_str(&text).map_err(|e| anyhow!("{source}: {e}"))
}

fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

pub fn apply_override(tree: &mut Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| anyhow!("override `{spec}` is not of the form key=value"))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        bail!("override key `{key}` is malformed");
    }
    let (last, parents) = path.split_last().expect("non-empty path");
    let mut node = tree;
    for p in parents {
        node = node
            .entry(p.to_string())
            .or_insert_with(|| Value::Table(Table::new()))
            .as_table_mut()
            .ok_or_else(|| anyhow!("override `{key}`: `{p}` is not a table"))?;
    }
    node.insert(last.to_string(), parse_value(raw.trim()));
    Ok(())
}
