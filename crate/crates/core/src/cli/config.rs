use std::ffi::OsString;
use std::path::Path;

use super::CliError;

/// Parses a flat `key = value` file. Blank lines and `#` comments are
/// skipped; keys may use `-` or `_`.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `key = value`, got {raw:?}", i + 1))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            return Err(format!("line {}: empty key or value", i + 1));
        }
        out.push((key, value.to_string()));
    }
    Ok(out)
}

/// Renders settings in the format [`parse_config`] reads.
pub fn render_config(entries: &[(&str, String)]) -> String {
    entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

/// Turns config entries into `--key=value` arguments, rejecting keys the
/// subcommand does not accept.
pub fn config_arguments(path: &Path, known: &[String]) -> Result<Vec<OsString>, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("--config {}: {e}", path.display())))?;
    let entries = parse_config(&text).map_err(|e| CliError::Usage(format!("--config {}: {e}", path.display())))?;
    entries
        .into_iter()
        .map(|(k, v)| {
            if k == "config" || !known.contains(&k) {
                return Err(CliError::Usage(format!(
                    "--config {}: unknown key `{k}`",
                    path.display()
                )));
            }
            Ok(OsString::from(format!("--{k}={v}")))
        })
        .collect()
}
