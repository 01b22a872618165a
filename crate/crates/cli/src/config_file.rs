//! `--config` support: keys from a flat `key=value` file are appended to
//! the command line as `--key value`, refusing any key also given as a flag.

use std::collections::BTreeSet;
use std::fs;

use crate::error::CliError;

/// Returns `args` with the contents of the `--config` file (if any) appended.
pub fn expand(args: Vec<String>) -> Result<Vec<String>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("cannot read config file {path}: {e}")))?;
    let given: BTreeSet<&str> = args
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split_once('=').map_or(a, |(k, _)| k))
        .collect();

    let mut extra = Vec::new();
    let mut seen = BTreeSet::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = || format!("{path}:{}", lineno + 1);
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("{}: expected key=value", at())))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key.is_empty() || key.starts_with('-') || key == "config" {
            return Err(CliError::Usage(format!("{}: invalid key `{key}`", at())));
        }
        if given.contains(key.as_str()) {
            return Err(CliError::Usage(format!(
                "`{key}` is set both on the command line and in {path}"
            )));
        }
        if !seen.insert(key.clone()) {
            return Err(CliError::Usage(format!("{}: `{key}` repeated", at())));
        }
        extra.push(format!("--{key}"));
        extra.push(value.to_owned());
    }
    let mut args = args;
    args.extend(extra);
    Ok(args)
}

fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(v.to_owned());
        }
    }
    None
}
