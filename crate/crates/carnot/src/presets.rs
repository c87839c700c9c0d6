//! Named experiment configurations and their expansion into command-line arguments.

use std::{collections::BTreeMap, ffi::OsString, path::PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::{
    error::{CliError, Result},
    files,
};

/// A command path with its arguments. Unknown fields are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Vec<String>,
    /// Built-in group name or group JSON file, passed as `--group`.
    #[serde(default)]
    pub group: Option<String>,
    /// Flag name to value; `true` is a bare flag, arrays repeat the flag.
    #[serde(default)]
    pub args: BTreeMap<String, Value>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

pub const PRESET_DIR_ENV: &str = "CARNOT_PRESET_DIR";

fn experiment(name: &str) -> ExperimentConfig {
    ExperimentConfig {
        command: vec!["experiment".into(), name.into()],
        group: None,
        args: BTreeMap::new(),
        seed: Some(1),
        workers: None,
        out: None,
    }
}

/// `ac01` … `ac11` and `paper` (the fractal sphere with its dimension report).
pub fn builtin(name: &str) -> Option<ExperimentConfig> {
    if crate::experiments::NAMES.contains(&name) {
        return Some(experiment(name));
    }
    match name {
        "paper" => Some(ExperimentConfig {
            command: vec!["plane".into(), "fractal".into()],
            group: None,
            args: BTreeMap::from([("dim".into(), Value::Bool(true))]),
            seed: None,
            workers: None,
            out: None,
        }),
        _ => None,
    }
}

/// `$CARNOT_PRESET_DIR/<name>.json` if present, otherwise the built-in preset.
pub fn lookup(name: &str) -> Result<ExperimentConfig> {
    if let Some(dir) = std::env::var_os(PRESET_DIR_ENV) {
        let path = PathBuf::from(dir).join(format!("{name}.json"));
        if path.exists() {
            return files::read_json(&path);
        }
    }
    builtin(name).ok_or_else(|| CliError::usage(format!("unknown preset {name:?}")))
}

impl ExperimentConfig {
    /// Flags implied by the config, without the command path.
    pub fn flags(&self) -> Result<Vec<OsString>> {
        let mut out: Vec<OsString> = Vec::new();
        let mut push = |k: &str, v: Option<String>| {
            out.push(format!("--{k}").into());
            if let Some(v) = v {
                out.push(v.into());
            }
        };
        if let Some(g) = &self.group {
            push("group", Some(g.clone()));
        }
        if let Some(s) = self.seed {
            push("seed", Some(s.to_string()));
        }
        if let Some(w) = self.workers {
            push("workers", Some(w.to_string()));
        }
        if let Some(o) = &self.out {
            push("out", Some(o.display().to_string()));
        }
        for (k, v) in &self.args {
            let items = match v {
                Value::Array(a) => a.clone(),
                other => vec![other.clone()],
            };
            for item in items {
                match item {
                    Value::Bool(true) => push(k, None),
                    Value::Bool(false) | Value::Null => {}
                    Value::String(s) => push(k, Some(s)),
                    Value::Number(n) => push(k, Some(n.to_string())),
                    other => return Err(CliError::usage(format!("preset argument {k:?} has unsupported value {other}"))),
                }
            }
        }
        Ok(out)
    }
}

/// Replaces `--preset NAME` by the preset's command path and flags. Leading
/// positional words given by the user must match the preset's command path.
pub fn expand(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let pos = argv.iter().position(|a| a == "--preset" || a.to_string_lossy().starts_with("--preset="));
    let Some(pos) = pos else { return Ok(argv) };
    let (name, skip) = match argv[pos].to_string_lossy().strip_prefix("--preset=") {
        Some(n) => (n.to_string(), 1),
        None => {
            let n = argv.get(pos + 1).ok_or_else(|| CliError::usage("--preset needs a name"))?;
            (n.to_string_lossy().into_owned(), 2)
        }
    };
    let config = lookup(&name)?;
    let mut rest: Vec<OsString> = argv[1..pos].iter().chain(&argv[pos + skip..]).cloned().collect();
    let words = rest.iter().take_while(|a| !a.to_string_lossy().starts_with('-')).count();
    let given: Vec<String> = rest[..words].iter().map(|a| a.to_string_lossy().into_owned()).collect();
    if !given.is_empty() && given != config.command {
        return Err(CliError::usage(format!("preset {name:?} runs `{}`, not `{}`", config.command.join(" "), given.join(" "))));
    }
    rest.drain(..words);
    let mut out = vec![argv[0].clone()];
    out.extend(config.command.iter().map(OsString::from));
    out.extend(config.flags()?);
    out.extend(rest);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn every_experiment_has_a_preset() {
        for n in crate::experiments::NAMES {
            assert_eq!(builtin(n).unwrap().command, vec!["experiment", n]);
        }
    }

    #[test]
    fn expansion() {
        let e = expand(os(&["carnot", "plane", "fractal", "--preset", "paper", "--points", "5"])).unwrap();
        assert_eq!(e, os(&["carnot", "plane", "fractal", "--dim", "--points", "5"]));
        let e = expand(os(&["carnot", "--preset=ac03"])).unwrap();
        assert_eq!(e, os(&["carnot", "experiment", "ac03", "--seed", "1"]));
        assert!(expand(os(&["carnot", "heis", "build", "--preset", "paper"])).is_err());
        assert!(expand(os(&["carnot", "--preset", "nope"])).is_err());
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"command":["group","info"],"colour":1}"#).is_err());
        let c: ExperimentConfig = serde_json::from_str(r#"{"command":["norm","axioms"],"group":"engel","args":{"gauge":"box","samples":10}}"#).unwrap();
        assert_eq!(c.flags().unwrap(), os(&["--group", "engel", "--gauge", "box", "--samples", "10"]));
    }
}
