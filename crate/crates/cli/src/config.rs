//! Scenario config files: JSON layered over the bundled defaults, with
//! `--set key=value` overrides applied last.

use std::path::{Path, PathBuf};

use serde_json::{Map, Value};
use tccs_core::scenario::{resolve_paths, DEFAULT_SCENARIO_JSON};
use tccs_core::ScenarioConfig;

use crate::error::CliError;

/// Keys accepted although the default tree does not carry them.
const OPTIONAL_KEYS: &[&str] = &["rotor.lambda_opt", "rotor.cp_max"];

#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ScenarioConfig,
    /// Dotted paths of every value taken from the defaults.
    pub applied_defaults: Vec<String>,
    pub overrides: Vec<String>,
    pub path: PathBuf,
    pub raw: Vec<u8>,
}

fn defaults() -> Value {
    serde_json::from_str(DEFAULT_SCENARIO_JSON).expect("bundled defaults parse")
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

fn check_unknown(
    user: &Map<String, Value>,
    reference: &Map<String, Value>,
    prefix: &str,
) -> Result<(), CliError> {
    for (key, value) in user {
        let path = join(prefix, key);
        match reference.get(key) {
            None if OPTIONAL_KEYS.contains(&path.as_str()) => {}
            None => return Err(CliError::config(format!("unknown config key `{path}`"))),
            Some(Value::Object(sub)) => {
                if let Value::Object(user_sub) = value {
                    check_unknown(user_sub, sub, &path)?;
                }
            }
            Some(_) => {}
        }
    }
    Ok(())
}

/// Merges `user` into `base`, recording default leaves that survive.
fn merge(
    base: &mut Map<String, Value>,
    user: &Map<String, Value>,
    prefix: &str,
    applied: &mut Vec<String>,
) {
    for (key, default) in base.iter_mut() {
        let path = join(prefix, key);
        match (default, user.get(key)) {
            (Value::Object(d), Some(Value::Object(u))) => merge(d, u, &path, applied),
            (slot, Some(u)) => *slot = u.clone(),
            (Value::Object(d), None) => collect_leaves(d, &path, applied),
            (_, None) => applied.push(path),
        }
    }
    for (key, value) in user {
        if !base.contains_key(key) {
            base.insert(key.clone(), value.clone());
        }
    }
}

fn collect_leaves(map: &Map<String, Value>, prefix: &str, out: &mut Vec<String>) {
    for (key, value) in map {
        let path = join(prefix, key);
        match value {
            Value::Object(sub) => collect_leaves(sub, &path, out),
            _ => out.push(path),
        }
    }
}

/// Applies one `a.b.c=value` override; the value is parsed as JSON when
/// possible and taken as a string otherwise.
fn apply_override(tree: &mut Value, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::usage(format!("--set expects key=value, got `{spec}`")))?;
    let value =
        serde_json::from_str::<Value>(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = tree;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let map = node.as_object_mut().ok_or_else(|| {
            CliError::config(format!(
                "override `{key}`: `{}` is not a section",
                parts[..i].join(".")
            ))
        })?;
        let path_so_far = parts[..=i].join(".");
        if !map.contains_key(*part) && !OPTIONAL_KEYS.contains(&path_so_far.as_str()) {
            return Err(CliError::config(format!(
                "override `{key}`: unknown config key `{path_so_far}`"
            )));
        }
        if i + 1 == parts.len() {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        node = map.get_mut(*part).expect("checked above");
    }
    unreachable!("split yields at least one part")
}

fn drop_applied_under(applied: &mut Vec<String>, key: &str) {
    let prefix = format!("{key}.");
    applied.retain(|p| p != key && !p.starts_with(&prefix));
}

/// Parses, layers and validates a config. Relative input paths resolve
/// against the config file's directory.
pub fn load_config(path: &Path, overrides: &[String]) -> Result<LoadedConfig, CliError> {
    let raw = std::fs::read(path)
        .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
    let user: Value = serde_json::from_slice(&raw)
        .map_err(|e| CliError::config(format!("{}: invalid JSON: {e}", path.display())))?;
    let Value::Object(user) = user else {
        return Err(CliError::config(format!(
            "{}: top level must be a JSON object",
            path.display()
        )));
    };
    let Value::Object(mut tree) = defaults() else {
        unreachable!("defaults are an object")
    };
    check_unknown(&user, &tree, "")?;

    let mut applied = Vec::new();
    merge(&mut tree, &user, "", &mut applied);
    let mut tree = Value::Object(tree);
    for spec in overrides {
        apply_override(&mut tree, spec)?;
        if let Some((key, _)) = spec.split_once('=') {
            drop_applied_under(&mut applied, key);
        }
    }
    // A flow given as a path replaces the synthesis block wholesale.
    if tree.get("flow").is_some_and(Value::is_string) {
        drop_applied_under(&mut applied, "flow");
    }

    let mut config: ScenarioConfig = serde_json::from_value(tree)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    resolve_paths(&mut config, base);
    config.validate().map_err(CliError::from)?;

    Ok(LoadedConfig {
        config,
        applied_defaults: applied,
        overrides: overrides.to_vec(),
        path: path.to_path_buf(),
        raw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::File::create(&p)
            .unwrap()
            .write_all(text.as_bytes())
            .unwrap();
        p
    }

    #[test]
    fn minimal_config_takes_all_defaults() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "flow.csv", "t_s,u_mps\n0,2\n1,2\n");
        let cfg = write(dir.path(), "c.json", r#"{"flow": "flow.csv"}"#);
        let loaded = load_config(&cfg, &[]).unwrap();
        let d = ScenarioConfig::default();
        assert_eq!(loaded.config.rotor, d.rotor);
        assert_eq!(loaded.config.control, d.control);
        assert_eq!(loaded.config.dt_s, d.dt_s);
        assert!(loaded
            .applied_defaults
            .contains(&"control.kopt_factor".to_string()));
        assert!(loaded
            .applied_defaults
            .contains(&"acoustics.turbulence.a_s".to_string()));
        assert!(!loaded
            .applied_defaults
            .iter()
            .any(|p| p.starts_with("flow")));
        match &loaded.config.flow {
            tccs_core::scenario::FlowSource::Csv(p) => assert_eq!(p, &dir.path().join("flow.csv")),
            other => panic!("unexpected flow {other:?}"),
        }
    }

    #[test]
    fn out_of_range_kopt_names_field_and_range() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write(dir.path(), "c.json", r#"{"control": {"kopt_factor": 1.5}}"#);
        let err = load_config(&cfg, &[]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let msg = err.to_string();
        assert!(
            msg.contains("control.kopt_factor") && msg.contains("[0.8, 1.2]"),
            "{msg}"
        );
    }

    #[test]
    fn override_beats_file_value() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write(dir.path(), "c.json", r#"{"control": {"f_s": 1000}}"#);
        let loaded = load_config(&cfg, &["control.f_s=2000".to_string()]).unwrap();
        assert_eq!(loaded.config.control.f_s_hz, 2000.0);
    }

    #[test]
    fn unknown_keys_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write(dir.path(), "c.json", r#"{"control": {"kopt_facter": 1.0}}"#);
        let err = load_config(&cfg, &[]).unwrap_err().to_string();
        assert!(err.contains("control.kopt_facter"), "{err}");
        let cfg = write(dir.path(), "d.json", "{}");
        assert!(load_config(&cfg, &["control.nope=1".to_string()]).is_err());
        assert_eq!(
            load_config(&cfg, &["control.f_s".to_string()])
                .unwrap_err()
                .exit_code(),
            1
        );
    }

    #[test]
    fn override_json_values() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write(dir.path(), "c.json", "{}");
        let loaded = load_config(
            &cfg,
            &[
                "window=[7310,7320]".to_string(),
                "drivetrain.kind=direct".to_string(),
                "drivetrain.gear_ratio=1".to_string(),
            ],
        )
        .unwrap();
        assert_eq!(loaded.config.window, Some((7310.0, 7320.0)));
        assert!(!loaded.config.drivetrain.has_gearbox());
        assert!(!loaded.applied_defaults.contains(&"window".to_string()));
    }

    #[test]
    fn missing_config_file() {
        let err = load_config(Path::new("/nonexistent/c.json"), &[]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
