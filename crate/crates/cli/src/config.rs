//! Experiment settings from `key = value` files and command-line flags.
//!
//! Both sources go through [`apply`], file entries first, so flags win.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use custody_core::consensus::Behavior;
use custody_core::experiment::{DescriptionDist, ExperimentConfig, WorkloadSpec};
use custody_core::SimTime;

use crate::error::CliError;

/// Keys accepted in config files, with their meaning.
pub const KEYS: &[(&str, &str)] = &[
    ("period", "block period in seconds (may be fractional)"),
    ("gas_limit", "block gas limit in gas units"),
    ("validators", "number of validators"),
    ("byzantine", "faulty validators, e.g. `0:silent,2:equivocator` or `none`"),
    ("seed", "RNG seed for workload and network jitter"),
    ("periods", "run length in block periods"),
    ("workload", "`rate:CREATES,TRANSFERS,REMOVES` per period, `ramp:START_GAS,END_GAS` or `annual:N`"),
    ("description", "create description lengths: `fixed:LEN` or `uniform:MIN:MAX`"),
    ("clients", "number of client identities issuing transactions"),
    ("bandwidth", "link bandwidth in bytes per second"),
    ("base_delay_ms", "fixed per-message latency in milliseconds"),
    ("jitter_ms", "maximum extra per-message latency in milliseconds"),
    ("header_size", "block header size in bytes"),
    ("genesis_size", "genesis block size in bytes"),
    ("pp_overhead", "pre-prepare framing in bytes"),
    ("prepare_size", "prepare message size in bytes"),
    ("commit_size", "commit message size in bytes"),
    ("reject_invalid_at_mempool", "`true` drops transactions that would revert instead of charging them"),
];

/// Parses `key = value` lines. Blank lines and `#` comments are skipped.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut seen = BTreeMap::new();
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Config(format!("line {}: expected `key = value`", n + 1)));
        };
        let key = k.trim().to_string();
        if !KEYS.iter().any(|(name, _)| *name == key) {
            return Err(CliError::Config(format!("line {}: unknown key `{key}`", n + 1)));
        }
        if let Some(prev) = seen.insert(key.clone(), n + 1) {
            return Err(CliError::Config(format!("line {}: `{key}` already set on line {prev}", n + 1)));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

pub fn load(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse(&text)
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.parse().map_err(|_| CliError::Config(format!("`{key}`: cannot parse `{value}`")))
}

fn seconds(key: &str, value: &str) -> Result<SimTime, CliError> {
    let s: f64 = num(key, value)?;
    if !(s.is_finite() && s > 0.0) {
        return Err(CliError::Config(format!("`{key}` must be a positive number of seconds")));
    }
    Ok(SimTime::from_secs_f64(s))
}

pub fn parse_byzantine(spec: &str) -> Result<Vec<(usize, Behavior)>, CliError> {
    let spec = spec.trim();
    if spec.is_empty() || spec == "none" {
        return Ok(Vec::new());
    }
    spec.split(',')
        .map(|item| {
            let (idx, kind) = item
                .trim()
                .split_once(':')
                .ok_or_else(|| CliError::Config(format!("byzantine entry `{item}` is not INDEX:BEHAVIOR")))?;
            let idx: usize = num("byzantine", idx.trim())?;
            let behavior = match kind.trim() {
                "silent" => Behavior::Silent,
                "equivocator" | "equivocate" => Behavior::Equivocator,
                other => return Err(CliError::Config(format!("unknown behavior `{other}`"))),
            };
            Ok((idx, behavior))
        })
        .collect()
}

fn description_of(workload: &WorkloadSpec) -> DescriptionDist {
    match workload {
        WorkloadSpec::Rate { description, .. } | WorkloadSpec::Annual { description, .. } => *description,
        WorkloadSpec::GasRamp { .. } => DescriptionDist::default(),
    }
}

fn parse_description(value: &str) -> Result<DescriptionDist, CliError> {
    let parts: Vec<&str> = value.split(':').map(str::trim).collect();
    match parts.as_slice() {
        ["fixed", l] => Ok(DescriptionDist::Fixed(num("description", l)?)),
        ["uniform", a, b] => Ok(DescriptionDist::Uniform { min: num("description", a)?, max: num("description", b)? }),
        _ => Err(CliError::Config(format!("description `{value}` is not fixed:LEN or uniform:MIN:MAX"))),
    }
}

fn parse_workload(value: &str, description: DescriptionDist) -> Result<WorkloadSpec, CliError> {
    let (kind, args) = value.split_once(':').unwrap_or((value, ""));
    let nums = || -> Result<Vec<u64>, CliError> {
        args.split(',').filter(|s| !s.trim().is_empty()).map(|s| num("workload", s.trim())).collect()
    };
    match (kind.trim(), nums()?.as_slice()) {
        ("rate", [c, t, r]) => Ok(WorkloadSpec::Rate { creates: *c, transfers: *t, removes: *r, description }),
        ("ramp", [s, e]) => Ok(WorkloadSpec::GasRamp { start_gas: *s, end_gas: *e }),
        ("annual", [n]) => Ok(WorkloadSpec::Annual { n: *n, description }),
        _ => Err(CliError::Config(format!("workload `{value}` not understood"))),
    }
}

/// Applies one setting to `cfg`.
pub fn apply(cfg: &mut ExperimentConfig, key: &str, value: &str) -> Result<(), CliError> {
    let p = &mut cfg.params;
    match key {
        "period" => p.period = seconds(key, value)?,
        "gas_limit" => p.gas_limit = num(key, value)?,
        "validators" => cfg.validators = num(key, value)?,
        "byzantine" => cfg.faults = parse_byzantine(value)?,
        "seed" => cfg.seed = num(key, value)?,
        "periods" => cfg.periods = num(key, value)?,
        "workload" => cfg.workload = parse_workload(value, description_of(&cfg.workload))?,
        "description" => {
            let d = parse_description(value)?;
            match &mut cfg.workload {
                WorkloadSpec::Rate { description, .. } | WorkloadSpec::Annual { description, .. } => *description = d,
                WorkloadSpec::GasRamp { .. } => {}
            }
        }
        "clients" => cfg.clients = num(key, value)?,
        "bandwidth" => p.bandwidth = num(key, value)?,
        "base_delay_ms" => cfg.base_delay = SimTime::from_millis(num(key, value)?),
        "jitter_ms" => cfg.jitter = SimTime::from_millis(num(key, value)?),
        "header_size" => p.header_size = num(key, value)?,
        "genesis_size" => p.genesis_size = num(key, value)?,
        "pp_overhead" => p.sizes.pp_overhead = num(key, value)?,
        "prepare_size" => p.sizes.prepare = num(key, value)?,
        "commit_size" => p.sizes.commit = num(key, value)?,
        "reject_invalid_at_mempool" => cfg.reject_invalid = num(key, value)?,
        other => return Err(CliError::Config(format!("unknown setting `{other}`"))),
    }
    Ok(())
}

/// Defaults, then the file, then `overrides`, in that order. `workload` is
/// applied before `description` so the distribution sticks.
pub fn build(file: Option<&Path>, overrides: &[(&str, String)]) -> Result<ExperimentConfig, CliError> {
    let mut entries = match file {
        Some(path) => load(path)?,
        None => Vec::new(),
    };
    entries.extend(overrides.iter().map(|(k, v)| (k.to_string(), v.clone())));
    entries.sort_by_key(|(k, _)| k == "description");
    let mut cfg = ExperimentConfig::default();
    for (k, v) in &entries {
        apply(&mut cfg, k, v)?;
    }
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blanks() {
        let e = parse("# run\n\nperiod = 60\n gas_limit=500000 \n").unwrap();
        assert_eq!(e, vec![("period".into(), "60".into()), ("gas_limit".into(), "500000".into())]);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(matches!(parse("period 60"), Err(CliError::Config(_))));
        assert!(matches!(parse("colour = red"), Err(CliError::Config(_))));
        assert!(matches!(parse("seed = 1\nseed = 2"), Err(CliError::Config(_))));
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        fs::write(&path, "period = 60\nseed = 4\nworkload = annual:10\ndescription = uniform:0:10\n").unwrap();
        let cfg = build(Some(&path), &[("seed", "9".into()), ("workload", "rate:1,2,3".into())]).unwrap();
        assert_eq!(cfg.params.period, SimTime::from_secs(60));
        assert_eq!(cfg.seed, 9);
        assert_eq!(
            cfg.workload,
            WorkloadSpec::Rate {
                creates: 1,
                transfers: 2,
                removes: 3,
                description: DescriptionDist::Uniform { min: 0, max: 10 }
            }
        );
    }

    #[test]
    fn byzantine_spec() {
        assert_eq!(
            parse_byzantine("0:silent, 3:equivocator").unwrap(),
            vec![(0, Behavior::Silent), (3, Behavior::Equivocator)]
        );
        assert!(parse_byzantine("none").unwrap().is_empty());
        assert!(parse_byzantine("x:silent").is_err());
        assert!(parse_byzantine("1:sleepy").is_err());
    }

    #[test]
    fn invalid_values_are_config_errors() {
        assert!(matches!(build(None, &[("period", "-1".into())]), Err(CliError::Config(_))));
        assert!(matches!(build(None, &[("byzantine", "0:silent,1:silent".into())]), Err(CliError::Config(_))));
        assert!(matches!(build(None, &[("workload", "ramp:1".into())]), Err(CliError::Config(_))));
    }
}
