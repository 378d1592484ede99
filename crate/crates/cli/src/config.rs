//! `key=value` defaults files, expanded into flags placed before the
//! command-line flags so that the latter win.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// Parse a defaults file into `--key value` pairs. Blank lines and lines
/// starting with `#` are skipped.
pub fn parse_defaults(text: &str) -> Result<Vec<String>> {
    let mut args = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("config line {}: expected key=value, got {line:?}", k + 1);
        };
        let key = key.trim().trim_start_matches("--");
        if key.is_empty() || key == "config" {
            bail!("config line {}: invalid key {key:?}", k + 1);
        }
        args.push(format!("--{key}"));
        args.push(value.trim().to_string());
    }
    Ok(args)
}

/// Insert the contents of any `--config FILE` right after the subcommand.
pub fn expand(argv: Vec<String>) -> Result<Vec<String>> {
    let mut config = None;
    let mut command_at = None;
    let mut i = 1;
    while i < argv.len() {
        let a = &argv[i];
        if a == "--config" {
            config = argv.get(i + 1).cloned();
            i += 2;
            continue;
        }
        if let Some(path) = a.strip_prefix("--config=") {
            config = Some(path.to_string());
        } else if command_at.is_none() && !a.starts_with('-') {
            command_at = Some(i);
        }
        i += 1;
    }
    let (Some(path), Some(at)) = (config, command_at) else {
        return Ok(argv);
    };
    let text = fs::read_to_string(Path::new(&path)).with_context(|| format!("cannot read config file {path}"))?;
    let defaults = parse_defaults(&text)?;
    let mut out = argv[..=at].to_vec();
    out.extend(defaults);
    out.extend_from_slice(&argv[at + 1..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &[&str]) -> Vec<String> {
        s.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn pairs_and_comments() {
        let args = parse_defaults("# defaults\nG = 1.2\n\n--gamma=1\n").unwrap();
        assert_eq!(args, v(&["--G", "1.2", "--gamma", "1"]));
        assert!(parse_defaults("G 1.2").is_err());
    }

    #[test]
    fn defaults_precede_flags() {
        let dir = std::env::temp_dir().join(format!("kerrdpt-config-{}", std::process::id()));
        std::fs::write(&dir, "G=0.5\n").unwrap();
        let p = dir.to_string_lossy().to_string();
        let argv = v(&["kerrdpt", "--config", &p, "spectra", "--G", "0.9"]);
        let out = expand(argv).unwrap();
        assert_eq!(out, v(&["kerrdpt", "--config", &p, "spectra", "--G", "0.5", "--G", "0.9"]));
        std::fs::remove_file(dir).unwrap();
    }

    #[test]
    fn untouched_without_config() {
        let argv = v(&["kerrdpt", "spectra", "--G", "0.9"]);
        assert_eq!(expand(argv.clone()).unwrap(), argv);
    }
}
