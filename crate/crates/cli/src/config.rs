//! Config-file merging and parsing of the structured flag values.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use num_complex::Complex64 as C64;
use solsurf::expr::parse;
use solsurf::immersion::Domain;
use solsurf::{Params, WeierstrassData};

use crate::CliError;

/// Reads `key = value` lines; `#` starts a comment.
pub fn read_config_file(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "{}:{}: expected `key = value`",
                path.display(),
                lineno + 1
            )));
        };
        let key = k.trim().replace('_', "-");
        let value = v.trim().trim_matches('"').to_string();
        if key.is_empty() || key == "config" {
            return Err(CliError::Usage(format!(
                "{}:{}: invalid key",
                path.display(),
                lineno + 1
            )));
        }
        out.push((key, value));
    }
    Ok(out)
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(v.into());
        }
    }
    None
}

/// Splices the config-file entries in as `--key=value` flags placed before the
/// user's own flags, so that the latter override them.
pub fn merge_config_file(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let entries = read_config_file(Path::new(&path))?;
    // leading subcommand words (`generate`, `ode erf-example`, ...)
    let mut words = Vec::new();
    let mut rest = Vec::new();
    let mut skip_next = false;
    let mut in_words = true;
    for a in args.iter().skip(1) {
        let s = a.to_string_lossy();
        if skip_next {
            skip_next = false;
            rest.push(a.clone());
            continue;
        }
        if s == "--config" {
            skip_next = true;
            rest.push(a.clone());
            continue;
        }
        if in_words && !s.starts_with('-') {
            words.push(a.clone());
            if s != "ode" {
                in_words = false;
            }
            continue;
        }
        if s.starts_with("--config=") {
            rest.push(a.clone());
            continue;
        }
        in_words = false;
        rest.push(a.clone());
    }
    let mut out = vec![args[0].clone()];
    out.extend(words);
    out.extend(
        entries
            .into_iter()
            .map(|(k, v)| OsString::from(format!("--{k}={v}"))),
    );
    out.extend(rest);
    Ok(out)
}

/// Parses `a:b:c:d` together with a resolution into a grid.
pub fn parse_domain(spec: &str, res: (usize, usize)) -> Result<Domain, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 4 {
        return Err(CliError::Usage(format!(
            "--domain expects a:b:c:d, got `{spec}`"
        )));
    }
    let mut v = [0.0; 4];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("--domain: `{p}` is not a number")))?;
    }
    Domain::new(v[0], v[1], v[2], v[3], res.0, res.1)
        .map_err(|e| CliError::Usage(format!("--domain: {e}")))
}

/// `N` or `NXxNY`, each at least 2.
pub fn parse_res(spec: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Usage(format!("--res expects N or NXxNY with N ≥ 2, got `{spec}`"));
    let (a, b) = match spec.split_once(['x', 'X']) {
        Some((a, b)) => (a, b),
        None => (spec, spec),
    };
    let nx: usize = a.trim().parse().map_err(|_| bad())?;
    let ny: usize = b.trim().parse().map_err(|_| bad())?;
    if nx < 2 || ny < 2 {
        return Err(bad());
    }
    Ok((nx, ny))
}

/// A complex constant written as an expression (`1`, `0.5-2*i`, `sqrt(2)`).
pub fn parse_complex(flag: &str, spec: &str) -> Result<C64, CliError> {
    let e = parse(spec).map_err(|e| CliError::Usage(format!("--{flag}: {e}")))?;
    if !e.is_constant() || !e.parameters().is_empty() {
        return Err(CliError::Usage(format!(
            "--{flag}: `{spec}` is not a constant"
        )));
    }
    e.eval(C64::new(0.0, 0.0), &Params::new())
        .map_err(|e| CliError::Usage(format!("--{flag}: {e}")))
}

pub fn parse_params(items: &[String]) -> Result<Params, CliError> {
    let mut params = Params::new();
    for item in items {
        let Some((name, value)) = item.split_once('=') else {
            return Err(CliError::Usage(format!(
                "--param expects NAME=VALUE, got `{item}`"
            )));
        };
        params.insert(
            name.trim().to_string(),
            parse_complex("param", value.trim())?,
        );
    }
    Ok(params)
}

pub fn check_tol(tol: f64) -> Result<f64, CliError> {
    if tol > 0.0 && tol <= 1e-2 {
        Ok(tol)
    } else {
        Err(CliError::Usage(format!(
            "--tol must lie in (0, 1e-2], got {tol}"
        )))
    }
}

/// At least three strictly decreasing positive values.
pub fn parse_lambdas(spec: &str) -> Result<Vec<f64>, CliError> {
    let values: Vec<f64> = spec
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("--lambdas: cannot parse `{spec}`")))?;
    if values.len() < 3 {
        return Err(CliError::Usage(format!(
            "--lambdas needs at least 3 values for an order fit, got {}",
            values.len()
        )));
    }
    if values.iter().any(|v| !(*v > 0.0)) || values.windows(2).any(|w| w[1] >= w[0]) {
        return Err(CliError::Usage(
            "--lambdas must be positive and strictly decreasing".into(),
        ));
    }
    Ok(values)
}

/// Weierstrass data from the shared data flags.
pub fn build_data(data: &crate::args::DataArgs) -> Result<WeierstrassData, CliError> {
    let eta = parse(&data.eta).map_err(|e| CliError::Usage(format!("--eta: {e}")))?;
    let psi = parse(&data.psi).map_err(|e| CliError::Usage(format!("--psi: {e}")))?;
    let params = parse_params(&data.params)?;
    for name in eta.parameters().into_iter().chain(psi.parameters()) {
        if !params.contains_key(&name) {
            return Err(CliError::Usage(format!(
                "parameter `{name}` needs a --param binding"
            )));
        }
    }
    Ok(WeierstrassData::new(eta, psi)
        .with_params(params)
        .with_lambda(data.lambda)
        .with_base(parse_complex("base", &data.base)?))
}

/// Deterministic, well-spread points inside the domain (Halton sequence in
/// bases 2 and 3, kept off the boundary).
pub fn spread_points(domain: &Domain, n: usize) -> Vec<C64> {
    fn radical_inverse(mut k: usize, base: usize) -> f64 {
        let (mut f, mut r) = (1.0, 0.0);
        while k > 0 {
            f /= base as f64;
            r += f * (k % base) as f64;
            k /= base;
        }
        r
    }
    (1..=n)
        .map(|k| {
            let s = 0.05 + 0.9 * radical_inverse(k, 2);
            let t = 0.05 + 0.9 * radical_inverse(k, 3);
            C64::new(
                domain.re_min + s * (domain.re_max - domain.re_min),
                domain.im_min + t * (domain.im_max - domain.im_min),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolution_forms() {
        assert_eq!(parse_res("32").unwrap(), (32, 32));
        assert_eq!(parse_res("8x5").unwrap(), (8, 5));
        assert!(parse_res("1").is_err());
        assert!(parse_res("ax3").is_err());
    }

    #[test]
    fn domain_form() {
        let d = parse_domain("-1:1:-0.5:0.5", (3, 3)).unwrap();
        assert_eq!(
            (d.re_min, d.re_max, d.im_min, d.im_max),
            (-1.0, 1.0, -0.5, 0.5)
        );
        assert!(parse_domain("-1:1:-0.5", (3, 3)).is_err());
        assert!(parse_domain("1:-1:0:1", (3, 3)).is_err());
    }

    #[test]
    fn lambda_lists() {
        assert_eq!(
            parse_lambdas("0.1, 0.01,0.001").unwrap(),
            vec![0.1, 0.01, 0.001]
        );
        assert!(parse_lambdas("0.1").is_err());
        assert!(parse_lambdas("0.1,0.2,0.3").is_err());
        assert!(parse_lambdas("0.1,0.01,-0.001").is_err());
    }

    #[test]
    fn complex_values() {
        assert_eq!(parse_complex("c", "0.5-2*i").unwrap(), C64::new(0.5, -2.0));
        assert!(parse_complex("c", "z").is_err());
    }

    #[test]
    fn config_entries_come_before_user_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        fs::write(&path, "# comment\npsi = z\nlambda = 2\nq_scale = 1.5\n").unwrap();
        let args: Vec<OsString> = [
            "solsurf",
            "--config",
            path.to_str().unwrap(),
            "verify",
            "--lambda",
            "0.5",
        ]
        .iter()
        .map(OsString::from)
        .collect();
        let merged: Vec<String> = merge_config_file(args)
            .unwrap()
            .into_iter()
            .map(|s| s.into_string().unwrap())
            .collect();
        assert_eq!(merged[1], "verify");
        let pos_file = merged.iter().position(|s| s == "--lambda=2").unwrap();
        let pos_flag = merged.iter().position(|s| s == "0.5").unwrap();
        assert!(pos_file < pos_flag);
        assert!(merged.contains(&"--q-scale=1.5".to_string()));
    }

    #[test]
    fn spread_points_stay_inside() {
        let d = Domain::new(-1.0, 2.0, 0.0, 1.0, 2, 2).unwrap();
        let pts = spread_points(&d, 50);
        assert_eq!(pts.len(), 50);
        assert!(pts
            .iter()
            .all(|z| z.re > -1.0 && z.re < 2.0 && z.im > 0.0 && z.im < 1.0));
    }
}
