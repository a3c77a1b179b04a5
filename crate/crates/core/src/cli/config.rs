//! Experiment configuration files.
//!
//! ```text
//! # comment
//! [experiment]
//! name = comb-counterexample
//! [shape]
//! kind = comb
//! h = 2^-12
//! [schedule]
//! eps = dyadic(3, 5)
//! ```
//!
//! Numbers accept `0.25`, `1/1024` and `2^-10`. `dyadic(k, n)` is `2^-k, ..., 2^-(k+n-1)`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::vec2::Vec2;

/// One `[name]` block of `key = value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Section {
    pub name: String,
    pub entries: BTreeMap<String, String>,
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::ConfigParse(format!("[{}] is missing `{key}`", self.name)))
    }

    pub fn num(&self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(|v| parse_num(v).map_err(|e| self.wrap(key, e))).transpose()
    }

    pub fn num_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.num(key)?.unwrap_or(default))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.trim().parse().map_err(|_| self.wrap(key, Error::ConfigParse(format!("`{v}` is not a count")))),
        }
    }

    pub fn point(&self, key: &str) -> Result<Option<Vec2>> {
        self.get(key).map(|v| parse_point(v).map_err(|e| self.wrap(key, e))).transpose()
    }

    pub fn points(&self, key: &str) -> Result<Option<Vec<Vec2>>> {
        self.get(key).map(|v| parse_points(v).map_err(|e| self.wrap(key, e))).transpose()
    }

    fn wrap(&self, key: &str, e: Error) -> Error {
        match e {
            Error::ConfigParse(m) => Error::ConfigParse(format!("[{}] {key}: {m}", self.name)),
            other => other,
        }
    }
}

/// A parsed configuration file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    pub sections: BTreeMap<String, Section>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let mut sections: BTreeMap<String, Section> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |m: &str| Error::ConfigParse(format!("line {}: {m}", i + 1));
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| at("unterminated section header"))?.trim();
                if name.is_empty() || name.contains(char::is_whitespace) {
                    return Err(at("section names are single words"));
                }
                if sections.contains_key(name) {
                    return Err(at(&format!("duplicate section [{name}]")));
                }
                sections.insert(name.to_string(), Section { name: name.to_string(), entries: BTreeMap::new() });
                current = Some(name.to_string());
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| at("expected `key = value`"))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(at("empty key"));
            }
            let sec = current.as_ref().ok_or_else(|| at("entry outside of any section"))?;
            let entries = &mut sections.get_mut(sec).expect("section exists").entries;
            if entries.insert(k.to_string(), v.to_string()).is_some() {
                return Err(at(&format!("duplicate key `{k}`")));
            }
        }
        Ok(Config { sections })
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Config::parse(&text)
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.get(name)
    }

    pub fn require(&self, name: &str) -> Result<&Section> {
        self.section(name).ok_or_else(|| Error::ConfigParse(format!("missing section [{name}]")))
    }

    /// The named section, or an empty one.
    pub fn section_or_empty(&self, name: &str) -> Section {
        self.section(name).cloned().unwrap_or_else(|| Section { name: name.into(), entries: BTreeMap::new() })
    }
}

/// The validated common part of a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub eps: Option<Vec<f64>>,
    pub t_max: Option<f64>,
    pub c: Option<f64>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub raw: Config,
}

impl ExperimentConfig {
    pub fn from_config(raw: Config) -> Result<ExperimentConfig> {
        let exp = raw.require("experiment")?;
        let name = exp.require("name")?.to_string();
        let sched = raw.section_or_empty("schedule");
        let eps = sched.get("eps").map(parse_schedule).transpose()?;
        let t_max = sched.num("T")?;
        let c = sched.num("c")?;
        let tol = sched.num("tol")?;
        for (k, v) in [("T", t_max), ("c", c), ("tol", tol)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::ConfigParse(format!("[schedule] {k} must be positive, got {v}")));
                }
            }
        }
        let output = raw.section_or_empty("output");
        let out = output.get("dir").map(PathBuf::from);
        let seed = match output.get("seed").or(exp.get("seed")) {
            None => 0,
            Some(s) => s.trim().parse().map_err(|_| Error::ConfigParse(format!("seed `{s}` is not an integer")))?,
        };
        Ok(ExperimentConfig { name, eps, t_max, c, tol, out, seed, raw })
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        ExperimentConfig::from_config(Config::load(path)?)
    }

    pub fn eps_or(&self, default: &[f64]) -> Vec<f64> {
        self.eps.clone().unwrap_or_else(|| default.to_vec())
    }
}

/// `0.25`, `1/1024`, `2^-10`, `-3`.
pub fn parse_num(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::ConfigParse(format!("`{s}` is not a number"));
    let v = if let Some((a, b)) = s.split_once('^') {
        let base: f64 = a.trim().parse().map_err(|_| bad())?;
        let exp: f64 = b.trim().parse().map_err(|_| bad())?;
        base.powf(exp)
    } else if let Some((a, b)) = s.split_once('/') {
        let a: f64 = a.trim().parse().map_err(|_| bad())?;
        let b: f64 = b.trim().parse().map_err(|_| bad())?;
        a / b
    } else {
        s.parse().map_err(|_| bad())?
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

/// Arguments of `name(a, b, ...)`; nested parentheses are kept inside arguments.
pub fn parse_call(s: &str) -> Result<(String, Vec<String>)> {
    let s = s.trim();
    let Some(open) = s.find('(') else { return Ok((s.to_string(), Vec::new())) };
    let inner = s[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| Error::ConfigParse(format!("`{s}`: missing closing parenthesis")))?;
    let mut args = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in inner.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if depth < 0 {
            return Err(Error::ConfigParse(format!("`{s}`: unbalanced parentheses")));
        }
        if ch == ',' && depth == 0 {
            args.push(cur.trim().to_string());
            cur.clear();
        } else {
            cur.push(ch);
        }
    }
    if depth != 0 {
        return Err(Error::ConfigParse(format!("`{s}`: unbalanced parentheses")));
    }
    if !cur.trim().is_empty() || !args.is_empty() {
        args.push(cur.trim().to_string());
    }
    Ok((s[..open].trim().to_string(), args))
}

/// `(x, y)`.
pub fn parse_point(s: &str) -> Result<Vec2> {
    let (name, args) = parse_call(s)?;
    if !name.is_empty() || args.len() != 2 {
        return Err(Error::ConfigParse(format!("`{s}` is not a point `(x, y)`")));
    }
    Ok(Vec2::new(parse_num(&args[0])?, parse_num(&args[1])?))
}

/// Whitespace-separated points `(x, y) (x, y) ...`.
pub fn parse_points(s: &str) -> Result<Vec<Vec2>> {
    let mut out = Vec::new();
    let mut rest = s.trim();
    while !rest.is_empty() {
        let end = rest.find(')').ok_or_else(|| Error::ConfigParse(format!("`{s}`: unterminated point")))?;
        out.push(parse_point(&rest[..=end])?);
        rest = rest[end + 1..].trim_start_matches([',', ' ', '\t']);
    }
    Ok(out)
}

/// `dyadic(k, n)` or `list(a, b, ...)`; must be positive and strictly decreasing.
pub fn parse_schedule(s: &str) -> Result<Vec<f64>> {
    let (name, args) = parse_call(s)?;
    let v: Vec<f64> = match name.as_str() {
        "dyadic" => {
            if args.len() != 2 {
                return Err(Error::ConfigParse("dyadic takes (first exponent, count)".into()));
            }
            let k: i32 = args[0].parse().map_err(|_| Error::ConfigParse(format!("`{}` is not an integer", args[0])))?;
            let n: i32 = args[1].parse().map_err(|_| Error::ConfigParse(format!("`{}` is not a count", args[1])))?;
            if n <= 0 {
                return Err(Error::ConfigParse("dyadic count must be positive".into()));
            }
            (0..n).map(|i| 2f64.powi(-(k + i))).collect()
        }
        "list" => args.iter().map(|a| parse_num(a)).collect::<Result<_>>()?,
        _ => return Err(Error::ConfigParse(format!("unknown schedule `{s}`"))),
    };
    if v.is_empty() || v.iter().any(|&e| !(e > 0.0)) || v.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::ConfigParse(format!("schedule {v:?} must be positive and strictly decreasing")));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_and_schedules() {
        assert_eq!(parse_num("2^-3").unwrap(), 0.125);
        assert_eq!(parse_num(" 1/4 ").unwrap(), 0.25);
        assert!(parse_num("x").is_err());
        assert_eq!(parse_schedule("dyadic(3, 3)").unwrap(), vec![0.125, 0.0625, 0.03125]);
        assert_eq!(parse_schedule("list(0.5, 1/4)").unwrap(), vec![0.5, 0.25]);
        assert!(parse_schedule("list(0.25, 0.5)").is_err());
        assert_eq!(parse_points("(0,0) (1, 0.5)").unwrap(), vec![Vec2::ZERO, Vec2::new(1.0, 0.5)]);
    }

    #[test]
    fn sections_and_errors() {
        let c = Config::parse("# top\n[experiment]\nname = x # trailing\n[schedule]\neps = dyadic(2, 4)\n").unwrap();
        let e = ExperimentConfig::from_config(c).unwrap();
        assert_eq!(e.name, "x");
        assert_eq!(e.eps.unwrap().len(), 4);
        assert!(matches!(Config::parse("name = x"), Err(Error::ConfigParse(_))));
        assert!(matches!(Config::parse("[a]\n[a]"), Err(Error::ConfigParse(_))));
        assert!(matches!(Config::parse("[a]\nb"), Err(Error::ConfigParse(_))));
        let bad = Config::parse("[experiment]\nname = x\n[schedule]\ntol = -1").unwrap();
        assert!(matches!(ExperimentConfig::from_config(bad), Err(Error::ConfigParse(_))));
    }
}
