//! Check identifiers, grid selection and the flat `key=value` config format.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::is_prime;
use crate::localring::Case;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
#[value(rename_all = "kebab-case")]
pub enum CheckId {
    Gennr,
    Genram,
    ParamSystem,
    Surjinj,
    Calnr,
    Calram,
    ExemCalcul,
    DualDims,
    EulerChar,
    Nonadm,
    EvenPart,
    Filtration,
    All,
}

impl CheckId {
    /// Every concrete check, in report order.
    pub const CHECKS: [CheckId; 12] = [
        CheckId::Gennr,
        CheckId::Genram,
        CheckId::ParamSystem,
        CheckId::Surjinj,
        CheckId::Calnr,
        CheckId::Calram,
        CheckId::ExemCalcul,
        CheckId::DualDims,
        CheckId::EulerChar,
        CheckId::Nonadm,
        CheckId::EvenPart,
        CheckId::Filtration,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckId::Gennr => "gennr",
            CheckId::Genram => "genram",
            CheckId::ParamSystem => "param-system",
            CheckId::Surjinj => "surjinj",
            CheckId::Calnr => "calnr",
            CheckId::Calram => "calram",
            CheckId::ExemCalcul => "exem-calcul",
            CheckId::DualDims => "dual-dims",
            CheckId::EulerChar => "euler-char",
            CheckId::Nonadm => "nonadm",
            CheckId::EvenPart => "even-part",
            CheckId::Filtration => "filtration",
            CheckId::All => "all",
        }
    }

    pub fn expand(self) -> Vec<CheckId> {
        match self {
            CheckId::All => CheckId::CHECKS.to_vec(),
            id => vec![id],
        }
    }
}

/// Which weights of a case to visit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightSel {
    All,
    List(Vec<Vec<u32>>),
}

/// A validated request: one check id over a grid of primes, cases and weights.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckSpec {
    pub id: CheckId,
    pub primes: Vec<u32>,
    pub cases: Vec<Case>,
    pub u: u32,
    pub weights: WeightSel,
    /// Twist exponent for the induced examples; `p` when unset.
    pub q: Option<u32>,
    /// Truncation level; the per-prime default when unset.
    pub n_max: Option<usize>,
    pub steps: usize,
    pub seed: u64,
    #[serde(skip)]
    pub jobs: usize,
    #[serde(skip)]
    pub json: Option<PathBuf>,
    #[serde(skip)]
    pub allow_inconclusive: bool,
    #[serde(skip)]
    pub timing: bool,
}

pub const DEFAULT_STEPS: usize = 4;
pub const DEFAULT_SEED: u64 = 0;

/// Smallest truncation level at which the shipped grid certifies.
pub fn default_n_max(p: u32) -> usize {
    if p == 2 {
        6
    } else {
        4
    }
}

impl CheckSpec {
    pub fn new(id: CheckId, primes: Vec<u32>) -> Self {
        CheckSpec {
            id,
            primes,
            cases: vec![Case::Unramified, Case::Ramified],
            u: 1,
            weights: WeightSel::All,
            q: None,
            n_max: None,
            steps: DEFAULT_STEPS,
            seed: DEFAULT_SEED,
            jobs: 1,
            json: None,
            allow_inconclusive: false,
            timing: false,
        }
    }

    pub fn n_max_for(&self, p: u32) -> usize {
        self.n_max.unwrap_or_else(|| default_n_max(p))
    }

    pub fn validate(&self) -> Result<()> {
        if self.primes.is_empty() || self.cases.is_empty() {
            return Err(Error::Config("empty grid".into()));
        }
        for &p in &self.primes {
            // q = p² residue field elements must fit the byte encoding
            if !is_prime(p) || p > 13 {
                return Err(Error::Config(format!("unsupported prime {p}")));
            }
        }
        if self.n_max.is_some_and(|n| n < 3) {
            return Err(Error::Config("Nmax must be at least 3".into()));
        }
        if self.q.is_some_and(|q| q < 2) {
            return Err(Error::Config("q must be at least 2".into()));
        }
        if self.steps == 0 {
            return Err(Error::Config("steps must be positive".into()));
        }
        if self.jobs == 0 {
            return Err(Error::Config("jobs must be positive".into()));
        }
        if let WeightSel::List(ws) = &self.weights {
            for w in ws {
                if w.is_empty() || w.len() > 2 {
                    return Err(Error::Config(format!("weight {w:?} needs one or two parameters")));
                }
                if let Some(&p) = self.primes.iter().find(|&&p| w.iter().any(|&r| r >= p)) {
                    return Err(Error::Config(format!("weight {w:?} is out of range for p = {p}")));
                }
            }
        }
        Ok(())
    }
}

pub fn parse_primes(s: &str) -> Result<Vec<u32>> {
    s.split(',').map(|x| x.trim().parse().map_err(|_| Error::Config(format!("bad prime {x:?}")))).collect()
}

pub fn parse_cases(s: &str) -> Result<Vec<Case>> {
    match s.trim() {
        "unram" => Ok(vec![Case::Unramified]),
        "ram" => Ok(vec![Case::Ramified]),
        "both" | "all" => Ok(vec![Case::Unramified, Case::Ramified]),
        other => Err(Error::Config(format!("unknown case {other:?}"))),
    }
}

/// `all`, or weights separated by `;` with parameters separated by `,`.
pub fn parse_weights(s: &str) -> Result<WeightSel> {
    if s.trim() == "all" {
        return Ok(WeightSel::All);
    }
    let ws = s
        .split(';')
        .map(|w| {
            w.split(',')
                .map(|x| x.trim().parse().map_err(|_| Error::Config(format!("bad weight parameter {x:?}"))))
                .collect::<Result<Vec<u32>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WeightSel::List(ws))
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Config(format!("bad value {v:?} for {key}")))
}

fn parse_flag(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("bad value {v:?} for {key}"))),
    }
}

/// Reads `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Config(format!("line {}: expected key=value", n + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

/// Applies one setting, with keys named like the command-line flags.
pub fn apply_setting(spec: &mut CheckSpec, key: &str, value: &str) -> Result<()> {
    match key {
        "p" => spec.primes = parse_primes(value)?,
        "q" => spec.q = Some(parse_num(key, value)?),
        "case" => spec.cases = parse_cases(value)?,
        "u" => spec.u = parse_num(key, value)?,
        "weights" => spec.weights = parse_weights(value)?,
        "Nmax" => spec.n_max = Some(parse_num(key, value)?),
        "steps" => spec.steps = parse_num(key, value)?,
        "seed" => spec.seed = parse_num(key, value)?,
        "jobs" => spec.jobs = parse_num(key, value)?,
        "json" => spec.json = Some(PathBuf::from(value)),
        "allow-inconclusive" => spec.allow_inconclusive = parse_flag(key, value)?,
        "timing" => spec.timing = parse_flag(key, value)?,
        _ => return Err(Error::Config(format!("unknown setting {key:?}"))),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_lines() {
        let m = parse_config("# grid\np = 2,3\n\ncase=ram\nNmax=5\n").unwrap();
        let mut spec = CheckSpec::new(CheckId::Nonadm, vec![2]);
        for (k, v) in &m {
            apply_setting(&mut spec, k, v).unwrap();
        }
        assert_eq!(spec.primes, vec![2, 3]);
        assert_eq!(spec.cases, vec![Case::Ramified]);
        assert_eq!(spec.n_max, Some(5));
        spec.validate().unwrap();
    }

    #[test]
    fn rejects_bad_settings() {
        assert!(parse_config("p 2").is_err());
        let mut spec = CheckSpec::new(CheckId::Nonadm, vec![2]);
        assert!(apply_setting(&mut spec, "colour", "red").is_err());
        assert!(apply_setting(&mut spec, "case", "split").is_err());
        spec.n_max = Some(2);
        assert!(spec.validate().is_err());
        spec.n_max = None;
        spec.weights = parse_weights("1,2").unwrap();
        assert!(spec.validate().is_err());
        spec.primes = vec![4];
        assert!(spec.validate().is_err());
    }

    #[test]
    fn weight_lists() {
        assert_eq!(parse_weights("all").unwrap(), WeightSel::All);
        assert_eq!(parse_weights("0,1;1,1").unwrap(), WeightSel::List(vec![vec![0, 1], vec![1, 1]]));
        assert_eq!(parse_weights("1").unwrap(), WeightSel::List(vec![vec![1]]));
    }
}
