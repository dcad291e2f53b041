//! Run configuration: a JSON file (all fields optional) overlaid by flags.

use std::path::Path;

use kaf_core::estimates::{DuranGrid, KoornwinderGrid, WeightedGrid};
use kaf_core::transform::{AnalysisRules, RadialScheme};
use kaf_core::{KafError, Params};
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Radial {
    Gauss,
    Panel,
}

/// a as written: "p/q", an integer, or a decimal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AValue {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Panel {
    pub r_max: f64,
    pub panels: usize,
    pub order: usize,
}

impl Default for Panel {
    fn default() -> Self {
        Panel { r_max: 50.0, panels: 100, order: 20 }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Estimates {
    pub duran: DuranGrid,
    pub weighted: WeightedGrid,
    pub koornwinder: KoornwinderGrid,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    #[serde(rename = "N")]
    pub dim: usize,
    pub a: AValue,
    pub k: f64,
    #[serde(rename = "M")]
    pub m_max: usize,
    #[serde(rename = "L")]
    pub l_max: usize,
    /// Gauss radial nodes per sector; default 2L + 40
    pub nodes: Option<usize>,
    /// sphere rule exactness degree; default 2M + 24
    pub sphere_order: Option<usize>,
    pub radial: Radial,
    pub panel: Panel,
    /// decay orders checked
    pub p_max: u32,
    /// rank-one t grid
    pub t_max: f64,
    pub t_points: usize,
    /// transform samples along the first axis on [-sample_max, sample_max]
    pub sample_max: f64,
    pub samples: usize,
    pub seed: u64,
    pub format: Format,
    pub estimates: Estimates,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            dim: 1,
            a: AValue::Text("2".into()),
            k: 0.0,
            m_max: 4,
            l_max: 20,
            nodes: None,
            sphere_order: None,
            radial: Radial::Gauss,
            panel: Panel::default(),
            p_max: 6,
            t_max: 10.0,
            t_points: 101,
            sample_max: 5.0,
            samples: 41,
            seed: 1,
            format: Format::Json,
            estimates: Estimates::default(),
        }
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Config, Failure> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
    }

    pub fn params(&self) -> Result<Params, Failure> {
        let p = match &self.a {
            AValue::Number(v) => decimal_or_integer(self.dim, *v, self.k),
            AValue::Text(s) => parse_a(self.dim, s, self.k),
        };
        p.map_err(Failure::from)
    }

    pub fn rules(&self) -> AnalysisRules {
        let mut rules = AnalysisRules::gauss(self.m_max, self.l_max);
        if let Some(n) = self.nodes {
            rules.radial = RadialScheme::Gauss { nodes: n };
        }
        if self.radial == Radial::Panel {
            let p = &self.panel;
            rules.radial = RadialScheme::Panel { r_max: p.r_max, panels: p.panels, order: p.order };
        }
        if let Some(s) = self.sphere_order {
            rules.sphere_order = s;
        }
        rules
    }

    /// Cross-field checks beyond what Params enforces.
    pub fn validate(&self) -> Result<Params, Failure> {
        let p = self.params()?;
        if self.t_points == 0 || self.samples == 0 {
            return Err(Failure::Usage("t_points and samples must be positive".into()));
        }
        if !(self.t_max > 0.0) || !(self.sample_max > 0.0) {
            return Err(Failure::Usage("t_max and sample_max must be positive".into()));
        }
        Ok(p)
    }
}

fn decimal_or_integer(dim: usize, v: f64, k: f64) -> kaf_core::Result<Params> {
    if v.fract() == 0.0 && v >= 1.0 && v < 1e15 {
        Params::rational(dim, v as u64, 1, k)
    } else {
        Params::new(dim, v, k)
    }
}

fn parse_a(dim: usize, s: &str, k: f64) -> kaf_core::Result<Params> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let parse = |t: &str| {
            t.trim().parse::<u64>().map_err(|_| KafError::Usage(format!("a = '{s}': expected p/q with positive integers")))
        };
        return Params::rational(dim, parse(num)?, parse(den)?, k);
    }
    if let Ok(n) = s.parse::<u64>() {
        return Params::rational(dim, n, 1, k);
    }
    match s.parse::<f64>() {
        Ok(v) => Params::new(dim, v, k),
        Err(_) => Err(KafError::Usage(format!("a = '{s}': expected p/q or a number"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a_forms() {
        assert_eq!(parse_a(2, "2/3", 0.0).unwrap().a_ratio, Some((2, 3)));
        assert_eq!(parse_a(2, "4/6", 0.0).unwrap().a_ratio, Some((2, 3)));
        assert_eq!(parse_a(1, "2", 0.0).unwrap().a_ratio, Some((2, 1)));
        assert_eq!(parse_a(1, "1.5", 0.0).unwrap().a_ratio, None);
        assert!(matches!(parse_a(1, "x", 0.0), Err(KafError::Usage(_))));
        assert!(matches!(parse_a(1, "0/3", 0.0), Err(KafError::Domain(_))));
        assert!(matches!(parse_a(2, "2", 0.5), Err(KafError::Capability(_))));
    }
}
