//! Run configuration files and the small value syntaxes shared by flags.

use std::f64::consts::PI;
use std::path::Path;

use pairq_core::bench::{ChannelKind, PhaseDistribution};
use pairq_core::grover::{Encoding, Marked};
use pairq_core::ion::{self, PhysicalParams};
use serde::{Deserialize, Serialize};

use crate::Failure;

pub const DEFAULT_TRIALS: usize = 1000;
pub const MIN_TRIALS: usize = 100;

/// Everything needed to reproduce a bench report. Output locations are not
/// part of it, so a report embeds the same config wherever it was written.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub params: PhysicalParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: PhysicalParams::default(),
            experiment: None,
            trials: DEFAULT_TRIALS,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    Dephasing {
        channel: ChannelKind,
        #[serde(default)]
        distribution: PhaseDistribution,
        sigma_grid: Vec<f64>,
    },
    Delay {
        encoding: Encoding,
        marked: Marked,
        grid: Vec<f64>,
    },
    Oracle {
        marked: Marked,
    },
    Leakage {
        marked: Marked,
        grid: Vec<f64>,
    },
}

impl Experiment {
    fn uses_trials(&self) -> bool {
        !matches!(self, Experiment::Delay { .. })
    }
}

impl RunConfig {
    /// Every hard constraint the config breaks, in a stable order.
    pub fn violations(&self) -> Vec<String> {
        let mut out: Vec<String> = self.params.violations().into_iter().map(|v| format!("params: {v}")).collect();
        let Some(exp) = &self.experiment else {
            return out;
        };
        if exp.uses_trials() && self.trials < MIN_TRIALS {
            out.push(format!("trials must be >= {MIN_TRIALS} (got {})", self.trials));
        }
        let (name, grid, upper) = match exp {
            Experiment::Dephasing { channel, sigma_grid, .. } => {
                if *channel == ChannelKind::DelayDrift {
                    out.push("experiment.channel must be a dephasing kind".to_string());
                }
                ("sigma_grid", sigma_grid.as_slice(), None)
            }
            Experiment::Delay { grid, .. } => ("grid", grid.as_slice(), None),
            Experiment::Leakage { grid, .. } => ("grid", grid.as_slice(), Some(1.0)),
            Experiment::Oracle { .. } => return out,
        };
        if grid.is_empty() {
            out.push(format!("experiment.{name} is empty"));
        }
        for v in grid {
            if !v.is_finite() || *v < 0.0 {
                out.push(format!("experiment.{name} value {v} must be finite and >= 0"));
            } else if upper.is_some_and(|u| *v > u) {
                out.push(format!("experiment.{name} value {v} is a probability and must be <= 1"));
            }
        }
        out
    }

    pub fn regime_warnings(&self) -> Vec<String> {
        ion::check_regime(&self.params).warnings()
    }

    pub fn validated(self) -> Result<Self, Failure> {
        let v = self.violations();
        if v.is_empty() {
            Ok(self)
        } else {
            Err(Failure::config(v))
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config is plain data");
        s.push('\n');
        s
    }
}

/// Reads a config file. A bench report JSON is accepted too, in which case
/// its embedded config is used.
pub fn load(path: &Path) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Failure::config(vec![format!("{}: invalid JSON: {e}", path.display())]))?;
    let value = match value {
        serde_json::Value::Object(mut map) if map.contains_key("points") && map.contains_key("config") => {
            map.remove("config").expect("checked")
        }
        other => other,
    };
    serde_json::from_value(value).map_err(|e| Failure::config(vec![format!("{}: {e}", path.display())]))
}

/// `a:b:n` (n evenly spaced points, ends included), `x,y,z`, or a single
/// value.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad number {t:?} in grid {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [a, b, n] => {
            let (a, b) = (num(a)?, num(b)?);
            let n: usize = n.trim().parse().map_err(|_| format!("bad point count {n:?} in grid {s:?}"))?;
            Ok(match n {
                0 => Vec::new(),
                1 => vec![a],
                _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
            })
        }
        [_] => s.split(',').map(num).collect(),
        _ => Err(format!("grid {s:?} must be a:b:n, a comma list, or a single value")),
    }
}

/// A delay in time units, or in bare phase periods with a `period` suffix
/// (`0.25period`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DelaySpec {
    Time(f64),
    Periods(f64),
}

impl DelaySpec {
    pub fn resolve(self, params: &PhysicalParams) -> f64 {
        match self {
            DelaySpec::Time(t) => t,
            DelaySpec::Periods(k) => k * params.bare_period(),
        }
    }
}

pub fn parse_delay(s: &str) -> Result<DelaySpec, String> {
    let s = s.trim();
    let (body, periods) = match s.strip_suffix("period") {
        Some(b) => (b.trim(), true),
        None => (s, false),
    };
    let v: f64 = body.parse().map_err(|_| format!("bad delay {s:?} (use a number or e.g. 0.25period)"))?;
    Ok(if periods { DelaySpec::Periods(v) } else { DelaySpec::Time(v) })
}

/// Radians, optionally as a multiple of pi: `1.2`, `pi`, `-pi/2`, `7pi/4`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim().replace('π', "pi");
    let Some((coef, rest)) = t.split_once("pi") else {
        return t.parse().map_err(|_| format!("bad angle {s:?}"));
    };
    let coef = match coef.trim() {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.trim_end_matches('*').parse().map_err(|_| format!("bad angle {s:?}"))?,
    };
    let den = match rest.trim() {
        "" => 1.0,
        r => r
            .strip_prefix('/')
            .and_then(|d| d.trim().parse::<f64>().ok())
            .ok_or_else(|| format!("bad angle {s:?}"))?,
    };
    Ok(coef * PI / den)
}

/// Kebab/lowercase enum names through their serde representation.
pub fn parse_enum<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}
