//! `key = value` run files. Keys are the CLI long flag names; `#` starts a
//! comment.

use std::str::FromStr;

use super::{SchemeKind, SweepConfig, SweepParam, Template};
use crate::error::{Error, Result};
use crate::fbl::ChannelModel;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigEntry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

const KEYS: &[&str] = &[
    "scheme",
    "d1",
    "d2",
    "d3",
    "bits",
    "symbols",
    "energy-joule",
    "eps1-max",
    "h1",
    "h2",
    "h3",
    "devices",
    "multi-spacing",
    "sweep-param",
    "sweep-values",
    "bandwidth-hz",
    "noise-psd-dbm",
    "pathloss-intercept-db",
    "pathloss-slope-db",
    "draws",
    "seed",
    "target",
];

/// Splits a run file into entries. Unknown and repeated keys are errors.
pub fn parse_config(text: &str) -> Result<Vec<ConfigEntry>> {
    let mut out: Vec<ConfigEntry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| Error::Config {
            line,
            message: format!("expected `key = value`, got `{body}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(Error::Config {
                line,
                message: format!("unknown key `{key}`"),
            });
        }
        if value.is_empty() {
            return Err(Error::Config {
                line,
                message: format!("`{key}` has no value"),
            });
        }
        if let Some(prev) = out.iter().find(|e| e.key == key) {
            return Err(Error::Config {
                line,
                message: format!("`{key}` already set on line {}", prev.line),
            });
        }
        out.push(ConfigEntry {
            line,
            key: key.to_string(),
            value: value.to_string(),
        });
    }
    Ok(out)
}

fn number<T: FromStr>(e: &ConfigEntry) -> Result<T> {
    e.value.parse().map_err(|_| Error::Config {
        line: e.line,
        message: format!("`{}` is not a valid value for `{}`", e.value, e.key),
    })
}

/// Contents of a run file after typing, with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct RunFile {
    pub scheme: Option<String>,
    pub template: Template,
    pub channel: ChannelModel,
    pub sweep_param: Option<SweepParam>,
    pub sweep_values: Option<Vec<f64>>,
    pub draws: Option<u64>,
    pub seed: Option<u64>,
    pub target: Option<f64>,
}

impl RunFile {
    /// Parses a run file. `default_energy_joule` applies when the file has
    /// no `energy-joule` entry.
    pub fn parse(text: &str, default_energy_joule: f64) -> Result<RunFile> {
        let mut rf = RunFile {
            scheme: None,
            template: Template {
                energy_joule: default_energy_joule,
                ..Template::default()
            },
            channel: ChannelModel::default(),
            sweep_param: None,
            sweep_values: None,
            draws: None,
            seed: None,
            target: None,
        };
        for e in parse_config(text)? {
            let t = &mut rf.template;
            match e.key.as_str() {
                "scheme" => rf.scheme = Some(e.value.clone()),
                "d1" => t.d1 = number(&e)?,
                "d2" => t.d2 = number(&e)?,
                "d3" => t.d3 = number(&e)?,
                "bits" => t.data_bits = number(&e)?,
                "symbols" => t.budget_symbols = number(&e)?,
                "energy-joule" => t.energy_joule = number(&e)?,
                "eps1-max" => t.eps1_max = number(&e)?,
                "h1" => t.h1 = Some(number(&e)?),
                "h2" => t.h2 = Some(number(&e)?),
                "h3" => t.h3 = Some(number(&e)?),
                "devices" => t.devices = number(&e)?,
                "multi-spacing" => t.multi_spacing_m = number(&e)?,
                "sweep-param" => {
                    rf.sweep_param = Some(e.value.parse().map_err(|err: Error| Error::Config {
                        line: e.line,
                        message: err.to_string(),
                    })?)
                }
                "sweep-values" => {
                    let vals = e
                        .value
                        .split(',')
                        .map(|v| {
                            v.trim().parse::<f64>().map_err(|_| Error::Config {
                                line: e.line,
                                message: format!("`{}` is not a number", v.trim()),
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    rf.sweep_values = Some(vals);
                }
                "bandwidth-hz" => rf.channel.bandwidth_hz = number(&e)?,
                "noise-psd-dbm" => rf.channel.noise_psd_dbm_per_hz = number(&e)?,
                "pathloss-intercept-db" => rf.channel.pathloss_intercept_db = number(&e)?,
                "pathloss-slope-db" => rf.channel.pathloss_exponent_coeff_db = number(&e)?,
                "draws" => rf.draws = Some(number(&e)?),
                "seed" => rf.seed = Some(number(&e)?),
                "target" => rf.target = Some(number(&e)?),
                _ => unreachable!("key list and match arms disagree"),
            }
        }
        Ok(rf)
    }

    /// Scheme selection; `all` expands to `all_set`. Defaults to `all`.
    pub fn schemes(&self, all_set: &[SchemeKind]) -> Result<Vec<SchemeKind>> {
        SchemeKind::parse_selector(self.scheme.as_deref().unwrap_or("all"), all_set)
    }

    /// A sweep over the file's `sweep-param` and `sweep-values`.
    pub fn sweep_config(&self) -> Result<SweepConfig> {
        let missing = |key: &str| Error::Config {
            line: 0,
            message: format!("sweep needs `{key}`"),
        };
        let cfg = SweepConfig {
            schemes: self.schemes(&SchemeKind::ALL)?,
            param: self.sweep_param.ok_or_else(|| missing("sweep-param"))?,
            values: self
                .sweep_values
                .clone()
                .ok_or_else(|| missing("sweep-values"))?,
            template: self.template.clone(),
            channel: self.channel,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
