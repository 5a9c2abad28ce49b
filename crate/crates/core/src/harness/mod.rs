//! Scenario construction from physical parameters, parameter sweeps and
//! Monte-Carlo availability runs.

mod config;
mod emit;

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::cnoma::solve_cnoma;
use crate::error::{Error, Result};
use crate::fbl::{normalized_gain, ChannelModel, ErrorProb};
use crate::multi::{solve_multi_oma, Device, MultiScenario};
use crate::noma::solve_noma;
use crate::oma::solve_oma;
use crate::relay::solve_relay;
use crate::scenario::{Gains, Scenario};

pub use config::{parse_config, ConfigEntry, RunFile};
pub use emit::{
    csv_line, emit_availability_csv, emit_availability_plotdata, emit_csv, emit_plotdata,
    write_output, AVAILABILITY_HEADER, SWEEP_HEADER,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SchemeKind {
    Oma,
    Noma,
    Relay,
    Cnoma,
    OmaMulti,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 5] = [
        SchemeKind::Oma,
        SchemeKind::Noma,
        SchemeKind::Relay,
        SchemeKind::Cnoma,
        SchemeKind::OmaMulti,
    ];

    /// The schemes defined for a robot and an actuator.
    pub const TWO_DEVICE: [SchemeKind; 4] = [
        SchemeKind::Oma,
        SchemeKind::Noma,
        SchemeKind::Relay,
        SchemeKind::Cnoma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Oma => "oma",
            SchemeKind::Noma => "noma",
            SchemeKind::Relay => "relay",
            SchemeKind::Cnoma => "cnoma",
            SchemeKind::OmaMulti => "oma_multi",
        }
    }

    /// Parses a scheme name, or `all` for `all_set`.
    pub fn parse_selector(s: &str, all_set: &[SchemeKind]) -> Result<Vec<SchemeKind>> {
        if s.trim() == "all" {
            return Ok(all_set.to_vec());
        }
        s.split(',').map(|n| n.trim().parse()).collect()
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidScenario(format!("unknown scheme `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// Robot distance; the robot moves along the controller–actuator line.
    D1,
    M,
    D,
    /// Energy budget in joules.
    ETot,
    /// Number of devices (multi-device scheme only).
    K,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::D1 => "d1",
            SweepParam::M => "M",
            SweepParam::D => "D",
            SweepParam::ETot => "E_tot",
            SweepParam::K => "K",
        }
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            SweepParam::D1,
            SweepParam::M,
            SweepParam::D,
            SweepParam::ETot,
            SweepParam::K,
        ]
        .into_iter()
        .find(|p| p.name() == s)
        .ok_or_else(|| Error::InvalidScenario(format!("unknown sweep parameter `{s}`")))
    }
}

/// Physical description of one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    /// Controller–robot, controller–actuator and robot–actuator distances (m).
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub data_bits: u32,
    pub budget_symbols: u32,
    pub energy_joule: f64,
    pub eps1_max: f64,
    /// Number of devices for the multi-device scheme.
    pub devices: u32,
    /// Constrained device `k` of the multi-device scheme sits at
    /// `k·multi_spacing_m`; the last device at `d2`.
    pub multi_spacing_m: f64,
    /// Gains that replace the path-loss value of a link.
    pub h1: Option<f64>,
    pub h2: Option<f64>,
    pub h3: Option<f64>,
}

impl Default for Template {
    fn default() -> Self {
        Template {
            d1: 200.0,
            d2: 500.0,
            d3: 300.0,
            data_bits: 100,
            budget_symbols: 100,
            energy_joule: 5e-5,
            eps1_max: 1e-9,
            devices: 2,
            multi_spacing_m: 50.0,
            h1: None,
            h2: None,
            h3: None,
        }
    }
}

fn whole(v: f64, what: &str) -> Result<u32> {
    if v.fract() != 0.0 || !(v >= 1.0 && v <= u32::MAX as f64) {
        return Err(Error::InvalidScenario(format!(
            "{what} must be a positive integer, got {v}"
        )));
    }
    Ok(v as u32)
}

impl Template {
    /// The template with one parameter replaced. Moving the robot keeps it
    /// on the controller–actuator line, so `d3 = d2 − d1`.
    pub fn with_param(&self, param: SweepParam, value: f64) -> Result<Template> {
        let mut t = self.clone();
        match param {
            SweepParam::D1 => {
                t.d1 = value;
                t.d3 = t.d2 - value;
            }
            SweepParam::M => t.budget_symbols = whole(value, "M")?,
            SweepParam::D => t.data_bits = whole(value, "D")?,
            SweepParam::ETot => t.energy_joule = value,
            SweepParam::K => t.devices = whole(value, "K")?,
        }
        Ok(t)
    }
}

/// Unit-mean exponential power gains of the three links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingDraw {
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
}

/// Rayleigh power gains for draw `index`, a pure function of
/// `(seed, index)`.
pub fn draw_fading(seed: u64, index: u64) -> FadingDraw {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut g = || -> f64 {
        let x: f64 = Exp1.sample(&mut rng);
        // Exp1 can return exactly 0; keep gains strictly positive
        x.max(f64::MIN_POSITIVE)
    };
    FadingDraw {
        g1: g(),
        g2: g(),
        g3: g(),
    }
}

fn check_distance(name: &str, d: f64) -> Result<()> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidScenario(format!(
            "{name} must be a positive distance, got {d}"
        )));
    }
    Ok(())
}

/// Two-device scenario from distances and budgets. Faded draws may leave
/// the actuator stronger than the robot, so the gain order is only enforced
/// without fading.
pub fn build_scenario(
    channel: &ChannelModel,
    t: &Template,
    fading: Option<&FadingDraw>,
) -> Result<Scenario> {
    channel.validate()?;
    let gain = |name: &str, over: Option<f64>, d: f64, fade: f64| -> Result<f64> {
        let base = match over {
            Some(h) => h,
            None => {
                check_distance(name, d)?;
                normalized_gain(channel, d, 1.0)
            }
        };
        Ok(base * fade)
    };
    let f = fading.copied().unwrap_or(FadingDraw {
        g1: 1.0,
        g2: 1.0,
        g3: 1.0,
    });
    let gains = Gains {
        h1: gain("d1", t.h1, t.d1, f.g1)?,
        h2: gain("d2", t.h2, t.d2, f.g2)?,
        h3: gain("d3", t.h3, t.d3, f.g3)?,
    };
    let energy = t.energy_joule * channel.bandwidth_hz;
    let build = if fading.is_some() {
        Scenario::new_unordered
    } else {
        Scenario::new
    };
    build(t.data_bits, t.budget_symbols, energy, t.eps1_max, gains)
}

/// `K`-device scenario: constrained devices at `k·multi_spacing_m`, the
/// last device at `d2`, all with the robot's error target.
pub fn build_multi_scenario(channel: &ChannelModel, t: &Template) -> Result<MultiScenario> {
    channel.validate()?;
    if t.devices < 2 {
        return Err(Error::InvalidScenario(format!(
            "need at least 2 devices, got {}",
            t.devices
        )));
    }
    check_distance("d2", t.d2)?;
    let devices = (1..t.devices)
        .map(|k| {
            let d = k as f64 * t.multi_spacing_m;
            check_distance("multi-spacing", d)?;
            Ok(Device {
                gain: normalized_gain(channel, d, 1.0),
                eps_max: t.eps1_max,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    MultiScenario::new(
        t.data_bits,
        t.budget_symbols,
        t.energy_joule * channel.bandwidth_hz,
        devices,
        normalized_gain(channel, t.d2, 1.0),
    )
}

/// Allocation fields and errors of one scheme solve, flattened for output.
/// Fields a scheme does not use are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveSummary {
    pub scheme: SchemeKind,
    pub feasible: bool,
    pub m1: Option<u32>,
    pub m2: Option<u32>,
    pub p1: Option<f64>,
    pub p2: Option<f64>,
    pub ps: Option<f64>,
    pub pr: Option<f64>,
    pub eps_target: ErrorProb,
    pub eps_robot: Option<ErrorProb>,
}

impl SolveSummary {
    fn empty(scheme: SchemeKind) -> Self {
        SolveSummary {
            scheme,
            feasible: false,
            m1: None,
            m2: None,
            p1: None,
            p2: None,
            ps: None,
            pr: None,
            eps_target: ErrorProb::ONE,
            eps_robot: None,
        }
    }
}

/// Solves a two-device scheme on a scenario.
pub fn solve_scenario(scheme: SchemeKind, s: &Scenario) -> SolveSummary {
    let mut out = SolveSummary::empty(scheme);
    match scheme {
        SchemeKind::Oma => {
            let o = solve_oma(s);
            if let Some(a) = o.allocation {
                (out.m1, out.m2, out.p1, out.p2) = (Some(a.m1), Some(a.m2), Some(a.p1), Some(a.p2));
            }
            (out.eps_target, out.eps_robot) = (o.eps_target, o.eps_robot);
        }
        SchemeKind::Noma => {
            let o = solve_noma(s);
            if let Some(a) = o.allocation {
                (out.p1, out.p2) = (Some(a.p1), Some(a.p2));
            }
            (out.eps_target, out.eps_robot) = (o.eps_target, o.eps_robot);
        }
        SchemeKind::Relay => {
            let o = solve_relay(s);
            if let Some(a) = o.allocation {
                (out.m1, out.m2, out.ps, out.pr) = (Some(a.m1), Some(a.m2), Some(a.ps), Some(a.pr));
            }
            (out.eps_target, out.eps_robot) = (o.eps_target, o.eps_robot);
        }
        SchemeKind::Cnoma => {
            let o = solve_cnoma(s);
            if let Some(a) = o.allocation {
                (out.m1, out.m2) = (Some(a.m1), Some(a.m2));
                (out.p1, out.p2, out.pr) = (Some(a.p1), Some(a.p2), Some(a.pr));
            }
            (out.eps_target, out.eps_robot) = (o.eps_target, o.eps_robot);
        }
        SchemeKind::OmaMulti => {
            if let Ok(ms) = MultiScenario::from_two_device(s) {
                return solve_multi_summary(&ms);
            }
        }
    }
    out.feasible = out.eps_robot.is_some();
    out
}

/// Multi-device solve; `m1`/`p1` describe device 1 and `m2`/`p2` device K.
pub fn solve_multi_summary(ms: &MultiScenario) -> SolveSummary {
    let mut out = SolveSummary::empty(SchemeKind::OmaMulti);
    let o = solve_multi_oma(ms);
    if let Some(a) = &o.allocation {
        out.feasible = true;
        out.m1 = a.blocklengths.first().copied();
        out.p1 = a.powers.first().copied();
        out.m2 = a.blocklengths.last().copied();
        out.p2 = a.powers.last().copied();
    }
    (out.eps_target, out.eps_robot) = (o.eps_target, o.eps_robot);
    out
}

/// Solves `scheme` at a template, treating an invalid instance as infeasible.
pub fn solve_template(scheme: SchemeKind, channel: &ChannelModel, t: &Template) -> SolveSummary {
    let built = if scheme == SchemeKind::OmaMulti {
        build_multi_scenario(channel, t).map(|ms| solve_multi_summary(&ms))
    } else {
        build_scenario(channel, t, None).map(|s| solve_scenario(scheme, &s))
    };
    built.unwrap_or_else(|_| SolveSummary::empty(scheme))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub schemes: Vec<SchemeKind>,
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub template: Template,
    pub channel: ChannelModel,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        if self.schemes.is_empty() {
            return Err(Error::InvalidScenario("no scheme selected".into()));
        }
        if self.values.is_empty() {
            return Err(Error::InvalidScenario("sweep has no values".into()));
        }
        if self.values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidScenario(
                "sweep values must be positive".into(),
            ));
        }
        if self.values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidScenario(
                "sweep values must be strictly increasing".into(),
            ));
        }
        for &v in &self.values {
            self.template.with_param(self.param, v)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub param: SweepParam,
    pub value: f64,
    pub summary: SolveSummary,
}

/// One row per `(scheme, value)`, ordered by scheme then value. Points are
/// solved in parallel; the output does not depend on scheduling.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let jobs: Vec<(SchemeKind, f64)> = cfg
        .schemes
        .iter()
        .flat_map(|&k| cfg.values.iter().map(move |&v| (k, v)))
        .collect();
    Ok(jobs
        .par_iter()
        .map(|&(scheme, value)| {
            let summary = match cfg.template.with_param(cfg.param, value) {
                Ok(t) => solve_template(scheme, &cfg.channel, &t),
                Err(_) => SolveSummary::empty(scheme),
            };
            SweepRow {
                param: cfg.param,
                value,
                summary,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AvailabilityReport {
    pub scheme: SchemeKind,
    pub n_draws: u64,
    pub n_available: u64,
    pub fraction: f64,
    pub seed: u64,
    pub target: f64,
}

/// Relative slack on the robot's constraint when judging a draw.
const ROBOT_SLACK: f64 = 1e-6;

/// Whether a solve meets the reliability bar for both devices.
pub fn is_available(summary: &SolveSummary, eps1_max: f64, target: f64) -> bool {
    summary.feasible
        && summary.eps_target.value() <= target
        && summary
            .eps_robot
            .is_some_and(|e| e.value() <= eps1_max * (1.0 + ROBOT_SLACK))
}

fn check_schemes(schemes: &[SchemeKind]) -> Result<()> {
    match schemes.iter().find(|k| **k == SchemeKind::OmaMulti) {
        Some(k) => Err(Error::InvalidScenario(format!(
            "availability runs cover two-device schemes only, not `{k}`"
        ))),
        None => Ok(()),
    }
}

/// Per-draw availability flags for draws `range`, one inner entry per
/// scheme. Draw `i` depends only on `(seed, i)`.
pub fn availability_hits(
    schemes: &[SchemeKind],
    template: &Template,
    channel: &ChannelModel,
    range: Range<u64>,
    seed: u64,
    target: f64,
) -> Result<Vec<Vec<bool>>> {
    check_schemes(schemes)?;
    // validates the template once up front
    build_scenario(channel, template, Some(&draw_fading(seed, range.start)))?;
    Ok(range
        .into_par_iter()
        .map(|i| {
            let fading = draw_fading(seed, i);
            match build_scenario(channel, template, Some(&fading)) {
                Ok(s) => schemes
                    .iter()
                    .map(|&k| is_available(&solve_scenario(k, &s), template.eps1_max, target))
                    .collect(),
                Err(_) => vec![false; schemes.len()],
            }
        })
        .collect())
}

/// Fraction of faded channel draws in which each scheme, re-optimised per
/// draw, meets the target for the actuator and the robot's constraint.
pub fn network_availability(
    schemes: &[SchemeKind],
    template: &Template,
    channel: &ChannelModel,
    n_draws: u64,
    seed: u64,
    target: f64,
) -> Result<Vec<AvailabilityReport>> {
    if n_draws == 0 {
        return Err(Error::InvalidScenario("need at least one draw".into()));
    }
    let hits = availability_hits(schemes, template, channel, 0..n_draws, seed, target)?;
    Ok(schemes
        .iter()
        .enumerate()
        .map(|(j, &scheme)| {
            let n_available = hits.iter().filter(|h| h[j]).count() as u64;
            AvailabilityReport {
                scheme,
                n_draws,
                n_available,
                fraction: n_available as f64 / n_draws as f64,
                seed,
                target,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_energy_is_fifty_watt_symbols() {
        let s = build_scenario(&ChannelModel::default(), &Template::default(), None).unwrap();
        assert!((s.energy_budget() - 50.0).abs() < 1e-12);
        let want = 10f64.powf(-(35.3 + 37.6 * 500f64.log10()) / 10.0) / 10f64.powf(-14.3);
        assert!((s.h2() / want - 1.0).abs() < 1e-12);
    }

    #[test]
    fn moving_robot_shortens_relay_hop() {
        let t = Template::default()
            .with_param(SweepParam::D1, 150.0)
            .unwrap();
        assert_eq!((t.d1, t.d3), (150.0, 350.0));
        assert!(Template::default().with_param(SweepParam::M, 50.5).is_err());
    }

    #[test]
    fn fading_is_pure() {
        assert_eq!(draw_fading(7, 3), draw_fading(7, 3));
        assert_ne!(draw_fading(7, 3), draw_fading(7, 4));
        assert_ne!(draw_fading(7, 3), draw_fading(8, 3));
    }

    #[test]
    fn scheme_names_round_trip() {
        for k in SchemeKind::ALL {
            assert_eq!(k.name().parse::<SchemeKind>().unwrap(), k);
        }
        assert!("tdma".parse::<SchemeKind>().is_err());
        let all = SchemeKind::parse_selector("all", &SchemeKind::TWO_DEVICE).unwrap();
        assert_eq!(all.len(), 4);
    }

    #[test]
    fn sweep_rejects_unsorted_values() {
        let cfg = SweepConfig {
            schemes: vec![SchemeKind::Oma],
            param: SweepParam::M,
            values: vec![60.0, 50.0],
            template: Template::default(),
            channel: ChannelModel::default(),
        };
        assert!(run_sweep(&cfg).is_err());
    }

    #[test]
    fn multi_geometry_follows_spacing() {
        let t = Template {
            devices: 4,
            ..Template::default()
        };
        let ms = build_multi_scenario(&ChannelModel::default(), &t).unwrap();
        assert_eq!(ms.device_count(), 4);
        let ch = ChannelModel::default();
        assert_eq!(ms.devices()[2].gain, normalized_gain(&ch, 150.0, 1.0));
    }
}
