//! Scenario files: a TOML description of one market, the variable to sweep
//! and the equilibrium concept to compute at every sweep point.

use std::fmt;
use std::path::Path;

use duopoly_core::qre::{GridSpec, QreSettings, Schedule};
use duopoly_core::{LoyaltyModel, MarketParams, ShockDistribution};
use serde::Deserialize;

use crate::error::{Error, Result};

/// Value of the `schema` key this version reads.
pub const SCHEMA: &str = "duopoly-scenario/1";

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: String,
    /// Stem of every output file.
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default = "OutputGroup::all")]
    pub outputs: Vec<OutputGroup>,
    pub loyalty: LoyaltySpec,
    pub market: MarketSpec,
    #[serde(default)]
    pub shock: ShockSpec,
    pub sweep: SweepRange,
    pub setting: Setting,
    #[serde(default)]
    pub qre: QreSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Linear,
    Multiplicative,
    Additive,
}

/// Loyalty slopes `l_*` and offsets `s_*`. Multiplicative loyalty takes
/// slopes only and additive loyalty offsets only.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoyaltySpec {
    pub family: Family,
    pub l_alpha: Option<f64>,
    pub s_alpha: Option<f64>,
    pub l_beta: Option<f64>,
    pub s_beta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSpec {
    pub cost_b: f64,
    /// `c_A - c_B`; ignored when the cost gap is swept.
    #[serde(default)]
    pub cost_gap: f64,
    #[serde(default = "half")]
    pub initial_share_a: f64,
    /// Common discount factor of both firms.
    #[serde(default)]
    pub discount: f64,
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShockSpec {
    #[default]
    Uniform,
    TruncatedNormal {
        mean: f64,
        std_dev: f64,
        lo: f64,
        hi: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    CostGap,
    SAlpha,
    SBeta,
    LAlpha,
    LBeta,
    Delta,
}

impl SweepVariable {
    pub fn column_label(self) -> &'static str {
        match self {
            SweepVariable::CostGap => "c_A - c_B",
            SweepVariable::SAlpha => "s_alpha",
            SweepVariable::SBeta => "s_beta",
            SweepVariable::LAlpha => "l_alpha",
            SweepVariable::LBeta => "l_beta",
            SweepVariable::Delta => "discount factor",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRange {
    pub variable: SweepVariable,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl SweepRange {
    /// `steps` evenly spaced points from `lo` to `hi`, both ends exact.
    pub fn points(&self) -> Vec<f64> {
        let n = self.steps;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }
}

/// Equilibrium concept evaluated at every sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Setting {
    /// One-shot pricing game; shares are after the single period.
    SingleStage,
    /// The one-shot game repeated by myopic firms; shares and profits are
    /// those of the final period.
    MyopicHorizon { horizon: usize },
    /// Interior Markov equilibrium; shares and profits are stationary.
    MarkovUnconstrained,
    /// Logit homotopy on price grids; shares and profits are stationary.
    MarkovQre,
}

impl Setting {
    pub fn name(&self) -> &'static str {
        match self {
            Setting::SingleStage => "single_stage",
            Setting::MyopicHorizon { .. } => "myopic_horizon",
            Setting::MarkovUnconstrained => "markov_unconstrained",
            Setting::MarkovQre => "markov_qre",
        }
    }

    fn needs_discount(&self) -> bool {
        matches!(self, Setting::MarkovUnconstrained | Setting::MarkovQre)
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Setting::MyopicHorizon { horizon } => write!(f, "myopic_horizon(T = {horizon})"),
            s => f.write_str(s.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputGroup {
    Prices,
    Shares,
    Profits,
    Probabilities,
    RegionLabels,
}

impl OutputGroup {
    pub fn all() -> Vec<OutputGroup> {
        vec![
            OutputGroup::Prices,
            OutputGroup::Shares,
            OutputGroup::Profits,
            OutputGroup::Probabilities,
            OutputGroup::RegionLabels,
        ]
    }
}

/// Grid and precision schedule of the logit homotopy.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QreSpec {
    pub grid_points: usize,
    pub headroom: f64,
    pub schedule_start: f64,
    pub schedule_end: f64,
    pub schedule_steps: usize,
}

impl Default for QreSpec {
    fn default() -> Self {
        let g = GridSpec::default();
        let s = Schedule::default();
        Self {
            grid_points: g.points,
            headroom: g.headroom,
            schedule_start: s.start,
            schedule_end: s.end,
            schedule_steps: s.steps,
        }
    }
}

impl QreSpec {
    pub fn grid(&self) -> GridSpec {
        GridSpec {
            points: self.grid_points,
            headroom: self.headroom,
        }
    }

    pub fn schedule(&self) -> Schedule {
        Schedule {
            start: self.schedule_start,
            end: self.schedule_end,
            steps: self.schedule_steps,
        }
    }

    pub fn settings(&self) -> QreSettings {
        QreSettings::default()
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}

impl Scenario {
    /// Parse and validate.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// Checks everything that can be checked without solving: schema,
    /// ranges, family and setting compatibility, and that the market is
    /// well defined at both ends of the sweep.
    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(invalid(format!("schema must be \"{SCHEMA}\", got \"{}\"", self.schema)));
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(invalid("name must be a non-empty file stem"));
        }
        let r = &self.sweep;
        if !(r.lo.is_finite() && r.hi.is_finite() && r.lo < r.hi) {
            return Err(invalid(format!("sweep needs finite lo < hi, got [{}, {}]", r.lo, r.hi)));
        }
        if r.steps < 2 {
            return Err(invalid("sweep needs at least 2 steps"));
        }
        if r.variable == SweepVariable::CostGap && r.lo < 0.0 {
            return Err(invalid("a swept cost gap must keep c_A >= c_B"));
        }
        if r.variable != SweepVariable::CostGap && self.market.cost_gap < 0.0 {
            return Err(invalid("cost_gap must keep c_A >= c_B"));
        }
        self.check_loyalty_fields()?;
        if let Setting::MyopicHorizon { horizon } = self.setting {
            if horizon == 0 || horizon > duopoly_core::myopic::MAX_HORIZON {
                return Err(invalid(format!(
                    "horizon must be in 1..={}",
                    duopoly_core::myopic::MAX_HORIZON
                )));
            }
        }
        let needs_uniform = matches!(self.setting, Setting::SingleStage | Setting::MyopicHorizon { .. });
        if needs_uniform && self.shock != ShockSpec::Uniform {
            return Err(invalid(format!(
                "the {} setting needs uniform shocks",
                self.setting.name()
            )));
        }
        if self.setting.needs_discount() {
            let positive = |d: f64| d > 0.0 && d < 1.0;
            let ok = if r.variable == SweepVariable::Delta {
                positive(r.lo) && positive(r.hi)
            } else {
                positive(self.market.discount)
            };
            if !ok {
                return Err(invalid(format!(
                    "the {} setting needs a discount in (0, 1)",
                    self.setting.name()
                )));
            }
        }
        if self.setting == Setting::MarkovQre {
            self.qre.schedule().precisions()?;
            if self.qre.grid_points < 2 {
                return Err(invalid("qre.grid_points must be at least 2"));
            }
        }
        self.params_at(r.lo)?;
        self.params_at(r.hi)?;
        Ok(())
    }

    fn check_loyalty_fields(&self) -> Result<()> {
        let l = &self.loyalty;
        let (slopes, offsets) = match l.family {
            Family::Linear => (true, true),
            Family::Multiplicative => (true, false),
            Family::Additive => (false, true),
        };
        let check = |name: &str, v: Option<f64>, wanted: bool| match (v, wanted) {
            (None, true) => Err(invalid(format!("{:?} loyalty needs {name}", l.family).to_lowercase())),
            (Some(_), false) => Err(invalid(
                format!("{:?} loyalty takes no {name}", l.family).to_lowercase(),
            )),
            _ => Ok(()),
        };
        check("l_alpha", l.l_alpha, slopes)?;
        check("l_beta", l.l_beta, slopes)?;
        check("s_alpha", l.s_alpha, offsets)?;
        check("s_beta", l.s_beta, offsets)?;
        let swept_ok = match self.sweep.variable {
            SweepVariable::LAlpha | SweepVariable::LBeta => slopes,
            SweepVariable::SAlpha | SweepVariable::SBeta => offsets,
            _ => true,
        };
        if !swept_ok {
            return Err(invalid(format!(
                "{:?} loyalty cannot sweep {:?}",
                l.family, self.sweep.variable
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        self.sweep.points()
    }

    /// Market at sweep value `x`.
    pub fn params_at(&self, x: f64) -> Result<MarketParams, duopoly_core::Error> {
        let l = &self.loyalty;
        let var = self.sweep.variable;
        let pick = |v: SweepVariable, fixed: Option<f64>| if var == v { x } else { fixed.unwrap_or(0.0) };
        let la = pick(SweepVariable::LAlpha, l.l_alpha);
        let lb = pick(SweepVariable::LBeta, l.l_beta);
        let sa = pick(SweepVariable::SAlpha, l.s_alpha);
        let sb = pick(SweepVariable::SBeta, l.s_beta);
        let model = match l.family {
            Family::Linear => LoyaltyModel::linear(la, sa, lb, sb)?,
            Family::Multiplicative => LoyaltyModel::multiplicative(la, lb)?,
            Family::Additive => LoyaltyModel::additive(sa, sb)?,
        };
        let m = &self.market;
        let gap = if var == SweepVariable::CostGap { x } else { m.cost_gap };
        let delta = if var == SweepVariable::Delta { x } else { m.discount };
        let shock = match self.shock {
            ShockSpec::Uniform => ShockDistribution::Uniform01,
            ShockSpec::TruncatedNormal { mean, std_dev, lo, hi } => {
                ShockDistribution::truncated_normal(mean, std_dev, lo, hi)?
            }
        };
        MarketParams::new(m.cost_b, m.cost_b, model)?
            .with_cost_gap(gap)?
            .with_initial_share(m.initial_share_a)?
            .with_discount(delta)
            .map(|p| p.with_shock(shock))
    }
}
