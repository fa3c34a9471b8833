//! Loyalty premia, taste shocks and the market primitives shared by every
//! equilibrium notion.
//!
//! A customer in the `Alpha` segment currently buys from firm A, one in the
//! `Beta` segment from firm B. A customer with shock `xi` stays with its
//! current firm as long as the price gap does not exceed its loyalty premium
//! `slope * xi + offset`.

use std::fmt;

use crate::error::{Error, Result};

/// Customer segment, named after the firm the customer bought from last.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// Loyal to firm A.
    Alpha,
    /// Loyal to firm B.
    Beta,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Alpha, Side::Beta];
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Alpha => "alpha",
            Side::Beta => "beta",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LoyaltyFamily {
    /// Premium `l * xi + s`.
    Linear,
    /// Premium `l * xi`.
    Multiplicative,
    /// Premium `xi + s`.
    Additive,
}

impl LoyaltyFamily {
    pub fn short_name(self) -> &'static str {
        match self {
            LoyaltyFamily::Linear => "LL",
            LoyaltyFamily::Multiplicative => "ML",
            LoyaltyFamily::Additive => "AL",
        }
    }
}

impl fmt::Display for LoyaltyFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LoyaltyFamily::Linear => "linear",
            LoyaltyFamily::Multiplicative => "multiplicative",
            LoyaltyFamily::Additive => "additive",
        })
    }
}

/// Premium `slope * xi + offset` for one segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideLoyalty {
    pub slope: f64,
    pub offset: f64,
}

/// Loyalty premia of both segments.
///
/// The multiplicative and additive families are constrained constructors of
/// the linear one, so every downstream computation runs the same code path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoyaltyModel {
    family: LoyaltyFamily,
    alpha: SideLoyalty,
    beta: SideLoyalty,
}

fn check_slope(name: &'static str, l: f64) -> Result<()> {
    if l.is_finite() && l > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and positive, got {l}")))
    }
}

fn check_offset(name: &'static str, s: f64) -> Result<()> {
    if s.is_finite() && s >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("must be finite and non-negative, got {s}"),
        ))
    }
}

impl LoyaltyModel {
    pub fn linear(l_alpha: f64, s_alpha: f64, l_beta: f64, s_beta: f64) -> Result<Self> {
        check_slope("l_alpha", l_alpha)?;
        check_slope("l_beta", l_beta)?;
        check_offset("s_alpha", s_alpha)?;
        check_offset("s_beta", s_beta)?;
        Ok(Self {
            family: LoyaltyFamily::Linear,
            alpha: SideLoyalty {
                slope: l_alpha,
                offset: s_alpha,
            },
            beta: SideLoyalty {
                slope: l_beta,
                offset: s_beta,
            },
        })
    }

    pub fn multiplicative(l_alpha: f64, l_beta: f64) -> Result<Self> {
        let mut m = Self::linear(l_alpha, 0.0, l_beta, 0.0)?;
        m.family = LoyaltyFamily::Multiplicative;
        Ok(m)
    }

    pub fn additive(s_alpha: f64, s_beta: f64) -> Result<Self> {
        let mut m = Self::linear(1.0, s_alpha, 1.0, s_beta)?;
        m.family = LoyaltyFamily::Additive;
        Ok(m)
    }

    pub fn family(&self) -> LoyaltyFamily {
        self.family
    }

    pub fn side(&self, side: Side) -> SideLoyalty {
        match side {
            Side::Alpha => self.alpha,
            Side::Beta => self.beta,
        }
    }

    pub fn slope(&self, side: Side) -> f64 {
        self.side(side).slope
    }

    pub fn offset(&self, side: Side) -> f64 {
        self.side(side).offset
    }

    /// Replace one slope; rejected for the additive family, whose slopes are fixed at 1.
    pub fn with_slope(mut self, side: Side, l: f64) -> Result<Self> {
        let name = match side {
            Side::Alpha => "l_alpha",
            Side::Beta => "l_beta",
        };
        check_slope(name, l)?;
        if self.family == LoyaltyFamily::Additive && l != 1.0 {
            return Err(Error::invalid(name, "additive loyalty has unit slopes"));
        }
        match side {
            Side::Alpha => self.alpha.slope = l,
            Side::Beta => self.beta.slope = l,
        }
        Ok(self)
    }

    /// Replace one offset; rejected for the multiplicative family, whose offsets are 0.
    pub fn with_offset(mut self, side: Side, s: f64) -> Result<Self> {
        let name = match side {
            Side::Alpha => "s_alpha",
            Side::Beta => "s_beta",
        };
        check_offset(name, s)?;
        if self.family == LoyaltyFamily::Multiplicative && s != 0.0 {
            return Err(Error::invalid(name, "multiplicative loyalty has zero offsets"));
        }
        match side {
            Side::Alpha => self.alpha.offset = s,
            Side::Beta => self.beta.offset = s,
        }
        Ok(self)
    }

    /// Loyalty premium of a customer with shock `xi`.
    pub fn premium(&self, side: Side, xi: f64) -> f64 {
        let p = self.side(side);
        p.slope * xi + p.offset
    }

    /// Shock of the customer who is indifferent at the given price gap
    /// (loyal firm's price minus rival's price).
    pub fn threshold(&self, side: Side, price_gap: f64) -> f64 {
        let p = self.side(side);
        (price_gap - p.offset) / p.slope
    }

    /// Derivative of [`threshold`](Self::threshold) with respect to the price gap.
    pub fn threshold_slope(&self, side: Side) -> f64 {
        1.0 / self.slope(side)
    }
}

/// Truncated normal shock; construct with [`ShockDistribution::truncated_normal`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedNormal {
    mean: f64,
    std_dev: f64,
    lo: f64,
    hi: f64,
    /// Tail probabilities at the support ends. When `upper` is set they are
    /// upper tails, which keeps differences accurate when the support lies far
    /// above the mean; otherwise lower tails.
    upper: bool,
    tail_lo: f64,
    tail_hi: f64,
    mass: f64,
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

impl TruncatedNormal {
    fn tail(&self, x: f64) -> f64 {
        let z = (x - self.mean) / self.std_dev;
        if self.upper {
            std_normal_cdf(-z)
        } else {
            std_normal_cdf(z)
        }
    }

    fn lower_mass(&self, x: f64) -> f64 {
        let t = self.tail(x);
        if self.upper {
            (self.tail_lo - t) / self.mass
        } else {
            (t - self.tail_lo) / self.mass
        }
    }

    fn upper_mass(&self, x: f64) -> f64 {
        let t = self.tail(x);
        if self.upper {
            (t - self.tail_hi) / self.mass
        } else {
            (self.tail_hi - t) / self.mass
        }
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn std_dev(&self) -> f64 {
        self.std_dev
    }
}

/// Distribution of the loyalty shock, common to both segments.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ShockDistribution {
    #[default]
    Uniform01,
    TruncatedNormal(TruncatedNormal),
}

impl ShockDistribution {
    pub fn truncated_normal(mean: f64, std_dev: f64, lo: f64, hi: f64) -> Result<Self> {
        if !mean.is_finite() {
            return Err(Error::invalid("mean", "must be finite"));
        }
        if !(std_dev.is_finite() && std_dev > 0.0) {
            return Err(Error::invalid("std_dev", "must be finite and positive"));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(
                "support",
                format!("need finite lo < hi, got [{lo}, {hi}]"),
            ));
        }
        let upper = mean < 0.5 * (lo + hi);
        let tail = |x: f64| {
            let z = (x - mean) / std_dev;
            if upper {
                std_normal_cdf(-z)
            } else {
                std_normal_cdf(z)
            }
        };
        let (tail_lo, tail_hi) = (tail(lo), tail(hi));
        let mass = if upper { tail_lo - tail_hi } else { tail_hi - tail_lo };
        if mass.is_nan() || mass <= 0.0 {
            return Err(Error::invalid("support", "carries no probability mass"));
        }
        Ok(ShockDistribution::TruncatedNormal(TruncatedNormal {
            mean,
            std_dev,
            lo,
            hi,
            upper,
            tail_lo,
            tail_hi,
            mass,
        }))
    }

    pub fn is_uniform01(&self) -> bool {
        matches!(self, ShockDistribution::Uniform01)
    }

    /// Closed support `[lo, hi]`.
    pub fn support(&self) -> (f64, f64) {
        match self {
            ShockDistribution::Uniform01 => (0.0, 1.0),
            ShockDistribution::TruncatedNormal(t) => (t.lo, t.hi),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            ShockDistribution::Uniform01 => x.clamp(0.0, 1.0),
            ShockDistribution::TruncatedNormal(t) => {
                if x <= t.lo {
                    0.0
                } else if x >= t.hi {
                    1.0
                } else {
                    t.lower_mass(x).clamp(0.0, 1.0)
                }
            }
        }
    }

    /// `1 - cdf(x)`, computed without cancellation near the top of the support.
    pub fn survival(&self, x: f64) -> f64 {
        match self {
            ShockDistribution::Uniform01 => 1.0 - x.clamp(0.0, 1.0),
            ShockDistribution::TruncatedNormal(t) => {
                if x <= t.lo {
                    1.0
                } else if x >= t.hi {
                    0.0
                } else {
                    t.upper_mass(x).clamp(0.0, 1.0)
                }
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            ShockDistribution::Uniform01 => {
                if (0.0..=1.0).contains(&x) {
                    1.0
                } else {
                    0.0
                }
            }
            ShockDistribution::TruncatedNormal(t) => {
                if x < t.lo || x > t.hi {
                    0.0
                } else {
                    let z = (x - t.mean) / t.std_dev;
                    std_normal_pdf(z) / (t.std_dev * t.mass)
                }
            }
        }
    }
}

/// Costs, initial shares, discount factors, loyalty and shock: everything
/// needed to define one market instance.
///
/// The cost gap `c_A - c_B` is stored separately so that sweeps over the
/// gap classify regions on the exact swept value rather than on a rounded
/// difference of two costs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams {
    cost_a: f64,
    cost_b: f64,
    cost_gap: f64,
    initial_share_a: f64,
    discount_a: f64,
    discount_b: f64,
    loyalty: LoyaltyModel,
    shock: ShockDistribution,
}

fn check_discount(name: &'static str, d: f64) -> Result<()> {
    if d.is_finite() && (0.0..1.0).contains(&d) {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must lie in [0, 1), got {d}")))
    }
}

impl MarketParams {
    /// Firm A is the high-cost firm: requires `cost_a >= cost_b >= 0`.
    /// Starts with an even initial split, no discounting and uniform shocks.
    pub fn new(cost_a: f64, cost_b: f64, loyalty: LoyaltyModel) -> Result<Self> {
        let p = Self {
            cost_a: 0.0,
            cost_b: 0.0,
            cost_gap: 0.0,
            initial_share_a: 0.5,
            discount_a: 0.0,
            discount_b: 0.0,
            loyalty,
            shock: ShockDistribution::Uniform01,
        };
        p.with_costs(cost_a, cost_b)
    }

    pub fn with_costs(mut self, cost_a: f64, cost_b: f64) -> Result<Self> {
        if !(cost_b.is_finite() && cost_b >= 0.0) {
            return Err(Error::invalid(
                "c_b",
                format!("must be finite and non-negative, got {cost_b}"),
            ));
        }
        if !(cost_a.is_finite() && cost_a >= cost_b) {
            return Err(Error::invalid(
                "c_a",
                format!("must be finite and at least c_b = {cost_b}, got {cost_a}"),
            ));
        }
        self.cost_a = cost_a;
        self.cost_b = cost_b;
        self.cost_gap = cost_a - cost_b;
        Ok(self)
    }

    /// Keep `c_B` and set `c_A = c_B + gap`, remembering `gap` exactly.
    pub fn with_cost_gap(mut self, gap: f64) -> Result<Self> {
        if !(gap.is_finite() && gap >= 0.0) {
            return Err(Error::invalid(
                "cost_gap",
                format!("must be finite and non-negative, got {gap}"),
            ));
        }
        self.cost_a = self.cost_b + gap;
        self.cost_gap = gap;
        Ok(self)
    }

    pub fn with_initial_share(mut self, share_a: f64) -> Result<Self> {
        if !(share_a.is_finite() && (0.0..=1.0).contains(&share_a)) {
            return Err(Error::invalid("theta", format!("must lie in [0, 1], got {share_a}")));
        }
        self.initial_share_a = share_a;
        Ok(self)
    }

    pub fn with_discount(self, discount: f64) -> Result<Self> {
        self.with_discounts(discount, discount)
    }

    pub fn with_discounts(mut self, discount_a: f64, discount_b: f64) -> Result<Self> {
        check_discount("delta_a", discount_a)?;
        check_discount("delta_b", discount_b)?;
        self.discount_a = discount_a;
        self.discount_b = discount_b;
        Ok(self)
    }

    pub fn with_loyalty(mut self, loyalty: LoyaltyModel) -> Self {
        self.loyalty = loyalty;
        self
    }

    pub fn with_shock(mut self, shock: ShockDistribution) -> Self {
        self.shock = shock;
        self
    }

    pub fn cost_a(&self) -> f64 {
        self.cost_a
    }

    pub fn cost_b(&self) -> f64 {
        self.cost_b
    }

    /// `c_A - c_B`, never negative.
    pub fn cost_gap(&self) -> f64 {
        self.cost_gap
    }

    /// Share of customers loyal to A in the first period.
    pub fn initial_share_a(&self) -> f64 {
        self.initial_share_a
    }

    pub fn discount_a(&self) -> f64 {
        self.discount_a
    }

    pub fn discount_b(&self) -> f64 {
        self.discount_b
    }

    pub fn loyalty(&self) -> &LoyaltyModel {
        &self.loyalty
    }

    pub fn shock(&self) -> &ShockDistribution {
        &self.shock
    }

    /// Indifferent shock in `side` given the loyal firm's and the rival's price.
    pub fn threshold(&self, side: Side, own_price: f64, rival_price: f64) -> f64 {
        self.loyalty.threshold(side, own_price - rival_price)
    }

    /// Probability that a customer in `side` stays with its current firm.
    pub fn prob_stay(&self, side: Side, own_price: f64, rival_price: f64) -> f64 {
        self.shock.survival(self.threshold(side, own_price, rival_price))
    }

    /// Share of the segment that switches when the threshold is `xi`.
    pub fn switch_share(&self, xi: f64) -> f64 {
        self.shock.cdf(xi)
    }

    pub(crate) fn require_uniform(&self) -> Result<()> {
        if self.shock.is_uniform01() {
            Ok(())
        } else {
            Err(Error::NonUniformShock)
        }
    }
}
