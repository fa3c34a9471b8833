//! One-shot pricing game: region map, closed-form equilibria under uniform
//! shocks, first-order residuals and a grid best-response check.

use std::fmt;

use crate::error::{Error, Result};
use crate::loyalty::{LoyaltyFamily, MarketParams, Side};
use crate::roots::bracketed_root;

/// Roman region label. Its meaning depends on the loyalty family, see [`Region`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegionLabel {
    I,
    II,
    III,
    IV,
    V,
    VI,
}

impl RegionLabel {
    pub const ALL: [RegionLabel; 6] = [
        RegionLabel::I,
        RegionLabel::II,
        RegionLabel::III,
        RegionLabel::IV,
        RegionLabel::V,
        RegionLabel::VI,
    ];

    pub fn roman(self) -> &'static str {
        match self {
            RegionLabel::I => "I",
            RegionLabel::II => "II",
            RegionLabel::III => "III",
            RegionLabel::IV => "IV",
            RegionLabel::V => "V",
            RegionLabel::VI => "VI",
        }
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.roman())
    }
}

/// Equilibrium region in the numbering conventional for its family.
///
/// Linear and additive loyalty share one numbering (I..VI; VI is empty for
/// additive loyalty). Multiplicative loyalty has four regions I..IV which are
/// linear regions II, III, V and VI with zero offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Region {
    pub family: LoyaltyFamily,
    pub label: RegionLabel,
}

impl Region {
    /// The corresponding label in the linear-family numbering.
    pub fn linear_label(self) -> RegionLabel {
        use RegionLabel::*;
        match (self.family, self.label) {
            (LoyaltyFamily::Multiplicative, I) => II,
            (LoyaltyFamily::Multiplicative, II) => III,
            (LoyaltyFamily::Multiplicative, III) => V,
            (LoyaltyFamily::Multiplicative, IV) => VI,
            (_, l) => l,
        }
    }

    /// Translate a linear-family label into `family`'s numbering, if that
    /// family can reach it.
    pub fn from_linear(family: LoyaltyFamily, label: RegionLabel) -> Option<Region> {
        use RegionLabel::*;
        let own = match family {
            LoyaltyFamily::Linear => Some(label),
            LoyaltyFamily::Additive => (label != VI).then_some(label),
            LoyaltyFamily::Multiplicative => match label {
                II => Some(I),
                III => Some(II),
                V => Some(III),
                VI => Some(IV),
                I | IV => None,
            },
        }?;
        Some(Region { family, label: own })
    }

    /// Labels that exist for `family`.
    pub fn labels(family: LoyaltyFamily) -> &'static [RegionLabel] {
        use RegionLabel::*;
        match family {
            LoyaltyFamily::Linear => &[I, II, III, IV, V, VI],
            LoyaltyFamily::Additive => &[I, II, III, IV, V],
            LoyaltyFamily::Multiplicative => &[I, II, III, IV],
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.family.short_name(), self.label)
    }
}

/// The four prices of a pricing profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceProfile {
    /// A's price to its own loyal customers.
    pub a_alpha: f64,
    /// A's price to B's loyal customers.
    pub a_beta: f64,
    /// B's price to its own loyal customers.
    pub b_beta: f64,
    /// B's price to A's loyal customers.
    pub b_alpha: f64,
}

impl PriceProfile {
    pub fn new(a_alpha: f64, a_beta: f64, b_beta: f64, b_alpha: f64) -> Self {
        Self {
            a_alpha,
            a_beta,
            b_beta,
            b_alpha,
        }
    }

    /// `[a_alpha, a_beta, b_beta, b_alpha]`.
    pub fn to_array(self) -> [f64; 4] {
        [self.a_alpha, self.a_beta, self.b_beta, self.b_alpha]
    }

    /// Price charged in `side` by the firm the segment is loyal to.
    pub fn loyal_price(&self, side: Side) -> f64 {
        match side {
            Side::Alpha => self.a_alpha,
            Side::Beta => self.b_beta,
        }
    }

    /// Price charged in `side` by the poaching firm.
    pub fn rival_price(&self, side: Side) -> f64 {
        match side {
            Side::Alpha => self.b_alpha,
            Side::Beta => self.a_beta,
        }
    }

    pub fn max_abs_diff(&self, other: &PriceProfile) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Demands {
    /// A's loyal customers who stay.
    pub a_strong: f64,
    /// B's loyal customers poached by A.
    pub a_weak: f64,
    /// B's loyal customers who stay.
    pub b_strong: f64,
    /// A's loyal customers poached by B.
    pub b_weak: f64,
}

/// Everything observable about a price profile in a single period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub region: Option<Region>,
    pub prices: PriceProfile,
    pub xi_alpha: f64,
    pub xi_beta: f64,
    pub prob_stay_alpha: f64,
    pub prob_stay_beta: f64,
    pub demands: Demands,
    pub profit_a: f64,
    pub profit_b: f64,
}

impl Outcome {
    /// A's share after this period's purchases.
    pub fn share_a(&self) -> f64 {
        self.demands.a_strong + self.demands.a_weak
    }
}

/// Thresholds, demands and profits of an arbitrary price profile.
pub fn evaluate(params: &MarketParams, prices: PriceProfile) -> Outcome {
    let xi_alpha = params.threshold(Side::Alpha, prices.a_alpha, prices.b_alpha);
    let xi_beta = params.threshold(Side::Beta, prices.b_beta, prices.a_beta);
    outcome_at(params, prices, xi_alpha, xi_beta)
}

fn outcome_at(params: &MarketParams, prices: PriceProfile, xi_alpha: f64, xi_beta: f64) -> Outcome {
    let theta = params.initial_share_a();
    let f_alpha = params.switch_share(xi_alpha);
    let f_beta = params.switch_share(xi_beta);
    let demands = Demands {
        a_strong: theta * (1.0 - f_alpha),
        a_weak: (1.0 - theta) * f_beta,
        b_strong: (1.0 - theta) * (1.0 - f_beta),
        b_weak: theta * f_alpha,
    };
    let (ca, cb) = (params.cost_a(), params.cost_b());
    Outcome {
        region: None,
        prices,
        xi_alpha,
        xi_beta,
        prob_stay_alpha: 1.0 - f_alpha,
        prob_stay_beta: 1.0 - f_beta,
        demands,
        profit_a: (prices.a_alpha - ca) * demands.a_strong + (prices.a_beta - ca) * demands.a_weak,
        profit_b: (prices.b_beta - cb) * demands.b_strong + (prices.b_alpha - cb) * demands.b_weak,
    }
}

/// Region in the linear numbering. Boundaries are closed; a cost gap lying
/// on several regions gets the lowest label.
fn linear_region(params: &MarketParams) -> RegionLabel {
    let lo = params.loyalty();
    let (la, sa) = (lo.slope(Side::Alpha), lo.offset(Side::Alpha));
    let (lb, sb) = (lo.slope(Side::Beta), lo.offset(Side::Beta));
    let d = params.cost_gap();
    let beta_cut = lb - sb;
    let alpha_low = sa - la;
    let alpha_high = sa + 2.0 * la;
    if d >= beta_cut {
        if d <= alpha_low {
            RegionLabel::I
        } else if d <= alpha_high {
            RegionLabel::II
        } else {
            RegionLabel::III
        }
    } else if d <= alpha_low {
        RegionLabel::IV
    } else if d <= alpha_high {
        RegionLabel::V
    } else {
        RegionLabel::VI
    }
}

/// Equilibrium region of the one-shot game. Needs uniform shocks.
pub fn classify_region(params: &MarketParams) -> Result<Region> {
    params.require_uniform()?;
    let family = params.loyalty().family();
    let label = linear_region(params);
    // Validated parameters keep the gap non-negative and slopes positive,
    // which rules out the labels a family cannot reach.
    Ok(Region::from_linear(family, label).expect("cost gap is non-negative"))
}

/// Closed-form prices of `region`, evaluated whether or not the parameters
/// actually fall in it. Used for boundary checks and sweeps.
pub fn region_prices(params: &MarketParams, region: Region) -> PriceProfile {
    let lo = params.loyalty();
    let (la, sa) = (lo.slope(Side::Alpha), lo.offset(Side::Alpha));
    let (lb, sb) = (lo.slope(Side::Beta), lo.offset(Side::Beta));
    let (ca, cb) = (params.cost_a(), params.cost_b());

    // Interior solutions of each segment.
    let a_alpha_int = (2.0 * ca + cb + sa + 2.0 * la) / 3.0;
    let b_alpha_int = (ca + 2.0 * cb - sa + la) / 3.0;
    let a_beta_int = (cb + 2.0 * ca - sb + lb) / 3.0;
    let b_beta_int = (2.0 * cb + ca + sb + 2.0 * lb) / 3.0;

    // Alpha segment: B undercuts so that nobody is poached, A serves everyone,
    // or A concedes the whole segment.
    let alpha_corner_keep = (cb + sa, cb);
    let alpha_corner_lose = (ca, ca - sa - la);
    // Beta segment: A cannot profitably poach.
    let beta_corner = (ca, ca + sb);

    let ((a_alpha, b_alpha), (a_beta, b_beta)) = match region.linear_label() {
        RegionLabel::I => (alpha_corner_keep, beta_corner),
        RegionLabel::II => ((a_alpha_int, b_alpha_int), beta_corner),
        RegionLabel::III => (alpha_corner_lose, beta_corner),
        RegionLabel::IV => (alpha_corner_keep, (a_beta_int, b_beta_int)),
        RegionLabel::V => ((a_alpha_int, b_alpha_int), (a_beta_int, b_beta_int)),
        RegionLabel::VI => (alpha_corner_lose, (a_beta_int, b_beta_int)),
    };
    PriceProfile::new(a_alpha, a_beta, b_beta, b_alpha)
}

/// Unique pure equilibrium of the one-shot game with uniform shocks.
pub fn closed_form_equilibrium(params: &MarketParams) -> Result<Outcome> {
    let region = classify_region(params)?;
    let (xa, xb) = region_thresholds(params, region);
    let mut out = outcome_at(params, region_prices(params, region), xa, xb);
    out.region = Some(region);
    Ok(out)
}

/// Thresholds of `region`'s closed-form prices, exact at the corners so that
/// no-switching regions never report rounding-level switching.
pub fn region_thresholds(params: &MarketParams, region: Region) -> (f64, f64) {
    let lo = params.loyalty();
    let (la, sa) = (lo.slope(Side::Alpha), lo.offset(Side::Alpha));
    let (lb, sb) = (lo.slope(Side::Beta), lo.offset(Side::Beta));
    let d = params.cost_gap();
    let alpha_int = (d - sa + la) / (3.0 * la);
    let beta_int = (lb - sb - d) / (3.0 * lb);
    match region.linear_label() {
        RegionLabel::I => (0.0, 0.0),
        RegionLabel::II => (alpha_int, 0.0),
        RegionLabel::III => (1.0, 0.0),
        RegionLabel::IV => (0.0, beta_int),
        RegionLabel::V => (alpha_int, beta_int),
        RegionLabel::VI => (1.0, beta_int),
    }
}

fn interior_check(params: &MarketParams, side: Side, xi: f64) -> Result<()> {
    let (lo, hi) = params.shock().support();
    if xi > lo && xi < hi {
        Ok(())
    } else {
        Err(Error::ThresholdOutsideSupport {
            side,
            value: xi,
            lo,
            hi,
        })
    }
}

/// Static first-order conditions: each price minus its cost minus the
/// monopoly markup on the marginal customer, in `[a_alpha, a_beta, b_beta,
/// b_alpha]` order. All zero at an interior equilibrium.
pub fn foc_residual(params: &MarketParams, prices: PriceProfile) -> Result<[f64; 4]> {
    let xa = params.threshold(Side::Alpha, prices.a_alpha, prices.b_alpha);
    let xb = params.threshold(Side::Beta, prices.b_beta, prices.a_beta);
    interior_check(params, Side::Alpha, xa)?;
    interior_check(params, Side::Beta, xb)?;
    let m = markups(params, xa, xb);
    Ok([
        prices.a_alpha - params.cost_a() - m.a_alpha,
        prices.a_beta - params.cost_a() - m.a_beta,
        prices.b_beta - params.cost_b() - m.b_beta,
        prices.b_alpha - params.cost_b() - m.b_alpha,
    ])
}

/// Static markups implied by the thresholds: `(1 - F) / (f h')` for the
/// loyal firm and `F / (f h')` for the poacher, per segment.
pub(crate) fn markups(params: &MarketParams, xi_alpha: f64, xi_beta: f64) -> PriceProfile {
    let shock = params.shock();
    let lo = params.loyalty();
    let (fa, da) = (shock.cdf(xi_alpha), shock.pdf(xi_alpha));
    let (fb, db) = (shock.cdf(xi_beta), shock.pdf(xi_beta));
    let ka = lo.slope(Side::Alpha) / da;
    let kb = lo.slope(Side::Beta) / db;
    PriceProfile::new((1.0 - fa) * ka, fb * kb, (1.0 - fb) * kb, fa * ka)
}

/// Threshold equation of the static game in one segment: zero at the
/// interior equilibrium threshold.
fn static_threshold_gap(params: &MarketParams, side: Side, xi: f64) -> f64 {
    let lo = params.loyalty();
    let d = params.cost_gap();
    let anchor = match side {
        Side::Alpha => (d - lo.offset(side)) / lo.slope(side),
        Side::Beta => (-d - lo.offset(side)) / lo.slope(side),
    };
    let shock = params.shock();
    xi - anchor - (1.0 - 2.0 * shock.cdf(xi)) / shock.pdf(xi)
}

/// Interior solution of the static first-order conditions for any shock
/// distribution. Fails when an equilibrium threshold is not interior, in
/// which case the true equilibrium is a corner not covered here.
pub fn interior_foc_solution(params: &MarketParams) -> Result<PriceProfile> {
    let (lo, hi) = params.shock().support();
    let (a, b) = (lo + 1e-9, hi - 1e-9);
    let solve =
        |side| bracketed_root(a, b, |x| static_threshold_gap(params, side, x)).ok_or(Error::NoInteriorRoot { side });
    let xa = solve(Side::Alpha)?;
    let xb = solve(Side::Beta)?;
    let m = markups(params, xa, xb);
    let (ca, cb) = (params.cost_a(), params.cost_b());
    Ok(PriceProfile::new(
        ca + m.a_alpha,
        ca + m.a_beta,
        cb + m.b_beta,
        cb + m.b_alpha,
    ))
}

/// Evenly spaced prices `lo, lo + step, ...` not exceeding `hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceGrid {
    lo: f64,
    step: f64,
    len: usize,
}

impl PriceGrid {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && step.is_finite() && step > 0.0 && hi >= lo) {
            return Err(Error::EmptyGrid);
        }
        let len = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        Ok(Self { lo, step, len })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn point(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.step
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|i| self.point(i))
    }
}

/// One firm's profit in one segment as a function of its own price.
type SegmentProfit<'a> = Box<dyn Fn(f64) -> f64 + 'a>;

/// Largest profit gain any firm could obtain by moving one of its prices to
/// a grid point at or above its own cost, holding all other prices fixed.
///
/// Profits are additive across segments, so each price is checked on its
/// own segment's profit term.
pub fn best_response_gap(params: &MarketParams, prices: PriceProfile, grid: &PriceGrid) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let theta = params.initial_share_a();
    let (ca, cb) = (params.cost_a(), params.cost_b());
    let shock = params.shock();
    let f_alpha = |own: f64, rival: f64| shock.cdf(params.threshold(Side::Alpha, own, rival));
    let f_beta = |own: f64, rival: f64| shock.cdf(params.threshold(Side::Beta, own, rival));

    let terms: [(f64, f64, SegmentProfit); 4] = [
        (
            ca,
            prices.a_alpha,
            Box::new(|p| (p - ca) * theta * (1.0 - f_alpha(p, prices.b_alpha))),
        ),
        (
            ca,
            prices.a_beta,
            Box::new(|p| (p - ca) * (1.0 - theta) * f_beta(prices.b_beta, p)),
        ),
        (
            cb,
            prices.b_beta,
            Box::new(|p| (p - cb) * (1.0 - theta) * (1.0 - f_beta(p, prices.a_beta))),
        ),
        (
            cb,
            prices.b_alpha,
            Box::new(|p| (p - cb) * theta * f_alpha(prices.a_alpha, p)),
        ),
    ];

    let mut gap = 0.0f64;
    for (cost, current, profit) in &terms {
        let base = profit(*current);
        let best = grid
            .points()
            .filter(|p| *p >= *cost)
            .map(profit)
            .fold(f64::NEG_INFINITY, f64::max);
        gap = gap.max(best - base);
    }
    Ok(gap)
}
