//! Market-share dynamics when both firms replay the one-shot equilibrium
//! every period.

use crate::error::{Error, Result};
use crate::loyalty::{MarketParams, Side};
use crate::single_stage::{classify_region, closed_form_equilibrium, region_prices, Region, RegionLabel};

/// Longest horizon accepted by the trajectory functions.
pub const MAX_HORIZON: usize = 1_000_000;

/// Once consecutive shares differ by less than this the rest of the path is
/// the fixed point to working precision and is not stored.
const SETTLED: f64 = 1e-15;

/// Per-period switching shares: `alpha` of A's loyal customers leave for B,
/// `beta` of B's loyal customers leave for A.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchRates {
    pub alpha: f64,
    pub beta: f64,
}

impl SwitchRates {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        for (name, v) in [("switch_alpha", alpha), ("switch_beta", beta)] {
            if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
                return Err(Error::invalid(name, format!("must lie in [0, 1], got {v}")));
            }
        }
        Ok(Self { alpha, beta })
    }

    /// Rates of the one-shot equilibrium of `params`.
    pub fn from_equilibrium(params: &MarketParams) -> Result<Self> {
        let out = closed_form_equilibrium(params)?;
        Ok(Self {
            alpha: 1.0 - out.prob_stay_alpha,
            beta: 1.0 - out.prob_stay_beta,
        })
    }

    pub fn total(&self) -> f64 {
        self.alpha + self.beta
    }

    /// Factor by which the distance to the fixed point shrinks each period.
    pub fn contraction(&self) -> f64 {
        1.0 - self.alpha - self.beta
    }

    pub fn regime(&self) -> Regime {
        let total = self.total();
        if total == 0.0 {
            Regime::Frozen
        } else if total == 2.0 {
            Regime::Oscillating
        } else {
            Regime::Converging
        }
    }

    /// Share of A that reproduces itself, `beta / (alpha + beta)`; the
    /// initial share itself is returned when nobody switches.
    pub fn fixed_point(&self, initial_share: f64) -> f64 {
        match self.regime() {
            Regime::Frozen => initial_share,
            _ => self.beta / self.total(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Geometric convergence to the fixed point.
    Converging,
    /// Nobody ever switches; the share never moves.
    Frozen,
    /// Everybody switches every period; the share alternates forever.
    Oscillating,
}

/// A's share over time, `shares[0]` being the initial share.
#[derive(Debug, Clone, PartialEq)]
pub struct ShareTrajectory {
    pub shares: Vec<f64>,
    pub horizon: usize,
    pub rates: SwitchRates,
    pub regime: Regime,
    /// Limit share, `None` when the path oscillates.
    pub limit: Option<f64>,
}

impl ShareTrajectory {
    /// Share in period `t <= horizon`; periods after an early exit hold the limit.
    pub fn share_at(&self, t: usize) -> f64 {
        assert!(t <= self.horizon, "period {t} beyond horizon {}", self.horizon);
        match self.shares.get(t) {
            Some(s) => *s,
            None => self.limit.expect("early exit only happens for convergent paths"),
        }
    }

    pub fn final_share(&self) -> f64 {
        self.share_at(self.horizon)
    }
}

fn check_inputs(initial_share: f64, horizon: usize) -> Result<()> {
    if !(initial_share.is_finite() && (0.0..=1.0).contains(&initial_share)) {
        return Err(Error::invalid(
            "theta",
            format!("must lie in [0, 1], got {initial_share}"),
        ));
    }
    if horizon > MAX_HORIZON {
        return Err(Error::invalid(
            "horizon",
            format!("at most {MAX_HORIZON}, got {horizon}"),
        ));
    }
    Ok(())
}

fn build(rates: SwitchRates, initial_share: f64, horizon: usize, step: impl Fn(usize, f64) -> f64) -> ShareTrajectory {
    let regime = rates.regime();
    let limit = match regime {
        Regime::Oscillating => None,
        _ => Some(rates.fixed_point(initial_share)),
    };
    let mut shares = Vec::with_capacity(horizon.min(4096) + 1);
    shares.push(initial_share);
    for t in 1..=horizon {
        let prev = shares[t - 1];
        let next = step(t, prev);
        shares.push(next);
        if regime == Regime::Converging && (next - prev).abs() < SETTLED {
            break;
        }
    }
    ShareTrajectory {
        shares,
        horizon,
        rates,
        regime,
        limit,
    }
}

/// Trajectory from the explicit solution
/// `theta_t = c^t theta_0 + (1 - c^t) theta_inf` with contraction `c`.
pub fn closed_form_trajectory(rates: SwitchRates, initial_share: f64, horizon: usize) -> Result<ShareTrajectory> {
    check_inputs(initial_share, horizon)?;
    let target = rates.fixed_point(initial_share);
    let c = rates.contraction();
    let total = rates.total();
    Ok(build(rates, initial_share, horizon, |t, _| {
        let (decay, settled) = if c >= 0.0 {
            // c^t and 1 - c^t through log1p/expm1 so that slow decay keeps
            // full relative precision.
            let e = t as f64 * (-total).ln_1p();
            (e.exp(), -e.exp_m1())
        } else {
            let ct = c.powi(t.min(i32::MAX as usize) as i32);
            (ct, 1.0 - ct)
        };
        decay * initial_share + settled * target
    }))
}

/// Trajectory from the one-period transition
/// `theta_{t+1} = theta_t (1 - F_alpha) + (1 - theta_t) F_beta`.
pub fn recursive_trajectory(rates: SwitchRates, initial_share: f64, horizon: usize) -> Result<ShareTrajectory> {
    check_inputs(initial_share, horizon)?;
    Ok(build(rates, initial_share, horizon, |_, prev| {
        prev * (1.0 - rates.alpha) + (1.0 - prev) * rates.beta
    }))
}

/// Trajectory under the repeated one-shot equilibrium of `params`.
pub fn equilibrium_trajectory(params: &MarketParams, horizon: usize) -> Result<ShareTrajectory> {
    closed_form_trajectory(
        SwitchRates::from_equilibrium(params)?,
        params.initial_share_a(),
        horizon,
    )
}

/// Per-period profits `(A, B)` for periods `1..=horizon`; period `t` is
/// earned on the customer base left by period `t - 1`.
pub fn profit_path(params: &MarketParams, horizon: usize) -> Result<Vec<(f64, f64)>> {
    let eq = closed_form_equilibrium(params)?;
    let traj = equilibrium_trajectory(params, horizon)?;
    let pr = eq.prices;
    let (ca, cb) = (params.cost_a(), params.cost_b());
    let (fa, fb) = (1.0 - eq.prob_stay_alpha, 1.0 - eq.prob_stay_beta);
    Ok((1..=horizon)
        .map(|t| {
            let theta = traj.share_at(t - 1);
            let a = (pr.a_alpha - ca) * theta * (1.0 - fa) + (pr.a_beta - ca) * (1.0 - theta) * fb;
            let b = (pr.b_beta - cb) * (1.0 - theta) * (1.0 - fb) + (pr.b_alpha - cb) * theta * fa;
            (a, b)
        })
        .collect())
}

/// Limit share written out per region in terms of the loyalty parameters,
/// evaluated for `region` whether or not `params` lies in it. `None` when
/// nobody ever switches in that region.
pub fn region_limit_share(params: &MarketParams, region: Region) -> Option<f64> {
    let lo = params.loyalty();
    let (la, sa) = (lo.slope(Side::Alpha), lo.offset(Side::Alpha));
    let (lb, sb) = (lo.slope(Side::Beta), lo.offset(Side::Beta));
    let d = params.cost_gap();
    match region.linear_label() {
        // Corner prices in both segments: no customer moves.
        RegionLabel::I => None,
        // Nobody is poached from B, some of A's loyal customers leave.
        RegionLabel::II | RegionLabel::III => Some(0.0),
        // Only B's loyal customers move.
        RegionLabel::IV => Some(1.0),
        RegionLabel::V => {
            let fa = (d - sa + la) / la;
            let fb = (lb - sb - d) / lb;
            Some(fb / (fa + fb))
        }
        // A abandons alpha entirely; the beta switching share is
        // (lb - sb - d) / (3 lb), giving fb / (1 + fb) after clearing 3 lb.
        RegionLabel::VI => Some((lb - sb - d) / (4.0 * lb - sb - d)),
    }
}

/// Limit share of the repeated one-shot equilibrium via the region formula.
pub fn limit_share(params: &MarketParams) -> Result<f64> {
    let region = classify_region(params)?;
    Ok(region_limit_share(params, region).unwrap_or(params.initial_share_a()))
}

/// Switching rates produced by `region`'s closed-form prices.
pub fn region_rates(params: &MarketParams, region: Region) -> SwitchRates {
    let pr = region_prices(params, region);
    let fa = params.switch_share(params.threshold(Side::Alpha, pr.a_alpha, pr.b_alpha));
    let fb = params.switch_share(params.threshold(Side::Beta, pr.b_beta, pr.a_beta));
    SwitchRates { alpha: fa, beta: fb }
}
