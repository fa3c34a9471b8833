//! Markov-perfect pricing: firms price each customer state with an eye on
//! the discounted value of keeping or winning that customer.
//!
//! A customer's state is the firm it bought from last. Each firm's value of
//! a customer in either state solves a 2x2 linear system; prices are static
//! markups shifted down by the discounted value gap. Equilibrium thresholds
//! are found by damped Gauss-Seidel on the threshold-consistency equations.

use crate::error::{Error, Result};
use crate::loyalty::{MarketParams, Side};
use crate::roots::bracketed_root;
use crate::single_stage::{markups, PriceGrid, PriceProfile};

/// Value of a customer to one firm, by the state the customer is in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateValues {
    pub alpha: f64,
    pub beta: f64,
}

/// Customer values of both firms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Values {
    pub a: StateValues,
    pub b: StateValues,
}

impl Values {
    /// Value gaps (own loyal customer minus rival's loyal customer).
    pub fn gaps(&self) -> ValueGaps {
        ValueGaps {
            a: self.a.alpha - self.a.beta,
            b: self.b.beta - self.b.alpha,
        }
    }
}

/// How much more a firm values a customer already loyal to it than one
/// loyal to the rival.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueGaps {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Weight on the new iterate in each Gauss-Seidel update.
    pub damping: f64,
    pub tolerance: f64,
    pub max_sweeps: usize,
    /// Distance kept from the support edges when bracketing thresholds.
    pub edge_margin: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            damping: 0.5,
            tolerance: 1e-12,
            max_sweeps: 500,
            edge_margin: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovSolution {
    pub xi_alpha: f64,
    pub xi_beta: f64,
    pub prices: PriceProfile,
    pub gaps: ValueGaps,
    pub values: Values,
    /// Long-run share of A under the equilibrium switching rates.
    pub stationary_share_a: f64,
    /// Per-period profits at the stationary share.
    pub profit_a: f64,
    pub profit_b: f64,
    pub sweeps: usize,
    pub residual: f64,
}

impl MarkovSolution {
    pub fn prob_stay_alpha(&self, params: &MarketParams) -> f64 {
        1.0 - params.switch_share(self.xi_alpha)
    }

    pub fn prob_stay_beta(&self, params: &MarketParams) -> f64 {
        1.0 - params.switch_share(self.xi_beta)
    }
}

fn solve_2x2(m: [[f64; 2]; 2], rhs: [f64; 2]) -> Result<[f64; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if !det.is_finite() || det.abs() <= 1e-300 {
        return Err(Error::SingularSystem);
    }
    Ok([
        (rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det,
        (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det,
    ])
}

/// Customer values of a stationary price profile.
///
/// A customer in the alpha state stays with probability `1 - F_alpha` and
/// pays A's loyal price, otherwise it moves to the beta state paying B's
/// poaching price; symmetrically for beta.
pub fn solve_value_functions(params: &MarketParams, prices: PriceProfile) -> Result<Values> {
    let fa = params.switch_share(params.threshold(Side::Alpha, prices.a_alpha, prices.b_alpha));
    let fb = params.switch_share(params.threshold(Side::Beta, prices.b_beta, prices.a_beta));
    let (ca, cb) = (params.cost_a(), params.cost_b());

    let da = params.discount_a();
    let [a_alpha, a_beta] = solve_2x2(
        [[1.0 - da * (1.0 - fa), -da * fa], [-da * fb, 1.0 - da * (1.0 - fb)]],
        [(1.0 - fa) * (prices.a_alpha - ca), fb * (prices.a_beta - ca)],
    )?;
    let db = params.discount_b();
    let [b_beta, b_alpha] = solve_2x2(
        [[1.0 - db * (1.0 - fb), -db * fb], [-db * fa, 1.0 - db * (1.0 - fa)]],
        [(1.0 - fb) * (prices.b_beta - cb), fa * (prices.b_alpha - cb)],
    )?;
    Ok(Values {
        a: StateValues {
            alpha: a_alpha,
            beta: a_beta,
        },
        b: StateValues {
            alpha: b_alpha,
            beta: b_beta,
        },
    })
}

/// Largest violation of the four Bellman equations by `values` under `prices`.
pub fn bellman_residual(params: &MarketParams, prices: PriceProfile, values: &Values) -> f64 {
    let fa = params.switch_share(params.threshold(Side::Alpha, prices.a_alpha, prices.b_alpha));
    let fb = params.switch_share(params.threshold(Side::Beta, prices.b_beta, prices.a_beta));
    let (ca, cb) = (params.cost_a(), params.cost_b());
    let (da, db) = (params.discount_a(), params.discount_b());
    let (a, b) = (values.a, values.b);
    [
        a.alpha - ((1.0 - fa) * (prices.a_alpha - ca + da * a.alpha) + fa * da * a.beta),
        a.beta - (fb * (prices.a_beta - ca + da * a.alpha) + (1.0 - fb) * da * a.beta),
        b.beta - ((1.0 - fb) * (prices.b_beta - cb + db * b.beta) + fb * db * b.alpha),
        b.alpha - (fa * (prices.b_alpha - cb + db * b.beta) + (1.0 - fa) * db * b.alpha),
    ]
    .iter()
    .map(|r| r.abs())
    .fold(0.0, f64::max)
}

/// Value gaps of a price profile with the given switching thresholds, from
/// the closed-form solution of the 2x2 value systems.
pub fn value_gaps(params: &MarketParams, prices: PriceProfile, xi_alpha: f64, xi_beta: f64) -> ValueGaps {
    let fa = params.switch_share(xi_alpha);
    let fb = params.switch_share(xi_beta);
    let (ca, cb) = (params.cost_a(), params.cost_b());
    let (da, db) = (params.discount_a(), params.discount_b());
    ValueGaps {
        a: ((1.0 - fa) * (prices.a_alpha - ca) - fb * (prices.a_beta - ca)) / (1.0 - da + da * (fa + fb)),
        b: ((1.0 - fb) * (prices.b_beta - cb) - fa * (prices.b_alpha - cb)) / (1.0 - db + db * (fa + fb)),
    }
}

/// Value gaps consistent with thresholds once prices satisfy the dynamic
/// first-order conditions. Substituting those prices into the value gap
/// formula makes the discounting cancel, leaving markups only.
pub fn implied_gaps(params: &MarketParams, xi_alpha: f64, xi_beta: f64) -> ValueGaps {
    let m = markups(params, xi_alpha, xi_beta);
    let fa = params.switch_share(xi_alpha);
    let fb = params.switch_share(xi_beta);
    ValueGaps {
        a: (1.0 - fa) * m.a_alpha - fb * m.a_beta,
        b: (1.0 - fb) * m.b_beta - fa * m.b_alpha,
    }
}

fn require_interior(params: &MarketParams, side: Side, xi: f64) -> Result<()> {
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

/// Prices satisfying the dynamic first-order conditions for given
/// thresholds and value gaps: static markup minus the discounted value gap.
pub fn price_from_thresholds(
    params: &MarketParams,
    xi_alpha: f64,
    xi_beta: f64,
    gaps: ValueGaps,
) -> Result<PriceProfile> {
    require_interior(params, Side::Alpha, xi_alpha)?;
    require_interior(params, Side::Beta, xi_beta)?;
    let m = markups(params, xi_alpha, xi_beta);
    let (ca, cb) = (params.cost_a(), params.cost_b());
    let shift_a = params.discount_a() * gaps.a;
    let shift_b = params.discount_b() * gaps.b;
    Ok(PriceProfile::new(
        ca + m.a_alpha - shift_a,
        ca + m.a_beta - shift_a,
        cb + m.b_beta - shift_b,
        cb + m.b_alpha - shift_b,
    ))
}

/// Difference between each threshold and the threshold implied by the
/// prices it generates. Zero exactly at a Markov equilibrium.
pub fn consistency_residuals(params: &MarketParams, xi_alpha: f64, xi_beta: f64) -> [f64; 2] {
    [
        consistency_residual(params, Side::Alpha, xi_alpha, xi_beta),
        consistency_residual(params, Side::Beta, xi_alpha, xi_beta),
    ]
}

fn consistency_residual(params: &MarketParams, side: Side, xi_alpha: f64, xi_beta: f64) -> f64 {
    let m = markups(params, xi_alpha, xi_beta);
    let g = implied_gaps(params, xi_alpha, xi_beta);
    let lo = params.loyalty();
    let d = params.cost_gap();
    let shift = params.discount_a() * g.a - params.discount_b() * g.b;
    match side {
        Side::Alpha => {
            let gap = d + m.a_alpha - m.b_alpha - shift;
            xi_alpha - lo.threshold(Side::Alpha, gap)
        }
        Side::Beta => {
            let gap = -d + m.b_beta - m.a_beta + shift;
            xi_beta - lo.threshold(Side::Beta, gap)
        }
    }
}

/// The two coupled threshold equations for a common discount factor, as
/// left-hand side minus right-hand side, multiplied through by the discount
/// factor so that they stay finite (and reduce to the static conditions)
/// as discounting vanishes.
pub fn threshold_residuals(params: &MarketParams, xi_alpha: f64, xi_beta: f64) -> Result<[f64; 2]> {
    let delta = params.discount_a();
    if params.discount_b() != delta {
        return Err(Error::invalid(
            "delta_b",
            "the coupled threshold equations need a common discount factor",
        ));
    }
    let shock = params.shock();
    let lo = params.loyalty();
    let (la, sa) = (lo.slope(Side::Alpha), lo.offset(Side::Alpha));
    let (lb, sb) = (lo.slope(Side::Beta), lo.offset(Side::Beta));
    let d = params.cost_gap();
    let (fa, pa) = (shock.cdf(xi_alpha), shock.pdf(xi_alpha));
    let (fb, pb) = (shock.cdf(xi_beta), shock.pdf(xi_beta));
    // delta * ((1 - delta) / delta + x) = 1 - delta + delta * x
    let w = |x: f64| 1.0 - delta + delta * x;

    let lhs_a = (xi_alpha - (d - sa) / la) * w(fb + 1.0) + (2.0 * fa - 1.0) / pa * w(fa + fb) + delta * fa / pa;
    let rhs_a = delta * ((1.0 - fb) * lb / (pb * la) - fb * (lb / la * xi_beta + d / la + sb / la));
    let lhs_b = (xi_beta - (-d - sb) / lb) * w(fa + 1.0) + (2.0 * fb - 1.0) / pb * w(fa + fb) + delta * fb / pb;
    let rhs_b = delta * ((1.0 - fa) * la / (pa * lb) - fa * (la / lb * xi_alpha - d / lb + sa / lb));
    Ok([lhs_a - rhs_a, lhs_b - rhs_b])
}

/// Markov equilibrium started from the static interior thresholds (or the
/// middle of the support when those do not exist).
pub fn solve_markov(params: &MarketParams) -> Result<MarkovSolution> {
    let (lo, hi) = params.shock().support();
    let mid = 0.5 * (lo + hi);
    let start = crate::single_stage::interior_foc_solution(params)
        .map(|p| {
            (
                params.threshold(Side::Alpha, p.a_alpha, p.b_alpha),
                params.threshold(Side::Beta, p.b_beta, p.a_beta),
            )
        })
        .unwrap_or((mid, mid));
    solve_markov_from(params, start, &SolverSettings::default())
}

/// Markov equilibrium by damped Gauss-Seidel from the given thresholds.
///
/// Each sweep solves the alpha consistency equation for `xi_alpha` holding
/// `xi_beta` fixed, moves part way there, then does the same for beta.
/// Fails if a threshold would leave the support or if the resulting prices
/// break the ordering `a_alpha >= a_beta >= c_A`, `b_beta >= b_alpha >= c_B`.
pub fn solve_markov_from(
    params: &MarketParams,
    start: (f64, f64),
    settings: &SolverSettings,
) -> Result<MarkovSolution> {
    let delta = params.discount_a();
    if params.discount_b() != delta {
        return Err(Error::invalid(
            "delta_b",
            "the Markov solver needs a common discount factor",
        ));
    }
    if delta == 0.0 {
        return Err(Error::invalid("delta", "zero discounting is the myopic setting"));
    }
    if !(settings.damping > 0.0 && settings.damping <= 1.0) {
        return Err(Error::invalid("damping", "must lie in (0, 1]"));
    }
    let (lo, hi) = params.shock().support();
    let (a, b) = (lo + settings.edge_margin, hi - settings.edge_margin);
    let (mut xa, mut xb) = (start.0.clamp(a, b), start.1.clamp(a, b));
    let w = settings.damping;

    let residual = |xa, xb| {
        let [ra, rb] = consistency_residuals(params, xa, xb);
        ra.abs().max(rb.abs())
    };
    let mut res = residual(xa, xb);
    let mut sweeps = 0;
    while res > settings.tolerance {
        if sweeps == settings.max_sweeps {
            return Err(Error::NoConvergence {
                iterations: sweeps,
                residual: res,
            });
        }
        sweeps += 1;
        let ta = bracketed_root(a, b, |x| consistency_residual(params, Side::Alpha, x, xb))
            .ok_or(Error::NoInteriorRoot { side: Side::Alpha })?;
        xa += w * (ta - xa);
        let tb = bracketed_root(a, b, |x| consistency_residual(params, Side::Beta, xa, x))
            .ok_or(Error::NoInteriorRoot { side: Side::Beta })?;
        xb += w * (tb - xb);
        res = residual(xa, xb);
    }

    let gaps = implied_gaps(params, xa, xb);
    let prices = price_from_thresholds(params, xa, xb, gaps)?;
    check_price_order(params, prices)?;
    let values = solve_value_functions(params, prices)?;
    let (fa, fb) = (params.switch_share(xa), params.switch_share(xb));
    let share = fb / (fa + fb);
    let (ca, cb) = (params.cost_a(), params.cost_b());
    Ok(MarkovSolution {
        xi_alpha: xa,
        xi_beta: xb,
        prices,
        gaps,
        values,
        stationary_share_a: share,
        profit_a: share * (1.0 - fa) * (prices.a_alpha - ca) + (1.0 - share) * fb * (prices.a_beta - ca),
        profit_b: (1.0 - share) * (1.0 - fb) * (prices.b_beta - cb) + share * fa * (prices.b_alpha - cb),
        sweeps,
        residual: res,
    })
}

/// Loyal prices at least poaching prices, and poaching prices at least cost.
pub fn check_price_order(params: &MarketParams, p: PriceProfile) -> Result<()> {
    let (ca, cb) = (params.cost_a(), params.cost_b());
    let mut broken = Vec::new();
    if p.a_alpha < p.a_beta {
        broken.push(format!(
            "A's loyal price {} below its poaching price {}",
            p.a_alpha, p.a_beta
        ));
    }
    if p.a_beta < ca {
        broken.push(format!("A's poaching price {} below cost {}", p.a_beta, ca));
    }
    if p.b_beta < p.b_alpha {
        broken.push(format!(
            "B's loyal price {} below its poaching price {}",
            p.b_beta, p.b_alpha
        ));
    }
    if p.b_alpha < cb {
        broken.push(format!("B's poaching price {} below cost {}", p.b_alpha, cb));
    }
    if broken.is_empty() {
        Ok(())
    } else {
        Err(Error::AssumptionViolated(broken.join("; ")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridEquilibrium {
    pub prices: PriceProfile,
    pub values: Values,
    pub rounds: usize,
}

/// Markov equilibrium on a price grid by alternating best responses.
///
/// Each round evaluates the current profile exactly, lets A re-price both
/// states against it, re-evaluates, then lets B do the same. Stops once a
/// round leaves every price unchanged, which makes each price a one-shot
/// best response given the continuation values it induces. Shares nothing
/// with the threshold equations, so it serves as an independent check.
pub fn value_iteration_oracle(params: &MarketParams, grid: &PriceGrid, max_rounds: usize) -> Result<GridEquilibrium> {
    let (ca, cb) = (params.cost_a(), params.cost_b());
    let first_at_least = |c: f64| (0..grid.len()).find(|&i| grid.point(i) >= c).ok_or(Error::EmptyGrid);
    let (ia0, ib0) = (first_at_least(ca)?, first_at_least(cb)?);
    let shock = params.shock();
    let stay_alpha = |pa: f64, pb: f64| shock.survival(params.threshold(Side::Alpha, pa, pb));
    let stay_beta = |pb: f64, pa: f64| shock.survival(params.threshold(Side::Beta, pb, pa));
    let argmax = |from: usize, value: &dyn Fn(f64) -> f64| {
        let mut best = (from, f64::NEG_INFINITY);
        for i in from..grid.len() {
            let v = value(grid.point(i));
            if v > best.1 {
                best = (i, v);
            }
        }
        best.0
    };

    // Indices into the grid: A alpha, A beta, B beta, B alpha.
    let mut idx = [ia0, ia0, ib0, ib0];
    let profile = |idx: &[usize; 4]| {
        PriceProfile::new(
            grid.point(idx[0]),
            grid.point(idx[1]),
            grid.point(idx[2]),
            grid.point(idx[3]),
        )
    };
    let (da, db) = (params.discount_a(), params.discount_b());

    for round in 1..=max_rounds {
        let before = idx;

        let p = profile(&idx);
        let v = solve_value_functions(params, p)?.a;
        idx[0] = argmax(ia0, &|x| {
            let s = stay_alpha(x, p.b_alpha);
            s * (x - ca + da * v.alpha) + (1.0 - s) * da * v.beta
        });
        idx[1] = argmax(ia0, &|x| {
            let s = stay_beta(p.b_beta, x);
            (1.0 - s) * (x - ca + da * v.alpha) + s * da * v.beta
        });

        let p = profile(&idx);
        let v = solve_value_functions(params, p)?.b;
        idx[2] = argmax(ib0, &|x| {
            let s = stay_beta(x, p.a_beta);
            s * (x - cb + db * v.beta) + (1.0 - s) * db * v.alpha
        });
        idx[3] = argmax(ib0, &|x| {
            let s = stay_alpha(p.a_alpha, x);
            (1.0 - s) * (x - cb + db * v.beta) + s * db * v.alpha
        });

        if idx == before {
            let prices = profile(&idx);
            return Ok(GridEquilibrium {
                prices,
                values: solve_value_functions(params, prices)?,
                rounds: round,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: max_rounds,
        residual: f64::NAN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loyalty::LoyaltyModel;

    fn symmetric(delta: f64) -> MarketParams {
        let m = LoyaltyModel::multiplicative(1.0, 1.0).unwrap();
        MarketParams::new(0.0, 0.0, m).unwrap().with_discount(delta).unwrap()
    }

    #[test]
    fn symmetric_closed_form() {
        for delta in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let p = symmetric(delta);
            let s = solve_markov(&p).unwrap();
            assert!((s.xi_alpha - 1.0 / 3.0).abs() < 1e-12);
            assert!((s.xi_beta - 1.0 / 3.0).abs() < 1e-12);
            assert!((s.gaps.a - 1.0 / 3.0).abs() < 1e-12);
            assert!((s.prices.a_alpha - (2.0 - delta) / 3.0).abs() < 1e-12);
            assert!((s.prices.b_alpha - (1.0 - delta) / 3.0).abs() < 1e-12);
            assert!((s.stationary_share_a - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_values_at_one_half() {
        // Loyal customer: (2/3)(1/2) now; the 2x2 system gives 5/9 and 2/9.
        let p = symmetric(0.5);
        let s = solve_markov(&p).unwrap();
        assert!((s.values.a.alpha - 5.0 / 9.0).abs() < 1e-12);
        assert!((s.values.a.beta - 2.0 / 9.0).abs() < 1e-12);
        assert!((s.values.b.beta - 5.0 / 9.0).abs() < 1e-12);
        assert!(bellman_residual(&p, s.prices, &s.values) < 1e-14);
    }

    #[test]
    fn zero_margins_give_zero_gaps() {
        let m = LoyaltyModel::linear(2.0, 0.3, 1.5, 0.2).unwrap();
        let p = MarketParams::new(0.7, 0.4, m).unwrap().with_discount(0.6).unwrap();
        let prices = PriceProfile::new(0.7, 0.7, 0.4, 0.4);
        let g = value_gaps(&p, prices, 0.2, 0.6);
        assert_eq!(g, ValueGaps { a: 0.0, b: 0.0 });
        let v = solve_value_functions(&p, prices).unwrap();
        assert_eq!(v.gaps(), ValueGaps { a: 0.0, b: 0.0 });
    }

    #[test]
    fn gap_formula_matches_value_system() {
        let m = LoyaltyModel::linear(2.0, 0.3, 1.5, 0.2).unwrap();
        let p = MarketParams::new(0.7, 0.4, m)
            .unwrap()
            .with_discounts(0.6, 0.3)
            .unwrap();
        let prices = PriceProfile::new(2.1, 1.2, 1.6, 0.9);
        let xa = p.threshold(Side::Alpha, prices.a_alpha, prices.b_alpha);
        let xb = p.threshold(Side::Beta, prices.b_beta, prices.a_beta);
        let g = value_gaps(&p, prices, xa, xb);
        let v = solve_value_functions(&p, prices).unwrap().gaps();
        assert!((g.a - v.a).abs() < 1e-14 && (g.b - v.b).abs() < 1e-14);
    }

    #[test]
    fn both_residual_forms_vanish_at_solution() {
        let m = LoyaltyModel::linear(3.0, 1.1, 4.0, 0.5).unwrap();
        let p = MarketParams::new(1.2, 0.2, m).unwrap().with_discount(0.4).unwrap();
        let s = solve_markov(&p).unwrap();
        let r = threshold_residuals(&p, s.xi_alpha, s.xi_beta).unwrap();
        assert!(r[0].abs() < 1e-11 && r[1].abs() < 1e-11, "{r:?}");
        // Prices reproduce the thresholds they came from.
        let xa = p.threshold(Side::Alpha, s.prices.a_alpha, s.prices.b_alpha);
        let xb = p.threshold(Side::Beta, s.prices.b_beta, s.prices.a_beta);
        assert!((xa - s.xi_alpha).abs() < 1e-11 && (xb - s.xi_beta).abs() < 1e-11);
        // Gaps used for pricing equal those of the value system.
        let v = s.values.gaps();
        assert!((v.a - s.gaps.a).abs() < 1e-11 && (v.b - s.gaps.b).abs() < 1e-11);
    }

    #[test]
    fn threshold_residuals_need_common_discount() {
        let p = symmetric(0.5).with_discounts(0.5, 0.4).unwrap();
        assert!(threshold_residuals(&p, 0.3, 0.3).is_err());
    }

    #[test]
    fn solver_rejects_unequal_or_zero_discount() {
        assert!(solve_markov(&symmetric(0.5).with_discounts(0.6, 0.3).unwrap()).is_err());
        assert!(solve_markov(&symmetric(0.0)).is_err());
    }

    #[test]
    fn label_swap_symmetry() {
        // Equal costs: swapping the segments' loyalty swaps the solution.
        let m = LoyaltyModel::linear(3.0, 0.2, 4.0, 0.1).unwrap();
        let w = LoyaltyModel::linear(4.0, 0.1, 3.0, 0.2).unwrap();
        let p = MarketParams::new(0.2, 0.2, m).unwrap().with_discount(0.4).unwrap();
        let q = p.with_loyalty(w);
        let (s, t) = (solve_markov(&p).unwrap(), solve_markov(&q).unwrap());
        assert!((s.xi_alpha - t.xi_beta).abs() < 1e-12 && (s.xi_beta - t.xi_alpha).abs() < 1e-12);
        assert!((s.prices.a_alpha - t.prices.b_beta).abs() < 1e-12);
        assert!((s.prices.b_alpha - t.prices.a_beta).abs() < 1e-12);
    }

    #[test]
    fn residuals_positive_above_symmetric_solution() {
        for delta in [0.1, 0.5, 0.9] {
            let r = threshold_residuals(&symmetric(delta), 0.5, 0.5).unwrap();
            assert!(r[0] > 0.0 && r[1] > 0.0);
            let z = threshold_residuals(&symmetric(delta), 1.0 / 3.0, 1.0 / 3.0).unwrap();
            assert!(z[0].abs() < 1e-15 && z[1].abs() < 1e-15);
        }
    }

    #[test]
    fn oracle_agrees_on_asymmetric_market() {
        let m = LoyaltyModel::linear(3.0, 1.1, 4.0, 0.5).unwrap();
        let p = MarketParams::new(1.2, 0.2, m).unwrap().with_discount(0.4).unwrap();
        let s = solve_markov(&p).unwrap();
        let g = value_iteration_oracle(&p, &PriceGrid::new(0.0, 8.0, 1e-3).unwrap(), 1000).unwrap();
        assert!(
            g.prices.max_abs_diff(&s.prices) <= 2e-3,
            "{:?} vs {:?}",
            g.prices,
            s.prices
        );
    }

    #[test]
    fn constrained_instance_is_flagged() {
        // Equal costs here push B's poaching price below cost.
        let m = LoyaltyModel::linear(3.0, 1.1, 4.0, 0.5).unwrap();
        let p = MarketParams::new(0.2, 0.2, m).unwrap().with_discount(0.4).unwrap();
        assert!(matches!(solve_markov(&p), Err(Error::AssumptionViolated(_))));
    }

    #[test]
    fn oracle_agrees_on_symmetric_market() {
        let p = symmetric(0.5);
        let grid = PriceGrid::new(0.0, 1.5, 1e-3).unwrap();
        let g = value_iteration_oracle(&p, &grid, 1000).unwrap();
        assert!((g.prices.a_alpha - 0.5).abs() <= 1e-3 + 1e-12, "{:?}", g.prices);
        assert!((g.prices.b_alpha - 1.0 / 6.0).abs() <= 1e-3 + 1e-12, "{:?}", g.prices);
    }
}
