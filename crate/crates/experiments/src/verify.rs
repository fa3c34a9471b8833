//! Equilibrium certificates for every point of a scenario.

use duopoly_core::qre::markov_gap;
use duopoly_core::single_stage::{best_response_gap, closed_form_equilibrium, PriceGrid};
use duopoly_core::{batch, markov, myopic, Execution};

use crate::scenario::{Scenario, Setting};
use crate::sweep::solve_qre_point;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

/// Largest deviation gain allowed on the 1e-3 price grid.
pub const PNE_TOLERANCE: f64 = 2e-3;
/// Largest one-shot deviation gain allowed against a logit profile.
pub const QRE_TOLERANCE: f64 = 1e-3;

/// Worst value of a per-point measure, or the first error.
fn worst<F>(scenario: &Scenario, exec: Execution, f: F) -> Result<(f64, f64), String>
where
    F: Fn(f64) -> Result<f64, String> + Sync + Send,
{
    let points = scenario.points();
    let values = batch::map(&points, exec, |&x| f(x).map(|v| (x, v)));
    let mut best: (f64, f64) = (f64::NAN, f64::NEG_INFINITY);
    for v in values {
        let (x, v) = v?;
        if v > best.1 {
            best = (x, v);
        }
    }
    Ok(best)
}

fn check(name: &'static str, tol: f64, what: &str, result: Result<(f64, f64), String>) -> Check {
    match result {
        Ok((x, v)) => Check {
            name,
            passed: v <= tol,
            detail: format!("largest {what} {v:.3e} at {x} (limit {tol:.0e})"),
        },
        Err(e) => Check {
            name,
            passed: false,
            detail: e,
        },
    }
}

/// Run the checks that apply to the scenario's setting.
pub fn verify(scenario: &Scenario, exec: Execution) -> Vec<Check> {
    let s = scenario;
    let e = |err: duopoly_core::Error| err.to_string();
    match s.setting {
        Setting::SingleStage => {
            let pne = worst(s, exec, |x| {
                let p = s.params_at(x).map_err(e)?;
                let out = closed_form_equilibrium(&p).map_err(e)?;
                let top = out.prices.to_array().into_iter().fold(0.0, f64::max) + 2.0;
                let grid = PriceGrid::new(0.0, top, 1e-3).map_err(e)?;
                best_response_gap(&p, out.prices, &grid).map_err(e)
            });
            let cover = worst(s, exec, |x| {
                let p = s.params_at(x).map_err(e)?;
                let d = closed_form_equilibrium(&p).map_err(e)?.demands;
                let theta = p.initial_share_a();
                Ok((d.a_strong + d.b_weak - theta)
                    .abs()
                    .max((d.b_strong + d.a_weak - (1.0 - theta)).abs()))
            });
            vec![
                check("pure_equilibrium", PNE_TOLERANCE, "grid deviation gain", pne),
                check("market_covered", 1e-12, "coverage error", cover),
            ]
        }
        Setting::MyopicHorizon { horizon } => {
            let agree = worst(s, exec, |x| {
                let p = s.params_at(x).map_err(e)?;
                let rates = myopic::SwitchRates::from_equilibrium(&p).map_err(e)?;
                let theta = p.initial_share_a();
                let c = myopic::closed_form_trajectory(rates, theta, horizon).map_err(e)?;
                let r = myopic::recursive_trajectory(rates, theta, horizon).map_err(e)?;
                Ok((0..=horizon)
                    .map(|t| (c.share_at(t) - r.share_at(t)).abs())
                    .fold(0.0, f64::max))
            });
            vec![check("closed_form_matches_recursion", 1e-12, "share difference", agree)]
        }
        Setting::MarkovUnconstrained => {
            let consistent = worst(s, exec, |x| {
                let p = s.params_at(x).map_err(e)?;
                let sol = markov::solve_markov(&p).map_err(e)?;
                let r = markov::threshold_residuals(&p, sol.xi_alpha, sol.xi_beta).map_err(e)?;
                let bellman = markov::bellman_residual(&p, sol.prices, &sol.values);
                Ok(r[0].abs().max(r[1].abs()).max(bellman))
            });
            vec![check("markov_fixed_point", 1e-10, "equilibrium residual", consistent)]
        }
        Setting::MarkovQre => {
            let gap = worst(s, exec, |x| {
                let (game, profile) = solve_qre_point(s, x).map_err(e)?;
                markov_gap(&game, &profile.probs).map_err(e)
            });
            vec![check("qre_markov_gap", QRE_TOLERANCE, "deviation gain", gap)]
        }
    }
}
