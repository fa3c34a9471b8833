//! Evaluation of a scenario at every sweep point.

use duopoly_core::qre::{self, QreGame, QreProfile};
use duopoly_core::{batch, markov, myopic, single_stage, Execution, MarketParams, PriceProfile, Side};

use crate::scenario::{Scenario, Setting};

/// Everything reported for one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointOutcome {
    /// Region label, single-stage and myopic settings only.
    pub region: Option<String>,
    pub prices: PriceProfile,
    pub xi_alpha: f64,
    pub xi_beta: f64,
    pub prob_stay_alpha: f64,
    pub prob_stay_beta: f64,
    pub share_a: f64,
    pub profit_a: f64,
    pub profit_b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub sweep_value: f64,
    /// The solver's error message when the point failed.
    pub outcome: Result<PointOutcome, String>,
}

/// Rows in sweep order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub scenario: Scenario,
    pub rows: Vec<Row>,
}

impl SweepTable {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.outcome.is_err()).count()
    }
}

/// Evaluate every sweep point, in parallel under `Execution::Auto`.
/// Failed points keep their error and the run continues.
pub fn run_sweep(scenario: &Scenario, exec: Execution) -> SweepTable {
    let points = scenario.points();
    let rows = batch::map(&points, exec, |&x| Row {
        sweep_value: x,
        outcome: evaluate_point(scenario, x).map_err(|e| e.to_string()),
    });
    SweepTable {
        scenario: scenario.clone(),
        rows,
    }
}

/// The scenario's setting at one sweep value.
pub fn evaluate_point(scenario: &Scenario, x: f64) -> duopoly_core::Result<PointOutcome> {
    let params = scenario.params_at(x)?;
    match scenario.setting {
        Setting::SingleStage => single_stage_point(&params),
        Setting::MyopicHorizon { horizon } => myopic_point(&params, horizon),
        Setting::MarkovUnconstrained => markov_point(&params),
        Setting::MarkovQre => {
            let (game, profile) = solve_qre_point(scenario, x)?;
            qre_point(&game, &profile)
        }
    }
}

fn single_stage_point(params: &MarketParams) -> duopoly_core::Result<PointOutcome> {
    let out = single_stage::closed_form_equilibrium(params)?;
    Ok(PointOutcome {
        region: out.region.map(|r| r.label.to_string()),
        prices: out.prices,
        xi_alpha: out.xi_alpha,
        xi_beta: out.xi_beta,
        prob_stay_alpha: out.prob_stay_alpha,
        prob_stay_beta: out.prob_stay_beta,
        share_a: out.share_a(),
        profit_a: out.profit_a,
        profit_b: out.profit_b,
    })
}

fn myopic_point(params: &MarketParams, horizon: usize) -> duopoly_core::Result<PointOutcome> {
    let mut row = single_stage_point(params)?;
    let traj = myopic::equilibrium_trajectory(params, horizon)?;
    let profits = myopic::profit_path(params, horizon)?;
    let (pa, pb) = *profits.last().expect("horizon is at least one");
    row.share_a = traj.final_share();
    row.profit_a = pa;
    row.profit_b = pb;
    Ok(row)
}

fn markov_point(params: &MarketParams) -> duopoly_core::Result<PointOutcome> {
    let s = markov::solve_markov(params)?;
    Ok(PointOutcome {
        region: None,
        prices: s.prices,
        xi_alpha: s.xi_alpha,
        xi_beta: s.xi_beta,
        prob_stay_alpha: s.prob_stay_alpha(params),
        prob_stay_beta: s.prob_stay_beta(params),
        share_a: s.stationary_share_a,
        profit_a: s.profit_a,
        profit_b: s.profit_b,
    })
}

/// Logit homotopy of the scenario's grid game at one sweep value.
pub fn solve_qre_point(scenario: &Scenario, x: f64) -> duopoly_core::Result<(QreGame, QreProfile)> {
    let params = scenario.params_at(x)?;
    let spec = &scenario.qre;
    let game = QreGame::new(&params, spec.grid())?;
    let profile = qre::trace_homotopy(&game, &spec.schedule().precisions()?, &spec.settings())?;
    Ok((game, profile))
}

/// Modal prices with thresholds at those prices (clamped to the shock
/// support); purchase probabilities, share and profits come from the full
/// mixed profile.
fn qre_point(game: &QreGame, profile: &QreProfile) -> duopoly_core::Result<PointOutcome> {
    let params = game.params();
    let prices = profile.modal_prices(game);
    let (lo, hi) = params.shock().support();
    let xa = params
        .threshold(Side::Alpha, prices.a_alpha, prices.b_alpha)
        .clamp(lo, hi);
    let xb = params.threshold(Side::Beta, prices.b_beta, prices.a_beta).clamp(lo, hi);
    let st = profile.stationary_outcome(game)?;
    Ok(PointOutcome {
        region: None,
        prices,
        xi_alpha: xa,
        xi_beta: xb,
        prob_stay_alpha: st.stay[0],
        prob_stay_beta: st.stay[1],
        share_a: st.share_a,
        profit_a: st.profit_a,
        profit_b: st.profit_b,
    })
}
