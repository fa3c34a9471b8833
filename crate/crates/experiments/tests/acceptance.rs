//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when any
//! criterion fails. Each criterion also has to finish inside its time limit.

use std::panic::catch_unwind;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use duopoly_core::markov::{self, solve_markov, solve_markov_from, value_iteration_oracle};
use duopoly_core::myopic::{self, SwitchRates};
use duopoly_core::qre::markov_gap;
use duopoly_core::single_stage::{
    self, best_response_gap, classify_region, closed_form_equilibrium, interior_foc_solution, region_prices, PriceGrid,
};
use duopoly_core::{
    batch, Execution, LoyaltyFamily, LoyaltyModel, MarketParams, PriceProfile, Region, RegionLabel, Side,
};
use duopoly_experiments::sweep::solve_qre_point;
use duopoly_experiments::Scenario;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;
/// Name, time limit in seconds, check.
type Criterion = (&'static str, u64, fn() -> Verdict);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("region map", 1, region_map),
        ("firm A exit point", 1, exit_point),
        ("pure equilibrium certificate", 120, pne_certificate),
        ("boundary continuity", 5, boundary_continuity),
        ("myopic dynamics", 30, myopic_dynamics),
        ("symmetric Markov fixed point", 60, symmetric_markov),
        ("vanishing discount limit", 30, vanishing_discount),
        ("Markov uniqueness", 60, uniqueness),
        ("QRE certificate and shape", 600, qre_certificate),
        ("special-case collapse", 30, special_case_collapse),
    ];
    let mut failed = 0;
    for (k, (name, limit, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let verdict = catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let took = start.elapsed();
        let verdict = match verdict {
            Ok(d) if took > Duration::from_secs(limit) => Err(format!("{d}; over the {limit} s limit")),
            v => v,
        };
        let (tag, detail) = match &verdict {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        failed += verdict.is_err() as usize;
        println!("{tag} {:>2} {name}: {detail} [{:.2} s]", k + 1, took.as_secs_f64());
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn reference_ll(gap: f64) -> MarketParams {
    let m = LoyaltyModel::linear(1.0, 3.0, 4.0, 3.0).unwrap();
    MarketParams::new(0.4, 0.4, m)
        .unwrap()
        .with_initial_share(0.8)
        .unwrap()
        .with_cost_gap(gap)
        .unwrap()
}

fn region_map() -> Verdict {
    let label = |gap: f64| classify_region(&reference_ll(gap)).unwrap().label;
    let expected = |gap: f64| {
        if gap < 1.0 {
            RegionLabel::IV
        } else if gap <= 2.0 {
            RegionLabel::I
        } else if gap <= 5.0 {
            RegionLabel::II
        } else {
            RegionLabel::III
        }
    };
    let mut gaps: Vec<f64> = (0..=6000).map(|k| k as f64 / 1000.0).collect();
    for b in [1.0f64, 2.0, 5.0] {
        gaps.extend([b.next_down(), b, b.next_up()]);
    }
    for &g in &gaps {
        ensure(
            label(g) == expected(g),
            format!("gap {g:e}: got {}, want {}", label(g), expected(g)),
        )?;
    }
    Ok(format!(
        "{} gaps in [0, 6]: IV until 1, I on [1, 2], II on (2, 5], III beyond 5",
        gaps.len()
    ))
}

fn exit_point() -> Verdict {
    let mut zero_from = None;
    for k in 0..=6000 {
        let gap = k as f64 / 1000.0;
        let out = closed_form_equilibrium(&reference_ll(gap)).unwrap();
        let strong = out.demands.a_strong;
        // A's strong-market profit.
        let profit = strong * (out.prices.a_alpha - reference_ll(gap).cost_a());
        if gap >= 5.0 {
            ensure(
                strong <= 1e-12 && profit.abs() <= 1e-12,
                format!("gap {gap}: demand {strong:e}"),
            )?;
            ensure(
                out.profit_a.abs() <= 1e-12,
                format!("gap {gap}: A's profit {:e}", out.profit_a),
            )?;
        } else {
            ensure(strong > 1e-12, format!("gap {gap}: demand already {strong:e}"))?;
        }
        if strong <= 1e-12 && zero_from.is_none() {
            zero_from = Some(gap);
        }
    }
    let at = zero_from.ok_or("A's strong demand never vanished")?;
    ensure(at == 5.0, format!("demand vanished at {at}"))?;
    let before = closed_form_equilibrium(&reference_ll(5.0f64.next_down()))
        .unwrap()
        .demands
        .a_strong;
    Ok(format!(
        "A's strong demand and profit are 0 from gap 5 = s_alpha + 2 l_alpha on (demand {before:.1e} just below)"
    ))
}

fn model(family: LoyaltyFamily, la: f64, sa: f64, lb: f64, sb: f64) -> LoyaltyModel {
    match family {
        LoyaltyFamily::Linear => LoyaltyModel::linear(la, sa, lb, sb),
        LoyaltyFamily::Multiplicative => LoyaltyModel::multiplicative(la, lb),
        LoyaltyFamily::Additive => LoyaltyModel::additive(sa, sb),
    }
    .unwrap()
}

fn random_model(rng: &mut impl Rng, family: LoyaltyFamily) -> LoyaltyModel {
    let la = rng.random_range(0.2..5.0);
    let sa = rng.random_range(0.0..5.0);
    let lb = rng.random_range(0.2..5.0);
    let sb = rng.random_range(0.0..5.0);
    model(family, la, sa, lb, sb)
}

/// Region cut points on the cost gap: `(beta_cut, alpha_low, alpha_high)`.
fn cuts(m: &LoyaltyModel) -> (f64, f64, f64) {
    let (la, sa) = (m.slope(Side::Alpha), m.offset(Side::Alpha));
    let (lb, sb) = (m.slope(Side::Beta), m.offset(Side::Beta));
    (lb - sb, sa - la, sa + 2.0 * la)
}

/// Range of non-negative cost gaps that fall in `label` (linear numbering).
fn region_range(m: &LoyaltyModel, label: RegionLabel) -> (f64, f64) {
    let (b, lo, hi) = cuts(m);
    let (l, u) = match label {
        RegionLabel::I => (b, lo),
        RegionLabel::II => (lo.max(b), hi),
        RegionLabel::III => (hi.max(b), hi.max(b) + 3.0),
        RegionLabel::IV => (0.0, lo.min(b)),
        RegionLabel::V => (lo, hi.min(b)),
        RegionLabel::VI => (hi, b),
    };
    (l.max(0.0), u)
}

const FAMILIES: [LoyaltyFamily; 3] = [
    LoyaltyFamily::Linear,
    LoyaltyFamily::Multiplicative,
    LoyaltyFamily::Additive,
];

/// A market whose one-shot equilibrium lies strictly inside `region`.
fn market_in(rng: &mut impl Rng, region: Region) -> MarketParams {
    loop {
        let m = random_model(rng, region.family);
        let (l, u) = region_range(&m, region.linear_label());
        if u - l < 1e-3 {
            continue;
        }
        let gap = rng.random_range(l..u);
        let cb = rng.random_range(0.0..2.0);
        let p = MarketParams::new(cb, cb, m)
            .and_then(|p| p.with_cost_gap(gap))
            .and_then(|p| p.with_initial_share(rng.random_range(0.0..=1.0)));
        let Ok(p) = p else { continue };
        if classify_region(&p).unwrap() == region {
            return p;
        }
    }
}

fn pne_certificate() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut markets = vec![];
    for family in FAMILIES {
        let labels = Region::labels(family);
        for k in 0..200 {
            let region = Region {
                family,
                label: labels[k % labels.len()],
            };
            markets.push(market_in(&mut rng, region));
        }
    }
    let gaps = batch::map(&markets, Execution::Auto, |p| {
        let out = closed_form_equilibrium(p).unwrap();
        let top = out.prices.to_array().into_iter().fold(0.0, f64::max) + 2.0;
        best_response_gap(p, out.prices, &PriceGrid::new(0.0, top, 1e-3).unwrap()).unwrap()
    });
    let (worst, at) = gaps.iter().zip(&markets).fold(
        (0.0f64, None),
        |acc, (g, p)| if *g > acc.0 { (*g, Some(p)) } else { acc },
    );
    ensure(worst <= 2e-3, format!("deviation gain {worst:e} at {at:?}"))?;
    Ok(format!(
        "600 markets over every region of LL/ML/AL, largest grid deviation gain {worst:.2e}"
    ))
}

/// Adjacent regions, in linear numbering, and which cut separates them.
const BOUNDARIES: [(RegionLabel, RegionLabel); 7] = {
    use RegionLabel::*;
    [(IV, I), (I, II), (II, III), (IV, V), (V, II), (V, VI), (VI, III)]
};

/// The gap on the boundary between `a` and `b`, if this model has one.
fn boundary_gap(m: &LoyaltyModel, a: RegionLabel, b: RegionLabel) -> Option<f64> {
    use RegionLabel::*;
    let (bc, lo, hi) = cuts(m);
    let (gap, ok) = match (a, b) {
        (IV, I) => (bc, bc <= lo),
        (I, II) => (lo, lo >= bc),
        (II, III) => (hi, hi >= bc),
        (IV, V) => (lo, lo < bc),
        (V, II) => (bc, lo < bc && bc <= hi),
        (V, VI) => (hi, hi < bc),
        (VI, III) => (bc, bc > hi),
        _ => unreachable!(),
    };
    (ok && gap >= 0.0).then_some(gap)
}

fn boundary_continuity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = vec![];
    let mut worst = 0.0f64;
    for family in FAMILIES {
        for (a, b) in BOUNDARIES {
            let (Some(ra), Some(rb)) = (Region::from_linear(family, a), Region::from_linear(family, b)) else {
                continue;
            };
            let mut found = 0;
            for _ in 0..200_000 {
                let m = random_model(&mut rng, family);
                let Some(gap) = boundary_gap(&m, a, b) else { continue };
                let cb = rng.random_range(0.0..2.0);
                let p = MarketParams::new(cb, cb, m).unwrap().with_cost_gap(gap).unwrap();
                let got = classify_region(&p).unwrap();
                ensure(
                    got == ra || got == rb,
                    format!("{ra}/{rb} boundary classified as {got}"),
                )?;
                let diff = region_prices(&p, ra).max_abs_diff(&region_prices(&p, rb));
                ensure(diff <= 1e-12, format!("{ra}/{rb}: prices differ by {diff:e} at {p:?}"))?;
                worst = worst.max(diff);
                found += 1;
                if found == 50 {
                    break;
                }
            }
            // Boundaries a family cannot reach (AL V/VI needs negative offsets).
            if found == 0 {
                continue;
            }
            ensure(found == 50, format!("{ra}/{rb}: only {found} boundary points sampled"))?;
            checked.push(format!("{ra}/{}", rb.label));
        }
    }
    Ok(format!(
        "{} x 50 points, largest price jump {worst:.1e}",
        checked.join(" ")
    ))
}

fn myopic_dynamics() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let draws: Vec<(f64, f64, f64)> = (0..1000)
        .map(|_| {
            (
                rng.random_range(0.0..=1.0),
                rng.random_range(0.0..=1.0),
                rng.random_range(0.0..=1.0),
            )
        })
        .collect();
    let horizon = 10_000;
    let worst = batch::map(&draws, Execution::Auto, |&(fa, fb, theta)| {
        let r = SwitchRates::new(fa, fb).unwrap();
        let c = myopic::closed_form_trajectory(r, theta, horizon).unwrap();
        let s = myopic::recursive_trajectory(r, theta, horizon).unwrap();
        (0..=horizon)
            .map(|t| (c.share_at(t) - s.share_at(t)).abs())
            .fold(0.0, f64::max)
    })
    .into_iter()
    .fold(0.0, f64::max);
    ensure(worst <= 1e-12, format!("closed form and recursion differ by {worst:e}"))?;

    for _ in 0..200 {
        let family = FAMILIES[rng.random_range(0..3)];
        let (l, s) = (rng.random_range(0.2..5.0), rng.random_range(0.0..5.0));
        let m = model(family, l, s, l, s);
        let c = rng.random_range(0.0..2.0);
        let p = MarketParams::new(c, c, m)
            .unwrap()
            .with_initial_share(rng.random_range(0.0..=1.0))
            .unwrap();
        let limit = myopic::limit_share(&p).unwrap();
        let traj = myopic::equilibrium_trajectory(&p, horizon).unwrap();
        let frozen = classify_region(&p).unwrap().linear_label() == RegionLabel::I;
        if !frozen {
            ensure(
                limit == 0.5 && traj.limit == Some(0.5),
                format!("symmetric limit {limit} at {p:?}"),
            )?;
        }
    }

    let ml_iv = Region {
        family: LoyaltyFamily::Multiplicative,
        label: RegionLabel::IV,
    };
    for (la, lb) in [(1.0, 1.0), (0.7, 3.0), (2.5, 0.4)] {
        let p = MarketParams::new(0.3, 0.3, LoyaltyModel::multiplicative(la, lb).unwrap()).unwrap();
        let share = myopic::region_limit_share(&p, ml_iv);
        ensure(share == Some(0.25), format!("ML region IV limit {share:?}"))?;
        ensure(
            classify_region(&p).unwrap() != ml_iv,
            "equal costs classified into ML IV",
        )?;
    }
    Ok(format!(
        "1000 draws over horizon 1e4 agree to {worst:.1e}; symmetric limit exactly 1/2; ML IV formula at equal costs exactly 1/4"
    ))
}

fn symmetric_markov() -> Verdict {
    let mut worst_oracle = 0.0f64;
    for (c, l) in [(0.0, 1.0), (0.5, 2.0), (1.0, 0.6)] {
        let m = LoyaltyModel::multiplicative(l, l).unwrap();
        for k in 1..=9 {
            let delta = k as f64 / 10.0;
            let p = MarketParams::new(c, c, m).unwrap().with_discount(delta).unwrap();
            let s = solve_markov(&p).map_err(|e| format!("delta {delta}: {e}"))?;
            let tol = 1e-12;
            ensure(
                (s.xi_alpha - 1.0 / 3.0).abs() <= tol && (s.xi_beta - 1.0 / 3.0).abs() <= tol,
                format!("delta {delta}: thresholds {} {}", s.xi_alpha, s.xi_beta),
            )?;
            let gaps = s.values.gaps();
            for g in [s.gaps.a, s.gaps.b, gaps.a, gaps.b] {
                ensure((g - l / 3.0).abs() <= 1e-10, format!("delta {delta}: value gap {g}"))?;
            }
            let strong = c + (2.0 - delta) * l / 3.0;
            ensure(
                (s.prices.a_alpha - strong).abs() <= 1e-12 && (s.prices.b_beta - strong).abs() <= 1e-12,
                format!("delta {delta}: strong prices {:?}", s.prices),
            )?;
            if c == 0.0 {
                let grid = PriceGrid::new(0.0, 1.5 * l, 1e-3).unwrap();
                let g = value_iteration_oracle(&p, &grid, 1000).map_err(|e| format!("oracle at delta {delta}: {e}"))?;
                let diff = g.prices.max_abs_diff(&s.prices);
                ensure(
                    diff <= 2e-3,
                    format!("delta {delta}: oracle prices {:?} off by {diff}", g.prices),
                )?;
                worst_oracle = worst_oracle.max(diff);
            }
        }
    }
    Ok(format!(
        "thresholds 1/3, value gap l/3, strong price c + (2 - delta) l / 3 for delta 0.1..0.9; grid oracle within {worst_oracle:.1e}"
    ))
}

/// A market with an interior one-shot equilibrium (linear region V) and
/// margins large enough for the unconstrained Markov solution to exist.
fn interior_market(rng: &mut impl Rng, family: LoyaltyFamily, delta: f64) -> MarketParams {
    loop {
        let m = random_model(rng, family);
        let (l, u) = region_range(&m, RegionLabel::V);
        let margin = 0.1 * (u - l);
        if u - l < 0.2 {
            continue;
        }
        let gap = rng.random_range(l + margin..u - margin);
        let cb = rng.random_range(0.0..2.0);
        let p = MarketParams::new(cb, cb, m)
            .unwrap()
            .with_cost_gap(gap)
            .unwrap()
            .with_discount(delta)
            .unwrap();
        if solve_markov(&p).is_ok() {
            return p;
        }
    }
}

fn vanishing_discount() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for k in 0..50 {
        let p = interior_market(&mut rng, FAMILIES[k % 3], 1e-6);
        let s = solve_markov(&p).unwrap();
        let f = interior_foc_solution(&p).map_err(|e| format!("{e} at {p:?}"))?;
        let diff = s.prices.max_abs_diff(&f);
        ensure(diff <= 1e-4, format!("prices differ by {diff:e} at {p:?}"))?;
        worst = worst.max(diff);
    }
    Ok(format!(
        "50 interior markets at delta 1e-6, largest price difference {worst:.1e}"
    ))
}

fn uniqueness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for k in 0..20 {
        let delta = rng.random_range(0.05..0.95);
        let p = interior_market(&mut rng, FAMILIES[k % 3], delta);
        let reference = solve_markov(&p).unwrap();
        for _ in 0..64 {
            let start = (rng.random_range(0.001..0.999), rng.random_range(0.001..0.999));
            let s = solve_markov_from(&p, start, &markov::SolverSettings::default())
                .map_err(|e| format!("restart {start:?} at {p:?}: {e}"))?;
            let d = (s.xi_alpha - reference.xi_alpha)
                .abs()
                .max((s.xi_beta - reference.xi_beta).abs());
            ensure(d <= 1e-8, format!("restart {start:?} lands {d:e} away at {p:?}"))?;
            worst = worst.max(d);
        }
    }
    Ok(format!(
        "20 markets x 64 restarts, largest threshold spread {worst:.1e}"
    ))
}

/// Every step against the expected direction stays within `tol`, and the
/// series ends lower than it starts (after flipping for increasing series).
fn trends_down(ys: &[f64], tol: f64) -> bool {
    ys.windows(2).all(|w| w[1] <= w[0] + tol) && ys.last() < ys.first()
}

fn mean_slope(xs: &[f64], ys: &[f64]) -> f64 {
    (ys[ys.len() - 1] - ys[0]) / (xs[xs.len() - 1] - xs[0])
}

fn qre_certificate() -> Verdict {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/ll_qre.toml");
    let s = Scenario::load(&path).map_err(|e| e.to_string())?;
    let xs = s.points();
    ensure(
        xs.first() == Some(&0.0) && xs.last() == Some(&4.0),
        "sweep does not span gaps 0..4",
    )?;
    let solved = batch::map(&xs, Execution::Auto, |&x| -> Result<_, String> {
        let (game, profile) = solve_qre_point(&s, x).map_err(|e| format!("gap {x}: {e}"))?;
        ensure(game.grid(0).len() == 101, "price grid is not 101 points")?;
        let gap = markov_gap(&game, &profile.probs).map_err(|e| e.to_string())?;
        let st = profile.stationary_outcome(&game).map_err(|e| e.to_string())?;
        let step = |slot: usize| game.grid(slot)[1] - game.grid(slot)[0];
        Ok((step(1).max(step(2)), profile.modal_prices(&game), gap, st))
    });
    let solved: Vec<_> = solved.into_iter().collect::<Result<_, _>>()?;

    let (worst_x, worst) = xs
        .iter()
        .zip(&solved)
        .fold((0.0, 0.0f64), |a, (x, r)| if r.2 > a.1 { (*x, r.2) } else { a });
    ensure(worst <= 1e-3, format!("deviation gain {worst:e} at gap {worst_x}"))?;

    // Modal prices move on grids whose step grows with A's cost, so the
    // difference may jitter by up to a grid step.
    let step = solved.iter().map(|r| r.0).fold(0.0, f64::max);
    let spread: Vec<f64> = solved.iter().map(|r| r.1.b_beta - r.1.a_beta).collect();
    ensure(
        spread.iter().all(|d| *d > 0.0),
        format!("p_B^beta - p_A^beta not positive: {spread:?}"),
    )?;
    ensure(
        trends_down(&spread, 1.5 * step),
        format!("p_B^beta - p_A^beta not decreasing: {spread:?}"),
    )?;
    let half = xs.len() / 2;
    let early = mean_slope(&xs[..=half], &spread[..=half]);
    let late = mean_slope(&xs[half..], &spread[half..]);
    ensure(
        early < 0.0 && late.abs() < 0.25 * early.abs(),
        format!("slopes {early} then {late}: not flattening"),
    )?;
    let tail = &spread[half..];
    let tail_range =
        tail.iter().fold(f64::NEG_INFINITY, |a, b| a.max(*b)) - tail.iter().fold(f64::INFINITY, |a, b| a.min(*b));
    ensure(
        tail_range <= 2.0 * step,
        format!("second half still moves by {tail_range}"),
    )?;

    let share: Vec<f64> = solved.iter().map(|r| r.3.share_a).collect();
    let profit_a: Vec<f64> = solved.iter().map(|r| r.3.profit_a).collect();
    let neg_profit_b: Vec<f64> = solved.iter().map(|r| -r.3.profit_b).collect();
    ensure(trends_down(&share, 0.01), format!("A's share does not fall: {share:?}"))?;
    ensure(
        trends_down(&profit_a, 0.01),
        format!("A's profit does not fall: {profit_a:?}"),
    )?;
    ensure(trends_down(&neg_profit_b, 0.01), "B's profit does not rise")?;
    Ok(format!(
        "{} gaps, largest deviation gain {worst:.1e} (gap {worst_x}); p_B^beta - p_A^beta from {:.3} to {:.3}, slope {early:.3} then {late:.3}",
        xs.len(),
        spread[0],
        spread[spread.len() - 1]
    ))
}

fn bits(xs: &[f64]) -> Vec<u64> {
    xs.iter().map(|x| x.to_bits()).collect()
}

/// Every number the single-stage and myopic operations report for a market.
fn fingerprint(p: &MarketParams, probe: PriceProfile) -> (Vec<u64>, RegionLabel, String) {
    let mut v = vec![];
    let out = closed_form_equilibrium(p).unwrap();
    let outcome = |o: &single_stage::Outcome| {
        let d = o.demands;
        let mut r = o.prices.to_array().to_vec();
        r.extend([o.xi_alpha, o.xi_beta, o.prob_stay_alpha, o.prob_stay_beta]);
        r.extend([d.a_strong, d.a_weak, d.b_strong, d.b_weak, o.profit_a, o.profit_b]);
        r
    };
    v.extend(outcome(&out));
    v.extend(outcome(&single_stage::evaluate(p, probe)));
    let region = out.region.unwrap();
    let (xa, xb) = single_stage::region_thresholds(p, region);
    v.extend([xa, xb]);
    let foc = match single_stage::foc_residual(p, probe) {
        Ok(r) => format!("{:?}", bits(&r)),
        Err(e) => e.to_string(),
    };
    let interior = match interior_foc_solution(p) {
        Ok(r) => format!("{:?}", bits(&r.to_array())),
        Err(e) => e.to_string(),
    };
    let top = out.prices.to_array().into_iter().fold(0.0, f64::max) + 1.0;
    v.push(best_response_gap(p, out.prices, &PriceGrid::new(0.0, top, 1e-2).unwrap()).unwrap());
    let rates = SwitchRates::from_equilibrium(p).unwrap();
    v.extend([rates.alpha, rates.beta, myopic::limit_share(p).unwrap()]);
    v.extend(myopic::equilibrium_trajectory(p, 50).unwrap().shares);
    v.extend(
        myopic::profit_path(p, 50)
            .unwrap()
            .into_iter()
            .flat_map(|(a, b)| [a, b]),
    );
    let r = myopic::region_limit_share(p, region);
    v.push(r.unwrap_or(f64::NAN));
    (bits(&v), region.linear_label(), foc + &interior)
}

fn special_case_collapse() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..500 {
        let (la, lb) = (rng.random_range(0.2..5.0), rng.random_range(0.2..5.0));
        let (sa, sb) = (rng.random_range(0.0..5.0), rng.random_range(0.0..5.0));
        let cb = rng.random_range(0.0..2.0);
        let gap = rng.random_range(0.0..8.0);
        let theta = rng.random_range(0.0..=1.0);
        let probe = PriceProfile::new(
            cb + gap + rng.random_range(0.0..4.0),
            cb + gap + rng.random_range(0.0..4.0),
            cb + rng.random_range(0.0..4.0),
            cb + rng.random_range(0.0..4.0),
        );
        let market = |m: LoyaltyModel| {
            MarketParams::new(cb, cb, m)
                .unwrap()
                .with_cost_gap(gap)
                .unwrap()
                .with_initial_share(theta)
                .unwrap()
        };
        let pairs = [
            (
                "ML",
                LoyaltyModel::multiplicative(la, lb).unwrap(),
                LoyaltyModel::linear(la, 0.0, lb, 0.0).unwrap(),
            ),
            (
                "AL",
                LoyaltyModel::additive(sa, sb).unwrap(),
                LoyaltyModel::linear(1.0, sa, 1.0, sb).unwrap(),
            ),
        ];
        for (name, special, general) in pairs {
            let a = fingerprint(&market(special), probe);
            let b = fingerprint(&market(general), probe);
            ensure(
                a == b,
                format!("{name} differs from its linear form at l = ({la}, {lb}), s = ({sa}, {sb}), gap {gap}"),
            )?;
        }
    }
    Ok("500 markets: ML = LL with s = 0 and AL = LL with l = 1, bit for bit".into())
}
