//! Logit quantal-response equilibrium of the dynamic game on finite price
//! grids, traced along an increasing precision schedule.
//!
//! Every firm-state pair ("slot") carries a distribution over its own price
//! grid. Slots are ordered like [`PriceProfile`]: A in alpha, A in beta,
//! B in beta, B in alpha. In the alpha state A is the loyal firm and B the
//! poacher; in the beta state the roles swap.

use crate::error::{Error, Result};
use crate::loyalty::{MarketParams, Side};
use crate::single_stage::PriceProfile;
use nalgebra::{DMatrix, DVector};

/// Slot indices.
const A_ALPHA: usize = 0;
const A_BETA: usize = 1;
const B_BETA: usize = 2;
const B_ALPHA: usize = 3;

/// Loyal and poaching slot of each state.
const STATES: [(Side, usize, usize); 2] = [(Side::Alpha, A_ALPHA, B_ALPHA), (Side::Beta, B_BETA, A_BETA)];

/// The same firm's slot in the other state.
fn partner(slot: usize) -> usize {
    match slot {
        A_ALPHA => A_BETA,
        A_BETA => A_ALPHA,
        B_BETA => B_ALPHA,
        _ => B_BETA,
    }
}

fn is_firm_a(slot: usize) -> bool {
    slot == A_ALPHA || slot == A_BETA
}

/// Evenly spaced grid per slot from the firm's cost up to
/// `cost + s + 2 l + headroom` with the state's loyalty parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub points: usize,
    pub headroom: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            points: 101,
            headroom: 1.0,
        }
    }
}

/// Price grids and pairwise stay probabilities of one market.
#[derive(Debug, Clone)]
pub struct QreGame {
    params: MarketParams,
    grids: [Vec<f64>; 4],
    /// Per state, row-major `loyal x poacher` probability that the customer
    /// stays with the loyal firm.
    stay: [Vec<f64>; 2],
}

impl QreGame {
    pub fn new(params: &MarketParams, spec: GridSpec) -> Result<Self> {
        if spec.points < 1 {
            return Err(Error::EmptyGrid);
        }
        if !(spec.headroom.is_finite() && spec.headroom >= 0.0) {
            return Err(Error::invalid("headroom", "must be finite and non-negative"));
        }
        let lo = params.loyalty();
        let make = |slot: usize, side: Side| {
            let cost = if is_firm_a(slot) {
                params.cost_a()
            } else {
                params.cost_b()
            };
            let top = cost + lo.offset(side) + 2.0 * lo.slope(side) + spec.headroom;
            let n = spec.points;
            (0..n)
                .map(|i| {
                    if n == 1 {
                        cost
                    } else {
                        cost + (top - cost) * i as f64 / (n - 1) as f64
                    }
                })
                .collect::<Vec<_>>()
        };
        Self::with_grids(
            params,
            [
                make(A_ALPHA, Side::Alpha),
                make(A_BETA, Side::Beta),
                make(B_BETA, Side::Beta),
                make(B_ALPHA, Side::Alpha),
            ],
        )
    }

    /// Game on explicit grids, `[A alpha, A beta, B beta, B alpha]`. No grid
    /// may be empty or price below the firm's cost.
    pub fn with_grids(params: &MarketParams, grids: [Vec<f64>; 4]) -> Result<Self> {
        for (slot, g) in grids.iter().enumerate() {
            if g.is_empty() {
                return Err(Error::EmptyGrid);
            }
            let cost = if is_firm_a(slot) {
                params.cost_a()
            } else {
                params.cost_b()
            };
            if g.iter().any(|p| !p.is_finite() || *p < cost) {
                return Err(Error::invalid(
                    "price grid",
                    format!("slot {slot} has a price below cost {cost}"),
                ));
            }
        }
        let stay = STATES.map(|(side, loyal, poacher)| {
            let mut m = Vec::with_capacity(grids[loyal].len() * grids[poacher].len());
            for &own in &grids[loyal] {
                for &rival in &grids[poacher] {
                    m.push(params.prob_stay(side, own, rival));
                }
            }
            m
        });
        Ok(Self {
            params: *params,
            grids,
            stay,
        })
    }

    pub fn params(&self) -> &MarketParams {
        &self.params
    }

    pub fn grid(&self, slot: usize) -> &[f64] {
        &self.grids[slot]
    }

    /// Probability that a customer stays with the loyal firm when it charges
    /// its `i`-th price and the poacher its `j`-th price.
    pub fn stay_prob(&self, side: Side, i: usize, j: usize) -> f64 {
        let (s, _, poacher) = state_index(side);
        self.stay[s][i * self.grids[poacher].len() + j]
    }

    fn cost(&self, slot: usize) -> f64 {
        if is_firm_a(slot) {
            self.params.cost_a()
        } else {
            self.params.cost_b()
        }
    }

    fn discount(&self, slot: usize) -> f64 {
        if is_firm_a(slot) {
            self.params.discount_a()
        } else {
            self.params.discount_b()
        }
    }
}

fn state_index(side: Side) -> (usize, usize, usize) {
    match side {
        Side::Alpha => (0, A_ALPHA, B_ALPHA),
        Side::Beta => (1, B_BETA, A_BETA),
    }
}

/// Mixed strategies of all four slots plus the values they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct QreProfile {
    pub precision: f64,
    pub probs: [Vec<f64>; 4],
    /// Each slot's firm value of a customer in that slot's state.
    pub values: [f64; 4],
}

impl QreProfile {
    pub fn uniform(game: &QreGame) -> Result<Self> {
        let probs = game.grids.clone().map(|g| vec![1.0 / g.len() as f64; g.len()]);
        let values = evaluate(game, &probs)?.values;
        Ok(Self {
            precision: 0.0,
            probs,
            values,
        })
    }

    /// Expected price of every slot.
    pub fn expected_prices(&self, game: &QreGame) -> PriceProfile {
        let e = |s: usize| {
            game.grids[s]
                .iter()
                .zip(&self.probs[s])
                .map(|(p, w)| p * w)
                .sum::<f64>()
        };
        PriceProfile::new(e(A_ALPHA), e(A_BETA), e(B_BETA), e(B_ALPHA))
    }

    /// Most likely price of every slot.
    pub fn modal_prices(&self, game: &QreGame) -> PriceProfile {
        let m = |s: usize| {
            let (i, _) = self.probs[s]
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |b, (i, &w)| if w > b.1 { (i, w) } else { b });
            game.grids[s][i]
        };
        PriceProfile::new(m(A_ALPHA), m(A_BETA), m(B_BETA), m(B_ALPHA))
    }

    /// Expected probability that a customer stays in each state.
    pub fn stay_probs(&self, game: &QreGame) -> [f64; 2] {
        let e = evaluate_unchecked(game, &self.probs);
        e.stay
    }
}

/// Long-run summary of a mixed profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryOutcome {
    /// Expected probability that a customer stays, `[alpha, beta]`.
    pub stay: [f64; 2],
    /// Long-run share of A; the initial share when nobody ever switches.
    pub share_a: f64,
    /// Expected per-period profits at that share.
    pub profit_a: f64,
    pub profit_b: f64,
}

impl QreProfile {
    pub fn stationary_outcome(&self, game: &QreGame) -> Result<StationaryOutcome> {
        let ev = evaluate(game, &self.probs)?;
        let (leave_a, leave_b) = (1.0 - ev.stay[0], 1.0 - ev.stay[1]);
        let share_a = if leave_a + leave_b > 0.0 {
            leave_b / (leave_a + leave_b)
        } else {
            game.params.initial_share_a()
        };
        let r = ev.reward;
        Ok(StationaryOutcome {
            stay: ev.stay,
            share_a,
            profit_a: share_a * r[A_ALPHA] + (1.0 - share_a) * r[A_BETA],
            profit_b: (1.0 - share_a) * r[B_BETA] + share_a * r[B_ALPHA],
        })
    }
}

struct Evaluation {
    values: [f64; 4],
    /// Expected one-period profit per customer of each slot's state.
    reward: [f64; 4],
    /// Expected stay probability per state.
    stay: [f64; 2],
    /// Per state: loyal slot's stay probability by own action, and
    /// poacher slot's stay probability by own action.
    loyal_stay: [Vec<f64>; 2],
    poacher_stay: [Vec<f64>; 2],
}

fn evaluate_unchecked(game: &QreGame, probs: &[Vec<f64>; 4]) -> Evaluation {
    evaluate(game, probs).expect("discount below one keeps the value system regular")
}

/// Exact policy evaluation of a mixed profile.
fn evaluate(game: &QreGame, probs: &[Vec<f64>; 4]) -> Result<Evaluation> {
    let mut loyal_stay: [Vec<f64>; 2] = Default::default();
    let mut poacher_stay: [Vec<f64>; 2] = Default::default();
    let mut stay = [0.0; 2];
    let mut reward = [0.0; 4];
    for (s, &(_, loyal, poacher)) in STATES.iter().enumerate() {
        let (nl, np) = (game.grids[loyal].len(), game.grids[poacher].len());
        let m = &game.stay[s];
        let (wl, wp) = (&probs[loyal], &probs[poacher]);
        let ls: Vec<f64> = (0..nl)
            .map(|i| m[i * np..(i + 1) * np].iter().zip(wp).map(|(a, b)| a * b).sum())
            .collect();
        let mut ps = vec![0.0; np];
        for i in 0..nl {
            let w = wl[i];
            if w == 0.0 {
                continue;
            }
            for (acc, x) in ps.iter_mut().zip(&m[i * np..(i + 1) * np]) {
                *acc += w * x;
            }
        }
        stay[s] = wl.iter().zip(&ls).map(|(a, b)| a * b).sum();
        let (cl, cp) = (game.cost(loyal), game.cost(poacher));
        reward[loyal] = game.grids[loyal]
            .iter()
            .zip(wl)
            .zip(&ls)
            .map(|((p, w), q)| w * (p - cl) * q)
            .sum();
        reward[poacher] = game.grids[poacher]
            .iter()
            .zip(wp)
            .zip(&ps)
            .map(|((p, w), q)| w * (p - cp) * (1.0 - q))
            .sum();
        loyal_stay[s] = ls;
        poacher_stay[s] = ps;
    }

    // Firm values: own-state slot and rival-state slot.
    let mut values = [0.0; 4];
    for (own, own_state, other_state) in [(A_ALPHA, 0, 1), (B_BETA, 1, 0)] {
        let other = partner(own);
        let d = game.discount(own);
        let (so, sr) = (stay[own_state], stay[other_state]);
        let m = [[1.0 - d * so, -d * (1.0 - so)], [-d * (1.0 - sr), 1.0 - d * sr]];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det.is_nan() || det.abs() <= 1e-300 {
            return Err(Error::SingularSystem);
        }
        let (r0, r1) = (reward[own], reward[other]);
        values[own] = (r0 * m[1][1] - m[0][1] * r1) / det;
        values[other] = (m[0][0] * r1 - m[1][0] * r0) / det;
    }
    Ok(Evaluation {
        values,
        reward,
        stay,
        loyal_stay,
        poacher_stay,
    })
}

/// Action values of every slot against the profile, using the profile's
/// own continuation values.
fn action_values(game: &QreGame, ev: &Evaluation) -> [Vec<f64>; 4] {
    let mut q: [Vec<f64>; 4] = Default::default();
    for (s, &(_, loyal, poacher)) in STATES.iter().enumerate() {
        let dl = game.discount(loyal);
        let (keep, lose) = (ev.values[loyal], ev.values[partner(loyal)]);
        let cl = game.cost(loyal);
        q[loyal] = game.grids[loyal]
            .iter()
            .zip(&ev.loyal_stay[s])
            .map(|(p, m)| m * (p - cl + dl * keep) + (1.0 - m) * dl * lose)
            .collect();
        let dp = game.discount(poacher);
        let (win, miss) = (ev.values[partner(poacher)], ev.values[poacher]);
        let cp = game.cost(poacher);
        q[poacher] = game.grids[poacher]
            .iter()
            .zip(&ev.poacher_stay[s])
            .map(|(p, m)| (1.0 - m) * (p - cp + dp * win) + m * dp * miss)
            .collect();
    }
    q
}

fn softmax(q: &[f64], precision: f64) -> Vec<f64> {
    let top = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = q.iter().map(|v| (precision * (v - top)).exp()).collect();
    let z: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= z);
    w
}

/// Logit response of every slot to `probs` at the given precision.
pub fn logit_response(game: &QreGame, probs: &[Vec<f64>; 4], precision: f64) -> Result<[Vec<f64>; 4]> {
    let ev = evaluate(game, probs)?;
    Ok(action_values(game, &ev).map(|q| softmax(&q, precision)))
}

/// Largest gain any firm-state could get from switching to its best pure
/// price, with continuation values of the profile held fixed. Zero exactly
/// at a Markov equilibrium of the grid game.
pub fn markov_gap(game: &QreGame, probs: &[Vec<f64>; 4]) -> Result<f64> {
    let ev = evaluate(game, probs)?;
    let q = action_values(game, &ev);
    Ok((0..4)
        .map(|s| {
            let best = q[s].iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (best - ev.values[s]).max(0.0)
        })
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QreSettings {
    /// Initial weight on the logit response in each update.
    pub damping: f64,
    /// The weight is halved whenever the residual stops improving for
    /// `patience` iterations. Once it would fall below this floor, or after
    /// `max_iterations` damped updates, the solve switches to Newton's method.
    pub min_damping: f64,
    pub patience: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub max_newton_steps: usize,
}

impl Default for QreSettings {
    fn default() -> Self {
        Self {
            damping: 0.5,
            min_damping: 0.02,
            patience: 25,
            tolerance: 1e-10,
            max_iterations: 200,
            max_newton_steps: 30,
        }
    }
}

/// Geometric precision schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub start: f64,
    pub end: f64,
    pub steps: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            start: 1e-2,
            end: 1e3,
            steps: 60,
        }
    }
}

impl Schedule {
    pub fn precisions(&self) -> Result<Vec<f64>> {
        if !(self.start > 0.0 && self.end >= self.start && self.end.is_finite() && self.steps >= 1) {
            return Err(Error::invalid(
                "schedule",
                "need 0 < start <= end and at least one step",
            ));
        }
        if self.steps == 1 {
            return Ok(vec![self.end]);
        }
        let ratio = (self.end / self.start).ln();
        Ok((0..self.steps)
            .map(|k| {
                if k + 1 == self.steps {
                    self.end
                } else {
                    self.start * (ratio * k as f64 / (self.steps - 1) as f64).exp()
                }
            })
            .collect())
    }
}

/// Fixed point of the logit map at one precision, started from `start`.
///
/// Damped iteration first; if it keeps stalling the remaining error is
/// removed by Newton's method on log-probabilities.
pub fn solve_at(game: &QreGame, precision: f64, start: &QreProfile, settings: &QreSettings) -> Result<QreProfile> {
    if !(precision >= 0.0 && precision.is_finite()) {
        return Err(Error::invalid("precision", "must be finite and non-negative"));
    }
    let mut w = settings.damping;
    let mut probs = start.probs.clone();
    let (mut best, mut stale) = (f64::INFINITY, 0);
    for _ in 0..settings.max_iterations {
        let next = logit_response(game, &probs, precision)?;
        let mut change = 0.0f64;
        for (cur, new) in probs.iter_mut().zip(&next) {
            for (c, n) in cur.iter_mut().zip(new) {
                change = change.max((n - *c).abs());
                *c += w * (n - *c);
            }
        }
        if change <= settings.tolerance {
            let values = evaluate(game, &probs)?.values;
            return Ok(QreProfile {
                precision,
                probs,
                values,
            });
        }
        if change < best {
            best = change;
            stale = 0;
        } else {
            stale += 1;
            if stale >= settings.patience {
                if 0.5 * w < settings.min_damping {
                    break;
                }
                w *= 0.5;
                best = change;
                stale = 0;
            }
        }
    }
    newton_at(game, precision, probs, settings)
}

fn log_softmax(q: &[f64], precision: f64) -> Vec<f64> {
    let top = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let z: Vec<f64> = q.iter().map(|v| precision * (v - top)).collect();
    let lse = z.iter().map(|x| x.exp()).sum::<f64>().ln();
    z.into_iter().map(|x| x - lse).collect()
}

/// The logit fixed point written as `y - log L(p(y)) = 0` over unnormalized
/// log-probabilities `y`, slot blocks laid end to end. Adding a constant to a
/// block leaves `p(y)` unchanged and moves the residual along the same
/// constant, so the Jacobian stays regular.
struct LogSystem<'a> {
    game: &'a QreGame,
    sizes: [usize; 4],
    dim: usize,
}

/// Probabilities this small cannot move anything at double precision; their
/// Jacobian columns are taken as the identity.
const NEGLIGIBLE: f64 = 1e-30;
const FD_STEP: f64 = 1e-7;

impl<'a> LogSystem<'a> {
    fn new(game: &'a QreGame) -> Self {
        let sizes = game.grids.each_ref().map(Vec::len);
        Self {
            game,
            sizes,
            dim: sizes.iter().sum(),
        }
    }

    fn logs(&self, probs: &[Vec<f64>; 4]) -> Vec<f64> {
        probs.iter().flatten().map(|p| p.max(f64::MIN_POSITIVE).ln()).collect()
    }

    fn probs(&self, y: &[f64]) -> [Vec<f64>; 4] {
        let mut at = 0;
        self.sizes.map(|n| {
            let block = &y[at..at + n];
            at += n;
            let top = block.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let w: Vec<f64> = block.iter().map(|x| (x - top).exp()).collect();
            let z: f64 = w.iter().sum();
            w.into_iter().map(|x| x / z).collect()
        })
    }

    /// Log-space residual and the probability-space residual `max |L(p) - p|`.
    fn residual(&self, y: &[f64], precision: f64) -> Result<(Vec<f64>, f64)> {
        let probs = self.probs(y);
        let ev = evaluate(self.game, &probs)?;
        let q = action_values(self.game, &ev);
        let mut r = Vec::with_capacity(self.dim);
        let mut gap = 0.0f64;
        for (s, qs) in q.iter().enumerate() {
            let logs = log_softmax(qs, precision);
            for (l, p) in logs.iter().zip(&probs[s]) {
                gap = gap.max((l.exp() - p).abs());
            }
            r.extend(logs);
        }
        for (ri, yi) in r.iter_mut().zip(y) {
            *ri = yi - *ri;
        }
        Ok((r, gap))
    }

    /// Forward-difference Jacobian in `y`, plus a last column in
    /// `ln(precision)` when `with_precision` is set.
    fn jacobian(&self, y: &[f64], precision: f64, r: &[f64], with_precision: bool) -> Result<DMatrix<f64>> {
        let cols = self.dim + usize::from(with_precision);
        let mut jac = DMatrix::<f64>::zeros(self.dim, cols);
        let p: Vec<f64> = self.probs(y).into_iter().flatten().collect();
        let mut yk = y.to_vec();
        for k in 0..self.dim {
            if p[k] < NEGLIGIBLE {
                jac[(k, k)] = 1.0;
                continue;
            }
            yk[k] += FD_STEP;
            let (rk, _) = self.residual(&yk, precision)?;
            yk[k] = y[k];
            for (i, (a, b)) in rk.iter().zip(r).enumerate() {
                jac[(i, k)] = (a - b) / FD_STEP;
            }
        }
        if with_precision {
            let (rl, _) = self.residual(y, precision * FD_STEP.exp())?;
            for (i, (a, b)) in rl.iter().zip(r).enumerate() {
                jac[(i, self.dim)] = (a - b) / FD_STEP;
            }
        }
        Ok(jac)
    }

    fn profile(&self, y: &[f64], precision: f64) -> Result<QreProfile> {
        let probs = self.probs(y);
        let values = evaluate(self.game, &probs)?.values;
        Ok(QreProfile {
            precision,
            probs,
            values,
        })
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn newton_at(game: &QreGame, precision: f64, probs: [Vec<f64>; 4], settings: &QreSettings) -> Result<QreProfile> {
    let sys = LogSystem::new(game);
    let mut y = sys.logs(&probs);
    let (mut r, mut gap) = sys.residual(&y, precision)?;
    let stalled = |gap| Error::NoConvergence {
        iterations: settings.max_iterations + settings.max_newton_steps,
        residual: gap,
    };
    for _ in 0..settings.max_newton_steps {
        if gap <= settings.tolerance {
            return sys.profile(&y, precision);
        }
        let jac = sys.jacobian(&y, precision, &r, false)?;
        let rhs = DVector::from_iterator(sys.dim, r.iter().map(|x| -x));
        let dir = jac.lu().solve(&rhs).ok_or(Error::SingularSystem)?;
        // Backtrack until the log residual shrinks.
        let base = norm(&r);
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = y.iter().zip(dir.iter()).map(|(a, d)| a + t * d).collect();
            let (rt, gt) = sys.residual(&trial, precision)?;
            if norm(&rt) < (1.0 - 1e-4 * t) * base {
                (y, r, gap) = (trial, rt, gt);
                break;
            }
            t *= 0.5;
            if t < 1e-6 {
                return Err(stalled(gap));
            }
        }
    }
    if gap <= settings.tolerance {
        return sys.profile(&y, precision);
    }
    Err(stalled(gap))
}

/// Pseudo-arclength continuation of the logit branch from `from` up to
/// precision `target`, in the variables `(y, ln precision)`. Unlike fixed
/// precision steps this passes turning points where the branch folds back.
/// Arclength is measured in probability units (`p dy`) plus `ln precision`.
fn follow_branch(game: &QreGame, from: &QreProfile, target: f64, settings: &QreSettings) -> Result<QreProfile> {
    const MAX_STEPS: usize = 2_000;
    const MAX_CORRECTIONS: usize = 8;
    const MIN_STEP: f64 = 1e-9;
    const MAX_STEP: f64 = 0.5;

    let sys = LogSystem::new(game);
    let n = sys.dim;
    let goal = target.ln();
    let mut y = sys.logs(&from.probs);
    let mut mu = from.precision.ln();
    let mut h = 0.05;
    // Previous tangent; initially pointing toward higher precision.
    let mut prev: Option<DVector<f64>> = None;
    let stalled = |mu: f64| Error::NoConvergence {
        iterations: MAX_STEPS,
        residual: mu.exp(),
    };

    for _ in 0..MAX_STEPS {
        let weights: Vec<f64> = sys
            .probs(&y)
            .into_iter()
            .flatten()
            .map(|p| p * p)
            .chain([1.0])
            .collect();
        let dot = |a: &DVector<f64>, b: &DVector<f64>| {
            a.iter()
                .zip(b.iter())
                .zip(&weights)
                .map(|((x, z), w)| x * z * w)
                .sum::<f64>()
        };

        // Tangent: kernel of the Jacobian, oriented along the previous one.
        let (r, _) = sys.residual(&y, mu.exp())?;
        let jac = sys.jacobian(&y, mu.exp(), &r, true)?;
        let mut aug = jac.clone().insert_row(n, 0.0);
        match &prev {
            Some(t) => {
                for k in 0..=n {
                    aug[(n, k)] = t[k] * weights[k];
                }
            }
            None => aug[(n, n)] = 1.0,
        }
        let mut rhs = DVector::zeros(n + 1);
        rhs[n] = 1.0;
        let mut tan = aug.lu().solve(&rhs).ok_or(Error::SingularSystem)?;
        let len = dot(&tan, &tan).sqrt();
        tan /= len;
        if let Some(t) = &prev {
            if dot(&tan, t) < 0.0 {
                tan = -tan;
            }
        }

        // Predictor-corrector with step control.
        let accepted = loop {
            if h < MIN_STEP {
                return Err(stalled(mu));
            }
            let mut v: Vec<f64> = y.iter().chain([&mu]).zip(tan.iter()).map(|(a, t)| a + h * t).collect();
            let anchor = v.clone();
            let mut ok = None;
            for it in 0..MAX_CORRECTIONS {
                let (rv, gap) = sys.residual(&v[..n], v[n].exp())?;
                let along: f64 = v
                    .iter()
                    .zip(&anchor)
                    .zip(tan.iter())
                    .zip(&weights)
                    .map(|(((a, b), t), w)| (a - b) * t * w)
                    .sum();
                if gap <= settings.tolerance && along.abs() <= 1e-10 {
                    ok = Some(it);
                    break;
                }
                let jv = sys.jacobian(&v[..n], v[n].exp(), &rv, true)?;
                let mut m = jv.insert_row(n, 0.0);
                for k in 0..=n {
                    m[(n, k)] = tan[k] * weights[k];
                }
                let rhs = DVector::from_iterator(n + 1, rv.iter().map(|x| -x).chain([-along]));
                match m.lu().solve(&rhs) {
                    Some(d) => v.iter_mut().zip(d.iter()).for_each(|(a, b)| *a += b),
                    None => break,
                }
            }
            match ok {
                Some(it) => break (v, it),
                None => h *= 0.5,
            }
        };
        let (v, iterations) = accepted;

        if v[n] >= goal {
            // Crossed the target: settle exactly on it from the interpolant.
            let frac = (goal - mu) / (v[n] - mu);
            let guess: Vec<f64> = y.iter().zip(&v[..n]).map(|(a, b)| a + frac * (b - a)).collect();
            match newton_at(game, target, sys.probs(&guess), settings) {
                Ok(p) => return Ok(p),
                Err(Error::NoConvergence { .. }) => {
                    h *= 0.5;
                    continue;
                }
                Err(e) => return Err(e),
            }
        }
        y = v[..n].to_vec();
        mu = v[n];
        prev = Some(tan);
        if iterations <= 3 {
            h = (1.5 * h).min(MAX_STEP);
        }
    }
    Err(stalled(mu))
}

/// Follow the logit equilibrium from the uniform profile through every
/// precision of the schedule, warm-starting each step from the previous one.
/// When a fixed-precision step fails the branch is followed by arclength
/// continuation instead, which also passes turning points.
pub fn trace_homotopy(game: &QreGame, precisions: &[f64], settings: &QreSettings) -> Result<QreProfile> {
    let mut current = QreProfile::uniform(game)?;
    let mut converged: Option<QreProfile> = None;
    for &lam in precisions {
        let step = match solve_at(game, lam, &current, settings) {
            Err(Error::NoConvergence { .. }) if current.precision > 0.0 => follow_branch(game, &current, lam, settings),
            other => other,
        };
        match step {
            Ok(p) => {
                current = p.clone();
                converged = Some(p);
            }
            Err(Error::NoConvergence { .. } | Error::SingularSystem) => {
                return Err(Error::HomotopyStalled {
                    precision: lam,
                    last_converged: converged.map(Box::new),
                })
            }
            Err(e) => return Err(e),
        }
    }
    converged.ok_or(Error::invalid("schedule", "is empty"))
}
