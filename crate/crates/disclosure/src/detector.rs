//! The detector's Bayesian belief updates and finite-horizon dynamic
//! program, used both to compute her best response to a policy and as a
//! semantic obedience check that is independent of the closed-form
//! constraints in [`crate::mechanisms`].
//!
//! All routines here work on the reduced history tree: the spine of
//! all-silent recommendations plus one-step declare branches. The
//! reduction is valid only for policies that always keep silent in the
//! good state — a declare recommendation then reveals the bad state, the
//! posterior collapses to zero and the branch terminates. Policies that
//! sometimes declare in the good state are rejected rather than
//! mishandled.

use crate::error::{Error, Result};
use crate::mechanisms::{SilentPathPolicy, OBEDIENCE_TOL};
use crate::model::{Message, ModelParams};

/// One Bayes step: the belief in the good state after hearing `message`,
/// starting from belief `belief`, with one chain transition of hazard
/// `hazard` and the next period's silence probabilities.
///
/// Returns an error when the message has probability zero from the given
/// belief, in which case the branch is unreachable and the caller skips it.
pub fn belief_update(
    belief: f64,
    silence_good: f64,
    silence_bad: f64,
    hazard: f64,
    message: Message,
) -> Result<f64> {
    let good_next = belief * (1.0 - hazard);
    let (w_good, w_bad) = match message {
        Message::KeepSilent => (silence_good, silence_bad),
        Message::Declare => (1.0 - silence_good, 1.0 - silence_bad),
    };
    let numerator = good_next * w_good;
    let denominator = numerator + (1.0 - good_next) * w_bad;
    if denominator == 0.0 {
        return Err(Error::UnreachableHistory);
    }
    Ok(numerator / denominator)
}

/// Posterior probability of the good state along the all-silent path.
///
/// `at(0)` is the prior before any message; `at(t)` conditions on `t`
/// silence recommendations. The path is truncated at the first period the
/// all-silent history becomes unreachable (unreachability is absorbing).
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefPath {
    pi: Vec<f64>,
}

impl BeliefPath {
    pub fn compute(params: &ModelParams, policy: &SilentPathPolicy) -> Self {
        let dist = params.jump_distribution();
        let mut pi = vec![params.prior_good];
        // Forward accumulation of the joint weights of the all-silent
        // history: `good` carries P(theta > t) times the good-state
        // silence prefix, `bad` the mass that jumped at some theta' <= t
        // and stayed silent since.
        let mut good_prefix = 1.0;
        let mut bad = 0.0;
        for t in 1..=params.horizon {
            bad = (bad + dist.pmf_at(t) * good_prefix) * policy.bad_at(t);
            good_prefix *= policy.good_at(t);
            let good = params.survival(t).expect("t <= horizon") * good_prefix;
            let total = good + bad;
            if total == 0.0 {
                break;
            }
            pi.push(good / total);
        }
        Self { pi }
    }

    /// Belief after `t` silence recommendations, or `None` once the path
    /// is unreachable.
    pub fn at(&self, t: usize) -> Option<f64> {
        self.pi.get(t).copied()
    }

    /// Last period for which the all-silent history has positive
    /// probability.
    pub fn reachable_horizon(&self) -> usize {
        self.pi.len() - 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.pi
    }
}

/// The detector's best response to a policy on the reduced history tree.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorSolution {
    pub beliefs: BeliefPath,
    /// Optimal expected continuation cost at each reachable spine period
    /// (index 0 is period 1).
    pub values: Vec<f64>,
    /// Whether waiting is (weakly) optimal at each reachable spine period.
    pub wait_is_optimal: Vec<bool>,
    /// Belief cutoffs below which declaring beats waiting, per period.
    pub thresholds: Vec<f64>,
    /// Expected cost of the best response before the first message
    /// arrives.
    pub ex_ante_cost: f64,
}

fn require_truthful_good_state(policy: &SilentPathPolicy) -> Result<()> {
    if policy.good_always_silent() {
        Ok(())
    } else {
        Err(Error::UnsupportedPolicy(
            "detector routines require silence probability 1 in the good state",
        ))
    }
}

/// Probability that the next recommendation is silence, from belief `pi`
/// at period `t` (the recommendation arriving at `t + 1`).
fn silence_prob_next(params: &ModelParams, policy: &SilentPathPolicy, t: usize, pi: f64) -> f64 {
    let good_next = pi * (1.0 - params.hazard);
    good_next + (1.0 - good_next) * policy.bad_at(t + 1)
}

/// Cost of waiting at period `t` with belief `pi` and responding optimally
/// afterwards: the expected delay charge this period plus the continuation
/// value. A declare branch carries a zero posterior and hence zero
/// continuation cost.
fn wait_value(params: &ModelParams, policy: &SilentPathPolicy, t: usize, pi: f64) -> f64 {
    let stage = params.delay_cost * (1.0 - pi);
    if t == params.horizon {
        return stage;
    }
    let p_silent = silence_prob_next(params, policy, t, pi);
    if p_silent == 0.0 {
        return stage;
    }
    let pi_next = pi * (1.0 - params.hazard) / p_silent;
    stage + p_silent * value(params, policy, t + 1, pi_next)
}

/// Optimal cost-to-go at period `t` with belief `pi`: declare now (paying
/// the false-alarm probability) or wait.
fn value(params: &ModelParams, policy: &SilentPathPolicy, t: usize, pi: f64) -> f64 {
    pi.min(wait_value(params, policy, t, pi))
}

/// Solves the detector's dynamic program along the all-silent spine.
pub fn solve_dp(params: &ModelParams, policy: &SilentPathPolicy) -> Result<DetectorSolution> {
    require_truthful_good_state(policy)?;
    let beliefs = BeliefPath::compute(params, policy);
    let (values, wait_is_optimal) = spine_pass(params, policy, &beliefs);
    let thresholds = (1..=params.horizon)
        .map(|t| threshold_at(params, policy, t))
        .collect::<Result<Vec<_>>>()?;
    let ex_ante_cost = ex_ante(params, policy, &values);
    Ok(DetectorSolution {
        beliefs,
        values,
        wait_is_optimal,
        thresholds,
        ex_ante_cost,
    })
}

/// Backward pass over the reachable spine: `values[t - 1]` is the optimal
/// cost-to-go at period `t` at the realized spine beliefs.
fn spine_pass(
    params: &ModelParams,
    policy: &SilentPathPolicy,
    beliefs: &BeliefPath,
) -> (Vec<f64>, Vec<bool>) {
    let reachable = beliefs.reachable_horizon();
    let mut values = vec![0.0; reachable];
    let mut wait_is_optimal = vec![false; reachable];
    for t in (1..=reachable).rev() {
        let pi = beliefs.at(t).expect("t reachable");
        let wait = if t == params.horizon {
            params.delay_cost * (1.0 - pi)
        } else {
            let stage = params.delay_cost * (1.0 - pi);
            let p_silent = silence_prob_next(params, policy, t, pi);
            if t < reachable {
                stage + p_silent * values[t]
            } else {
                // The spine dies here: the next recommendation is a
                // declare, whose branch costs nothing beyond the charges
                // already accrued.
                stage
            }
        };
        values[t - 1] = pi.min(wait);
        wait_is_optimal[t - 1] = wait <= pi + OBEDIENCE_TOL;
    }
    (values, wait_is_optimal)
}

/// Expected best-response cost before the first recommendation: the spine
/// value weighted by the probability of a first-period silence; a
/// first-period declare reveals an immediate jump and costs nothing.
fn ex_ante(params: &ModelParams, policy: &SilentPathPolicy, values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let p_first_silent = params.prior_good + (1.0 - params.prior_good) * policy.bad_at(1);
    p_first_silent * values[0]
}

/// True when following every recommendation is a best response: waiting
/// must be optimal at every reachable all-silent history (declare
/// recommendations are trivially obeyed because they reveal the bad
/// state). Ties go to obedience.
pub fn best_response_obeys(params: &ModelParams, policy: &SilentPathPolicy) -> Result<bool> {
    require_truthful_good_state(policy)?;
    let beliefs = BeliefPath::compute(params, policy);
    let (_, wait_is_optimal) = spine_pass(params, policy, &beliefs);
    Ok(wait_is_optimal.iter().all(|&w| w))
}

/// Expected cost of literally obeying every recommendation, by forward
/// summation: the probability of a declare arriving in the good state plus
/// the delay charges accumulated while silent in the bad state. Serves as
/// an independent cross-check of the dynamic program on obedient policies.
pub fn obedient_cost(params: &ModelParams, policy: &SilentPathPolicy) -> f64 {
    let dist = params.jump_distribution();
    let mut good_prefix = 1.0;
    let mut bad = 0.0;
    let mut false_alarm = 0.0;
    let mut delay = 0.0;
    for t in 1..=params.horizon {
        false_alarm +=
            params.survival(t).expect("t <= horizon") * good_prefix * (1.0 - policy.good_at(t));
        bad = (bad + dist.pmf_at(t) * good_prefix) * policy.bad_at(t);
        good_prefix *= policy.good_at(t);
        delay += bad;
    }
    false_alarm + params.delay_cost * delay
}

/// Belief cutoff at period `t` below which declaring beats waiting, given
/// optimal play afterwards. The wait cost is concave in the belief and
/// exceeds the declare cost at belief zero (by exactly the delay charge),
/// so the sign change is unique and bisection applies. Returns 0 when
/// waiting is at least as good everywhere.
pub fn threshold_at(params: &ModelParams, policy: &SilentPathPolicy, t: usize) -> Result<f64> {
    require_truthful_good_state(policy)?;
    if t < 1 || t > params.horizon {
        return Err(Error::TimeOutOfRange {
            t,
            min: 1,
            max: params.horizon,
        });
    }
    let gap = |pi: f64| wait_value(params, policy, t, pi) - pi;
    if gap(0.0) <= 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    // gap(0) = delay_cost > 0 and gap(1) <= 0.
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::TbpMechanism;
    use crate::solver;

    fn params(mu: f64, q: f64, horizon: usize, c: f64) -> ModelParams {
        ModelParams::new(mu, q, horizon, c).unwrap()
    }

    #[test]
    fn belief_update_cases() {
        let b = belief_update(0.5, 1.0, 0.0, 0.0, Message::KeepSilent).unwrap();
        assert_eq!(b, 1.0);
        let b = belief_update(0.5, 1.0, 1.0, 0.0, Message::KeepSilent).unwrap();
        assert_eq!(b, 0.5);
        let b = belief_update(0.9, 1.0, 0.4, 0.3, Message::KeepSilent).unwrap();
        assert!((b - 0.63 / (0.63 + 0.37 * 0.4)).abs() < 1e-15);
        // A declare from a truthful good state reveals the jump.
        let b = belief_update(0.9, 1.0, 0.4, 0.3, Message::Declare).unwrap();
        assert_eq!(b, 0.0);
        // Zero-probability branch signals instead of dividing.
        assert!(matches!(
            belief_update(1.0, 1.0, 0.5, 0.0, Message::Declare),
            Err(Error::UnreachableHistory)
        ));
    }

    #[test]
    fn spine_beliefs_follow_bayes() {
        let p = params(0.9, 0.3, 4, 0.1);
        let m = TbpMechanism::new(2, 0.4, 4).unwrap();
        let policy = m.to_silent_path(4).unwrap();
        let path = BeliefPath::compute(&p, &policy);
        assert_eq!(path.at(0), Some(0.9));
        // t = 1: silence is certain either way, belief = P(theta > 1).
        assert!((path.at(1).unwrap() - 0.9).abs() < 1e-12);
        // t = 2: bad state silent w.p. 0.4.
        let want = 0.63 / (0.63 + 0.37 * 0.4);
        assert!((path.at(2).unwrap() - want).abs() < 1e-12);
        // t = 3: fully revealing, silence means good for sure.
        assert_eq!(path.at(3), Some(1.0));
    }

    #[test]
    fn full_information_spine_is_certainty() {
        let p = params(0.9, 0.3, 5, 0.1);
        let policy = SilentPathPolicy::full_information(5);
        let path = BeliefPath::compute(&p, &policy);
        for t in 1..=path.reachable_horizon() {
            assert_eq!(path.at(t), Some(1.0));
        }
        let sol = solve_dp(&p, &policy).unwrap();
        assert_eq!(sol.ex_ante_cost, 0.0);
        assert!(sol.wait_is_optimal.iter().all(|&w| w));
        assert!((obedient_cost(&p, &policy) - 0.0).abs() < 1e-15);
    }

    #[test]
    fn unreachable_spine_truncates() {
        let p = params(0.0, 0.3, 4, 0.5);
        let policy = SilentPathPolicy::full_information(4);
        let path = BeliefPath::compute(&p, &policy);
        assert_eq!(path.reachable_horizon(), 0);
        assert!(best_response_obeys(&p, &policy).unwrap());
    }

    #[test]
    fn terminal_value_is_stage_minimum() {
        let p = params(0.6, 0.2, 1, 0.4);
        let policy = SilentPathPolicy::no_information(1);
        let sol = solve_dp(&p, &policy).unwrap();
        assert!((sol.values[0] - 0.6f64.min(0.4 * 0.4)).abs() < 1e-15);
    }

    #[test]
    fn dp_matches_open_loop_optimum_without_information() {
        for &(mu, q, c, t_max) in &[
            (0.9, 0.3, 0.1, 12usize),
            (0.5, 0.1, 0.4, 9),
            (0.2, 0.6, 0.8, 6),
        ] {
            let p = params(mu, q, t_max, c);
            let policy = SilentPathPolicy::no_information(t_max);
            let sol = solve_dp(&p, &policy).unwrap();
            let open_loop = (1..=t_max + 1)
                .map(|tau| solver::no_info_cost(&p, tau).unwrap())
                .fold(f64::INFINITY, f64::min);
            assert!(
                (sol.ex_ante_cost - open_loop).abs() < 1e-9,
                "mu={mu} q={q} c={c}: {} vs {open_loop}",
                sol.ex_ante_cost
            );
        }
    }

    #[test]
    fn optimal_mechanism_is_obeyed_and_full_silence_is_not() {
        let p = params(0.9, 0.3, 50, 0.1);
        let opt = solver::solve(&p).mechanism.to_silent_path(50).unwrap();
        assert!(best_response_obeys(&p, &opt).unwrap());
        let silence = SilentPathPolicy::no_information(50);
        assert!(!best_response_obeys(&p, &silence).unwrap());
    }

    #[test]
    fn wait_flags_match_constraint_signs_inside_threshold() {
        let p = params(0.9, 0.3, 5, 0.1);
        let mech = solver::solve(&p).mechanism;
        let sol = solve_dp(&p, &mech.to_silent_path(5).unwrap()).unwrap();
        for t in 1..=mech.threshold.min(sol.wait_is_optimal.len()) {
            assert!(sol.wait_is_optimal[t - 1], "t={t}");
        }
    }

    #[test]
    fn obedient_cost_equals_dp_value_on_obedient_policy() {
        let p = params(0.9, 0.3, 50, 0.1);
        let policy = solver::solve(&p).mechanism.to_silent_path(50).unwrap();
        let sol = solve_dp(&p, &policy).unwrap();
        assert!((sol.ex_ante_cost - obedient_cost(&p, &policy)).abs() < 1e-9);
    }

    #[test]
    fn terminal_threshold_is_cost_ratio() {
        let p = params(0.7, 0.25, 6, 0.3);
        let policy = SilentPathPolicy::no_information(6);
        let l = threshold_at(&p, &policy, 6).unwrap();
        assert!((l - 0.3 / 1.3).abs() < 1e-9);
    }

    #[test]
    fn threshold_zero_when_waiting_free() {
        let p = params(0.7, 0.25, 6, 0.0);
        let policy = SilentPathPolicy::no_information(6);
        for t in 1..=6 {
            assert_eq!(threshold_at(&p, &policy, t).unwrap(), 0.0);
        }
    }

    #[test]
    fn threshold_consistent_with_spine_decision() {
        let p = params(0.9, 0.3, 5, 0.1);
        let policy = solver::solve(&p).mechanism.to_silent_path(5).unwrap();
        let sol = solve_dp(&p, &policy).unwrap();
        for t in 1..=sol.values.len() {
            let pi = sol.beliefs.at(t).unwrap();
            let l = sol.thresholds[t - 1];
            if sol.wait_is_optimal[t - 1] {
                assert!(pi >= l - 1e-9, "t={t}: pi={pi} below cutoff {l}");
            } else {
                assert!(pi <= l + 1e-9, "t={t}: pi={pi} above cutoff {l}");
            }
        }
    }

    #[test]
    fn wait_value_concave_in_belief() {
        let p = params(0.8, 0.2, 7, 0.5);
        let policy = TbpMechanism::new(4, 0.3, 7)
            .unwrap()
            .to_silent_path(7)
            .unwrap();
        for t in [1usize, 3, 6] {
            let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
            let w: Vec<f64> = grid
                .iter()
                .map(|&pi| wait_value(&p, &policy, t, pi))
                .collect();
            for i in 1..w.len() - 1 {
                let second = w[i + 1] - 2.0 * w[i] + w[i - 1];
                assert!(second <= 1e-12, "t={t} i={i}: {second}");
            }
        }
    }

    #[test]
    fn rejects_informative_good_state() {
        let p = params(0.5, 0.2, 3, 0.3);
        let policy = SilentPathPolicy::new(vec![1.0, 0.9, 1.0], vec![0.5, 0.5, 0.5]).unwrap();
        assert!(matches!(
            solve_dp(&p, &policy),
            Err(Error::UnsupportedPolicy(_))
        ));
    }
}
