//! Exhaustive baselines that certify the closed-form solver at small
//! scale. Nothing here reuses the constraint algebra under test: grid
//! feasibility goes through the detector's dynamic program, the stopping
//! time through literal cost sums, and the detector's value through
//! enumeration of stopping rules.

use crate::detector;
use crate::error::{Error, Result};
use crate::mechanisms::{SilentPathPolicy, TbpMechanism};
use crate::model::ModelParams;

/// Largest horizon the stopping-rule enumeration accepts; the rule space
/// doubles per period.
pub const MAX_ENUMERATION_HORIZON: usize = 10;

/// Best mechanism found on an exhaustive grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub best_mechanism: TbpMechanism,
    pub best_utility: f64,
    pub grid_step: f64,
    /// Grid points whose mechanism the detector's best response obeys.
    pub feasible_count: usize,
}

/// Enumerates every threshold and a silence-probability grid of the given
/// step, keeps the mechanisms the detector's dynamic-programming best
/// response obeys, and returns the utility maximizer. Ties break toward
/// the smaller threshold, then the smaller silence probability.
pub fn brute_force_tbp(params: &ModelParams, grid_step: f64) -> Result<OracleResult> {
    if !(grid_step > 0.0 && grid_step <= 0.1) {
        return Err(Error::InvalidParameter {
            name: "grid_step",
            value: grid_step,
            constraint: "must lie in (0, 0.1]",
        });
    }
    let steps = (1.0 / grid_step).ceil() as usize;
    let mut best: Option<(TbpMechanism, f64)> = None;
    let mut feasible_count = 0;
    for threshold in 1..=params.horizon {
        for k in 0..=steps {
            let silence = (k as f64 * grid_step).min(1.0);
            let mech = TbpMechanism::new(threshold, silence, params.horizon)?;
            let policy = mech.to_silent_path(params.horizon)?;
            if !detector::best_response_obeys(params, &policy)? {
                continue;
            }
            feasible_count += 1;
            let utility = mech.expected_utility(params);
            let replace = match &best {
                None => true,
                Some((b, bu)) => {
                    utility > *bu
                        || (utility == *bu
                            && (mech.threshold, mech.silence_prob) < (b.threshold, b.silence_prob))
                }
            };
            if replace {
                best = Some((mech, utility));
            }
        }
    }
    let (best_mechanism, best_utility) =
        best.expect("full disclosure is always obedient, the grid cannot be empty");
    Ok(OracleResult {
        best_mechanism,
        best_utility,
        grid_step,
        feasible_count,
    })
}

/// Earliest cost-minimizing declaration time of an uninformed detector,
/// with every candidate cost evaluated as the literal expectation of the
/// realized cost over the jump distribution. A zero delay cost keeps the
/// horizon-long silence convention of the solver.
pub fn brute_force_tau_no(params: &ModelParams) -> usize {
    if params.delay_cost == 0.0 {
        return params.horizon + 1;
    }
    let dist = params.jump_distribution();
    let cost = |tau: usize| -> f64 {
        (1..=params.horizon + 1)
            .map(|theta| dist.pmf_at(theta) * crate::model::detector_cost(tau, theta, params.delay_cost))
            .sum()
    };
    let mut best_t = 1;
    let mut best = cost(1);
    for tau in 2..=params.horizon + 1 {
        let c = cost(tau);
        if c < best {
            best = c;
            best_t = tau;
        }
    }
    best_t
}

/// Minimum expected detector cost over every deterministic stopping rule
/// on the reduced message tree, by literal forward evaluation.
///
/// A rule is the set of all-silent histories at which the detector
/// declares; only the earliest element matters, and on a declare branch
/// she declares immediately (the posterior is zero, so any delay only adds
/// cost). The number of rules is `2^horizon`.
pub fn enumerate_stopping_rules(params: &ModelParams, policy: &SilentPathPolicy) -> Result<f64> {
    if !policy.good_always_silent() {
        return Err(Error::UnsupportedPolicy(
            "stopping-rule enumeration requires silence probability 1 in the good state",
        ));
    }
    if params.horizon > MAX_ENUMERATION_HORIZON {
        return Err(Error::HorizonTooLarge {
            routine: "stopping-rule enumeration",
            horizon: params.horizon,
            max: MAX_ENUMERATION_HORIZON,
        });
    }
    let mut best = f64::INFINITY;
    for declare_set in 0u64..(1u64 << params.horizon) {
        let spine_declare = first_member(declare_set, params.horizon);
        best = best.min(rule_cost(params, policy, spine_declare));
    }
    Ok(best)
}

/// Smallest period in the bit-set, or `horizon + 1` when empty.
fn first_member(declare_set: u64, horizon: usize) -> usize {
    for t in 1..=horizon {
        if declare_set & (1 << (t - 1)) != 0 {
            return t;
        }
    }
    horizon + 1
}

/// Expected cost of the rule that declares at spine period
/// `spine_declare` (or never, if `horizon + 1`) and at any declare
/// recommendation, summed over jump times and first-declare branches.
fn rule_cost(params: &ModelParams, policy: &SilentPathPolicy, spine_declare: usize) -> f64 {
    let t_max = params.horizon;
    let c = params.delay_cost;
    let dist = params.jump_distribution();
    let mut total = 0.0;
    for theta in 1..=t_max + 1 {
        let p_theta = dist.pmf_at(theta);
        if p_theta == 0.0 {
            continue;
        }
        if spine_declare < theta {
            // Every pre-jump recommendation is silence, so she reaches
            // her declaration period and raises a false alarm.
            total += p_theta;
            continue;
        }
        // The jump precedes her planned declaration: a declare
        // recommendation may arrive first.
        let mut still_silent = 1.0;
        let mut cost_given_theta = 0.0;
        let last = spine_declare.min(t_max);
        for l in theta..=last {
            if l < spine_declare {
                let declare_here = still_silent * (1.0 - policy.bad_at(l));
                cost_given_theta += declare_here * c * (l - theta) as f64;
                still_silent *= policy.bad_at(l);
            } else {
                // She declares at l no matter which message arrives.
                cost_given_theta += still_silent * c * (l - theta) as f64;
                still_silent = 0.0;
            }
        }
        // Never declared within the horizon.
        cost_given_theta += still_silent * c * (t_max + 1 - theta) as f64;
        total += p_theta * cost_given_theta;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver;

    fn params(mu: f64, q: f64, horizon: usize, c: f64) -> ModelParams {
        ModelParams::new(mu, q, horizon, c).unwrap()
    }

    #[test]
    fn grid_free_waiting() {
        let p = params(0.6, 0.2, 5, 0.0);
        let r = brute_force_tbp(&p, 0.01).unwrap();
        assert_eq!(r.best_mechanism.threshold, 5);
        assert_eq!(r.best_mechanism.silence_prob, 1.0);
        assert!((r.best_utility - 5.0).abs() < 1e-12);
    }

    #[test]
    fn grid_surely_bad_start() {
        let p = params(0.0, 0.3, 4, 0.5);
        let r = brute_force_tbp(&p, 0.01).unwrap();
        assert_eq!(r.best_mechanism.threshold, 1);
        assert_eq!(r.best_mechanism.silence_prob, 0.0);
        assert_eq!(r.best_utility, 0.0);
    }

    #[test]
    fn grid_agrees_with_solver() {
        let p = params(0.9, 0.3, 8, 0.1);
        let r = brute_force_tbp(&p, 1e-3).unwrap();
        let s = solver::solve(&p);
        assert_eq!(r.best_mechanism.threshold, s.mechanism.threshold);
        assert!((r.best_mechanism.silence_prob - s.mechanism.silence_prob).abs() <= 2e-3);
    }

    #[test]
    fn grid_step_validation() {
        let p = params(0.5, 0.5, 3, 0.5);
        assert!(brute_force_tbp(&p, 0.0).is_err());
        assert!(brute_force_tbp(&p, 0.2).is_err());
    }

    #[test]
    fn stopping_time_corners_and_agreement() {
        assert_eq!(brute_force_tau_no(&params(0.4, 0.2, 7, 0.0)), 8);
        assert_eq!(brute_force_tau_no(&params(0.0, 0.2, 7, 0.5)), 1);
        let p = params(0.9, 0.3, 50, 0.1);
        assert_eq!(brute_force_tau_no(&p), solver::no_info_stopping_time(&p));
    }

    #[test]
    fn enumeration_terminal_case() {
        let p = params(0.6, 0.2, 1, 0.4);
        let policy = SilentPathPolicy::no_information(1);
        let v = enumerate_stopping_rules(&p, &policy).unwrap();
        assert!((v - 0.6f64.min(0.4 * 0.4)).abs() < 1e-15);
    }

    #[test]
    fn enumeration_full_information_is_free() {
        let p = params(0.7, 0.3, 6, 0.5);
        let policy = SilentPathPolicy::full_information(6);
        let v = enumerate_stopping_rules(&p, &policy).unwrap();
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn enumeration_matches_dp_on_optimal_policy() {
        let p = params(0.9, 0.3, 6, 0.1);
        let policy = solver::solve(&p).mechanism.to_silent_path(6).unwrap();
        let v = enumerate_stopping_rules(&p, &policy).unwrap();
        let dp = detector::solve_dp(&p, &policy).unwrap();
        assert!(
            (v - dp.ex_ante_cost).abs() < 1e-9,
            "{v} vs {}",
            dp.ex_ante_cost
        );
    }

    #[test]
    fn enumeration_rejects_large_horizon() {
        let p = params(0.9, 0.3, 20, 0.1);
        let policy = SilentPathPolicy::no_information(20);
        assert!(matches!(
            enumerate_stopping_rules(&p, &policy),
            Err(Error::HorizonTooLarge { .. })
        ));
    }
}
