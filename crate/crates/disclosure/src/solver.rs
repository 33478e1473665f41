//! Computation of the optimal time-based prioritized mechanism.
//!
//! The optimal mechanism maximizes `threshold + silence_prob` subject to
//! the detector's silence constraints. The solver walks the threshold
//! upward, at each candidate computing the largest silence probability
//! that keeps every constraint satisfied, and stops as soon as that cap
//! drops below one — at that point a constraint binds and no larger
//! mechanism is obedient. [`solve_fast`] exploits the fact that once the
//! threshold has passed the detector's open-loop stopping time, the
//! binding constraint always sits at that stopping time, so the inner
//! minimization collapses to a single evaluation.

use crate::error::{Error, Result};
use crate::mechanisms::{TbpMechanism, OBEDIENCE_TOL};
use crate::model::ModelParams;

/// Outcome of the threshold search.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub mechanism: TbpMechanism,
    /// Expected principal utility of the mechanism under obedience.
    pub utility: f64,
    /// The detector's optimal declaration time absent any information;
    /// `horizon + 1` means she would stay silent throughout.
    pub no_info_stopping_time: usize,
    /// Earliest period whose silence constraint binds, when one does.
    pub binding_time: Option<usize>,
}

/// Hazard below which geometric-series closed forms are replaced by their
/// literal sums to avoid dividing a vanishing numerator by a vanishing
/// denominator.
const TINY_HAZARD: f64 = 1e-12;

/// Expected cost to a detector who receives no information and declares at
/// `declare_at` (with `horizon + 1` meaning never): the false-alarm
/// probability plus the accumulated expected delay.
pub fn no_info_cost(params: &ModelParams, declare_at: usize) -> Result<f64> {
    let t_max = params.horizon;
    if declare_at < 1 || declare_at > t_max + 1 {
        return Err(Error::TimeOutOfRange {
            t: declare_at,
            min: 1,
            max: t_max + 1,
        });
    }
    let mu = params.prior_good;
    let q = params.hazard;
    let c = params.delay_cost;
    let waited = declare_at - 1;
    let delay = if q < TINY_HAZARD {
        (1..=waited)
            .map(|t| 1.0 - mu * (1.0 - q).powi(t as i32 - 1))
            .sum::<f64>()
    } else {
        waited as f64 - mu * (1.0 - (1.0 - q).powi(waited as i32)) / q
    };
    let false_alarm = if declare_at <= t_max {
        mu * (1.0 - q).powi(declare_at as i32 - 1)
    } else {
        0.0
    };
    Ok(false_alarm + c * delay)
}

/// The earliest declaration time minimizing [`no_info_cost`]. With a zero
/// delay cost, waiting out the whole horizon is always (weakly) optimal
/// and is the convention adopted here.
pub fn no_info_stopping_time(params: &ModelParams) -> usize {
    if params.delay_cost == 0.0 {
        return params.horizon + 1;
    }
    let mut best_t = 1;
    let mut best = no_info_cost(params, 1).expect("in range");
    for tau in 2..=params.horizon + 1 {
        let cost = no_info_cost(params, tau).expect("in range");
        if cost < best {
            best = cost;
            best_t = tau;
        }
    }
    best_t
}

/// Largest silence probability at threshold `threshold` compatible with
/// the silence constraint of period `t`. The value is not clamped: results
/// above one mean the constraint is slack even at full silence, negative
/// results mean it fails even at zero.
pub fn silence_cap(params: &ModelParams, threshold: usize, t: usize) -> Result<f64> {
    if t < 1 || threshold > params.horizon || t > threshold {
        return Err(Error::TimeOutOfRange {
            t,
            min: 1,
            max: threshold.min(params.horizon),
        });
    }
    if params.delay_cost == 0.0 {
        return Err(Error::DegenerateCap("zero delay cost"));
    }
    let jumped_at_threshold = params.prob_jumped_by(threshold)?;
    if jumped_at_threshold == 0.0 {
        return Err(Error::DegenerateCap("jump unreachable by threshold"));
    }
    let mut waited = 0.0;
    for l in t..threshold {
        waited += params.prob_jumped_by(l)?;
    }
    Ok((params.survival(t)? / params.delay_cost - waited) / jumped_at_threshold)
}

/// Guard against floating-point flapping when a cap lands exactly on one.
const CAP_BREAK: f64 = 1.0 - 1e-12;

/// Finds the optimal mechanism by scanning thresholds upward and breaking
/// at the first one whose silence cap falls below one.
pub fn solve(params: &ModelParams) -> SolveResult {
    solve_inner(params, false)
}

/// Same output as [`solve`]; once the threshold reaches the open-loop
/// stopping time, only that period's cap is evaluated.
pub fn solve_fast(params: &ModelParams) -> SolveResult {
    solve_inner(params, true)
}

fn solve_inner(params: &ModelParams, fast: bool) -> SolveResult {
    let t_max = params.horizon;
    let stop = no_info_stopping_time(params);
    if params.delay_cost == 0.0 {
        // Every silence constraint reduces to a nonnegativity statement.
        return finish(params, t_max, 1.0, stop);
    }
    let mut last_cap = f64::INFINITY;
    for threshold in 1..=t_max {
        let cap = if fast && threshold >= stop {
            cap_or_infinite(params, threshold, stop)
        } else {
            (1..=threshold)
                .map(|t| cap_or_infinite(params, threshold, t))
                .fold(f64::INFINITY, f64::min)
        };
        if cap < CAP_BREAK {
            return finish(params, threshold, cap.max(0.0), stop);
        }
        last_cap = cap;
    }
    finish(params, t_max, last_cap.min(1.0), stop)
}

fn cap_or_infinite(params: &ModelParams, threshold: usize, t: usize) -> f64 {
    match silence_cap(params, threshold, t) {
        Ok(v) => v,
        // An unreachable jump places no limit on silence.
        Err(Error::DegenerateCap(_)) => f64::INFINITY,
        Err(e) => unreachable!("cap preconditions hold: {e}"),
    }
}

fn finish(params: &ModelParams, threshold: usize, silence: f64, stop: usize) -> SolveResult {
    let mechanism = TbpMechanism::new(threshold, silence, params.horizon)
        .expect("solver output is a valid mechanism");
    let report = mechanism.obedience(params, OBEDIENCE_TOL);
    debug_assert!(report.satisfied, "solver produced a disobeyed mechanism");
    SolveResult {
        mechanism,
        utility: mechanism.expected_utility(params),
        no_info_stopping_time: stop,
        binding_time: report.binding_times.first().copied(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(mu: f64, q: f64, horizon: usize, c: f64) -> ModelParams {
        ModelParams::new(mu, q, horizon, c).unwrap()
    }

    #[test]
    fn immediate_declaration_costs_the_prior() {
        for &(mu, q) in &[(0.9, 0.3), (0.2, 0.6), (0.0, 0.5)] {
            let p = params(mu, q, 6, 0.4);
            assert!((no_info_cost(&p, 1).unwrap() - mu).abs() < 1e-15);
        }
    }

    #[test]
    fn no_info_cost_matches_literal_sum() {
        let p = params(0.9, 0.3, 3, 0.1);
        // P(theta > 3) + c (P(theta <= 1) + P(theta <= 2))
        let want = 0.441 + 0.1 * (0.1 + 0.37);
        assert!((no_info_cost(&p, 3).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn silent_horizon_is_free_without_delay_cost() {
        let p = params(0.7, 0.2, 9, 0.0);
        assert_eq!(no_info_cost(&p, 10).unwrap(), 0.0);
        assert_eq!(no_info_stopping_time(&p), 10);
    }

    #[test]
    fn tiny_hazard_uses_sum_form() {
        let p = params(0.8, 1e-14, 5, 0.3);
        let survive: f64 = 0.8 * (1.0 - 1e-14f64).powi(4);
        let literal: f64 = (1..=4).map(|t| 1.0 - 0.8 * (1.0 - 1e-14f64).powi(t - 1)).sum();
        assert!((no_info_cost(&p, 5).unwrap() - (survive + 0.3 * literal)).abs() < 1e-15);
    }

    #[test]
    fn surely_bad_chain_declares_immediately() {
        let p = params(0.0, 0.4, 7, 0.2);
        assert_eq!(no_info_stopping_time(&p), 1);
    }

    #[test]
    fn stopping_time_is_exhaustive_argmin() {
        let p = params(0.9, 0.3, 50, 0.1);
        let exhaustive = (1..=51)
            .min_by(|&a, &b| {
                no_info_cost(&p, a)
                    .unwrap()
                    .partial_cmp(&no_info_cost(&p, b).unwrap())
                    .unwrap()
            })
            .unwrap();
        assert_eq!(no_info_stopping_time(&p), exhaustive);
        assert_eq!(no_info_stopping_time(&p), 5);
    }

    #[test]
    fn cap_hand_values() {
        let p = params(0.5, 0.5, 10, 2.0);
        assert!((silence_cap(&p, 1, 1).unwrap() - 0.5).abs() < 1e-15);
        let p = params(0.9, 0.3, 50, 0.1);
        assert!((silence_cap(&p, 1, 1).unwrap() - 90.0).abs() < 1e-9);
    }

    #[test]
    fn cap_degenerate_cases_signal() {
        let p = params(0.9, 0.3, 5, 0.0);
        assert!(matches!(
            silence_cap(&p, 2, 1),
            Err(Error::DegenerateCap(_))
        ));
        let p = params(1.0, 0.0, 5, 0.4);
        assert!(matches!(
            silence_cap(&p, 3, 2),
            Err(Error::DegenerateCap(_))
        ));
    }

    #[test]
    fn free_waiting_yields_full_silence() {
        let p = params(0.9, 0.3, 50, 0.0);
        let r = solve(&p);
        assert_eq!(r.mechanism.threshold, 50);
        assert_eq!(r.mechanism.silence_prob, 1.0);
        assert!((r.utility - 50.0).abs() < 1e-9);
        assert_eq!(r.no_info_stopping_time, 51);
    }

    #[test]
    fn unreachable_jump_yields_full_silence() {
        let p = params(1.0, 0.0, 8, 0.7);
        let r = solve(&p);
        assert_eq!(
            (r.mechanism.threshold, r.mechanism.silence_prob),
            (8, 1.0)
        );
        assert_eq!(solve_fast(&p), r);
    }

    #[test]
    fn breaks_at_first_capped_threshold() {
        let p = params(0.5, 0.5, 10, 2.0);
        let r = solve(&p);
        assert_eq!(r.mechanism.threshold, 1);
        assert!((r.mechanism.silence_prob - 0.5).abs() < 1e-12);
        assert_eq!(r.binding_time, Some(1));
    }

    #[test]
    fn result_is_obedient_and_maximal() {
        let p = params(0.9, 0.3, 50, 0.1);
        let r = solve(&p);
        let rep = r.mechanism.obedience(&p, OBEDIENCE_TOL);
        assert!(rep.satisfied);
        assert!(!rep.binding_times.is_empty());
        assert_eq!(rep.binding_times[0], r.no_info_stopping_time);
        // Nudging the mechanism outward breaks obedience.
        let k = r.mechanism.threshold as f64 + r.mechanism.silence_prob + 1e-3;
        let (n_up, q_up) = (k.floor() as usize, k.fract());
        if n_up <= p.horizon {
            let bumped = TbpMechanism::new(n_up, q_up, p.horizon).unwrap();
            assert!(!bumped.obedience(&p, OBEDIENCE_TOL).satisfied);
        }
    }

    #[test]
    fn fast_variant_agrees_on_a_grid() {
        for &mu in &[0.1, 0.5, 0.9] {
            for &q in &[0.05, 0.3, 0.8] {
                for &c in &[0.02, 0.3, 1.0] {
                    for &t_max in &[3usize, 8, 21] {
                        let p = params(mu, q, t_max, c);
                        let a = solve(&p);
                        let b = solve_fast(&p);
                        assert_eq!(a.mechanism.threshold, b.mechanism.threshold);
                        assert!(
                            (a.mechanism.silence_prob - b.mechanism.silence_prob).abs() <= 1e-12
                        );
                    }
                }
            }
        }
    }
}
