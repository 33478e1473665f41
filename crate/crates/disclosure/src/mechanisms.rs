//! Disclosure mechanisms and their closed-form expected utilities and
//! obedience slack.
//!
//! Two representations are used throughout the crate:
//!
//! * [`TbpMechanism`] — a time-based prioritized mechanism `(n_p, q_np)`:
//!   silent regardless of the state before the threshold period `n_p`,
//!   silent with probability `q_np` in the bad state at exactly `n_p`, and
//!   fully revealing afterwards. In the good state the principal always
//!   recommends silence.
//! * [`SilentPathPolicy`] — per-period silence probabilities along the
//!   history in which only silence recommendations have been sent. Entries
//!   off that path are irrelevant: the first declare recommendation ends
//!   the game, so only the all-silent history is ever reached with a
//!   choice left to make.

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Default absolute tolerance for obedience checks. All compared
/// quantities are order-one sums of at most `horizon + 1` terms.
pub const OBEDIENCE_TOL: f64 = 1e-9;

/// A time-based prioritized mechanism, canonically represented.
///
/// `(n_p, 1)` and `(n_p + 1, 0)` describe the same behaviour; construction
/// maps the former onto the latter unless `n_p` already equals the horizon,
/// so equality of canonical fields is equality of mechanisms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TbpMechanism {
    /// Threshold period `n_p` (in `1..=horizon`).
    pub threshold: usize,
    /// Probability of recommending silence in the bad state at the
    /// threshold period.
    pub silence_prob: f64,
}

impl TbpMechanism {
    pub fn new(threshold: usize, silence_prob: f64, horizon: usize) -> Result<Self> {
        if threshold < 1 || threshold > horizon {
            return Err(Error::TimeOutOfRange {
                t: threshold,
                min: 1,
                max: horizon,
            });
        }
        if !(0.0..=1.0).contains(&silence_prob) || silence_prob.is_nan() {
            return Err(Error::InvalidParameter {
                name: "q_np",
                value: silence_prob,
                constraint: "must lie in [0, 1]",
            });
        }
        if silence_prob == 1.0 && threshold < horizon {
            Ok(Self {
                threshold: threshold + 1,
                silence_prob: 0.0,
            })
        } else {
            Ok(Self {
                threshold,
                silence_prob,
            })
        }
    }

    /// Probability of recommending silence in the bad state at period `t`
    /// on the all-silent path: 1 before the threshold, `silence_prob` at
    /// it, 0 after it.
    pub fn silence_prob_at(&self, t: usize, horizon: usize) -> Result<f64> {
        if t < 1 || t > horizon {
            return Err(Error::TimeOutOfRange {
                t,
                min: 1,
                max: horizon,
            });
        }
        Ok(if t < self.threshold {
            1.0
        } else if t == self.threshold {
            self.silence_prob
        } else {
            0.0
        })
    }

    /// Expected principal utility under an obedient detector:
    /// `n_p - 1 + P(theta <= n_p) q_np + sum_{t = n_p}^{T} P(theta > t)`.
    pub fn expected_utility(&self, params: &ModelParams) -> f64 {
        tbp_utility_raw(params, self.threshold, self.silence_prob)
    }

    /// Slack of the detector's silence constraint at each period up to the
    /// threshold. At period `t` the detector weighs the false-alarm
    /// probability of declaring now, `P(theta > t)`, against the delay
    /// cost of obediently staying silent until the mechanism reveals:
    /// `c (sum_{l=t}^{n_p-1} P(theta <= l) + P(theta <= n_p) q_np)`.
    pub fn obedience(&self, params: &ModelParams, tolerance: f64) -> ObedienceReport {
        let n_p = self.threshold;
        let c = params.delay_cost;
        let jumped_at_threshold = params.prob_jumped_by(n_p).expect("threshold in range");
        let mut slack = Vec::with_capacity(n_p);
        for t in 1..=n_p {
            let mut wait_cost = jumped_at_threshold * self.silence_prob;
            for l in t..n_p {
                wait_cost += params.prob_jumped_by(l).expect("l <= horizon");
            }
            slack.push(params.survival(t).expect("t <= horizon") - c * wait_cost);
        }
        ObedienceReport::from_slack(slack, tolerance)
    }

    /// Expands the mechanism into its all-silent-path policy.
    pub fn to_silent_path(&self, horizon: usize) -> Result<SilentPathPolicy> {
        let silence_bad = (1..=horizon)
            .map(|t| self.silence_prob_at(t, horizon))
            .collect::<Result<Vec<_>>>()?;
        SilentPathPolicy::new(vec![1.0; horizon], silence_bad)
    }
}

/// Expected principal utility of a (possibly non-canonical) threshold /
/// mixing-probability pair. Kept separate from [`TbpMechanism`] so the
/// identity between the `(n_p, 1)` and `(n_p + 1, 0)` representations can
/// be checked on raw coordinates.
pub(crate) fn tbp_utility_raw(params: &ModelParams, threshold: usize, silence_prob: f64) -> f64 {
    let jumped = params.prob_jumped_by(threshold).expect("threshold in range");
    let tail: f64 = (threshold..=params.horizon)
        .map(|t| params.survival(t).expect("t <= horizon"))
        .sum();
    (threshold - 1) as f64 + jumped * silence_prob + tail
}

/// Result of an obedience check on a time-based prioritized mechanism.
#[derive(Debug, Clone, PartialEq)]
pub struct ObedienceReport {
    pub satisfied: bool,
    /// Slack of the silence constraint at each period `1..=n_p`.
    pub slack: Vec<f64>,
    /// Periods whose constraint holds with equality (within tolerance).
    pub binding_times: Vec<usize>,
}

impl ObedienceReport {
    fn from_slack(slack: Vec<f64>, tolerance: f64) -> Self {
        let satisfied = slack.iter().all(|&s| s >= -tolerance);
        let binding_times = slack
            .iter()
            .enumerate()
            .filter(|(_, &s)| s.abs() <= tolerance)
            .map(|(i, _)| i + 1)
            .collect();
        Self {
            satisfied,
            slack,
            binding_times,
        }
    }
}

/// Silence probabilities along the all-silent history, one pair per period.
#[derive(Debug, Clone, PartialEq)]
pub struct SilentPathPolicy {
    silence_good: Vec<f64>,
    silence_bad: Vec<f64>,
}

impl SilentPathPolicy {
    /// Builds a policy from per-period silence probabilities in the good
    /// and bad state. Obedience requires the good state to be at least as
    /// silent as the bad one at every period, so that is enforced here.
    pub fn new(silence_good: Vec<f64>, silence_bad: Vec<f64>) -> Result<Self> {
        if silence_good.len() != silence_bad.len() || silence_good.is_empty() {
            return Err(Error::InvalidParameter {
                name: "policy",
                value: silence_good.len() as f64,
                constraint: "good/bad silence vectors must be nonempty and equal length",
            });
        }
        for (&g, &b) in silence_good.iter().zip(&silence_bad) {
            for v in [g, b] {
                if !(0.0..=1.0).contains(&v) || v.is_nan() {
                    return Err(Error::InvalidParameter {
                        name: "rho",
                        value: v,
                        constraint: "silence probabilities must lie in [0, 1]",
                    });
                }
            }
            if g < b {
                return Err(Error::InvalidParameter {
                    name: "rho",
                    value: g - b,
                    constraint: "good-state silence must dominate bad-state silence",
                });
            }
        }
        Ok(Self {
            silence_good,
            silence_bad,
        })
    }

    /// Fully revealing: declare as soon as the state is bad.
    pub fn full_information(horizon: usize) -> Self {
        Self {
            silence_good: vec![1.0; horizon],
            silence_bad: vec![0.0; horizon],
        }
    }

    /// Uninformative: recommend silence no matter what.
    pub fn no_information(horizon: usize) -> Self {
        Self {
            silence_good: vec![1.0; horizon],
            silence_bad: vec![1.0; horizon],
        }
    }

    /// Time-invariant bad-state silence probability with truthful good
    /// state, the shape of the static benchmark.
    pub fn stationary(horizon: usize, bad_silence: f64) -> Result<Self> {
        Self::new(vec![1.0; horizon], vec![bad_silence; horizon])
    }

    pub fn horizon(&self) -> usize {
        self.silence_good.len()
    }

    /// Silence probability in the good state at period `t` (1-based).
    pub fn good_at(&self, t: usize) -> f64 {
        self.silence_good[t - 1]
    }

    /// Silence probability in the bad state at period `t` (1-based).
    pub fn bad_at(&self, t: usize) -> f64 {
        self.silence_bad[t - 1]
    }

    pub fn silence_good(&self) -> &[f64] {
        &self.silence_good
    }

    pub fn silence_bad(&self) -> &[f64] {
        &self.silence_bad
    }

    /// True when the good state is always kept silent, the precondition
    /// for the reduced detector computations.
    pub fn good_always_silent(&self) -> bool {
        self.silence_good.iter().all(|&g| g == 1.0)
    }
}
