//! Game primitives: model parameters, the jump-time distribution, and the
//! realized costs and utilities of a single play of the game.
//!
//! The state process is a two-state Markov chain started in the good state
//! with probability `prior_good` and absorbed into the bad state with
//! per-step hazard `hazard`. Time runs over `1..=horizon`; the jump time
//! `theta` takes values in `1..=horizon + 1`, where `horizon + 1` encodes
//! "no jump within the horizon". Likewise a declaration time of
//! `horizon + 1` means the detector stayed silent to the end.

use crate::error::{Error, Result};

/// The recommendation alphabet: the principal either recommends silence or
/// recommends declaring the jump.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Message {
    KeepSilent,
    Declare,
}

/// Parameters of a game instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Probability that the chain starts in the good state.
    pub prior_good: f64,
    /// Per-step probability of jumping from good to bad.
    pub hazard: f64,
    /// Number of decision periods.
    pub horizon: usize,
    /// Detector's cost per period of detection delay; a false alarm costs 1.
    pub delay_cost: f64,
}

impl ModelParams {
    pub fn new(prior_good: f64, hazard: f64, horizon: usize, delay_cost: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&prior_good) || prior_good.is_nan() {
            return Err(Error::InvalidParameter {
                name: "mu",
                value: prior_good,
                constraint: "must lie in [0, 1]",
            });
        }
        if !(0.0..=1.0).contains(&hazard) || hazard.is_nan() {
            return Err(Error::InvalidParameter {
                name: "q",
                value: hazard,
                constraint: "must lie in [0, 1]",
            });
        }
        if horizon < 1 {
            return Err(Error::InvalidParameter {
                name: "T",
                value: horizon as f64,
                constraint: "must be at least 1",
            });
        }
        if !(delay_cost >= 0.0) || !delay_cost.is_finite() {
            return Err(Error::InvalidParameter {
                name: "c",
                value: delay_cost,
                constraint: "must be finite and nonnegative",
            });
        }
        Ok(Self {
            prior_good,
            hazard,
            horizon,
            delay_cost,
        })
    }

    /// `P(theta > t)`: the chain is still good after period `t`.
    ///
    /// Defined for `t` in `0..=horizon + 1`; equals 1 at `t = 0` and 0 at
    /// `t = horizon + 1`.
    pub fn survival(&self, t: usize) -> Result<f64> {
        if t > self.horizon + 1 {
            return Err(Error::TimeOutOfRange {
                t,
                min: 0,
                max: self.horizon + 1,
            });
        }
        Ok(if t == 0 {
            1.0
        } else if t <= self.horizon {
            self.prior_good * (1.0 - self.hazard).powi(t as i32 - 1)
        } else {
            0.0
        })
    }

    /// `P(theta <= t)`, the complement of [`Self::survival`].
    pub fn prob_jumped_by(&self, t: usize) -> Result<f64> {
        Ok(1.0 - self.survival(t)?)
    }

    pub fn jump_distribution(&self) -> JumpDistribution {
        JumpDistribution::new(self)
    }
}

/// Probability mass function of the jump time over `1..=horizon + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpDistribution {
    pmf: Vec<f64>,
}

impl JumpDistribution {
    pub fn new(params: &ModelParams) -> Self {
        let t_max = params.horizon;
        let mu = params.prior_good;
        let q = params.hazard;
        let mut pmf = Vec::with_capacity(t_max + 1);
        pmf.push(1.0 - mu);
        for theta in 2..=t_max {
            pmf.push(mu * (1.0 - q).powi(theta as i32 - 2) * q);
        }
        if t_max >= 1 {
            pmf.push(mu * (1.0 - q).powi(t_max as i32 - 1));
        }
        Self { pmf }
    }

    /// Mass at jump time `theta` (1-based, up to `horizon + 1`).
    pub fn pmf_at(&self, theta: usize) -> f64 {
        assert!(
            (1..=self.pmf.len()).contains(&theta),
            "theta {theta} out of support"
        );
        self.pmf[theta - 1]
    }

    pub fn support_len(&self) -> usize {
        self.pmf.len()
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// `P(theta <= t)` by partial summation; `t = 0` gives 0.
    pub fn cdf(&self, t: usize) -> f64 {
        self.pmf[..t.min(self.pmf.len())].iter().sum()
    }

    /// Inverse-cdf draw from a single uniform variate in `[0, 1)`.
    pub fn sample(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (i, p) in self.pmf.iter().enumerate() {
            acc += p;
            if u < acc {
                return i + 1;
            }
        }
        self.pmf.len()
    }
}

/// Realized detector cost: a unit false-alarm cost when declaring early,
/// otherwise the per-period delay cost times the detection lag.
pub fn detector_cost(tau: usize, theta: usize, delay_cost: f64) -> f64 {
    if tau < theta {
        1.0
    } else {
        delay_cost * (tau - theta) as f64
    }
}

/// Outcome of a single play: the realized jump and declaration times and
/// the induced costs. A declaration time of `horizon + 1` means the
/// detector never declared, in which case the principal collects the whole
/// horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Episode {
    pub theta: usize,
    pub tau: usize,
    pub detector_cost: f64,
    pub principal_utility: f64,
}

impl Episode {
    pub fn new(theta: usize, tau: usize, delay_cost: f64) -> Self {
        Self {
            theta,
            tau,
            detector_cost: detector_cost(tau, theta, delay_cost),
            principal_utility: (tau - 1) as f64,
        }
    }
}
