//! Monte-Carlo simulation of the principal–detector interaction.
//!
//! Every episode draws from its own random stream, derived from the
//! master seed and the episode index by ChaCha8's 64-bit stream splitting.
//! Reports are therefore bit-identical for a fixed seed and episode
//! count, no matter how the episodes are scheduled across workers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::detector::{self, DetectorSolution};
use crate::error::{Error, Result};
use crate::mechanisms::SilentPathPolicy;
use crate::model::{Episode, JumpDistribution, ModelParams};

/// Identifier of the random-number scheme, recorded in run outputs so
/// archived results carry their provenance.
pub const RNG_SCHEME: &str = "chacha8/seed-key.episode-stream";

/// How the detector reacts to recommendations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorMode {
    /// Follow every recommendation literally.
    Obedient,
    /// Act on the dynamic-programming best response at each history.
    BestResponse,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub n_episodes: usize,
    pub seed: u64,
    pub detector_mode: DetectorMode,
}

/// Aggregates over simulated episodes. Standard errors are sample
/// standard deviations over the square root of the episode count, absent
/// when a single episode leaves them undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub n_episodes: usize,
    pub mean_principal_utility: f64,
    pub stderr_utility: Option<f64>,
    pub mean_detector_cost: f64,
    pub stderr_cost: Option<f64>,
    /// Fraction of episodes declared strictly before the jump.
    pub false_alarm_rate: f64,
    /// Mean detection lag in periods, counting false-alarm episodes as
    /// zero lag.
    pub mean_delay: f64,
}

/// Draws a jump time by inverting the cumulative distribution on a single
/// uniform variate.
pub fn sample_theta(params: &ModelParams, rng: &mut impl Rng) -> usize {
    params.jump_distribution().sample(rng.gen::<f64>())
}

enum Behavior<'a> {
    Obedient,
    BestResponse(&'a DetectorSolution),
}

fn play(
    params: &ModelParams,
    policy: &SilentPathPolicy,
    dist: &JumpDistribution,
    behavior: &Behavior,
    rng: &mut ChaCha8Rng,
) -> Episode {
    let theta = dist.sample(rng.gen::<f64>());
    for t in 1..=params.horizon {
        let silence_prob = if t >= theta {
            policy.bad_at(t)
        } else {
            policy.good_at(t)
        };
        let silent = rng.gen::<f64>() < silence_prob;
        if !silent {
            // A declare recommendation ends the game in both modes: the
            // obedient detector follows it, and the best responder has
            // learned the state is bad.
            return Episode::new(theta, t, params.delay_cost);
        }
        if let Behavior::BestResponse(solution) = behavior {
            let wait = solution.wait_is_optimal.get(t - 1).copied().unwrap_or(false);
            if !wait {
                return Episode::new(theta, t, params.delay_cost);
            }
        }
    }
    Episode::new(theta, params.horizon + 1, params.delay_cost)
}

/// Simulates one episode. In best-response mode the policy must keep the
/// good state silent so the reduced dynamic program applies.
pub fn run_episode(
    params: &ModelParams,
    policy: &SilentPathPolicy,
    mode: DetectorMode,
    rng: &mut ChaCha8Rng,
) -> Result<Episode> {
    let dist = params.jump_distribution();
    let solution = match mode {
        DetectorMode::Obedient => None,
        DetectorMode::BestResponse => Some(detector::solve_dp(params, policy)?),
    };
    let behavior = match &solution {
        None => Behavior::Obedient,
        Some(s) => Behavior::BestResponse(s),
    };
    Ok(play(params, policy, &dist, &behavior, rng))
}

/// Runs the configured number of episodes on independent substreams and
/// aggregates them in episode order.
pub fn estimate(
    params: &ModelParams,
    policy: &SilentPathPolicy,
    config: &SimConfig,
) -> Result<SimReport> {
    if config.n_episodes < 1 {
        return Err(Error::InvalidParameter {
            name: "episodes",
            value: config.n_episodes as f64,
            constraint: "must be at least 1",
        });
    }
    if policy.horizon() != params.horizon {
        return Err(Error::InvalidParameter {
            name: "policy",
            value: policy.horizon() as f64,
            constraint: "policy horizon must match the model horizon",
        });
    }
    let dist = params.jump_distribution();
    let solution = match config.detector_mode {
        DetectorMode::Obedient => None,
        DetectorMode::BestResponse => Some(detector::solve_dp(params, policy)?),
    };
    let episodes: Vec<Episode> = (0..config.n_episodes)
        .into_par_iter()
        .map(|index| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(index as u64);
            let behavior = match &solution {
                None => Behavior::Obedient,
                Some(s) => Behavior::BestResponse(s),
            };
            play(params, policy, &dist, &behavior, &mut rng)
        })
        .collect();
    Ok(summarize(&episodes))
}

fn summarize(episodes: &[Episode]) -> SimReport {
    let n = episodes.len();
    let mean = |f: &dyn Fn(&Episode) -> f64| episodes.iter().map(|e| f(e)).sum::<f64>() / n as f64;
    let mean_utility = mean(&|e| e.principal_utility);
    let mean_cost = mean(&|e| e.detector_cost);
    let stderr = |f: &dyn Fn(&Episode) -> f64, m: f64| {
        if n < 2 {
            return None;
        }
        let ss: f64 = episodes.iter().map(|e| (f(e) - m).powi(2)).sum();
        Some((ss / (n - 1) as f64).sqrt() / (n as f64).sqrt())
    };
    SimReport {
        n_episodes: n,
        mean_principal_utility: mean_utility,
        stderr_utility: stderr(&|e| e.principal_utility, mean_utility),
        mean_detector_cost: mean_cost,
        stderr_cost: stderr(&|e| e.detector_cost, mean_cost),
        false_alarm_rate: episodes.iter().filter(|e| e.tau < e.theta).count() as f64 / n as f64,
        mean_delay: mean(&|e| e.tau.saturating_sub(e.theta) as f64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::TbpMechanism;
    use crate::solver;

    fn params(mu: f64, q: f64, horizon: usize, c: f64) -> ModelParams {
        ModelParams::new(mu, q, horizon, c).unwrap()
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn theta_degenerate_draws() {
        let mut r = rng(7);
        let p = params(0.0, 0.3, 5, 0.1);
        for _ in 0..20 {
            assert_eq!(sample_theta(&p, &mut r), 1);
        }
        let p = params(1.0, 0.0, 5, 0.1);
        for _ in 0..20 {
            assert_eq!(sample_theta(&p, &mut r), 6);
        }
    }

    #[test]
    fn theta_empirical_pmf() {
        let p = params(0.9, 0.3, 3, 0.1);
        let dist = p.jump_distribution();
        let n = 200_000;
        let mut counts = [0usize; 4];
        let mut r = rng(42);
        for _ in 0..n {
            counts[dist.sample(r.gen::<f64>()) - 1] += 1;
        }
        for (theta, &count) in counts.iter().enumerate() {
            let prob = dist.pmf_at(theta + 1);
            let se = (prob * (1.0 - prob) / n as f64).sqrt();
            let diff = (count as f64 / n as f64 - prob).abs();
            assert!(diff <= 4.0 * se, "theta={} diff={diff} se={se}", theta + 1);
        }
    }

    #[test]
    fn full_information_detects_exactly() {
        let p = params(0.7, 0.3, 8, 0.4);
        let policy = SilentPathPolicy::full_information(8);
        let mut r = rng(3);
        for _ in 0..200 {
            let e = run_episode(&p, &policy, DetectorMode::Obedient, &mut r).unwrap();
            assert_eq!(e.tau, e.theta.min(9));
            assert_eq!(e.detector_cost, 0.0);
        }
    }

    #[test]
    fn best_response_to_no_information_stops_at_open_loop_time() {
        let p = params(0.9, 0.3, 12, 0.1);
        let policy = SilentPathPolicy::no_information(12);
        let stop = solver::no_info_stopping_time(&p);
        let mut r = rng(11);
        for _ in 0..100 {
            let e = run_episode(&p, &policy, DetectorMode::BestResponse, &mut r).unwrap();
            assert_eq!(e.tau, stop);
        }
    }

    #[test]
    fn modes_agree_on_obedient_policy() {
        let p = params(0.9, 0.3, 10, 0.1);
        let policy = solver::solve(&p).mechanism.to_silent_path(10).unwrap();
        let cfg = |mode| SimConfig {
            n_episodes: 500,
            seed: 99,
            detector_mode: mode,
        };
        let a = estimate(&p, &policy, &cfg(DetectorMode::Obedient)).unwrap();
        let b = estimate(&p, &policy, &cfg(DetectorMode::BestResponse)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn estimate_matches_closed_form_within_stderr() {
        let p = params(0.9, 0.3, 20, 0.1);
        let mech = solver::solve(&p).mechanism;
        let policy = mech.to_silent_path(20).unwrap();
        let report = estimate(
            &p,
            &policy,
            &SimConfig {
                n_episodes: 20_000,
                seed: 2024,
                detector_mode: DetectorMode::Obedient,
            },
        )
        .unwrap();
        let closed = mech.expected_utility(&p);
        let se = report.stderr_utility.unwrap();
        assert!(
            (report.mean_principal_utility - closed).abs() <= 3.0 * se,
            "mc={} closed={closed} se={se}",
            report.mean_principal_utility
        );
        // Aggregates reproduce the cost decomposition.
        let recomposed = report.false_alarm_rate + p.delay_cost * report.mean_delay;
        assert!((report.mean_detector_cost - recomposed).abs() < 1e-12);
    }

    #[test]
    fn single_episode_has_no_stderr() {
        let p = params(0.9, 0.3, 5, 0.1);
        let policy = SilentPathPolicy::full_information(5);
        let report = estimate(
            &p,
            &policy,
            &SimConfig {
                n_episodes: 1,
                seed: 5,
                detector_mode: DetectorMode::Obedient,
            },
        )
        .unwrap();
        assert!(report.stderr_utility.is_none());
        assert!(report.stderr_cost.is_none());
    }

    #[test]
    fn reports_are_reproducible() {
        let p = params(0.8, 0.2, 15, 0.3);
        let policy = TbpMechanism::new(4, 0.5, 15)
            .unwrap()
            .to_silent_path(15)
            .unwrap();
        let cfg = SimConfig {
            n_episodes: 3_000,
            seed: 77,
            detector_mode: DetectorMode::Obedient,
        };
        let a = estimate(&p, &policy, &cfg).unwrap();
        let b = estimate(&p, &policy, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn worker_count_does_not_change_the_report() {
        let p = params(0.8, 0.2, 15, 0.3);
        let policy = solver::solve(&p).mechanism.to_silent_path(15).unwrap();
        let cfg = SimConfig {
            n_episodes: 2_000,
            seed: 123,
            detector_mode: DetectorMode::BestResponse,
        };
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| estimate(&p, &policy, &cfg))
            .unwrap();
        let many = rayon::ThreadPoolBuilder::new()
            .num_threads(8)
            .build()
            .unwrap()
            .install(|| estimate(&p, &policy, &cfg))
            .unwrap();
        assert_eq!(single, many);
    }

    #[test]
    fn rejects_zero_episodes() {
        let p = params(0.5, 0.5, 4, 0.5);
        let policy = SilentPathPolicy::no_information(4);
        let cfg = SimConfig {
            n_episodes: 0,
            seed: 0,
            detector_mode: DetectorMode::Obedient,
        };
        assert!(estimate(&p, &policy, &cfg).is_err());
    }
}
