//! Parameter sweeps: patience-enhancement maps over two free parameters
//! and utility-versus-delay-cost comparison curves.

use rayon::prelude::*;

use crate::benchmarks::BenchmarkSuite;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::solver;

/// Which of the three scalar parameters a patience sweep holds fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedParam {
    Mu,
    Q,
    C,
}

impl FixedParam {
    pub fn name(self) -> &'static str {
        match self {
            FixedParam::Mu => "mu",
            FixedParam::Q => "q",
            FixedParam::C => "c",
        }
    }

    /// Names of the two swept parameters, in row/column order.
    pub fn free_names(self) -> (&'static str, &'static str) {
        match self {
            FixedParam::Mu => ("q", "c"),
            FixedParam::Q => ("mu", "c"),
            FixedParam::C => ("mu", "q"),
        }
    }
}

/// One grid cell of a patience sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct PatienceCell {
    pub params: ModelParams,
    /// The detector's open-loop stopping time.
    pub stopping_time: usize,
    /// The optimal mechanism's threshold period.
    pub threshold: usize,
    /// Extra silent periods bought by commitment: threshold minus
    /// stopping time, reported as zero when the detector would sit out
    /// the whole horizon anyway.
    pub enhancement: i64,
}

/// A full patience map plus its threshold summary.
#[derive(Debug, Clone, PartialEq)]
pub struct PatienceSweep {
    pub fixed: FixedParam,
    pub fixed_value: f64,
    pub grid_n: usize,
    pub horizon: usize,
    /// Values taken by each free parameter, an open uniform grid that
    /// avoids the degenerate faces of the cube.
    pub grid_values: Vec<f64>,
    /// Row-major over (first free parameter, second free parameter).
    pub cells: Vec<PatienceCell>,
    /// Percentage of cells with enhancement at least 1, 4, 7 and 10.
    pub threshold_pcts: [f64; 4],
    /// Cells whose open-loop stopping time already exhausts the horizon;
    /// their enhancement is reported as zero.
    pub silent_horizon_cells: usize,
}

pub const ENHANCEMENT_LEVELS: [i64; 4] = [1, 4, 7, 10];

/// Evaluates the patience enhancement on a `grid_n x grid_n` open grid
/// over the two parameters not held fixed.
pub fn patience_sweep(
    fixed: FixedParam,
    fixed_value: f64,
    grid_n: usize,
    horizon: usize,
) -> Result<PatienceSweep> {
    if grid_n < 2 {
        return Err(Error::InvalidParameter {
            name: "grid",
            value: grid_n as f64,
            constraint: "must be at least 2",
        });
    }
    if !(0.0..=1.0).contains(&fixed_value) {
        return Err(Error::InvalidParameter {
            name: "fix",
            value: fixed_value,
            constraint: "fixed value must lie in [0, 1]",
        });
    }
    let grid_values: Vec<f64> = (1..=grid_n)
        .map(|i| i as f64 / (grid_n + 1) as f64)
        .collect();
    let cells: Vec<PatienceCell> = (0..grid_n * grid_n)
        .into_par_iter()
        .map(|index| {
            let row = grid_values[index / grid_n];
            let col = grid_values[index % grid_n];
            let (mu, q, c) = match fixed {
                FixedParam::Mu => (fixed_value, row, col),
                FixedParam::Q => (row, fixed_value, col),
                FixedParam::C => (row, col, fixed_value),
            };
            let params = ModelParams::new(mu, q, horizon, c).expect("grid values in domain");
            cell(params)
        })
        .collect();
    let total = cells.len() as f64;
    let mut threshold_pcts = [0.0; 4];
    for (slot, &level) in ENHANCEMENT_LEVELS.iter().enumerate() {
        let count = cells.iter().filter(|c| c.enhancement >= level).count();
        threshold_pcts[slot] = 100.0 * count as f64 / total;
    }
    let silent_horizon_cells = cells
        .iter()
        .filter(|c| c.stopping_time == horizon + 1)
        .count();
    Ok(PatienceSweep {
        fixed,
        fixed_value,
        grid_n,
        horizon,
        grid_values,
        cells,
        threshold_pcts,
        silent_horizon_cells,
    })
}

fn cell(params: ModelParams) -> PatienceCell {
    let result = solver::solve_fast(&params);
    let stopping_time = result.no_info_stopping_time;
    let enhancement = if stopping_time == params.horizon + 1 {
        0
    } else {
        result.mechanism.threshold as i64 - stopping_time as i64
    };
    PatienceCell {
        params,
        stopping_time,
        threshold: result.mechanism.threshold,
        enhancement,
    }
}

/// Utilities of the optimal mechanism and the three benchmarks at one
/// delay cost.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonPoint {
    pub delay_cost: f64,
    pub optimal: f64,
    pub no_info: f64,
    pub full_info: f64,
    pub static_best: f64,
    /// Percentage improvement of the optimal mechanism over the best
    /// benchmark; absent when the best benchmark is zero.
    pub improvement_pct: Option<f64>,
}

/// Sweeps the delay cost over the given grid, holding the other
/// parameters at `base`.
pub fn utility_vs_c(base: &ModelParams, c_grid: &[f64]) -> Result<Vec<ComparisonPoint>> {
    for &c in c_grid {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::InvalidParameter {
                name: "c",
                value: c,
                constraint: "sweep grid must lie in [0, 1]",
            });
        }
    }
    Ok(c_grid
        .par_iter()
        .map(|&c| {
            let params = ModelParams::new(base.prior_good, base.hazard, base.horizon, c)
                .expect("validated above");
            let optimal = solver::solve_fast(&params).utility;
            let suite = BenchmarkSuite::compute(&params);
            let best = suite.best();
            ComparisonPoint {
                delay_cost: c,
                optimal,
                no_info: suite.no_info_utility,
                full_info: suite.full_info_utility,
                static_best: suite.static_utility,
                improvement_pct: if best > 0.0 {
                    Some(100.0 * (optimal - best) / best)
                } else {
                    None
                },
            }
        })
        .collect())
}
