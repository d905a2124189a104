use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::config::ScenarioConfig;
use crate::scenario::run::{prepare_and_run, Check};

/// One mesh of a refinement study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepLevel {
    pub level: usize,
    pub h: f64,
    pub dt: f64,
    /// `max(U - V, 0)` over the snapshot grid.
    pub max_gap_pos: f64,
    /// `max |U - V|` for equality cases.
    pub equality_gap: Option<f64>,
    pub max_v: f64,
    /// Checks of the level's own run that failed.
    pub failed_checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub name: String,
    pub ratio: f64,
    pub levels: Vec<SweepLevel>,
    pub passed: bool,
    /// Why the study failed, if it did.
    pub failure: Option<String>,
}

/// The config of level `k`: mesh refined by `2^k`, time step divided by `4^k`.
pub fn level_config(config: &ScenarioConfig, k: usize) -> ScenarioConfig {
    let factor = 1usize << k;
    let mut out = config.clone();
    out.domain = config.domain.refined(factor);
    out.dt = config.dt / (factor * factor) as f64;
    out
}

/// Whether `gaps` shrink by `ratio` per level, treating values at or below
/// the per-level `floors` as converged.
pub fn shrinks(gaps: &[f64], floors: &[f64], ratio: f64) -> Option<usize> {
    (1..gaps.len()).find(|&k| !(gaps[k] <= (gaps[k - 1] / ratio).max(floors[k])))
}

/// Runs the scenario on successively refined meshes with `dt` proportional to `h^2`.
pub fn run_sweep(config: &ScenarioConfig) -> Result<SweepResult> {
    let config = config.normalized()?;
    if !config.refinement_sweep {
        return Err(Error::config(
            "refinement_sweep",
            "the scenario is not flagged for a refinement sweep",
        ));
    }
    let mut levels = Vec::with_capacity(config.sweep.levels);
    for k in 0..config.sweep.levels {
        let run = prepare_and_run(&level_config(&config, k))?;
        log::info!(
            "sweep {} level {k}: h = {:e}, max(U - V) = {:e}",
            config.name,
            run.spacing,
            run.report.global_max.gap
        );
        levels.push(SweepLevel {
            level: k,
            h: run.spacing,
            dt: run.dt,
            max_gap_pos: run.report.global_max.gap.max(0.0),
            equality_gap: run.report.equality_gap,
            max_v: run.max_v(),
            failed_checks: run.failures().cloned().collect(),
        });
    }
    let floors: Vec<f64> = levels.iter().map(|l| config.sweep.floor * l.max_v).collect();
    let ratio = config.sweep.ratio;
    let positive: Vec<f64> = levels.iter().map(|l| l.max_gap_pos).collect();
    let mut failure = shrinks(&positive, &floors, ratio).map(|k| {
        format!(
            "max(U - V)+ went from {:e} to {:e} at level {k}, less than a {ratio}x reduction",
            positive[k - 1], positive[k]
        )
    });
    if config.equality_case && failure.is_none() {
        let eq: Vec<f64> = levels.iter().map(|l| l.equality_gap.unwrap_or(0.0)).collect();
        failure = shrinks(&eq, &floors, ratio).map(|k| {
            format!(
                "equality gap went from {:e} to {:e} at level {k}, less than a {ratio}x reduction",
                eq[k - 1], eq[k]
            )
        });
    }
    Ok(SweepResult {
        name: config.name.clone(),
        ratio,
        passed: failure.is_none(),
        levels,
        failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shrink_rule() {
        assert_eq!(shrinks(&[1.0, 0.5, 0.2], &[0.0; 3], 1.5), None);
        assert_eq!(shrinks(&[1.0, 0.8, 0.2], &[0.0; 3], 1.5), Some(1));
        assert_eq!(shrinks(&[0.0, 0.0, 0.0], &[0.0; 3], 1.5), None);
        assert_eq!(shrinks(&[1e-12, 5e-12, 1e-13], &[1e-11; 3], 1.5), None);
    }
}
