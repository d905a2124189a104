//! Scenario configuration, orchestration and report artifacts.

mod artifacts;
mod config;
mod run;
mod sweep;

pub use artifacts::{
    write_config_echo, write_run, write_summary, write_sweep, CriterionSummary, RunArtifacts,
    ScenarioSummary, Status,
    Summary,
};
pub use config::{default_times, ScenarioConfig, SuiteConfig, SweepSettings};
pub use run::{
    prepare_and_run, run_scenario, Check, Scenario, ScenarioRun, IDENTITY_TOLERANCE, LP_EXPONENTS,
};
pub use sweep::{level_config, run_sweep, shrinks, SweepLevel, SweepResult};

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Applies `job` to every item on up to `threads` worker threads and returns
/// the results in input order.
pub fn parallel_map<T: Sync, R: Send>(
    items: &[T],
    threads: usize,
    job: impl Fn(&T) -> R + Sync,
) -> Vec<R> {
    let threads = threads.clamp(1, items.len().max(1));
    if threads == 1 {
        return items.iter().map(job).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = job(&items[i]);
                slots.lock().expect("no worker panicked")[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|r| r.expect("every item processed"))
        .collect()
}
