//! Scenario-driven property harness for `dilation-core`.
//!
//! A run loads a [`ScenarioConfig`](config::ScenarioConfig), resolves it into a
//! [`RunPlan`](config::RunPlan), executes the selected suites and writes one
//! JSON line per check plus per-suite and run summaries.

pub mod config;
pub mod describe;
pub mod report;
pub mod scenario;
pub mod suites;

use std::io::{self, Write};
use std::time::Instant;

use config::RunPlan;
use suites::{run_suite, Context, SuiteOutcome};

/// Runs every suite of the plan in order, streaming records to `out`.
pub fn execute<W: Write>(plan: &RunPlan, out: &mut W) -> io::Result<Vec<SuiteOutcome>> {
    let start = Instant::now();
    let mut outcomes = Vec::with_capacity(plan.suites.len());
    for (suite, params) in &plan.suites {
        let outcome = run_suite(&Context { plan, suite: *suite, params });
        report::write_suite(out, &outcome)?;
        out.flush()?;
        outcomes.push(outcome);
    }
    report::write_run_summary(out, plan.seed, &outcomes, start.elapsed().as_secs_f64())?;
    out.flush()?;
    Ok(outcomes)
}
