//! Line-delimited JSON reports. `wall_time` is always the last field, so two
//! runs can be compared after cutting it off.

use std::io::{self, Write};

use serde::Serialize;

use crate::suites::{CaseRecord, SuiteOutcome};

#[derive(Serialize)]
struct RecordLine<'a> {
    suite: &'a str,
    case_id: &'a str,
    digest: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<String>,
    lhs: [f64; 2],
    rhs: [f64; 2],
    value_re: f64,
    value_im: f64,
    abs_error: f64,
    tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    route: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    frame_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    partition: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
    pass: bool,
    wall_time: f64,
}

#[derive(Serialize)]
struct SuiteSummary<'a> {
    suite: &'a str,
    summary: bool,
    cases: usize,
    passed: usize,
    failed: usize,
    pass: bool,
    wall_time: f64,
}

#[derive(Serialize)]
struct RunSummary {
    summary: &'static str,
    seed: u64,
    suites: usize,
    failed_suites: usize,
    pass: bool,
    wall_time: f64,
}

fn line<W: Write, T: Serialize>(w: &mut W, value: &T) -> io::Result<()> {
    serde_json::to_writer(&mut *w, value)?;
    w.write_all(b"\n")
}

pub fn write_record<W: Write>(w: &mut W, suite: &str, r: &CaseRecord) -> io::Result<()> {
    line(
        w,
        &RecordLine {
            suite,
            case_id: &r.case_id,
            digest: &r.digest,
            t: r.t.map(|t| t.to_string()),
            lhs: [r.lhs.re, r.lhs.im],
            rhs: [r.rhs.re, r.rhs.im],
            value_re: r.lhs.re,
            value_im: r.lhs.im,
            abs_error: r.abs_error,
            tolerance: r.tolerance,
            route: r.route.map(|x| x.as_str()),
            frame_size: r.frame_size,
            partition: r.partition,
            error: r.error.as_deref(),
            pass: r.pass,
            wall_time: r.wall_time,
        },
    )
}

/// Every case record, then the suite summary.
pub fn write_suite<W: Write>(w: &mut W, outcome: &SuiteOutcome) -> io::Result<()> {
    let name = outcome.suite.name();
    for r in &outcome.records {
        write_record(w, name, r)?;
    }
    line(
        w,
        &SuiteSummary {
            suite: name,
            summary: true,
            cases: outcome.records.len(),
            passed: outcome.passed(),
            failed: outcome.failed(),
            pass: outcome.failed() == 0,
            wall_time: outcome.wall_time,
        },
    )
}

pub fn write_run_summary<W: Write>(w: &mut W, seed: u64, outcomes: &[SuiteOutcome], wall_time: f64) -> io::Result<()> {
    let failed_suites = outcomes.iter().filter(|o| o.failed() > 0).count();
    line(
        w,
        &RunSummary {
            summary: "run",
            seed,
            suites: outcomes.len(),
            failed_suites,
            pass: failed_suites == 0,
            wall_time,
        },
    )
}

/// Drops the trailing `wall_time` field of a report line.
pub fn strip_wall_time(line: &str) -> &str {
    match line.rfind(",\"wall_time\":") {
        Some(i) => &line[..i],
        None => line,
    }
}
