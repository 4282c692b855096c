//! Report rendering: a human-readable table and a structured document with
//! a stable schema. Structured output carries no timings, so repeated runs
//! on identical inputs are byte-identical.

use qdc::calculus::Counterexample;
use qdc::suite::SuiteCheck;
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct CheckJson {
    pub name: String,
    pub status: &'static str,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<CounterexampleJson>,
}

#[derive(Serialize)]
pub struct CounterexampleJson {
    pub input: String,
    pub lhs: String,
    pub rhs: String,
}

impl From<&Counterexample> for CounterexampleJson {
    fn from(c: &Counterexample) -> Self {
        CounterexampleJson {
            input: c.input.clone(),
            lhs: c.lhs.clone(),
            rhs: c.rhs.clone(),
        }
    }
}

#[derive(Serialize)]
pub struct VerifyReportJson {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub command: &'static str,
    pub inputs: serde_json::Value,
    pub checks: Vec<CheckJson>,
    pub status: &'static str,
}

pub fn verify_json(inputs: serde_json::Value, checks: &[SuiteCheck]) -> VerifyReportJson {
    let all_pass = checks.iter().all(|c| c.pass);
    VerifyReportJson {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION"),
        command: "verify",
        inputs,
        checks: checks
            .iter()
            .map(|c| CheckJson {
                name: c.name.clone(),
                status: if c.pass { "pass" } else { "fail" },
                detail: c.detail.clone(),
                counterexample: c.counterexample.as_ref().map(|x| x.into()),
            })
            .collect(),
        status: if all_pass { "pass" } else { "fail" },
    }
}

pub fn print_verify_text(checks: &[SuiteCheck], elapsed: std::time::Duration) {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(10);
    for c in checks {
        println!(
            "{:<width$}  {}  {}",
            c.name,
            if c.pass { "PASS" } else { "FAIL" },
            c.detail,
            width = width
        );
        if let Some(ce) = &c.counterexample {
            println!("{:<width$}  input: {}", "", ce.input, width = width);
            println!("{:<width$}  lhs:   {}", "", ce.lhs, width = width);
            println!("{:<width$}  rhs:   {}", "", ce.rhs, width = width);
        }
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    println!(
        "{} checks, {} failed ({:.2}s)",
        checks.len(),
        failed,
        elapsed.as_secs_f64()
    );
}
