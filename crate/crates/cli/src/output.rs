use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::ValueEnum;
use knapsack_secretary::analysis::BoundReport;
use knapsack_secretary::probability::{IdentityReport, ProbabilityTable};
use serde::Serialize;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub struct Sink {
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl Sink {
    pub fn write(&self, text: &str) -> std::io::Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, text),
            None => std::io::stdout().lock().write_all(text.as_bytes()),
        }
    }

    pub fn write_json<T: Serialize>(&self, value: &T) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
        text.push('\n');
        self.write(&text)
    }
}

fn format_inputs(r: &BoundReport) -> String {
    r.inputs.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

/// `name,<key>,computed,reference_value,abs_err,pass`. With `key` naming an
/// input the column holds that input; otherwise all inputs are listed.
pub fn bounds_csv(key: &str, reports: &[BoundReport]) -> String {
    let mut out = format!("name,{key},computed,reference_value,abs_err,pass\n");
    for r in reports {
        let param = match r.inputs.get(key) {
            Some(v) => v.to_string(),
            None if key == "inputs" => format_inputs(r),
            None => String::new(),
        };
        let reference = r.target.map(|t| t.value.to_string()).unwrap_or_default();
        let err = r.abs_err().map(|e| e.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{},{},{},{}", r.name, param, r.value, reference, err, r.pass()).unwrap();
    }
    out
}

/// `quantity,i,j,num,den` rows for `p_i(j)` and `P_i`.
pub fn table_csv(table: &ProbabilityTable) -> String {
    let mut out = String::from("quantity,i,j,num,den\n");
    for i in 1..=table.n() {
        for j in 1..=table.slots() {
            let p = table.p(i, j);
            writeln!(out, "p,{i},{j},{},{}", p.numer(), p.denom()).unwrap();
        }
        let p = table.packed_prob(i);
        writeln!(out, "P,{i},,{},{}", p.numer(), p.denom()).unwrap();
    }
    out
}

/// `identity,checked,violations` rows.
pub fn identity_csv(report: &IdentityReport) -> String {
    let mut out = String::from("identity,checked,violations\n");
    for (id, &checked) in &report.checked {
        let bad = report.violations.iter().filter(|v| v.identity == *id).count();
        writeln!(out, "{id},{checked},{bad}").unwrap();
    }
    out
}
