//! Rows of a verification report, written as `check,instance,k,lhs,rhs,pass`.

use std::io::Write;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub check: String,
    pub instance: String,
    pub k: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl CheckRow {
    pub fn new(
        check: impl Into<String>,
        instance: impl Into<String>,
        k: Option<usize>,
        lhs: f64,
        rhs: f64,
        pass: bool,
    ) -> Self {
        Self {
            check: check.into(),
            instance: instance.into(),
            k,
            lhs,
            rhs,
            pass,
        }
    }
}

/// Empty `k` fields are written for checks that have no rank.
pub fn write_check_csv<W: Write>(rows: &[CheckRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "check,instance,k,lhs,rhs,pass")?;
    for r in rows {
        let k = r.k.map(|k| k.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.check, r.instance, k, r.lhs, r.rhs, r.pass
        )?;
    }
    Ok(())
}
