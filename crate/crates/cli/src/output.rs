use crate::error::{CliError, CliResult, Code};
use serde::Serialize;
use std::fmt;
use std::io::{ErrorKind, Write};

macro_rules! say {
    ($($t:tt)*) => { $crate::output::emit(format_args!($($t)*)) };
}
pub(crate) use say;

#[derive(Clone, Copy, Debug, Default)]
pub struct Output {
    pub json: bool,
    pub check: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &'static str, pass: bool, detail: String) -> Self {
        Check { name, pass, detail }
    }
}

/// Prints the invariant results; any failure exits with the residual code.
pub fn print_checks(out: &Output, checks: &[Check]) -> CliResult<()> {
    if out.json {
        say!("{}", serde_json::to_string_pretty(checks)?);
    } else {
        for c in checks {
            let verdict = if c.pass { "PASS" } else { "FAIL" };
            if c.detail.is_empty() {
                say!("{verdict} {}", c.name);
            } else {
                say!("{verdict} {}: {}", c.name, c.detail);
            }
        }
    }
    match checks.iter().find(|c| !c.pass) {
        Some(c) => Err(CliError::new(Code::Residual, format!("invariant failed: {}", c.name))),
        None => Ok(()),
    }
}

/// Writes a versioned CSV: schema line, header, rows.
pub fn write_csv<W: Write>(mut w: W, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<()> {
    writeln!(w, "# schema=1")?;
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// `write_csv` to stdout; a closed pipe ends the process quietly.
pub fn print_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<()> {
    match write_csv(std::io::stdout().lock(), header, rows) {
        Err(e) if e.message.contains("Broken pipe") => std::process::exit(0),
        r => r,
    }
}

/// Prints a line to stdout; a closed pipe ends the process quietly.
pub fn emit(args: fmt::Arguments) {
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_fmt(args).and_then(|_| out.write_all(b"\n")) {
        if e.kind() == ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
    }
}
