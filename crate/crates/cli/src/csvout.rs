//! CSV emission: plain rows under a commented header block carrying the full
//! resolved configuration, so every output file is self-describing and
//! diffable.

use crate::context::Context;
use crate::CliError;
use std::io::Write;
use std::path::PathBuf;

pub struct CsvWriter {
    out: Box<dyn Write>,
}

impl CsvWriter {
    /// `None` or `-` writes to stdout.
    pub fn create(path: Option<&PathBuf>) -> Result<Self, CliError> {
        let out: Box<dyn Write> = match path {
            Some(p) if p.as_os_str() != "-" => Box::new(
                std::fs::File::create(p)
                    .map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?,
            ),
            _ => Box::new(std::io::stdout()),
        };
        Ok(Self { out })
    }

    pub fn header(
        &mut self,
        ctx: &Context,
        command: &str,
        extra: &[String],
        columns: &[&str],
    ) -> Result<(), CliError> {
        writeln!(self.out, "# tiltnet {command}").map_err(CliError::io)?;
        writeln!(self.out, "# config_hash={}", ctx.hash).map_err(CliError::io)?;
        writeln!(self.out, "# seed={}", ctx.seed).map_err(CliError::io)?;
        writeln!(
            self.out,
            "# units: thresholds and antenna gains in dB, distances in m, powers in W, densities in 1/m^2, EE in bits/s/Hz/W"
        )
        .map_err(CliError::io)?;
        for line in extra {
            writeln!(self.out, "# {line}").map_err(CliError::io)?;
        }
        let mut section = String::new();
        for line in ctx.config_lines() {
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if trimmed.starts_with('[') {
                section = trimmed.trim_matches(['[', ']']).to_string();
            } else if let Some((k, v)) = trimmed.split_once('=') {
                writeln!(self.out, "# cfg {section}.{}={}", k.trim(), v.trim())
                    .map_err(CliError::io)?;
            }
        }
        writeln!(self.out, "{}", columns.join(",")).map_err(CliError::io)
    }

    pub fn row(&mut self, fields: &[String]) -> Result<(), CliError> {
        writeln!(self.out, "{}", fields.join(",")).map_err(CliError::io)
    }
}

pub fn fmt(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.abs() >= 1e-3 && v.abs() < 1e7 {
        format!("{v:.6}")
    } else {
        format!("{v:.6e}")
    }
}
