use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

use crate::args::{CommonArgs, Format};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] poincarekit::Error),
    #[error("invalid input: {0}")]
    Usage(String),
    #[error("{0} violation(s) detected")]
    Violations(usize),
    #[error("cannot write the report: {0}")]
    Write(io::Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    /// 0 success, 1 numerical or internal failure, 2 violated inequality,
    /// 3 bad input, 4 budget exceeded.
    pub fn exit_code(&self) -> u8 {
        use poincarekit::Error as E;
        match self {
            CliError::Violations(_) => 2,
            CliError::Usage(_) => 3,
            CliError::Write(_) => 1,
            CliError::Lib(e) => match e {
                E::Budget { .. } => 4,
                E::Numerical { .. } | E::Internal(_) => 1,
                _ => 3,
            },
        }
    }
}

/// JSON envelope carrying the schema version and the command name.
#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

/// Single writer for the report, plus the per-cell summary lines. Summaries
/// go to stdout when the report goes to a file, else to stderr.
pub struct Sink {
    format: Format,
    path: Option<PathBuf>,
}

impl Sink {
    pub fn new(common: &CommonArgs) -> Self {
        Sink { format: common.format, path: common.output.clone() }
    }

    pub fn format(&self) -> Format {
        self.format
    }

    pub fn summary(&self, line: impl AsRef<str>) {
        if self.path.is_some() {
            println!("{}", line.as_ref());
        } else {
            eprintln!("{}", line.as_ref());
        }
    }

    pub fn write_raw(&self, text: &str) -> CliResult<()> {
        match &self.path {
            Some(path) => fs::write(path, text).map_err(CliError::Write),
            None => {
                let mut out = io::stdout().lock();
                out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(CliError::Write)
            }
        }
    }

    /// Writes `body` wrapped in the envelope, or `csv()` in CSV mode.
    pub fn emit<T: Serialize>(&self, command: &str, body: &T, csv: impl FnOnce() -> String) -> CliResult<()> {
        let text = match self.format {
            Format::Json => {
                let envelope = Envelope { schema_version: poincarekit::SCHEMA_VERSION, command, body };
                let mut s = serde_json::to_string_pretty(&envelope).map_err(poincarekit::Error::from)?;
                s.push('\n');
                s
            }
            Format::Csv => csv(),
        };
        self.write_raw(&text)
    }
}
