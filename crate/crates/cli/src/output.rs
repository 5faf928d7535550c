use std::io::{self, Write};

use mdsforge::{Error, ErrorKind};
use serde::Serialize;
use serde_json::Value;

pub const SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    False,
    Disagree,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::False => "false",
            Status::Disagree => "disagree",
        }
    }

    pub fn exit_code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::False | Status::Disagree => 1,
        }
    }

    pub fn of(holds: bool) -> Status {
        if holds {
            Status::Ok
        } else {
            Status::False
        }
    }
}

#[derive(Serialize)]
pub struct OutputRecord<'a> {
    pub schema: u32,
    pub command: &'a str,
    pub field: &'a str,
    pub payload: Value,
    pub status: &'a str,
}

impl<'a> OutputRecord<'a> {
    pub fn new(command: &'a str, field: &'a str, payload: Value, status: Status) -> Self {
        OutputRecord { schema: SCHEMA, command, field, payload, status: status.name() }
    }

    pub fn write(&self, out: &mut impl Write) -> io::Result<()> {
        serde_json::to_writer(&mut *out, self)?;
        out.write_all(b"\n")
    }
}

/// An error together with the text it was parsed from, if any.
#[derive(Debug)]
pub struct Failure {
    pub error: Error,
    pub source: Option<String>,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure { error, source: None }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Error::Io(e).into()
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Error::Io(io::Error::other(e)).into()
    }
}

pub trait WithSource<T> {
    fn with_source(self, text: &str) -> Result<T, Failure>;
}

impl<T> WithSource<T> for mdsforge::Result<T> {
    fn with_source(self, text: &str) -> Result<T, Failure> {
        self.map_err(|error| Failure { error, source: Some(text.to_string()) })
    }
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self.error.kind() {
            ErrorKind::Usage | ErrorKind::Io => 2,
            ErrorKind::Domain => 3,
        }
    }

    /// Diagnostic for stderr; parse errors point at the offending byte.
    pub fn render(&self) -> String {
        let mut msg = format!("error: {}", self.error);
        if let (Error::Parse { pos, .. }, Some(src)) = (&self.error, &self.source) {
            if !src.contains('\n') && *pos <= src.len() {
                msg.push_str(&format!("\n  {src}\n  {}^", " ".repeat(*pos)));
            }
        }
        msg
    }
}
