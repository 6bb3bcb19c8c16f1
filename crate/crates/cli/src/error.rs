//! Exit-code classes and their one-line report.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Config,
    Input,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CliError {
    #[serde(rename = "error")]
    pub kind: Kind,
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(kind: Kind, message: impl Into<String>) -> Self {
        let code = match kind {
            Kind::Config => 2,
            Kind::Input => 3,
            Kind::Numeric => 4,
        };
        Self {
            kind,
            code,
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(Kind::Config, message)
    }

    pub fn input(message: impl Into<String>) -> Self {
        Self::new(Kind::Input, message)
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Self::new(Kind::Numeric, message)
    }

    pub fn code(&self) -> i32 {
        self.code
    }

    /// Single-line JSON; newlines in the message are flattened.
    pub fn line(&self) -> String {
        let flat = Self {
            message: self.message.split_whitespace().collect::<Vec<_>>().join(" "),
            ..self.clone()
        };
        serde_json::to_string(&flat).expect("plain struct serialises")
    }
}

impl From<stet::Error> for CliError {
    fn from(e: stet::Error) -> Self {
        use stet::Error::*;
        let msg = e.to_string();
        match e {
            InvalidParameter { .. } | FrequencyOutOfBand { .. } => Self::config(msg),
            Input(_) | Io(_) | SignalTooShort { .. } => Self::input(msg),
            GridMismatch(_) | ZeroEnergy(_) => Self::numeric(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::input(e.to_string())
    }
}
