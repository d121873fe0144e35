use std::fmt;

/// Exit code for success.
pub const EXIT_OK: i32 = 0;
/// Exit code for invalid or unparsable input.
pub const EXIT_INPUT: i32 = 1;
/// Exit code for failures not caused by the input.
pub const EXIT_INTERNAL: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Internal(String),
}

impl CliError {
    pub fn input(e: impl fmt::Display) -> Self {
        CliError::Input(e.to_string())
    }

    pub fn internal(e: impl fmt::Display) -> Self {
        CliError::Internal(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Tags a fallible call with the exit class of its failure.
pub trait Classify<T> {
    fn input_err(self, ctx: &str) -> CliResult<T>;
    fn internal_err(self, ctx: &str) -> CliResult<T>;
}

impl<T, E: fmt::Display> Classify<T> for Result<T, E> {
    fn input_err(self, ctx: &str) -> CliResult<T> {
        self.map_err(|e| CliError::Input(format!("{ctx}: {e}")))
    }

    fn internal_err(self, ctx: &str) -> CliResult<T> {
        self.map_err(|e| CliError::Internal(format!("{ctx}: {e}")))
    }
}
