use humorkit::Error;

/// Process exit codes.
pub mod code {
    pub const OTHER: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const RESOURCE: i32 = 3;
    pub const SCHEMA: i32 = 4;
    pub const DATA: i32 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Core(#[from] Error),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => code::CONFIG,
            CliError::Other(_) => code::OTHER,
            CliError::Core(e) => match e.root() {
                Error::Resource { .. } => code::RESOURCE,
                Error::Schema(_) => code::SCHEMA,
                Error::Argument(_) => code::CONFIG,
                Error::Value(_)
                | Error::Alignment(_)
                | Error::Parse { .. }
                | Error::Size(_)
                | Error::Shape(_)
                | Error::Lookup(_)
                | Error::Csv(_)
                | Error::Json(_) => code::DATA,
                Error::Io { .. } | Error::Example { .. } => code::OTHER,
            },
        }
    }
}
