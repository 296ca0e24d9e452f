use romforge::RomError;

/// Process exit codes.
pub mod exit {
    pub const ARGUMENT: i32 = 2;
    pub const FORMAT: i32 = 3;
    pub const CONVERGENCE: i32 = 4;
    pub const TRAINING: i32 = 5;
    pub const IO: i32 = 6;
    pub const OTHER: i32 = 7;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] RomError),
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: line {line}: {msg}")]
    Parse {
        path: String,
        line: u64,
        msg: String,
    },
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Usage(_) => exit::ARGUMENT,
            CliError::Parse { .. } => exit::FORMAT,
            CliError::Core(e) => core_code(e),
        }
    }
}

fn core_code(e: &RomError) -> i32 {
    match e {
        RomError::DesignFailures { first, .. } => core_code(first),
        RomError::Argument(_) => exit::ARGUMENT,
        RomError::Format(_) => exit::FORMAT,
        RomError::Convergence { .. } => exit::CONVERGENCE,
        RomError::Training { .. } | RomError::NonFiniteGradient { .. } => exit::TRAINING,
        RomError::Io { .. } => exit::IO,
        _ => exit::OTHER,
    }
}
