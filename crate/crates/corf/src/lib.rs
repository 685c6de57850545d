//! Command-line experiments and file formats for `corf-core`.

pub mod cli;
pub mod experiments;
pub mod formats;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    /// A certificate failed verification or was inconclusive.
    pub const VERIFY: u8 = 1;
    /// Bad arguments or files, or an element that is not loxodromic.
    pub const INPUT: u8 = 2;
    pub const NUMERICAL: u8 = 3;
    /// The tile search hit its frontier bound.
    pub const FRONTIER: u8 = 4;
    /// Strict mode and the axis lies in a wall.
    pub const DEGENERATE_AXIS: u8 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] corf_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use corf_core::Error as E;
        match self {
            CliError::Input(_) | CliError::Io(_) => exit::INPUT,
            CliError::Core(e) => match e {
                E::Inconclusive { .. } | E::NotSeparated { .. } => exit::VERIFY,
                E::FrontierExceeded { .. } => exit::FRONTIER,
                E::DegenerateAxis => exit::DEGENERATE_AXIS,
                E::Numerical(_) | E::NumericallyAmbiguous { .. } | E::NotConvex(_) => exit::NUMERICAL,
                E::DimensionMismatch { .. }
                | E::InvalidPoint { .. }
                | E::InvalidNormal { .. }
                | E::OutsideModel { .. }
                | E::OutOfRange(_)
                | E::NotLoxodromic { .. }
                | E::Validation(_)
                | E::InvalidWord(_) => exit::INPUT,
            },
        }
    }
}
