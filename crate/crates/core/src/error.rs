use thiserror::Error;

/// Library module that raised an [`Error`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Module {
    ArrayDesign,
    SignalModel,
    Coarray,
    Estimators,
    Experiments,
}

impl Module {
    pub fn name(self) -> &'static str {
        match self {
            Module::ArrayDesign => "array_design",
            Module::SignalModel => "signal_model",
            Module::Coarray => "coarray",
            Module::Estimators => "estimators",
            Module::Experiments => "experiments",
        }
    }
}

impl std::fmt::Display for Module {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// A documented precondition on an operation's inputs does not hold.
    #[error("[{module}] precondition violated: {reason}")]
    Precondition { module: Module, reason: String },

    /// The coarray does not cover every lag in [-(P-1), P-1].
    #[error("[coarray] precondition violated: difference set is not contiguous over [-{max_lag}, {max_lag}]; missing lags: {}", format_lags(.missing))]
    NonContiguousCoarray { max_lag: i64, missing: Vec<i64> },

    #[error("[coarray] precondition violated: IIR filter is unstable (max pole radius {max_pole_radius:.6} >= 1)")]
    UnstableFilter { max_pole_radius: f64 },

    #[error("[{module}] length mismatch for {what}: expected {expected}, got {actual}")]
    LengthMismatch {
        module: Module,
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("[estimators] precondition violated: model order M={order} exceeds P-1={max}; raise the rank threshold")]
    ModelOrder { order: usize, max: usize },

    #[error("[{module}] numerical failure: {reason}")]
    Numerical { module: Module, reason: String },

    #[error("[experiments] config error: {0}")]
    Config(String),

    #[error("[{module}] malformed input: {reason}")]
    Format { module: Module, reason: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn precondition(module: Module, reason: impl Into<String>) -> Self {
        Error::Precondition {
            module,
            reason: reason.into(),
        }
    }

    /// Module that raised the error, when one applies.
    pub fn module(&self) -> Option<Module> {
        match self {
            Error::Precondition { module, .. }
            | Error::LengthMismatch { module, .. }
            | Error::Numerical { module, .. }
            | Error::Format { module, .. } => Some(*module),
            Error::NonContiguousCoarray { .. } | Error::UnstableFilter { .. } => {
                Some(Module::Coarray)
            }
            Error::ModelOrder { .. } => Some(Module::Estimators),
            Error::Config(_) => Some(Module::Experiments),
            Error::Io(_) => None,
        }
    }

    /// True for configuration problems, as opposed to numeric or precondition failures.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Format { .. })
    }
}

fn format_lags(lags: &[i64]) -> String {
    const SHOWN: usize = 16;
    let head: Vec<String> = lags.iter().take(SHOWN).map(|l| l.to_string()).collect();
    if lags.len() > SHOWN {
        format!("{} ... ({} total)", head.join(", "), lags.len())
    } else {
        head.join(", ")
    }
}

pub type Result<T> = std::result::Result<T, Error>;
