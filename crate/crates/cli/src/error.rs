use hbl_core::kernel::KernelError;
use hbl_core::model::ModelError;
use hbl_core::mop::MopError;
use hbl_core::painleve::PainleveError;
use hbl_core::rh::RhError;
use hbl_core::scaling::ScalingError;
use serde_json::json;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub exit: i32,
    /// Machine-readable error code.
    pub code: &'static str,
    pub message: String,
}

impl CliError {
    pub fn config(message: String) -> Self {
        CliError { exit: EXIT_CONFIG, code: "config", message }
    }

    pub fn io(message: String) -> Self {
        CliError { exit: EXIT_CONFIG, code: "io", message }
    }

    pub fn numerical(code: &'static str, message: String) -> Self {
        CliError { exit: EXIT_NUMERICAL, code, message }
    }

    pub fn report(&self) -> String {
        json!({ "error": { "code": self.code, "exit": self.exit, "message": self.message } }).to_string()
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        let code = match e {
            ModelError::WrongRegime { .. } => "wrong_regime",
            ModelError::InvalidTime(_) => "invalid_time",
            ModelError::InvalidConfig(_) => "invalid_config",
            ModelError::UnsupportedFractions => "unsupported_fractions",
            ModelError::OutOfSupport { .. } => "out_of_support",
            ModelError::BranchCutEvaluation { .. } => "branch_cut",
            ModelError::InequalityNotFound => "inequality_not_found",
        };
        CliError { exit: EXIT_CONFIG, code, message: e.to_string() }
    }
}

impl From<MopError> for CliError {
    fn from(e: MopError) -> Self {
        match e {
            MopError::InvalidIndex(m) => CliError { exit: EXIT_CONFIG, code: "invalid_index", message: m },
            other => CliError::numerical("moment_system", other.to_string()),
        }
    }
}

impl From<RhError> for CliError {
    fn from(e: RhError) -> Self {
        match e {
            RhError::Mop(m) => m.into(),
            RhError::Kernel(k) => k.into(),
            other => CliError::numerical("riemann_hilbert", other.to_string()),
        }
    }
}

impl From<KernelError> for CliError {
    fn from(e: KernelError) -> Self {
        match e {
            KernelError::Mop(m) => m.into(),
            KernelError::Model(m) => m.into(),
            other => CliError::numerical("kernel", other.to_string()),
        }
    }
}

impl From<PainleveError> for CliError {
    fn from(e: PainleveError) -> Self {
        match e {
            PainleveError::NoConvergence { .. } => CliError::numerical("no_convergence", e.to_string()),
            other => CliError { exit: EXIT_CONFIG, code: "painleve_domain", message: other.to_string() },
        }
    }
}

impl From<ScalingError> for CliError {
    fn from(e: ScalingError) -> Self {
        match e {
            ScalingError::Model(m) => m.into(),
            ScalingError::Mop(m) => m.into(),
            ScalingError::Rh(r) => r.into(),
            ScalingError::Painleve(p) => p.into(),
            ScalingError::DegenerateData => CliError::numerical("degenerate_data", e.to_string()),
            ScalingError::InvalidInput(m) => CliError::config(m),
        }
    }
}
