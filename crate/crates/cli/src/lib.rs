//! Batch front-end for the relaxed-projection workbench.
//!
//! The library half hosts everything the `projlab` binary does — scenario
//! parsing ([`scenario`]), command execution and report emission
//! ([`commands`]) — so that integration tests can drive the exact same code
//! paths that the binary exposes.

pub mod commands;
pub mod scenario;

/// Failure modes of a command, each mapping to a process exit code:
/// configuration problems exit 2, capacity refusals exit 3, and a falsified
/// bound — the theory losing to an experiment, i.e. a defect — exits 4.
#[derive(Debug)]
pub enum CliError {
    /// Unusable scenario, filesystem trouble, or invalid combination (exit 2).
    Config(String),
    /// The request exceeds a guarded size limit (exit 3).
    Capacity(String),
    /// A theoretical envelope was violated at tolerance (exit 4).
    Violation(String),
}

impl CliError {
    /// The process exit code this error category maps to.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Capacity(_) => 3,
            CliError::Violation(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Capacity(m) => write!(f, "capacity error: {m}"),
            CliError::Violation(m) => write!(f, "bound violation: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<projlab_core::Error> for CliError {
    fn from(e: projlab_core::Error) -> Self {
        match e {
            projlab_core::Error::Capacity(m) => CliError::Capacity(m),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("i/o: {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_contract() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::Capacity("x".into()).exit_code(), 3);
        assert_eq!(CliError::Violation("x".into()).exit_code(), 4);
    }

    #[test]
    fn core_errors_map_onto_cli_categories() {
        let capacity: CliError = projlab_core::Error::Capacity("too many members".into()).into();
        assert_eq!(capacity.exit_code(), 3);
        let config: CliError =
            projlab_core::Error::InvalidParameter("η out of band".into()).into();
        assert_eq!(config.exit_code(), 2);
        assert!(config.to_string().contains("η out of band"));
    }
}
