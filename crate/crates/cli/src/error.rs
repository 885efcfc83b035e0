use std::path::{Path, PathBuf};

use q2logic::bitstream::BitstreamError;
use q2logic::device::DeviceError;
use q2logic::perf::PerfError;
use q2logic::qasm::QasmError;
use q2logic::scheduler::ScheduleError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    BadParams(String),
    #[error("{0}")]
    Schedule(#[from] ScheduleError),
    #[error("verification failed: max L∞ {linf:.3e} exceeds tolerance {tolerance:.1e}")]
    Verification { linf: f64, tolerance: f64 },
    #[error("{0}")]
    Mismatch(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Decode { path: PathBuf, source: BitstreamError },
    #[error("{}: {message}", path.display())]
    Sidecar { path: PathBuf, message: String },
    #[error("device: {0}")]
    Device(#[from] DeviceError),
}

impl From<PerfError> for CliError {
    fn from(e: PerfError) -> Self {
        CliError::BadParams(e.to_string())
    }
}

impl CliError {
    /// 1: input or parameters rejected, 2: scheduling or verification failed,
    /// 3: file could not be read, written or decoded.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) | CliError::BadParams(_) => 1,
            CliError::Schedule(ScheduleError::InvalidConfig(_) | ScheduleError::QubitMismatch { .. }) => 1,
            CliError::Schedule(ScheduleError::Penalty(_)) => 1,
            CliError::Device(DeviceError::TooManyQubits { .. }) => 1,
            CliError::Schedule(_) | CliError::Verification { .. } | CliError::Mismatch(_) => 2,
            CliError::Io { .. } | CliError::Decode { .. } | CliError::Sidecar { .. } | CliError::Device(_) => 3,
        }
    }

    /// `file:line:col: message`, matching compiler diagnostics.
    pub fn parse(path: &Path, err: &QasmError) -> Self {
        let sep = if err.pos().is_some() { ":" } else { ": " };
        CliError::Parse(format!("{}{sep}{err}", path.display()))
    }

    pub fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
        move |source| CliError::Io { path: path.to_path_buf(), source }
    }
}
