use std::fmt;
use std::process::ExitCode;

/// Why a command failed, which decides the exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad configuration, flags or inputs. Exit code 1.
    Validation(anyhow::Error),
    /// A module failed while doing its work. Exit code 2.
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            Failure::Validation(_) => ExitCode::from(1),
            Failure::Runtime(_) => ExitCode::from(2),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(e) | Failure::Runtime(e) => {
                // library errors often repeat their source in their own message
                let mut text = e.to_string();
                for cause in e.chain().skip(1) {
                    let cause = cause.to_string();
                    if !text.contains(&cause) {
                        text.push_str(": ");
                        text.push_str(&cause);
                    }
                }
                f.write_str(&text)
            }
        }
    }
}

impl<E: std::error::Error + Send + Sync + 'static> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Runtime(e.into())
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;

pub fn invalid(message: impl fmt::Display) -> Failure {
    Failure::Validation(anyhow::anyhow!("{message}"))
}

pub trait ResultExt<T> {
    /// Classifies the error as a validation failure.
    fn invalid(self) -> CmdResult<T>;
    /// Classifies the error as a runtime failure with extra context.
    fn runtime(self, context: impl fmt::Display) -> CmdResult<T>;
}

impl<T, E: Into<anyhow::Error>> ResultExt<T> for Result<T, E> {
    fn invalid(self) -> CmdResult<T> {
        self.map_err(|e| Failure::Validation(e.into()))
    }

    fn runtime(self, context: impl fmt::Display) -> CmdResult<T> {
        self.map_err(|e| Failure::Runtime(e.into().context(context.to_string())))
    }
}
