use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Io { .. } => 5,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

impl From<bvs_core::Error> for CliError {
    fn from(e: bvs_core::Error) -> Self {
        use bvs_core::Error as E;
        if e.is_numerical() {
            return CliError::Numerical(e.to_string());
        }
        match e {
            E::Data(_) | E::Dimension(_) => CliError::Data(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;
    use bvs_core::Error as E;

    #[test]
    fn core_errors_map_to_exit_codes() {
        assert_eq!(CliError::from(E::Config("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(E::TooManyVariables { p: 30, limit: 20 }).exit_code(), 2);
        assert_eq!(CliError::from(E::Data("x".into())).exit_code(), 3);
        assert_eq!(CliError::from(E::Dimension("x".into())).exit_code(), 3);
        assert_eq!(CliError::from(E::RankDeficient { size: 3 }).exit_code(), 4);
        assert_eq!(CliError::from(E::NumericalFailure { size: 3 }).exit_code(), 4);
        assert_eq!(CliError::from(E::DegenerateWeights { t: 0.5 }).exit_code(), 4);
    }
}
