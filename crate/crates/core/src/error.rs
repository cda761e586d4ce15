use drtsp_lp::LpError;

#[derive(Debug, thiserror::Error)]
pub enum DrtspError {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("support error: {0}")]
    Support(String),
    #[error("sign pattern error: {0}")]
    SignPattern(String),
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),
    /// The recourse LP is unbounded, so its dual is infeasible.
    #[error("recourse is not sufficiently expensive: {0}")]
    SufficientlyExpensiveViolation(String),
    #[error("recourse infeasible: {0}")]
    RecourseInfeasible(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("scale guard: {0}")]
    Scale(String),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<LpError> for DrtspError {
    fn from(e: LpError) -> Self {
        match e {
            LpError::Scale(s) => DrtspError::Scale(s),
            other => DrtspError::Solver(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, DrtspError>;
