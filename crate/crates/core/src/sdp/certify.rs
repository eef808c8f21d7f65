use serde::{Deserialize, Serialize};

use super::{SolveResult, SolveStatus};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Decision {
    Rejected,
    NotRejected,
    Inconclusive,
}

impl Decision {
    /// 0 notRejected, 2 rejected, 3 inconclusive.
    pub fn exit_code(self) -> i32 {
        match self {
            Decision::NotRejected => 0,
            Decision::Rejected => 2,
            Decision::Inconclusive => 3,
        }
    }
}

/// Rejection margin in units of the solver tolerance.
pub const MARGIN_FACTOR: f64 = 10.0;

/// Applies the rejection rule to a compatibility-mode solve.
///
/// Unbounded problems (possible for the polarized objective when probability
/// monomials lie outside the moment matrix) never reject.
pub fn certify(result: &SolveResult, epsilon: f64) -> Decision {
    match result.status {
        SolveStatus::Infeasible => Decision::Rejected,
        SolveStatus::Unbounded => Decision::NotRejected,
        SolveStatus::Inaccurate | SolveStatus::Timeout => Decision::Inconclusive,
        SolveStatus::Optimal => match result.value {
            Some(v) if v > epsilon + MARGIN_FACTOR * result.tol => Decision::Rejected,
            Some(_) => Decision::NotRejected,
            None => Decision::Inconclusive,
        },
    }
}
