//! Numeric conic programs: assembly from symbolic specs, solving, SDPA
//! export and the rejection rule.

mod assemble;
mod certify;
mod ipm;
mod presolve;
mod problem;
mod sdpa;

use std::time::{Duration, Instant};

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

pub use assemble::{assemble, AssemblyInput, VariableLayout};
pub use certify::{certify, Decision, MARGIN_FACTOR};
pub use problem::{Entry, LinearRow, PointResiduals, PsdBlock, SdpProblem};
pub use sdpa::{export_sdpa, import_sdpa};

use crate::error::Result;
use ipm::IpmStatus;
use presolve::Presolved;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    Inaccurate,
    Timeout,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SolverSettings {
    /// Relative gap and feasibility tolerance.
    pub tol: f64,
    /// Seconds.
    pub time_limit: Option<f64>,
    pub max_iterations: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tol: 1e-8,
            time_limit: None,
            max_iterations: 200,
        }
    }
}

/// Relative residuals at the reported point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Present iff the status is optimal or inaccurate.
    pub value: Option<f64>,
    /// Dual objective, a lower bound on the optimum when dual feasible.
    pub lower_bound: Option<f64>,
    #[serde(skip)]
    pub x: Vec<f64>,
    pub residuals: Residuals,
    pub iterations: usize,
    /// Seconds.
    pub solve_time: f64,
    pub tol: f64,
}

impl SolveResult {
    fn terminal(status: SolveStatus, p: &SdpProblem, settings: &SolverSettings, start: Instant) -> Self {
        SolveResult {
            status,
            value: None,
            lower_bound: None,
            x: vec![0.0; p.num_vars],
            residuals: Residuals::default(),
            iterations: 0,
            solve_time: start.elapsed().as_secs_f64(),
            tol: settings.tol,
        }
    }
}

/// Presolves equalities away and runs the interior-point method.
pub fn solve(p: &SdpProblem, settings: &SolverSettings) -> Result<SolveResult> {
    p.validate()?;
    let start = Instant::now();
    let deadline = settings
        .time_limit
        .map(|s| start + Duration::from_secs_f64(s.max(0.0)));
    let red = match presolve::presolve(p) {
        Presolved::Infeasible => {
            return Ok(SolveResult::terminal(SolveStatus::Infeasible, p, settings, start))
        }
        Presolved::Unbounded => {
            return Ok(SolveResult::terminal(SolveStatus::Unbounded, p, settings, start))
        }
        Presolved::Reduced(r) => r,
    };
    if red.conic.m == 0 {
        let x = red.recover(&[]);
        let worst = red
            .conic
            .blocks
            .iter()
            .map(|b| SymmetricEigen::new(b.constant.clone()).eigenvalues.min())
            .fold(f64::INFINITY, f64::min);
        let status = if worst >= -settings.tol {
            SolveStatus::Optimal
        } else {
            SolveStatus::Infeasible
        };
        let value = (status == SolveStatus::Optimal).then_some(red.offset);
        return Ok(SolveResult {
            status,
            value,
            lower_bound: value,
            x,
            residuals: Residuals {
                primal: (-worst).max(0.0),
                dual: 0.0,
                gap: 0.0,
            },
            iterations: 0,
            solve_time: start.elapsed().as_secs_f64(),
            tol: settings.tol,
        });
    }
    let out = ipm::solve_conic(&red.conic, settings.tol, settings.max_iterations, deadline);
    let status = match out.status {
        IpmStatus::Optimal => SolveStatus::Optimal,
        IpmStatus::Infeasible => SolveStatus::Infeasible,
        IpmStatus::Unbounded => SolveStatus::Unbounded,
        IpmStatus::Inaccurate => SolveStatus::Inaccurate,
        IpmStatus::Timeout => SolveStatus::Timeout,
    };
    let has_value = matches!(status, SolveStatus::Optimal | SolveStatus::Inaccurate)
        && out.primal_objective.is_finite();
    Ok(SolveResult {
        status,
        value: has_value.then_some(out.primal_objective + red.offset),
        lower_bound: has_value.then_some(out.dual_objective + red.offset),
        x: red.recover(&out.z),
        residuals: Residuals {
            primal: out.primal_residual,
            dual: out.dual_residual,
            gap: out.gap,
        },
        iterations: out.iterations,
        solve_time: start.elapsed().as_secs_f64(),
        tol: settings.tol,
    })
}
