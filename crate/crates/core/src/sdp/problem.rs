use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sparse symmetric matrix entry (upper triangle, i ≤ j).
pub type Entry = (usize, usize, f64);

/// S = C + Σ_v x_v A_v ⪰ 0, entries kept for i ≤ j only.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PsdBlock {
    pub dim: usize,
    pub constant: Vec<Entry>,
    /// (variable, i, j, value).
    pub coefficients: Vec<(usize, usize, usize, f64)>,
}

/// Σ_v a_v x_v = rhs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearRow {
    pub coefficients: Vec<(usize, f64)>,
    pub rhs: f64,
}

/// minimize objective·x + offset subject to PSD blocks and equalities.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SdpProblem {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub offset: f64,
    pub blocks: Vec<PsdBlock>,
    pub equalities: Vec<LinearRow>,
}

impl PsdBlock {
    pub fn new(dim: usize) -> Self {
        PsdBlock {
            dim,
            ..Default::default()
        }
    }

    /// Adds `value` at (i, j) of the constant (either triangle accepted).
    pub fn add_constant(&mut self, i: usize, j: usize, value: f64) {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.constant.push((i, j, value));
    }

    pub fn add_coefficient(&mut self, var: usize, i: usize, j: usize, value: f64) {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.coefficients.push((var, i, j, value));
    }

    /// Sorts, merges duplicates and drops exact zeros.
    pub fn normalize(&mut self) {
        self.constant.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut merged: Vec<Entry> = Vec::with_capacity(self.constant.len());
        for e in self.constant.drain(..) {
            match merged.last_mut() {
                Some(last) if (last.0, last.1) == (e.0, e.1) => last.2 += e.2,
                _ => merged.push(e),
            }
        }
        merged.retain(|e| e.2 != 0.0);
        self.constant = merged;
        self.coefficients
            .sort_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2)));
        let mut merged: Vec<(usize, usize, usize, f64)> = Vec::with_capacity(self.coefficients.len());
        for e in self.coefficients.drain(..) {
            match merged.last_mut() {
                Some(last) if (last.0, last.1, last.2) == (e.0, e.1, e.2) => last.3 += e.3,
                _ => merged.push(e),
            }
        }
        merged.retain(|e| e.3 != 0.0);
        self.coefficients = merged;
    }

    /// Dense S(x) = C + Σ x_v A_v.
    pub fn evaluate(&self, x: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(i, j, v) in &self.constant {
            m[(i, j)] += v;
            if i != j {
                m[(j, i)] += v;
            }
        }
        for &(var, i, j, v) in &self.coefficients {
            let a = v * x[var];
            m[(i, j)] += a;
            if i != j {
                m[(j, i)] += a;
            }
        }
        m
    }
}

impl LinearRow {
    pub fn normalize(&mut self) {
        self.coefficients.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(self.coefficients.len());
        for e in self.coefficients.drain(..) {
            match merged.last_mut() {
                Some(last) if last.0 == e.0 => last.1 += e.1,
                _ => merged.push(e),
            }
        }
        merged.retain(|e| e.1 != 0.0);
        self.coefficients = merged;
    }
}

/// Constraint violations of a candidate point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PointResiduals {
    /// Largest |Σ a x − rhs|.
    pub equality: f64,
    /// Largest max(0, −λ_min) over blocks.
    pub psd: f64,
}

impl SdpProblem {
    pub fn new(num_vars: usize) -> Self {
        SdpProblem {
            num_vars,
            objective: vec![0.0; num_vars],
            ..Default::default()
        }
    }

    pub fn normalize(&mut self) {
        for b in &mut self.blocks {
            b.normalize();
        }
        for r in &mut self.equalities {
            r.normalize();
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.objective.len() != self.num_vars {
            return Err(Error::Dimension(format!(
                "objective has {} entries for {} variables",
                self.objective.len(),
                self.num_vars
            )));
        }
        for (bi, b) in self.blocks.iter().enumerate() {
            if b.dim == 0 {
                return Err(Error::Dimension(format!("block {bi} has dimension 0")));
            }
            if b.constant.iter().any(|&(i, j, _)| i > j || j >= b.dim)
                || b.coefficients.iter().any(|&(_, i, j, _)| i > j || j >= b.dim)
            {
                return Err(Error::OutOfRange(format!("entry outside block {bi}")));
            }
            if b.coefficients.iter().any(|&(v, ..)| v >= self.num_vars) {
                return Err(Error::OutOfRange(format!("variable index in block {bi}")));
            }
        }
        if self
            .equalities
            .iter()
            .any(|r| r.coefficients.iter().any(|&(v, _)| v >= self.num_vars))
        {
            return Err(Error::OutOfRange("variable index in equality".into()));
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum::<f64>() + self.offset
    }

    pub fn residuals(&self, x: &[f64]) -> PointResiduals {
        let equality = self
            .equalities
            .iter()
            .map(|r| {
                (r.coefficients.iter().map(|&(v, a)| a * x[v]).sum::<f64>() - r.rhs).abs()
            })
            .fold(0.0, f64::max);
        let psd = self
            .blocks
            .iter()
            .map(|b| {
                let eig = SymmetricEigen::new(b.evaluate(x)).eigenvalues;
                (-eig.min()).max(0.0)
            })
            .fold(0.0, f64::max);
        PointResiduals { equality, psd }
    }

    /// Smallest eigenvalue of every block at `x`.
    pub fn block_min_eigenvalues(&self, x: &[f64]) -> Vec<f64> {
        self.blocks
            .iter()
            .map(|b| SymmetricEigen::new(b.evaluate(x)).eigenvalues.min())
            .collect()
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.dim).collect()
    }
}
