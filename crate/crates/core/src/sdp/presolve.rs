use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::problem::SdpProblem;

const DROP_TOL: f64 = 1e-12;
const CONSISTENCY_TOL: f64 = 1e-9;

/// Block in reduced variables; every coefficient matrix is stored as its
/// full (both triangles) entry list.
#[derive(Clone, Debug)]
pub(crate) struct ConicBlock {
    pub dim: usize,
    pub constant: DMatrix<f64>,
    pub vars: Vec<(usize, Vec<(u32, u32, f64)>)>,
}

/// min cᵀz s.t. C_b + Σ z_j A_bj ⪰ 0.
#[derive(Clone, Debug)]
pub(crate) struct Conic {
    pub m: usize,
    pub c: Vec<f64>,
    pub blocks: Vec<ConicBlock>,
}

/// x = x0 + Σ_j z_j · columns[v].
#[derive(Clone, Debug)]
pub(crate) struct Reduction {
    pub conic: Conic,
    pub offset: f64,
    x0: Vec<f64>,
    columns: Vec<Vec<(usize, f64)>>,
}

impl Reduction {
    pub fn recover(&self, z: &[f64]) -> Vec<f64> {
        self.x0
            .iter()
            .zip(&self.columns)
            .map(|(x, col)| x + col.iter().map(|&(j, a)| a * z[j]).sum::<f64>())
            .collect()
    }
}

pub(crate) enum Presolved {
    Reduced(Reduction),
    Infeasible,
    Unbounded,
}

type SparseRow = Vec<(usize, f64)>;

/// r ← r − f·p over sorted sparse rows.
fn axpy(r: &SparseRow, f: f64, p: &SparseRow) -> SparseRow {
    let mut out = Vec::with_capacity(r.len() + p.len());
    let (mut a, mut b) = (0, 0);
    while a < r.len() || b < p.len() {
        if b == p.len() || (a < r.len() && r[a].0 < p[b].0) {
            out.push(r[a]);
            a += 1;
        } else if a == r.len() || p[b].0 < r[a].0 {
            out.push((p[b].0, -f * p[b].1));
            b += 1;
        } else {
            out.push((r[a].0, r[a].1 - f * p[b].1));
            a += 1;
            b += 1;
        }
    }
    out.retain(|e| e.1.abs() > DROP_TOL);
    out
}

/// Reduced row echelon form of the equality system, kept sparse.
fn echelon(p: &SdpProblem) -> Option<Vec<(usize, SparseRow, f64)>> {
    let mut pivots: Vec<(usize, SparseRow, f64)> = Vec::new();
    let mut pivot_of: BTreeMap<usize, usize> = BTreeMap::new();
    for row in &p.equalities {
        let scale = row
            .coefficients
            .iter()
            .map(|e| e.1.abs())
            .fold(row.rhs.abs(), f64::max)
            .max(1.0);
        let mut r: SparseRow = row.coefficients.clone();
        let mut rhs = row.rhs;
        let hits: Vec<(usize, f64)> = r
            .iter()
            .filter_map(|&(c, v)| pivot_of.get(&c).map(|&k| (k, v)))
            .collect();
        for (k, f) in hits {
            r = axpy(&r, f, &pivots[k].1);
            rhs -= f * pivots[k].2;
        }
        r.retain(|e| e.1.abs() > DROP_TOL * scale);
        let Some(&(col, lead)) = r
            .iter()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        else {
            if rhs.abs() > CONSISTENCY_TOL * scale {
                return None;
            }
            continue;
        };
        for e in r.iter_mut() {
            e.1 /= lead;
        }
        rhs /= lead;
        for k in 0..pivots.len() {
            if let Ok(pos) = pivots[k].1.binary_search_by_key(&col, |e| e.0) {
                let f = pivots[k].1[pos].1;
                pivots[k].1 = axpy(&pivots[k].1, f, &r);
                pivots[k].2 -= f * rhs;
            }
        }
        pivot_of.insert(col, pivots.len());
        pivots.push((col, r, rhs));
    }
    Some(pivots)
}

/// Eliminates equalities by substitution and drops unconstrained variables.
pub(crate) fn presolve(p: &SdpProblem) -> Presolved {
    let Some(pivots) = echelon(p) else {
        return Presolved::Infeasible;
    };
    let n = p.num_vars;
    let mut is_pivot = vec![None; n];
    for (k, (col, _, _)) in pivots.iter().enumerate() {
        is_pivot[*col] = Some(k);
    }
    let free: Vec<usize> = (0..n).filter(|&v| is_pivot[v].is_none()).collect();
    let mut z_of = vec![usize::MAX; n];
    for (j, &v) in free.iter().enumerate() {
        z_of[v] = j;
    }
    let mut x0 = vec![0.0; n];
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for v in 0..n {
        match is_pivot[v] {
            None => columns[v].push((z_of[v], 1.0)),
            Some(k) => {
                let (_, row, rhs) = &pivots[k];
                x0[v] = *rhs;
                for &(c, a) in row {
                    if c != v {
                        columns[v].push((z_of[c], -a));
                    }
                }
            }
        }
    }

    let nz = free.len();
    let mut c = vec![0.0; nz];
    let mut offset = p.offset;
    for v in 0..n {
        offset += p.objective[v] * x0[v];
        for &(j, a) in &columns[v] {
            c[j] += p.objective[v] * a;
        }
    }

    let mut used = vec![false; nz];
    let mut blocks = Vec::with_capacity(p.blocks.len());
    for b in &p.blocks {
        let d = b.dim;
        let mut constant = DMatrix::zeros(d, d);
        let put = |m: &mut DMatrix<f64>, i: usize, j: usize, v: f64| {
            m[(i, j)] += v;
            if i != j {
                m[(j, i)] += v;
            }
        };
        for &(i, j, v) in &b.constant {
            put(&mut constant, i, j, v);
        }
        let mut per_var: BTreeMap<usize, BTreeMap<(u32, u32), f64>> = BTreeMap::new();
        for &(v, i, j, a) in &b.coefficients {
            if x0[v] != 0.0 {
                put(&mut constant, i, j, a * x0[v]);
            }
            for &(zj, f) in &columns[v] {
                *per_var
                    .entry(zj)
                    .or_default()
                    .entry((i as u32, j as u32))
                    .or_default() += a * f;
            }
        }
        let mut vars = Vec::with_capacity(per_var.len());
        for (zj, entries) in per_var {
            let mut full = Vec::with_capacity(2 * entries.len());
            for ((i, j), v) in entries {
                if v.abs() <= DROP_TOL {
                    continue;
                }
                full.push((i, j, v));
                if i != j {
                    full.push((j, i, v));
                }
            }
            if !full.is_empty() {
                used[zj] = true;
                vars.push((zj, full));
            }
        }
        blocks.push(ConicBlock { dim: d, constant, vars });
    }

    let scale = c.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if (0..nz).any(|j| !used[j] && c[j].abs() > DROP_TOL * scale) {
        return Presolved::Unbounded;
    }
    // Compact the variables that appear in some block.
    let mut remap = vec![usize::MAX; nz];
    let mut kept = 0;
    for j in 0..nz {
        if used[j] {
            remap[j] = kept;
            kept += 1;
        }
    }
    let c: Vec<f64> = (0..nz).filter(|&j| used[j]).map(|j| c[j]).collect();
    for b in &mut blocks {
        for (zj, _) in &mut b.vars {
            *zj = remap[*zj];
        }
    }
    for col in &mut columns {
        col.retain(|&(j, _)| used[j]);
        for e in col.iter_mut() {
            e.0 = remap[e.0];
        }
    }
    Presolved::Reduced(Reduction {
        conic: Conic { m: kept, c, blocks },
        offset,
        x0,
        columns,
    })
}
