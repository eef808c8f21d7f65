//! Dense primal-dual interior-point method for
//! min cᵀz s.t. S = C + Σ z_j A_j ⪰ 0, paired with
//! max −⟨C, X⟩ s.t. ⟨A_j, X⟩ = c_j, X ⪰ 0.
//!
//! HKM search direction with a Mehrotra predictor-corrector and an
//! infeasible starting point.

use std::time::Instant;

use faer::linalg::solvers::Solve;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use super::presolve::{Conic, ConicBlock};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum IpmStatus {
    Optimal,
    Infeasible,
    Unbounded,
    Inaccurate,
    Timeout,
}

#[derive(Clone, Debug)]
pub(crate) struct IpmOutcome {
    pub status: IpmStatus,
    pub z: Vec<f64>,
    /// cᵀz.
    pub primal_objective: f64,
    /// −⟨C, X⟩.
    pub dual_objective: f64,
    /// ‖C + Σ zA − S‖ relative.
    pub primal_residual: f64,
    /// ‖c − 𝒜(X)‖ relative.
    pub dual_residual: f64,
    pub gap: f64,
    pub iterations: usize,
}

const INFEASIBILITY_RATIO: f64 = 1e-8;
/// Iterations without a 1% improvement of the best error before giving up.
const NO_PROGRESS_LIMIT: usize = 15;
const STALL_LIMIT: usize = 5;

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Σ z_j A_j for one block.
fn combine(b: &ConicBlock, z: &[f64]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(b.dim, b.dim);
    for (j, entries) in &b.vars {
        let zj = z[*j];
        if zj == 0.0 {
            continue;
        }
        for &(p, q, a) in entries {
            out[(p as usize, q as usize)] += a * zj;
        }
    }
    out
}

/// out_j += ⟨A_j, H⟩.
fn adjoint(b: &ConicBlock, h: &DMatrix<f64>, out: &mut [f64]) {
    for (j, entries) in &b.vars {
        out[*j] += entries
            .iter()
            .map(|&(p, q, a)| a * h[(p as usize, q as usize)])
            .sum::<f64>();
    }
}

/// Largest α with M + α·D ⪰ 0 (∞ if D ⪰ 0 relative to M).
fn max_step(m: &DMatrix<f64>, d: &DMatrix<f64>) -> f64 {
    let Some(chol) = Cholesky::new(m.clone()) else {
        return 0.0;
    };
    let l = chol.l();
    let Some(w1) = l.solve_lower_triangular(d) else {
        return 0.0;
    };
    let Some(w) = l.solve_lower_triangular(&w1.transpose()) else {
        return 0.0;
    };
    let lmin = SymmetricEigen::new(sym(&w)).eigenvalues.min();
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

/// M_ij += tr(A_i X A_j S⁻¹) for one block.
fn schur_block(b: &ConicBlock, x: &DMatrix<f64>, sinv: &DMatrix<f64>, m: &mut DMatrix<f64>) {
    let d = b.dim;
    let heavy_limit = 4 * d;
    let nv = b.vars.len();
    let heavy: Vec<bool> = b.vars.iter().map(|(_, e)| e.len() > heavy_limit).collect();
    for a in 0..nv {
        if !heavy[a] {
            continue;
        }
        let (va, ea) = &b.vars[a];
        let mut xa = DMatrix::zeros(d, d);
        for &(p, q, v) in ea {
            let (p, q) = (p as usize, q as usize);
            for r in 0..d {
                xa[(r, q)] += v * x[(r, p)];
            }
        }
        let t = xa * sinv;
        for c in 0..nv {
            if heavy[c] && c < a {
                continue;
            }
            let (vc, ec) = &b.vars[c];
            let s: f64 = ec
                .iter()
                .map(|&(p, q, v)| v * t[(p as usize, q as usize)])
                .sum();
            m[(*va, *vc)] += s;
            if c != a {
                m[(*vc, *va)] += s;
            }
        }
    }
    let xs = x.as_slice();
    let ss = sinv.as_slice();
    for a in 0..nv {
        if heavy[a] {
            continue;
        }
        let (va, ea) = &b.vars[a];
        for c in a..nv {
            if heavy[c] {
                continue;
            }
            let (vc, ec) = &b.vars[c];
            let mut s = 0.0;
            for &(p, q, av) in ea {
                let (p, q) = (p as usize, q as usize);
                let mut inner = 0.0;
                for &(r, t, bv) in ec {
                    inner += bv * xs[q + r as usize * d] * ss[t as usize + p * d];
                }
                s += av * inner;
            }
            m[(*va, *vc)] += s;
            if c != a {
                m[(*vc, *va)] += s;
            }
        }
    }
}

/// Factorization of the Schur complement, reused by predictor and corrector.
struct SchurFactor<'a> {
    matrix: &'a DMatrix<f64>,
    kind: FactorKind,
}

enum FactorKind {
    Llt(faer::linalg::solvers::Llt<f64>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

const REFINEMENT_STEPS: usize = 2;

impl<'a> SchurFactor<'a> {
    fn new(m: &'a DMatrix<f64>) -> Self {
        let n = m.nrows();
        let to_faer = |shift: f64| {
            faer::Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)] + if i == j { shift } else { 0.0 })
        };
        let kind = if let Ok(llt) = to_faer(0.0).llt(faer::Side::Lower) {
            FactorKind::Llt(llt)
        } else if let Ok(llt) =
            to_faer(1e-12 * m.diagonal().amax().max(1.0)).llt(faer::Side::Lower)
        {
            FactorKind::Llt(llt)
        } else {
            FactorKind::Lu(m.clone().lu())
        };
        SchurFactor { matrix: m, kind }
    }

    fn raw_solve(&self, h: &[f64]) -> Option<Vec<f64>> {
        match &self.kind {
            FactorKind::Llt(llt) => {
                let mut rhs = faer::Mat::<f64>::from_fn(h.len(), 1, |i, _| h[i]);
                llt.solve_in_place(&mut rhs);
                Some((0..h.len()).map(|i| rhs[(i, 0)]).collect())
            }
            FactorKind::Lu(lu) => lu
                .solve(&DVector::from_column_slice(h))
                .map(|v| v.iter().copied().collect()),
        }
    }

    /// Solve with a few rounds of iterative refinement against the unshifted matrix.
    fn solve(&self, h: &[f64]) -> Option<Vec<f64>> {
        let mut x = self.raw_solve(h)?;
        for _ in 0..REFINEMENT_STEPS {
            let xv = DVector::from_column_slice(&x);
            let r: Vec<f64> = (DVector::from_column_slice(h) - self.matrix * xv)
                .iter()
                .copied()
                .collect();
            let dx = self.raw_solve(&r)?;
            for (a, b) in x.iter_mut().zip(&dx) {
                *a += b;
            }
        }
        Some(x)
    }
}

struct Iterate {
    x: Vec<DMatrix<f64>>,
    s: Vec<DMatrix<f64>>,
    z: Vec<f64>,
}

pub(crate) fn solve_conic(p: &Conic, tol: f64, max_iter: usize, deadline: Option<Instant>) -> IpmOutcome {
    let m = p.m;
    let blocks = &p.blocks;
    let ntot: usize = blocks.iter().map(|b| b.dim).sum();
    let norm_c = p.c.iter().map(|v| v * v).sum::<f64>().sqrt();
    let norm_cc = blocks
        .iter()
        .map(|b| b.constant.norm_squared())
        .sum::<f64>()
        .sqrt();

    let mut it = Iterate {
        x: Vec::with_capacity(blocks.len()),
        s: Vec::with_capacity(blocks.len()),
        z: vec![0.0; m],
    };
    for b in blocks {
        let d = b.dim as f64;
        let mut ratio: f64 = 0.0;
        let mut amax: f64 = 0.0;
        for (j, e) in &b.vars {
            let na = e.iter().map(|t| t.2 * t.2).sum::<f64>().sqrt();
            ratio = ratio.max((1.0 + p.c[*j].abs()) / (1.0 + na));
            amax = amax.max(na);
        }
        let xi = 10f64.max(d.sqrt()).max(d.sqrt() * ratio);
        let eta = 10f64.max(d.sqrt()).max(amax.max(b.constant.norm()));
        it.x.push(DMatrix::identity(b.dim, b.dim) * xi);
        it.s.push(DMatrix::identity(b.dim, b.dim) * eta);
    }

    let mut best: Option<(f64, IpmOutcome)> = None;
    let mut stalls = 0;
    let mut since_best = 0;
    let mut iterations = 0;
    let status = loop {
        let sz: Vec<DMatrix<f64>> = blocks
            .iter()
            .map(|b| &b.constant + combine(b, &it.z))
            .collect();
        let rd: Vec<DMatrix<f64>> = sz.iter().zip(&it.s).map(|(a, s)| a - s).collect();
        let mut ax = vec![0.0; m];
        for (b, x) in blocks.iter().zip(&it.x) {
            adjoint(b, x, &mut ax);
        }
        let rp: Vec<f64> = p.c.iter().zip(&ax).map(|(c, a)| c - a).collect();
        let pobj: f64 = p.c.iter().zip(&it.z).map(|(c, z)| c * z).sum();
        let dobj: f64 = -blocks
            .iter()
            .zip(&it.x)
            .map(|(b, x)| b.constant.dot(x))
            .sum::<f64>();
        let xs: f64 = it.x.iter().zip(&it.s).map(|(x, s)| x.dot(s)).sum();
        let mu = xs / ntot as f64;
        let gap = xs.max((pobj - dobj).abs()) / (1.0 + pobj.abs() + dobj.abs());
        let norm_rd = rd.iter().map(|r| r.norm_squared()).sum::<f64>().sqrt();
        let pres = norm_rd / (1.0 + norm_cc);
        let dres = rp.iter().map(|v| v * v).sum::<f64>().sqrt() / (1.0 + norm_c);
        let err = gap.max(pres).max(dres);
        let snapshot = |status| IpmOutcome {
            status,
            z: it.z.clone(),
            primal_objective: pobj,
            dual_objective: dobj,
            primal_residual: pres,
            dual_residual: dres,
            gap,
            iterations,
        };
        log::debug!(
            "it {iterations:3} pobj {pobj:+.9e} dobj {dobj:+.9e} gap {gap:.2e} pres {pres:.2e} dres {dres:.2e} mu {mu:.2e}"
        );
        if err.is_finite() && best.as_ref().is_none_or(|(e, _)| err < 0.99 * *e) {
            best = Some((err, snapshot(IpmStatus::Inaccurate)));
            since_best = 0;
        } else {
            since_best += 1;
        }
        if err <= tol {
            break IpmStatus::Optimal;
        }
        let norm_ax = ax.iter().map(|v| v * v).sum::<f64>().sqrt();
        if dobj > 0.0 && norm_ax <= INFEASIBILITY_RATIO * dobj {
            break IpmStatus::Infeasible;
        }
        let norm_rd_c = rd
            .iter()
            .zip(blocks)
            .map(|(r, b)| (r - &b.constant).norm_squared())
            .sum::<f64>()
            .sqrt();
        if pobj < 0.0 && norm_rd_c <= INFEASIBILITY_RATIO * -pobj {
            break IpmStatus::Unbounded;
        }
        if iterations >= max_iter || !err.is_finite() || since_best > NO_PROGRESS_LIMIT {
            break IpmStatus::Inaccurate;
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            break IpmStatus::Timeout;
        }
        iterations += 1;

        let Some(sinv) = it
            .s
            .iter()
            .map(|s| Cholesky::new(s.clone()).map(|c| c.inverse()))
            .collect::<Option<Vec<_>>>()
        else {
            break IpmStatus::Inaccurate;
        };
        let mut schur = DMatrix::zeros(m, m);
        for ((b, x), si) in blocks.iter().zip(&it.x).zip(&sinv) {
            schur_block(b, x, si, &mut schur);
        }
        // G = X Rd S⁻¹ enters every right-hand side.
        let g: Vec<DMatrix<f64>> = it
            .x
            .iter()
            .zip(&rd)
            .zip(&sinv)
            .map(|((x, r), si)| x * r * si)
            .collect();
        let factor = SchurFactor::new(&schur);
        let direction = |k: &[DMatrix<f64>]| -> Option<(Vec<f64>, Vec<DMatrix<f64>>, Vec<DMatrix<f64>>)> {
            let mut h = vec![0.0; m];
            for (bi, b) in blocks.iter().enumerate() {
                adjoint(b, &(&k[bi] - &g[bi]), &mut h);
            }
            for (hi, r) in h.iter_mut().zip(&rp) {
                *hi -= r;
            }
            let dz = factor.solve(&h)?;
            if dz.iter().any(|v| !v.is_finite()) {
                return None;
            }
            let ds: Vec<DMatrix<f64>> = blocks
                .iter()
                .zip(&rd)
                .map(|(b, r)| r + combine(b, &dz))
                .collect();
            let dx: Vec<DMatrix<f64>> = (0..blocks.len())
                .map(|bi| &k[bi] - sym(&(&it.x[bi] * &ds[bi] * &sinv[bi])))
                .collect();
            Some((dz, dx, ds))
        };
        let steps = |dx: &[DMatrix<f64>], ds: &[DMatrix<f64>]| {
            let ap = it
                .x
                .iter()
                .zip(dx)
                .map(|(x, d)| max_step(x, d))
                .fold(f64::INFINITY, f64::min);
            let ad = it
                .s
                .iter()
                .zip(ds)
                .map(|(s, d)| max_step(s, d))
                .fold(f64::INFINITY, f64::min);
            (ap, ad)
        };

        let kp: Vec<DMatrix<f64>> = it.x.iter().map(|x| -x).collect();
        let Some((_, dxp, dsp)) = direction(&kp) else {
            break IpmStatus::Inaccurate;
        };
        let (ap, ad) = steps(&dxp, &dsp);
        let (ap1, ad1) = (ap.min(1.0), ad.min(1.0));
        let mu_aff: f64 = (0..blocks.len())
            .map(|bi| (&it.x[bi] + &dxp[bi] * ap1).dot(&(&it.s[bi] + &dsp[bi] * ad1)))
            .sum::<f64>()
            / ntot as f64;
        let expon = (3.0 * ap1.min(ad1).powi(2)).max(1.0);
        let sigma = if mu > 0.0 {
            (mu_aff / mu).max(0.0).powf(expon).min(1.0)
        } else {
            0.0
        };
        let kc: Vec<DMatrix<f64>> = (0..blocks.len())
            .map(|bi| {
                &sinv[bi] * (sigma * mu) - &it.x[bi] - sym(&(&dxp[bi] * &dsp[bi] * &sinv[bi]))
            })
            .collect();
        let Some((dz, dx, ds)) = direction(&kc) else {
            break IpmStatus::Inaccurate;
        };
        let (ap, ad) = steps(&dx, &ds);
        let gamma = 0.9 + 0.09 * ap1.min(ad1);
        let ap = (gamma * ap).min(1.0);
        let ad = (gamma * ad).min(1.0);
        if ap.max(ad) < 1e-8 {
            stalls += 1;
            if stalls >= STALL_LIMIT {
                break IpmStatus::Inaccurate;
            }
        } else {
            stalls = 0;
        }
        for bi in 0..blocks.len() {
            it.x[bi] += &dx[bi] * ap;
            it.s[bi] += &ds[bi] * ad;
        }
        for (z, d) in it.z.iter_mut().zip(&dz) {
            *z += ad * d;
        }
    };

    match status {
        IpmStatus::Inaccurate | IpmStatus::Timeout => {
            let mut out = best.map(|b| b.1).unwrap_or_else(|| IpmOutcome {
                status,
                z: it.z.clone(),
                primal_objective: f64::NAN,
                dual_objective: f64::NAN,
                primal_residual: f64::NAN,
                dual_residual: f64::NAN,
                gap: f64::NAN,
                iterations,
            });
            out.status = status;
            out.iterations = iterations;
            out
        }
        _ => {
            let (pobj, dobj, pres, dres, gap) = final_measures(p, &it);
            IpmOutcome {
                status,
                z: it.z,
                primal_objective: pobj,
                dual_objective: dobj,
                primal_residual: pres,
                dual_residual: dres,
                gap,
                iterations,
            }
        }
    }
}

fn final_measures(p: &Conic, it: &Iterate) -> (f64, f64, f64, f64, f64) {
    let blocks = &p.blocks;
    let norm_c = p.c.iter().map(|v| v * v).sum::<f64>().sqrt();
    let norm_cc = blocks
        .iter()
        .map(|b| b.constant.norm_squared())
        .sum::<f64>()
        .sqrt();
    let mut ax = vec![0.0; p.m];
    let mut rd2 = 0.0;
    let mut xs = 0.0;
    let mut cx = 0.0;
    for ((b, x), s) in blocks.iter().zip(&it.x).zip(&it.s) {
        adjoint(b, x, &mut ax);
        rd2 += (&b.constant + combine(b, &it.z) - s).norm_squared();
        xs += x.dot(s);
        cx += b.constant.dot(x);
    }
    let pobj: f64 = p.c.iter().zip(&it.z).map(|(c, z)| c * z).sum();
    let dobj = -cx;
    let dres = p
        .c
        .iter()
        .zip(&ax)
        .map(|(c, a)| (c - a).powi(2))
        .sum::<f64>()
        .sqrt()
        / (1.0 + norm_c);
    let gap = xs.max((pobj - dobj).abs()) / (1.0 + pobj.abs() + dobj.abs());
    (pobj, dobj, rd2.sqrt() / (1.0 + norm_cc), dres, gap)
}
