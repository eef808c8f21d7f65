use nalgebra::DMatrix;

use super::linalg::{c, identity, kron, op_norm, CMatrix};
use super::model::{FiniteModel, Operator};
use crate::error::{Error, Result};

/// Orthonormal Hermitian basis of d×d matrices under tr(X†Y).
fn hermitian_basis(d: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(d * d);
    let s = 1.0 / 2f64.sqrt();
    for k in 0..d {
        let mut m = CMatrix::zeros(d, d);
        m[(k, k)] = c(1.0, 0.0);
        out.push(m);
    }
    for k in 0..d {
        for l in k + 1..d {
            let mut m = CMatrix::zeros(d, d);
            m[(k, l)] = c(s, 0.0);
            m[(l, k)] = c(s, 0.0);
            out.push(m);
            let mut m = CMatrix::zeros(d, d);
            m[(k, l)] = c(0.0, -s);
            m[(l, k)] = c(0.0, s);
            out.push(m);
        }
    }
    out
}

/// One term σ · A ⊗ B of an operator-Schmidt decomposition.
#[derive(Clone, Debug)]
pub struct SchmidtTerm {
    pub weight: f64,
    pub left: CMatrix,
    pub right: CMatrix,
}

/// Operator-Schmidt decomposition of a Hermitian operator on C^{dA} ⊗ C^{dB},
/// with Hermitian factors of unit Hilbert-Schmidt norm, weights descending.
pub fn operator_schmidt(e: &CMatrix, d_a: usize, d_b: usize) -> Result<Vec<SchmidtTerm>> {
    if e.nrows() != d_a * d_b || e.ncols() != d_a * d_b {
        return Err(Error::Dimension(format!(
            "operator of size {} is not on {d_a}x{d_b}",
            e.nrows()
        )));
    }
    let ga = hermitian_basis(d_a);
    let gb = hermitian_basis(d_b);
    // c_kl = tr((G_k ⊗ H_l) E), computed via the partial contraction.
    let mut coef = DMatrix::<f64>::zeros(ga.len(), gb.len());
    for (k, g) in ga.iter().enumerate() {
        for (l, h) in gb.iter().enumerate() {
            let mut s = c(0.0, 0.0);
            for i in 0..d_a {
                for j in 0..d_a {
                    let gij = g[(i, j)];
                    if gij == c(0.0, 0.0) {
                        continue;
                    }
                    for p in 0..d_b {
                        for q in 0..d_b {
                            let hpq = h[(p, q)];
                            if hpq == c(0.0, 0.0) {
                                continue;
                            }
                            // (G ⊗ H)_{(i,p),(j,q)} E_{(j,q),(i,p)}
                            s += gij * hpq * e[(j * d_b + q, i * d_b + p)];
                        }
                    }
                }
            }
            coef[(k, l)] = s.re;
        }
    }
    let svd = coef.svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested Vᵀ");
    let mut terms: Vec<SchmidtTerm> = (0..svd.singular_values.len())
        .map(|m| {
            let left = ga
                .iter()
                .enumerate()
                .fold(CMatrix::zeros(d_a, d_a), |acc, (k, g)| acc + g * c(u[(k, m)], 0.0));
            let right = gb
                .iter()
                .enumerate()
                .fold(CMatrix::zeros(d_b, d_b), |acc, (l, h)| acc + h * c(vt[(m, l)], 0.0));
            SchmidtTerm {
                weight: svd.singular_values[m],
                left,
                right,
            }
        })
        .collect();
    terms.sort_by(|a, b| b.weight.total_cmp(&a.weight));
    Ok(terms)
}

pub fn reconstruct(terms: &[SchmidtTerm]) -> CMatrix {
    let mut it = terms.iter();
    let first = it.next().expect("at least one term");
    it.fold(kron(&first.left, &first.right) * c(first.weight, 0.0), |acc, t| {
        acc + kron(&t.left, &t.right) * c(t.weight, 0.0)
    })
}

/// Output of `schmidt_truncate`.
#[derive(Clone, Debug)]
pub struct Truncation {
    /// Renormalized POVM; the last element is the completion.
    pub povm: Vec<CMatrix>,
    /// Retained terms per element a < M (before renormalization).
    pub terms: Vec<Vec<SchmidtTerm>>,
    /// max_a ‖E_a^{(r)} − E_a‖.
    pub error: f64,
    pub delta: f64,
}

/// Keeps r operator-Schmidt terms of each of the first M − 1 elements and
/// renormalizes: Ẽ_a = (δ𝟙 + E_a^{(r)})/(1 + 2Mδ), Ẽ_M = 𝟙 − Σ Ẽ_a.
pub fn schmidt_truncate(povm: &[CMatrix], d_a: usize, d_b: usize, r: usize, delta: f64) -> Result<Truncation> {
    let m = povm.len();
    if m < 2 {
        return Err(Error::InvalidParameter("a POVM needs at least 2 elements".into()));
    }
    if r < 1 || !(delta >= 0.0) {
        return Err(Error::InvalidParameter("need r >= 1 and delta >= 0".into()));
    }
    let d = d_a * d_b;
    let norm = 1.0 + 2.0 * m as f64 * delta;
    let mut out = Vec::with_capacity(m);
    let mut kept = Vec::with_capacity(m - 1);
    let mut error: f64 = 0.0;
    for e in &povm[..m - 1] {
        let terms = operator_schmidt(e, d_a, d_b)?;
        let head: Vec<SchmidtTerm> = terms.into_iter().take(r).collect();
        let er = reconstruct(&head);
        error = error.max(op_norm(&(&er - e)));
        out.push((identity(d) * c(delta, 0.0) + er) / c(norm, 0.0));
        kept.push(head);
    }
    if error > delta + 1e-12 {
        return Err(Error::TruncationExceedsDelta { error, delta });
    }
    let last = out.iter().fold(identity(d), |acc, e| acc - e);
    out.push(last);
    for e in &mut out {
        *e = (&*e + e.adjoint()) * c(0.5, 0.0);
    }
    Ok(Truncation {
        povm: out,
        terms: kept,
        error,
        delta,
    })
}

/// Smallest δ admissible for rank r: the truncation error itself.
pub fn truncation_error(povm: &[CMatrix], d_a: usize, d_b: usize, r: usize) -> Result<f64> {
    let mut error: f64 = 0.0;
    for e in &povm[..povm.len().saturating_sub(1)] {
        let terms = operator_schmidt(e, d_a, d_b)?;
        let head: Vec<SchmidtTerm> = terms.into_iter().take(r).collect();
        error = error.max(op_norm(&(&reconstruct(&head) - e)));
    }
    Ok(error)
}

/// Applies `schmidt_truncate` to every two-slot party of a model. The
/// result carries explicit factors with r + 1 terms (r when δ = 0).
pub fn truncate_model(model: &FiniteModel, r: usize, delta: f64) -> Result<FiniteModel> {
    let mut out = model.clone();
    let mut c_bound: f64 = 0.0;
    let mut rank = 1;
    for (p, party) in model.network.parties.iter().enumerate() {
        if party.slots.len() != 2 {
            if let Some(f) = &model.measurements[p].factors {
                for t in f.iter().flatten().flatten().flatten() {
                    c_bound = c_bound.max(op_norm(t));
                }
            } else {
                // Single-slot parties use their element as the only factor.
                let factors = model.measurements[p]
                    .povm
                    .iter()
                    .map(|elems| {
                        elems[..elems.len() - 1]
                            .iter()
                            .map(|e| {
                                c_bound = c_bound.max(op_norm(e));
                                vec![vec![e.clone()]]
                            })
                            .collect()
                    })
                    .collect();
                out.measurements[p].factors = Some(factors);
            }
            continue;
        }
        let dims = model.local_dims(p);
        let norm = 1.0 + 2.0 * party.outcomes as f64 * delta;
        let mut povm = Vec::new();
        let mut factors = Vec::new();
        for elems in &model.measurements[p].povm {
            let mats: Vec<CMatrix> = elems.iter().map(|e| e.0.clone()).collect();
            let t = schmidt_truncate(&mats, dims[0], dims[1], r, delta)?;
            let mut per_a = Vec::new();
            for head in &t.terms {
                let mut terms = Vec::new();
                for term in head {
                    let s = (term.weight / norm).sqrt();
                    let l = &term.left * c(s, 0.0);
                    let rr = &term.right * c(s, 0.0);
                    c_bound = c_bound.max(op_norm(&l)).max(op_norm(&rr));
                    terms.push(vec![Operator(l), Operator(rr)]);
                }
                if delta > 0.0 {
                    let s = (delta / norm).sqrt();
                    c_bound = c_bound.max(s);
                    terms.push(vec![
                        Operator(identity(dims[0]) * c(s, 0.0)),
                        Operator(identity(dims[1]) * c(s, 0.0)),
                    ]);
                }
                rank = rank.max(terms.len());
                per_a.push(terms);
            }
            povm.push(t.povm.into_iter().map(Operator).collect());
            factors.push(per_a);
        }
        out.measurements[p].povm = povm;
        out.measurements[p].factors = Some(factors);
    }
    out.r = rank;
    out.c_bound = c_bound;
    out.validate()?;
    Ok(out)
}
