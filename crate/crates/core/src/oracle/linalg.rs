use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn pauli(k: usize) -> CMatrix {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match k {
        0 => CMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        1 => CMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        2 => CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        _ => CMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_all<'a>(ms: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    ms.into_iter()
        .fold(identity(1), |acc, m| kron(&acc, m))
}

/// Largest singular value.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Smallest eigenvalue of the Hermitian part.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    SymmetricEigen::new(hermitian_part(m)).eigenvalues.min()
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    // tr(AB) = Σ_ij A_ij B_ji
    let d = a.nrows();
    let mut s = c(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            s += a[(i, j)] * b[(j, i)];
        }
    }
    s
}

/// Places `op`, acting on the listed factors (in that order), into the full
/// tensor product with factor dimensions `dims`.
pub fn embed(op: &CMatrix, factors: &[usize], dims: &[usize]) -> CMatrix {
    let total: usize = dims.iter().product();
    let local: usize = factors.iter().map(|&f| dims[f]).product();
    assert_eq!(op.nrows(), local, "operator does not match its factors");
    // strides[f] = product of dims after f (row-major digits).
    let mut strides = vec![1usize; dims.len()];
    for f in (0..dims.len().saturating_sub(1)).rev() {
        strides[f] = strides[f + 1] * dims[f + 1];
    }
    let local_index = |i: usize| {
        factors
            .iter()
            .fold(0, |acc, &f| acc * dims[f] + (i / strides[f]) % dims[f])
    };
    let mut out = CMatrix::zeros(total, total);
    for i in 0..total {
        let li = local_index(i);
        // Zero the chosen digits of i, then enumerate local columns.
        let base = factors
            .iter()
            .fold(i, |acc, &f| acc - ((i / strides[f]) % dims[f]) * strides[f]);
        for lj in 0..local {
            let mut j = base;
            let mut rest = lj;
            for &f in factors.iter().rev() {
                j += (rest % dims[f]) * strides[f];
                rest /= dims[f];
            }
            let v = op[(li, lj)];
            if v != c(0.0, 0.0) {
                out[(i, j)] = v;
            }
        }
    }
    out
}
