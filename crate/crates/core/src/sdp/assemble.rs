use num_complex::Complex64;

use super::problem::{LinearRow, PsdBlock, SdpProblem};
use crate::error::{Error, Result};
use crate::moment::{LinearForm, LocalizingKind, LocalizingSpec, SymbolicMatrix, VariableTable, WordTable};

/// Everything `assemble` consumes; all forms reference words of `table`.
pub struct AssemblyInput<'a> {
    pub table: &'a WordTable,
    pub variables: &'a VariableTable,
    pub moment: &'a SymbolicMatrix,
    pub localizing: &'a [LocalizingSpec],
    /// ρ(form) = value.
    pub equalities: &'a [(LinearForm, f64)],
    /// Minimize Re ρ(form).
    pub objective: &'a LinearForm,
    /// Σ (ρ(form_c) − p_c)² ≤ t, t minimized.
    pub epigraph: &'a [(LinearForm, f64)],
}

/// Position of every moment variable in the real SDP vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableLayout {
    pub re: Vec<usize>,
    pub im: Vec<Option<usize>>,
    pub epigraph: Option<usize>,
    pub num_vars: usize,
}

impl VariableLayout {
    pub fn new(vars: &VariableTable, epigraph: bool) -> Self {
        let mut next = 0;
        let mut re = Vec::with_capacity(vars.len());
        let mut im = Vec::with_capacity(vars.len());
        for v in 0..vars.len() as u32 {
            re.push(next);
            next += 1;
            if vars.is_complex(v) {
                im.push(Some(next));
                next += 1;
            } else {
                im.push(None);
            }
        }
        let epigraph = epigraph.then(|| {
            next += 1;
            next - 1
        });
        VariableLayout {
            re,
            im,
            epigraph,
            num_vars: next,
        }
    }

    /// Real point holding the given per-word moments; the epigraph variable
    /// is left at zero.
    pub fn point(&self, vars: &VariableTable, values: &[Complex64]) -> Vec<f64> {
        let mut x = vec![0.0; self.num_vars];
        let mut seen = vec![false; vars.len()];
        for (w, r) in vars.refs.iter().enumerate() {
            let v = r.var as usize;
            if seen[v] {
                continue;
            }
            seen[v] = true;
            let val = if r.conjugate { values[w].conj() } else { values[w] };
            x[self.re[v]] = val.re;
            if let Some(i) = self.im[v] {
                x[i] = val.im;
            }
        }
        x
    }

    /// Per-word moments read back from a real point.
    pub fn moments(&self, vars: &VariableTable, x: &[f64]) -> Vec<Complex64> {
        vars.refs
            .iter()
            .map(|r| {
                let v = r.var as usize;
                let im = self.im[v].map_or(0.0, |i| x[i]);
                let im = if r.conjugate { -im } else { im };
                Complex64::new(x[self.re[v]], im)
            })
            .collect()
    }
}

/// Real and imaginary parts of a linear form as sparse real rows.
struct Affine {
    re: Vec<(usize, f64)>,
    im: Vec<(usize, f64)>,
}

fn affine(form: &LinearForm, vars: &VariableTable, layout: &VariableLayout) -> Affine {
    let mut re = Vec::new();
    let mut im = Vec::new();
    for &(w, c) in form {
        let r = vars.refs[w as usize];
        let v = r.var as usize;
        re.push((layout.re[v], c.re));
        im.push((layout.re[v], c.im));
        if let Some(iv) = layout.im[v] {
            let s = if r.conjugate { -1.0 } else { 1.0 };
            re.push((iv, -c.im * s));
            im.push((iv, c.re * s));
        }
    }
    re.retain(|e| e.1 != 0.0);
    im.retain(|e| e.1 != 0.0);
    Affine { re, im }
}

fn check_tables(input: &AssemblyInput) -> Result<()> {
    let n = input.table.len();
    if input.variables.refs.len() != n {
        return Err(Error::InconsistentTable(format!(
            "{} words but {} variable references",
            n,
            input.variables.refs.len()
        )));
    }
    let bad = |f: &LinearForm| f.iter().any(|&(w, _)| w as usize >= n);
    let in_matrix = |m: &SymbolicMatrix| m.entries.iter().any(bad);
    if in_matrix(input.moment)
        || input.localizing.iter().any(|l| in_matrix(&l.matrix))
        || input.equalities.iter().any(|(f, _)| bad(f))
        || input.epigraph.iter().any(|(f, _)| bad(f))
        || bad(input.objective)
    {
        return Err(Error::InconsistentTable("form references an unknown word".into()));
    }
    if input
        .variables
        .refs
        .iter()
        .any(|r| r.var as usize >= input.variables.len())
    {
        return Err(Error::InconsistentTable("reference to an unknown variable".into()));
    }
    Ok(())
}

/// Numeric conic program for the symbolic relaxation.
///
/// Complex Hermitian blocks are realified as [[X, −Y], [Y, X]] unless the
/// variable table is all-real.
pub fn assemble(input: &AssemblyInput) -> Result<(SdpProblem, VariableLayout)> {
    check_tables(input)?;
    let vars = input.variables;
    let layout = VariableLayout::new(vars, !input.epigraph.is_empty());
    let mut p = SdpProblem::new(layout.num_vars);
    let doubled = !vars.all_real;

    p.equalities.push(LinearRow {
        coefficients: vec![(layout.re[0], 1.0)],
        rhs: 1.0,
    });
    if input.moment.dim > 0 {
        p.blocks.push(realify(input.moment, vars, &layout, doubled));
    }
    for l in input.localizing {
        if l.is_empty() {
            continue;
        }
        match l.kind {
            LocalizingKind::Positive => p.blocks.push(realify(&l.matrix, vars, &layout, doubled)),
            LocalizingKind::Zero => {
                for (_, _, form) in l.matrix.upper() {
                    push_equality(&mut p, affine(form, vars, &layout), 0.0, doubled);
                }
            }
        }
    }
    for (form, value) in input.equalities {
        push_equality(&mut p, affine(form, vars, &layout), *value, doubled);
    }
    for (v, c) in affine(input.objective, vars, &layout).re {
        p.objective[v] += c;
    }
    if let Some(t) = layout.epigraph {
        p.objective[t] += 1.0;
        p.blocks.push(epigraph_block(input.epigraph, vars, &layout, t));
    }
    p.normalize();
    Ok((p, layout))
}

fn push_equality(p: &mut SdpProblem, a: Affine, value: f64, doubled: bool) {
    if !a.re.is_empty() || value != 0.0 {
        p.equalities.push(LinearRow {
            coefficients: a.re,
            rhs: value,
        });
    }
    if doubled && !a.im.is_empty() {
        p.equalities.push(LinearRow {
            coefficients: a.im,
            rhs: 0.0,
        });
    }
}

fn realify(m: &SymbolicMatrix, vars: &VariableTable, layout: &VariableLayout, doubled: bool) -> PsdBlock {
    let d = m.dim;
    let mut b = PsdBlock::new(if doubled { 2 * d } else { d });
    for (i, j, form) in m.upper() {
        let a = affine(form, vars, layout);
        for &(v, c) in &a.re {
            b.add_coefficient(v, i, j, c);
            if doubled {
                b.add_coefficient(v, i + d, j + d, c);
            }
        }
        if doubled && i != j {
            for &(v, c) in &a.im {
                b.add_coefficient(v, j, i + d, c);
                b.add_coefficient(v, i, j + d, -c);
            }
        }
    }
    b
}

/// [[t, vᵀ], [v, 𝟙]] with v_c = Re ρ(W_c) − p_c.
fn epigraph_block(cells: &[(LinearForm, f64)], vars: &VariableTable, layout: &VariableLayout, t: usize) -> PsdBlock {
    let mut b = PsdBlock::new(cells.len() + 1);
    b.add_coefficient(t, 0, 0, 1.0);
    for (c, (form, prob)) in cells.iter().enumerate() {
        for (v, a) in affine(form, vars, layout).re {
            b.add_coefficient(v, 0, c + 1, a);
        }
        b.add_constant(0, c + 1, -prob);
        b.add_constant(c + 1, c + 1, 1.0);
    }
    b
}
