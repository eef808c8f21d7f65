//! SDPA sparse format.
//!
//! The problem `min cᵀx s.t. C + Σ x_v A_v ⪰ 0, Ex = f` is written in SDPA's
//! form `Σ F_v x_v − F_0 ⪰ 0` with F_0 = −C. Equalities become pairs of rows
//! ±(Σ a_v x_v − f) ≥ 0 in one trailing diagonal block. A nonzero objective
//! offset is kept in a `*offset` comment line.

use std::fmt::Write;

use super::problem::{LinearRow, PsdBlock, SdpProblem};
use crate::error::{Error, Result};

/// Shortest text that parses back to exactly `v`.
fn num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

pub fn export_sdpa(p: &SdpProblem) -> String {
    let mut out = String::new();
    if p.offset != 0.0 {
        writeln!(out, "*offset {}", num(p.offset)).unwrap();
    }
    let neq = p.equalities.len();
    let nblocks = p.blocks.len() + usize::from(neq > 0);
    writeln!(out, "{}", p.num_vars).unwrap();
    writeln!(out, "{nblocks}").unwrap();
    let mut sizes: Vec<String> = p.blocks.iter().map(|b| b.dim.to_string()).collect();
    if neq > 0 {
        sizes.push(format!("-{}", 2 * neq));
    }
    writeln!(out, "{}", sizes.join(" ")).unwrap();
    let c: Vec<String> = p.objective.iter().map(|&v| num(v)).collect();
    writeln!(out, "{}", c.join(" ")).unwrap();

    // (matrix, block, i, j, value), matrix 0 being F_0.
    let mut entries: Vec<(usize, usize, usize, usize, f64)> = Vec::new();
    for (bi, b) in p.blocks.iter().enumerate() {
        for &(i, j, v) in &b.constant {
            entries.push((0, bi + 1, i + 1, j + 1, -v));
        }
        for &(var, i, j, v) in &b.coefficients {
            entries.push((var + 1, bi + 1, i + 1, j + 1, v));
        }
    }
    let diag = p.blocks.len() + 1;
    for (e, row) in p.equalities.iter().enumerate() {
        let (ra, rb) = (2 * e + 1, 2 * e + 2);
        if row.rhs != 0.0 {
            entries.push((0, diag, ra, ra, row.rhs));
            entries.push((0, diag, rb, rb, -row.rhs));
        }
        for &(var, a) in &row.coefficients {
            entries.push((var + 1, diag, ra, ra, a));
            entries.push((var + 1, diag, rb, rb, -a));
        }
    }
    entries.sort_by(|a, b| (a.0, a.1, a.2, a.3).cmp(&(b.0, b.1, b.2, b.3)));
    for (m, b, i, j, v) in entries {
        writeln!(out, "{m} {b} {i} {j} {}", num(v)).unwrap();
    }
    out
}

fn err(msg: impl Into<String>) -> Error {
    Error::Sdpa(msg.into())
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| err(format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| err(format!("invalid {what} `{tok}`")))
}

/// Reads an SDPA sparse document. Pairs of opposite diagonal rows become
/// equalities; any other diagonal row becomes a 1×1 block.
pub fn import_sdpa(text: &str) -> Result<SdpProblem> {
    let mut offset = 0.0;
    let mut body = String::new();
    let mut header = true;
    for line in text.lines() {
        let t = line.trim_start();
        if header && (t.starts_with('*') || t.starts_with('"')) {
            if let Some(rest) = t.strip_prefix("*offset") {
                offset = parse_num(Some(rest.trim()), "offset")?;
            }
            continue;
        }
        header = false;
        body.push_str(line);
        body.push('\n');
    }
    let cleaned: String = body
        .chars()
        .map(|c| if matches!(c, ',' | '{' | '}' | '(' | ')') { ' ' } else { c })
        .collect();
    let mut toks = cleaned.split_whitespace();
    let m: usize = parse_num(toks.next(), "constraint count")?;
    let nb: usize = parse_num(toks.next(), "block count")?;
    let mut sizes = Vec::with_capacity(nb);
    for _ in 0..nb {
        let s: i64 = parse_num(toks.next(), "block size")?;
        if s == 0 {
            return Err(err("block size 0"));
        }
        sizes.push(s);
    }
    let mut objective = Vec::with_capacity(m);
    for _ in 0..m {
        objective.push(parse_num::<f64>(toks.next(), "objective entry")?);
    }

    let mut psd_index = vec![usize::MAX; nb];
    let mut blocks: Vec<PsdBlock> = Vec::new();
    for (b, &s) in sizes.iter().enumerate() {
        if s > 0 {
            psd_index[b] = blocks.len();
            blocks.push(PsdBlock::new(s as usize));
        }
    }
    // Diagonal rows: (block, row) -> (F_0 value, coefficients).
    let mut diag: std::collections::BTreeMap<(usize, usize), (f64, Vec<(usize, f64)>)> =
        std::collections::BTreeMap::new();
    loop {
        let Some(first) = toks.next() else { break };
        let mat: usize = parse_num(Some(first), "matrix index")?;
        let b: usize = parse_num(toks.next(), "block index")?;
        let i: usize = parse_num(toks.next(), "row index")?;
        let j: usize = parse_num(toks.next(), "column index")?;
        let v: f64 = parse_num(toks.next(), "value")?;
        if mat > m || b == 0 || b > nb {
            return Err(err(format!("entry {mat} {b} {i} {j} out of range")));
        }
        let size = sizes[b - 1];
        let dim = size.unsigned_abs() as usize;
        if i == 0 || j == 0 || i > dim || j > dim {
            return Err(err(format!("entry {mat} {b} {i} {j} outside block")));
        }
        if size > 0 {
            let blk = &mut blocks[psd_index[b - 1]];
            if mat == 0 {
                blk.add_constant(i - 1, j - 1, -v);
            } else {
                blk.add_coefficient(mat - 1, i - 1, j - 1, v);
            }
        } else {
            if i != j {
                return Err(err(format!("off-diagonal entry in diagonal block {b}")));
            }
            let row = diag.entry((b, i)).or_insert((0.0, Vec::new()));
            if mat == 0 {
                row.0 += v;
            } else {
                row.1.push((mat - 1, v));
            }
        }
    }

    let mut equalities = Vec::new();
    let mut extra = Vec::new();
    for (b, &s) in sizes.iter().enumerate() {
        if s > 0 {
            continue;
        }
        let rows: Vec<(f64, Vec<(usize, f64)>)> = (1..=s.unsigned_abs() as usize)
            .map(|i| {
                let (f0, mut coeffs) = diag.remove(&(b + 1, i)).unwrap_or((0.0, Vec::new()));
                let mut r = LinearRow {
                    coefficients: std::mem::take(&mut coeffs),
                    rhs: f0,
                };
                r.normalize();
                (r.rhs, r.coefficients)
            })
            .collect();
        let mut i = 0;
        while i < rows.len() {
            let paired = i + 1 < rows.len() && {
                let (fa, ca) = &rows[i];
                let (fb, cb) = &rows[i + 1];
                *fb == -*fa
                    && ca.len() == cb.len()
                    && ca.iter().zip(cb).all(|(x, y)| x.0 == y.0 && y.1 == -x.1)
            };
            if paired {
                equalities.push(LinearRow {
                    coefficients: rows[i].1.clone(),
                    rhs: rows[i].0,
                });
                i += 2;
            } else {
                let mut blk = PsdBlock::new(1);
                if rows[i].0 != 0.0 {
                    blk.add_constant(0, 0, -rows[i].0);
                }
                for &(v, a) in &rows[i].1 {
                    blk.add_coefficient(v, 0, 0, a);
                }
                extra.push(blk);
                i += 1;
            }
        }
    }
    blocks.extend(extra);
    let mut p = SdpProblem {
        num_vars: m,
        objective,
        offset,
        blocks,
        equalities,
    };
    p.normalize();
    p.validate()?;
    Ok(p)
}
