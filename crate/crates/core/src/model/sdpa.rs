//! SDPA sparse format (`.dat-s`).
//!
//! The problem written is `minimize cᵀx` subject to `Σ F_k x_k − F_0 ⪰ 0`. Maximization models
//! are written with the objective negated, and the objective constant is dropped. Scalar
//! constraints go into one trailing diagonal block.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::CMatrix;

use super::{AffineBlock, FlatProblem, Goal, LinearFunctional, ModelBuilder, Operand, Sense, SdpModel, Weight};

fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

/// Renders a real model in SDPA sparse format.
pub fn to_sdpa_string(model: &SdpModel) -> Result<String> {
    let flat = FlatProblem::new(model)?;
    let m = flat.num_coords();
    let nlmi = flat.blocks.len();
    let has_diag = !flat.rows.is_empty();

    let mut sizes: Vec<String> = flat.blocks.iter().map(|b| b.size.to_string()).collect();
    if has_diag {
        sizes.push(format!("-{}", flat.rows.len()));
    }
    let sign = match flat.goal {
        Some(Goal::Maximize) => -1.0,
        _ => 1.0,
    };

    let mut out = String::new();
    writeln!(out, "{m}").unwrap();
    writeln!(out, "{}", sizes.len()).unwrap();
    writeln!(out, "{}", sizes.join(" ")).unwrap();
    let c: Vec<String> = flat.objective.iter().map(|v| fmt_num(sign * v)).collect();
    writeln!(out, "{}", c.join(" ")).unwrap();

    // F_0 = −constant.
    for (bi, block) in flat.blocks.iter().enumerate() {
        for i in 0..block.size {
            for j in i..block.size {
                let v = block.constant[(i, j)];
                if v != 0.0 {
                    writeln!(out, "0 {} {} {} {}", bi + 1, i + 1, j + 1, fmt_num(-v)).unwrap();
                }
            }
        }
    }
    for (ri, row) in flat.rows.iter().enumerate() {
        if row.constant != 0.0 {
            writeln!(out, "0 {} {} {} {}", nlmi + 1, ri + 1, ri + 1, fmt_num(-row.constant)).unwrap();
        }
    }

    // Row-wise coefficient lookup for the diagonal block.
    let mut row_coefs: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    for (ri, row) in flat.rows.iter().enumerate() {
        for &(k, v) in &row.coefs {
            row_coefs[k].push((ri, v));
        }
    }
    let mut cursors = vec![0usize; nlmi];
    for k in 0..m {
        for (bi, block) in flat.blocks.iter().enumerate() {
            let cur = &mut cursors[bi];
            if *cur < block.coefs.len() && block.coefs[*cur].0 == k {
                for &(i, j, v) in &block.coefs[*cur].1 {
                    if i <= j {
                        writeln!(out, "{} {} {} {} {}", k + 1, bi + 1, i + 1, j + 1, fmt_num(v)).unwrap();
                    }
                }
                *cur += 1;
            }
        }
        for &(ri, v) in &row_coefs[k] {
            writeln!(out, "{} {} {} {} {}", k + 1, nlmi + 1, ri + 1, ri + 1, fmt_num(v)).unwrap();
        }
    }
    Ok(out)
}

/// Writes `model` to `path` in SDPA sparse format.
pub fn export_sdpa(model: &SdpModel, path: impl AsRef<Path>) -> Result<()> {
    let text = to_sdpa_string(model)?;
    fs::write(path, text)?;
    Ok(())
}

pub fn import_sdpa(path: impl AsRef<Path>) -> Result<SdpModel> {
    let text = fs::read_to_string(path)?;
    parse_sdpa(&text)
}

struct Header {
    m: usize,
    sizes: Vec<i64>,
    c: Vec<f64>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn tokens(line: &str) -> Vec<String> {
    line.replace([',', '{', '}', '(', ')'], " ")
        .split_whitespace()
        .map(str::to_string)
        .collect()
}

/// Parses SDPA sparse text into a model with one scalar variable per SDPA coordinate.
pub fn parse_sdpa(text: &str) -> Result<SdpModel> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .skip_while(|(_, l)| l.starts_with('"') || l.starts_with('*'))
        .filter(|(_, l)| !l.trim().is_empty());

    let mut next_line = |what: &str| {
        lines
            .next()
            .ok_or_else(|| parse_err(0, format!("unexpected end of input, expected {what}")))
    };
    let (ln, l) = next_line("m")?;
    let m: usize = tokens(l)
        .first()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| parse_err(ln, "expected the number of variables"))?;
    let (ln, l) = next_line("nblocks")?;
    let nblocks: usize = tokens(l)
        .first()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| parse_err(ln, "expected the number of blocks"))?;
    let (ln, l) = next_line("block sizes")?;
    let sizes: Vec<i64> = tokens(l)
        .iter()
        .take(nblocks)
        .map(|t| t.parse::<i64>().map_err(|_| parse_err(ln, format!("bad block size `{t}`"))))
        .collect::<Result<_>>()?;
    if sizes.len() != nblocks || sizes.iter().any(|&s| s == 0) {
        return Err(parse_err(ln, "block structure does not match the block count"));
    }
    let mut c = Vec::with_capacity(m);
    while c.len() < m {
        let (ln, l) = next_line("objective vector")?;
        for t in tokens(l) {
            if c.len() == m {
                break;
            }
            c.push(t.parse::<f64>().map_err(|_| parse_err(ln, format!("bad objective entry `{t}`")))?);
        }
    }
    let header = Header { m, sizes, c };

    // Dense accumulation: F[k][blk] per coordinate.
    let nb = header.sizes.len();
    let dims: Vec<usize> = header.sizes.iter().map(|s| s.unsigned_abs() as usize).collect();
    let mut mats: Vec<Vec<Option<CMatrix>>> = vec![vec![None; nb]; header.m + 1];
    for (ln, l) in lines {
        let t = tokens(l);
        if t.len() < 5 {
            return Err(parse_err(ln, "expected `matno blk i j value`"));
        }
        let int = |s: &str| s.parse::<usize>().map_err(|_| parse_err(ln, format!("bad index `{s}`")));
        let (k, blk, i, j) = (int(&t[0])?, int(&t[1])?, int(&t[2])?, int(&t[3])?);
        let v: f64 = t[4].parse().map_err(|_| parse_err(ln, format!("bad value `{}`", t[4])))?;
        if k > header.m || blk == 0 || blk > nb {
            return Err(parse_err(ln, "matrix or block index out of range"));
        }
        let d = dims[blk - 1];
        if i == 0 || j == 0 || i > d || j > d {
            return Err(parse_err(ln, "entry index out of range"));
        }
        if header.sizes[blk - 1] < 0 && i != j {
            return Err(parse_err(ln, "off-diagonal entry in a diagonal block"));
        }
        let mat = mats[k][blk - 1].get_or_insert_with(|| CMatrix::zeros(d, d));
        mat[(i - 1, j - 1)] = Complex64::new(v, 0.0);
        mat[(j - 1, i - 1)] = Complex64::new(v, 0.0);
    }

    let mut b = ModelBuilder::new("sdpa");
    let xs: Vec<_> = (1..=header.m).map(|k| b.scalar_var(&format!("x{k}"))).collect();
    for (bi, &size) in header.sizes.iter().enumerate() {
        let d = dims[bi];
        if size > 0 {
            let mut block = AffineBlock::zero(d);
            if let Some(f0) = mats[0][bi].take() {
                let id = b.data(&format!("F0.{}", bi + 1), -f0);
                block.push(Complex64::new(1.0, 0.0), Operand::Data(id));
            }
            for (k, x) in xs.iter().enumerate() {
                if let Some(fk) = mats[k + 1][bi].take() {
                    let id = b.data(&format!("F{}.{}", k + 1, bi + 1), fk);
                    block.push(Complex64::new(1.0, 0.0), Operand::ScaledData { var: *x, data: id });
                }
            }
            b.lmi1(&format!("block{}", bi + 1), block);
        } else {
            for r in 0..d {
                let f0 = mats[0][bi].as_ref().map_or(0.0, |f| f[(r, r)].re);
                let mut f = LinearFunctional::constant(-f0);
                for (k, x) in xs.iter().enumerate() {
                    if let Some(fk) = &mats[k + 1][bi] {
                        f.add(fk[(r, r)].re, *x, Weight::Trace);
                    }
                }
                b.scalar(&format!("row{}", r + 1), Sense::Ge, f);
            }
        }
    }
    let mut obj = LinearFunctional::default();
    for (k, x) in xs.iter().enumerate() {
        obj.add(header.c[k], *x, Weight::Trace);
    }
    b.objective(Goal::Minimize, obj);
    b.mark_realified();
    b.freeze()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{check_feasible, WitnessAssignment};

    /// `[[x1, y], [y, x2]]`, `[[x3, z], [z, 1]]`, `[[y, 1], [1, z]]`.
    fn hset() -> (SdpModel, Vec<crate::model::VarId>) {
        let mut b = ModelBuilder::new("hset");
        let names = ["x1", "x2", "x3", "y", "z"];
        let v: Vec<_> = names.iter().map(|n| b.scalar_var(n)).collect();
        let e = |i: usize, j: usize| {
            let mut m = CMatrix::zeros(2, 2);
            m[(i, j)] = Complex64::new(1.0, 0.0);
            m[(j, i)] = Complex64::new(1.0, 0.0);
            m
        };
        let mut l1 = b.scaled_data_block(v[0], "E11", e(0, 0));
        l1 = l1.plus(&b.scaled_data_block(v[3], "E12", e(0, 1)));
        l1 = l1.plus(&b.scaled_data_block(v[1], "E22", e(1, 1)));
        b.lmi1("first", l1);
        let mut l2 = b.scaled_data_block(v[2], "E11", e(0, 0));
        l2 = l2.plus(&b.scaled_data_block(v[4], "E12", e(0, 1)));
        l2 = l2.plus(&b.const_block("E22", e(1, 1)));
        b.lmi1("second", l2);
        let mut l3 = b.scaled_data_block(v[3], "E11", e(0, 0));
        l3 = l3.plus(&b.const_block("E12", e(0, 1)));
        l3 = l3.plus(&b.scaled_data_block(v[4], "E22", e(1, 1)));
        b.lmi1("third", l3);
        b.objective(Goal::Minimize, LinearFunctional::trace(v[0], 1.0));
        (b.freeze().unwrap(), v)
    }

    #[test]
    fn hset_exports_three_blocks_of_size_two() {
        let (model, v) = hset();
        let text = to_sdpa_string(&model).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "5");
        assert_eq!(lines[1], "3");
        assert_eq!(lines[2], "2 2 2");
        assert_eq!(lines[3], "1 0 0 0 0");
        let mut w = WitnessAssignment::new();
        for x in &v {
            w.set_scalar(*x, 1.0);
        }
        let rep = check_feasible(&model, &w, 1e-12).unwrap();
        assert!(rep.ok());
        assert!(rep.constraints.iter().all(|c| c.margin.abs() < 1e-12));
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let (model, _) = hset();
        let first = to_sdpa_string(&model).unwrap();
        let back = parse_sdpa(&first).unwrap();
        assert_eq!(to_sdpa_string(&back).unwrap(), first);
    }

    #[test]
    fn scalar_rows_use_a_diagonal_block() {
        let mut b = ModelBuilder::new("rows");
        let x = b.scalar_var("x");
        let y = b.scalar_var("y");
        let mut f = LinearFunctional::constant(1.5);
        f.add(-1.0, x, Weight::Trace).add(-0.25, y, Weight::Trace);
        b.scalar("cap", Sense::Ge, f);
        let mut g = LinearFunctional::constant(-2.0);
        g.add(1.0, y, Weight::Trace);
        b.scalar("floor", Sense::Le, g);
        b.lmi1("x", b.var_block(x));
        b.objective(Goal::Maximize, LinearFunctional::trace(x, 1.0));
        let model = b.freeze().unwrap();
        let text = to_sdpa_string(&model).unwrap();
        assert!(text.lines().nth(2).unwrap().ends_with("-2"));
        assert_eq!(text.lines().nth(3).unwrap(), "-1 0");
        let back = parse_sdpa(&text).unwrap();
        assert_eq!(back.scalars().len(), 2);
        assert_eq!(to_sdpa_string(&back).unwrap(), text);
    }

    #[test]
    fn comments_and_punctuation_are_tolerated() {
        let text = "\"example\n* more\n2 =mdim\n2 =nblocks\n{2, -1}\n1.0, 2.0\n0 1 1 1 1\n1 1 1 2 1\n2 2 1 1 1\n";
        let model = parse_sdpa(text).unwrap();
        assert_eq!(model.vars().len(), 2);
        assert_eq!(model.lmis().len(), 1);
        assert_eq!(model.scalars().len(), 1);
    }

    #[test]
    fn malformed_input_reports_the_line() {
        let text = "1\n1\n2\n1\n1 1 1 x 1\n";
        match parse_sdpa(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_sdpa("1\n1\n2\n1\n1 2 1 1 1\n").is_err());
    }
}
