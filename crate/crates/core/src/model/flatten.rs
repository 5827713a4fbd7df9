use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::CMatrix;

use super::{coord_count, Embed, Goal, LinearFunctional, Operand, Sense, SdpModel, VarId, VarKind, Weight, WitnessAssignment};

/// One real scalar coordinate of a matrix variable: the `(i, j)` entry with `i ≤ j`
/// (`i < j` for antisymmetric variables).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Coord {
    pub var: VarId,
    pub i: usize,
    pub j: usize,
    pub antisymmetric: bool,
}

impl Coord {
    /// Entries of the basis matrix this coordinate multiplies.
    fn basis(&self) -> Vec<(usize, usize, f64)> {
        if self.i == self.j {
            vec![(self.i, self.i, 1.0)]
        } else if self.antisymmetric {
            vec![(self.i, self.j, 1.0), (self.j, self.i, -1.0)]
        } else {
            vec![(self.i, self.j, 1.0), (self.j, self.i, 1.0)]
        }
    }
}

/// Symmetric entries stored in both triangles, sorted row-major.
pub type SparseSym = Vec<(usize, usize, f64)>;

/// `constant + Σ_k y_k A_k ⪰ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlatBlock {
    pub label: String,
    pub size: usize,
    pub constant: DMatrix<f64>,
    /// `(coordinate index, A_k)` sorted by coordinate, zero matrices omitted.
    pub coefs: Vec<(usize, SparseSym)>,
}

/// `constant + Σ_k coef_k y_k ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlatRow {
    pub label: String,
    pub constant: f64,
    pub coefs: Vec<(usize, f64)>,
}

/// A real model in scalar coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct FlatProblem {
    pub coords: Vec<Coord>,
    pub blocks: Vec<FlatBlock>,
    pub rows: Vec<FlatRow>,
    pub goal: Option<Goal>,
    pub objective_constant: f64,
    pub objective: Vec<f64>,
}

impl FlatProblem {
    /// Requires real data, real coefficients and real variable kinds.
    pub fn new(model: &SdpModel) -> Result<Self> {
        super::realify::require_real(model)?;
        let mut coords = Vec::with_capacity(model.num_coords());
        let mut first = Vec::with_capacity(model.vars().len());
        for v in model.vars() {
            first.push(coords.len());
            let anti = v.kind == VarKind::Antisymmetric;
            for i in 0..v.dim {
                let start = if anti { i + 1 } else { i };
                for j in start..v.dim {
                    coords.push(Coord {
                        var: v.id,
                        i,
                        j,
                        antisymmetric: anti,
                    });
                }
            }
            debug_assert_eq!(coords.len() - first[v.id.0], coord_count(v.kind, v.dim));
        }

        let mut blocks = Vec::with_capacity(model.lmis().len());
        for lmi in model.lmis() {
            let size = lmi.size();
            let bd = lmi.block_dim();
            let mut constant = DMatrix::<f64>::zeros(size, size);
            let mut acc: BTreeMap<usize, BTreeMap<(usize, usize), f64>> = BTreeMap::new();
            for (gi, row) in lmi.grid.iter().enumerate() {
                for (gj, cell) in row.iter().enumerate() {
                    let (r0, c0) = (gi * bd, gj * bd);
                    for term in cell.terms() {
                        let c = real_coef(term.coef)?;
                        match &term.operand {
                            Operand::Identity => {
                                for k in 0..bd {
                                    constant[(r0 + k, c0 + k)] += c;
                                }
                            }
                            Operand::Data(d) => {
                                let m = model.data(*d);
                                for i in 0..bd {
                                    for j in 0..bd {
                                        constant[(r0 + i, c0 + j)] += c * m[(i, j)].re;
                                    }
                                }
                            }
                            Operand::ScaledData { var, data } => {
                                let k = first[var.0];
                                let m = model.data(*data);
                                let slot = acc.entry(k).or_default();
                                for i in 0..bd {
                                    for j in 0..bd {
                                        let v = c * m[(i, j)].re;
                                        if v != 0.0 {
                                            *slot.entry((r0 + i, c0 + j)).or_insert(0.0) += v;
                                        }
                                    }
                                }
                            }
                            Operand::Var { id, lift } => {
                                let var = model.var(*id);
                                let d = var.dim;
                                let n = lift.left * d * lift.right;
                                let count = coord_count(var.kind, d);
                                for k in first[id.0]..first[id.0] + count {
                                    let slot = acc.entry(k).or_default();
                                    for (p, q, val) in coords[k].basis() {
                                        for a in 0..lift.left {
                                            for b in 0..lift.right {
                                                let row = (a * d + p) * lift.right + b;
                                                let col = (a * d + q) * lift.right + b;
                                                let mut put = |r: usize, s: usize, v: f64| {
                                                    *slot.entry((r0 + r, c0 + s)).or_insert(0.0) += c * v;
                                                };
                                                match lift.embed {
                                                    Embed::None => put(row, col, val),
                                                    Embed::Re => {
                                                        put(row, col, val);
                                                        put(row + n, col + n, val);
                                                    }
                                                    Embed::Im => {
                                                        put(row, col + n, -val);
                                                        put(row + n, col, val);
                                                    }
                                                }
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
            let coefs = acc
                .into_iter()
                .map(|(k, entries)| {
                    let sparse: SparseSym = entries.into_iter().filter(|e| e.1 != 0.0).map(|((i, j), v)| (i, j, v)).collect();
                    (k, sparse)
                })
                .filter(|(_, s)| !s.is_empty())
                .collect();
            blocks.push(FlatBlock {
                label: lmi.label.clone(),
                size,
                constant,
                coefs,
            });
        }

        let mut rows = Vec::with_capacity(model.scalars().len());
        for sc in model.scalars() {
            let (constant, dense) = flatten_functional(model, &coords, &first, &sc.lhs)?;
            let sign = match sc.sense {
                Sense::Ge => 1.0,
                Sense::Le => -1.0,
            };
            rows.push(FlatRow {
                label: sc.label.clone(),
                constant: sign * constant,
                coefs: dense
                    .into_iter()
                    .enumerate()
                    .filter(|(_, v)| *v != 0.0)
                    .map(|(k, v)| (k, sign * v))
                    .collect(),
            });
        }

        let (goal, objective_constant, objective) = match model.objective() {
            Some(obj) => {
                let (c, dense) = flatten_functional(model, &coords, &first, &obj.functional)?;
                (Some(obj.goal), c, dense)
            }
            None => (None, 0.0, vec![0.0; coords.len()]),
        };

        Ok(FlatProblem {
            coords,
            blocks,
            rows,
            goal,
            objective_constant,
            objective,
        })
    }

    pub fn num_coords(&self) -> usize {
        self.coords.len()
    }

    /// Coordinate vector of an assignment (entries above the diagonal, real parts).
    pub fn coords_of(&self, w: &WitnessAssignment) -> Result<Vec<f64>> {
        self.coords
            .iter()
            .map(|c| {
                w.get(c.var)
                    .map(|m| m[(c.i, c.j)].re)
                    .ok_or_else(|| Error::MissingAssignment(format!("#{}", c.var.0)))
            })
            .collect()
    }

    /// Rebuilds matrix values for every variable from a coordinate vector.
    pub fn assignment(&self, model: &SdpModel, y: &[f64]) -> WitnessAssignment {
        let mut mats: Vec<CMatrix> = model.vars().iter().map(|v| CMatrix::zeros(v.dim, v.dim)).collect();
        for (c, &v) in self.coords.iter().zip(y) {
            let m = &mut mats[c.var.0];
            m[(c.i, c.j)] = Complex64::new(v, 0.0);
            if c.i != c.j {
                let other = if c.antisymmetric { -v } else { v };
                m[(c.j, c.i)] = Complex64::new(other, 0.0);
            }
        }
        let mut w = WitnessAssignment::new();
        for (v, m) in model.vars().iter().zip(mats) {
            w.set(v.id, m);
        }
        w
    }

    /// Dense evaluation of a block at `y`.
    pub fn eval_block(&self, block: &FlatBlock, y: &[f64]) -> DMatrix<f64> {
        let mut m = block.constant.clone();
        for (k, entries) in &block.coefs {
            for &(i, j, v) in entries {
                m[(i, j)] += y[*k] * v;
            }
        }
        m
    }

    pub fn eval_row(&self, row: &FlatRow, y: &[f64]) -> f64 {
        row.constant + row.coefs.iter().map(|(k, v)| v * y[*k]).sum::<f64>()
    }

    pub fn eval_objective(&self, y: &[f64]) -> f64 {
        self.objective_constant + self.objective.iter().zip(y).map(|(c, v)| c * v).sum::<f64>()
    }
}

fn real_coef(c: Complex64) -> Result<f64> {
    if c.im != 0.0 {
        Err(Error::ComplexData)
    } else {
        Ok(c.re)
    }
}

fn flatten_functional(
    model: &SdpModel,
    coords: &[Coord],
    first: &[usize],
    f: &LinearFunctional,
) -> Result<(f64, Vec<f64>)> {
    let mut dense = vec![0.0; coords.len()];
    for term in &f.terms {
        let var = model.var(term.var);
        let count = coord_count(var.kind, var.dim);
        let weight: Option<DMatrix<f64>> = match &term.weight {
            Weight::Trace => None,
            Weight::Matrix(d) => Some(real_matrix(model.data(*d))?),
            Weight::Quadratic(d) => {
                let v = model.data(*d);
                Some(real_matrix(&(v * v.adjoint()))?)
            }
        };
        for k in first[term.var.0]..first[term.var.0] + count {
            let c = coords[k];
            // tr(M X) as a function of the coordinate X_ij.
            let value = match &weight {
                None => {
                    if c.i == c.j {
                        1.0
                    } else {
                        0.0
                    }
                }
                Some(m) => {
                    if c.i == c.j {
                        m[(c.i, c.i)]
                    } else if c.antisymmetric {
                        m[(c.j, c.i)] - m[(c.i, c.j)]
                    } else {
                        m[(c.j, c.i)] + m[(c.i, c.j)]
                    }
                }
            };
            dense[k] += term.coef * value;
        }
    }
    Ok((f.constant, dense))
}

fn real_matrix(m: &CMatrix) -> Result<DMatrix<f64>> {
    if m.iter().any(|z| z.im != 0.0) {
        return Err(Error::ComplexData);
    }
    Ok(m.map(|z| z.re))
}
