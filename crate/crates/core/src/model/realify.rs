use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::{real_embedding, CMatrix};

use super::{
    AffineBlock, Embed, FunctionalTerm, Lift, LinearFunctional, LmiConstraint, ModelBuilder, Objective,
    Operand, ScalarConstraint, SdpModel, VarId, VarKind, Weight, WitnessAssignment,
};

/// Where an original variable lives in the realified model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarImage {
    /// Same variable, now real symmetric.
    Real(VarId),
    /// `X = R + iS` with `R` symmetric and `S` antisymmetric (absent for 1×1 variables).
    Split { re: VarId, im: Option<VarId> },
}

/// A realified model together with the map from original variables.
#[derive(Clone, Debug)]
pub struct Realified {
    pub model: SdpModel,
    pub map: Vec<VarImage>,
}

impl Realified {
    pub fn image(&self, original: VarId) -> VarImage {
        self.map[original.0]
    }

    /// Carries an assignment of the original model into the realified one.
    pub fn embed_witness(&self, w: &WitnessAssignment) -> WitnessAssignment {
        let mut out = WitnessAssignment::new();
        for (id, value) in w.iter() {
            match self.map[id.0] {
                VarImage::Real(r) => {
                    out.set(r, value.map(|z| Complex64::new(z.re, 0.0)));
                }
                VarImage::Split { re, im } => {
                    out.set(re, value.map(|z| Complex64::new(z.re, 0.0)));
                    if let Some(im) = im {
                        out.set(im, value.map(|z| Complex64::new(z.im, 0.0)));
                    }
                }
            }
        }
        out
    }

    /// Reassembles original variables from a realified assignment.
    pub fn recover(&self, w: &WitnessAssignment) -> WitnessAssignment {
        let mut out = WitnessAssignment::new();
        for (idx, image) in self.map.iter().enumerate() {
            let id = VarId(idx);
            match *image {
                VarImage::Real(r) => {
                    if let Some(v) = w.get(r) {
                        out.set(id, v.clone());
                    }
                }
                VarImage::Split { re, im } => {
                    let Some(r) = w.get(re) else { continue };
                    let mut x = r.map(|z| Complex64::new(z.re, 0.0));
                    if let Some(s) = im.and_then(|im| w.get(im)) {
                        x += s.map(|z| Complex64::new(0.0, z.re));
                    }
                    out.set(id, x);
                }
            }
        }
        out
    }
}

/// Replaces complex Hermitian structure by real symmetric structure.
///
/// Models whose data and coefficients are all real keep their dimensions: a Hermitian variable
/// becomes a symmetric one of the same size, which loses nothing because the feasible set is
/// closed under entrywise conjugation and convex. Everything else passes through
/// `M ↦ [[Re M, -Im M], [Im M, Re M]]`, which doubles every block.
pub fn realify(model: &SdpModel) -> SdpModel {
    realify_with_map(model).model
}

pub fn realify_with_map(model: &SdpModel) -> Realified {
    if real_data(model) {
        real_shortcut(model)
    } else {
        embed(model)
    }
}

/// Always applies the doubling embedding, even to real models.
pub fn realify_embedded(model: &SdpModel) -> Realified {
    embed(model)
}

fn real_data(model: &SdpModel) -> bool {
    let data_real = model.data.iter().all(|d| d.matrix.iter().all(|z| z.im == 0.0));
    let coefs_real = model
        .lmis
        .iter()
        .flat_map(|l| l.grid.iter().flatten())
        .flat_map(|b| b.terms.iter())
        .all(|t| t.coef.im == 0.0);
    data_real && coefs_real
}

fn real_shortcut(model: &SdpModel) -> Realified {
    let mut out = model.clone();
    for v in &mut out.vars {
        if v.kind == VarKind::Hermitian {
            v.kind = VarKind::Symmetric;
        }
    }
    for block in out.lmis.iter_mut().flat_map(|l| l.grid.iter_mut().flatten()) {
        for term in &mut block.terms {
            if let Operand::Var { lift, .. } = &mut term.operand {
                lift.conj = false;
            }
        }
    }
    out.realified = true;
    let map = model.vars.iter().map(|v| VarImage::Real(v.id)).collect();
    Realified { model: out, map }
}

fn embed(model: &SdpModel) -> Realified {
    let mut b = ModelBuilder::new(model.name.clone());
    let mut map = Vec::with_capacity(model.vars.len());
    for v in &model.vars {
        let image = match v.kind {
            VarKind::Hermitian | VarKind::Symmetric => {
                let re = b.var(&format!("{}.re", v.name), v.dim, VarKind::Symmetric);
                let im = (v.kind == VarKind::Hermitian && v.dim > 1)
                    .then(|| b.var(&format!("{}.im", v.name), v.dim, VarKind::Antisymmetric));
                VarImage::Split { re, im }
            }
            VarKind::Antisymmetric => VarImage::Real(b.var(&v.name, v.dim, VarKind::Antisymmetric)),
        };
        map.push(image);
    }

    for lmi in &model.lmis {
        let grid = lmi
            .grid
            .iter()
            .map(|row| row.iter().map(|cell| embed_block(model, &mut b, &map, cell)).collect())
            .collect();
        b.push_lmi(LmiConstraint {
            label: lmi.label.clone(),
            grid,
        });
    }
    for sc in &model.scalars {
        let lhs = embed_functional(model, &mut b, &map, &sc.lhs);
        b.scalars.push(ScalarConstraint {
            label: sc.label.clone(),
            sense: sc.sense,
            lhs,
        });
    }
    if let Some(obj) = &model.objective {
        let functional = embed_functional(model, &mut b, &map, &obj.functional);
        b.objective = Some(Objective {
            goal: obj.goal,
            functional,
        });
    }
    b.mark_realified();
    let out = b.freeze().expect("embedding preserves Hermitian structure");
    Realified { model: out, map }
}

fn push_embedded(out: &mut AffineBlock, k: Complex64, id: VarId, lift: &Lift) {
    let base = Lift {
        left: lift.left,
        right: lift.right,
        conj: false,
        embed: Embed::Re,
    };
    if k.re != 0.0 {
        out.push(Complex64::new(k.re, 0.0), Operand::Var { id, lift: base });
    }
    if k.im != 0.0 {
        out.push(
            Complex64::new(k.im, 0.0),
            Operand::Var {
                id,
                lift: Lift { embed: Embed::Im, ..base },
            },
        );
    }
}

fn embed_block(model: &SdpModel, b: &mut ModelBuilder, map: &[VarImage], block: &AffineBlock) -> AffineBlock {
    let mut out = AffineBlock::zero(2 * block.dim);
    for term in &block.terms {
        let c = term.coef;
        match &term.operand {
            Operand::Identity => {
                if c.re != 0.0 {
                    out.push(Complex64::new(c.re, 0.0), Operand::Identity);
                }
                if c.im != 0.0 {
                    let m = real_embedding(&CMatrix::identity(block.dim, block.dim).map(|z| z * Complex64::i()));
                    out.push(Complex64::new(c.im, 0.0), Operand::Data(b.data("iI", m)));
                }
            }
            Operand::Data(d) => {
                let m = real_embedding(&model.data(*d).map(|z| z * c));
                let name = model.data[d.0].name.clone();
                out.push(Complex64::new(1.0, 0.0), Operand::Data(b.data(&name, m)));
            }
            Operand::ScaledData { var, data } => {
                let m = real_embedding(&model.data(*data).map(|z| z * c));
                let name = model.data[data.0].name.clone();
                let var = match map[var.0] {
                    VarImage::Real(r) => r,
                    VarImage::Split { re, .. } => re,
                };
                out.push(
                    Complex64::new(1.0, 0.0),
                    Operand::ScaledData {
                        var,
                        data: b.data(&name, m),
                    },
                );
            }
            Operand::Var { id, lift } => match map[id.0] {
                VarImage::Real(r) => push_embedded(&mut out, c, r, lift),
                VarImage::Split { re, im } => {
                    push_embedded(&mut out, c, re, lift);
                    if let Some(im) = im {
                        // X = R + iS, conj(X) = R - iS.
                        let k = if lift.conj { -Complex64::i() * c } else { Complex64::i() * c };
                        push_embedded(&mut out, k, im, lift);
                    }
                }
            },
        }
    }
    out
}

fn embed_functional(
    model: &SdpModel,
    b: &mut ModelBuilder,
    map: &[VarImage],
    f: &LinearFunctional,
) -> LinearFunctional {
    let mut out = LinearFunctional::constant(f.constant);
    for FunctionalTerm { coef, var, weight } in &f.terms {
        let (re, im) = match map[var.0] {
            VarImage::Real(r) => (r, None),
            VarImage::Split { re, im } => (re, im),
        };
        let m = match weight {
            Weight::Trace => {
                out.add(*coef, re, Weight::Trace);
                continue;
            }
            Weight::Matrix(d) => model.data(*d).clone(),
            Weight::Quadratic(d) => {
                let v = model.data(*d);
                v * v.adjoint()
            }
        };
        // Re tr(M X) = tr(Re M · R) - tr(Im M · S).
        let mr = m.map(|z| Complex64::new(z.re, 0.0));
        let mi = m.map(|z| Complex64::new(z.im, 0.0));
        if mr.iter().any(|z| z.re != 0.0) {
            let id = b.data("W.re", mr);
            out.add(*coef, re, Weight::Matrix(id));
        }
        if let Some(im) = im {
            if mi.iter().any(|z| z.re != 0.0) {
                let id = b.data("W.im", mi);
                out.add(-*coef, im, Weight::Matrix(id));
            }
        }
    }
    out
}

/// Complex models are rejected where real structure is required.
pub(crate) fn require_real(model: &SdpModel) -> Result<()> {
    if model.is_real() {
        Ok(())
    } else {
        Err(Error::ComplexData)
    }
}
