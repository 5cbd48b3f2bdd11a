//! Boundary 1-form symmetry filter and enumeration of the local moves a
//! symmetric bath may apply.

use std::collections::HashMap;

use crate::codes::StabilizerModel;
use crate::complex::CellId;
use crate::error::{Error, Result};
use crate::pauli::{gf2_in_span, Factor, PauliOp};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Move {
    pub op: PauliOp,
    /// Cell of the lowest-index qudit in the support.
    pub anchor: CellId,
    pub class_tag: String,
}

impl Move {
    /// Wraps a nonidentity operator, deriving anchor and class tag.
    pub fn from_op(model: &StabilizerModel, op: PauliOp) -> Result<Move> {
        op.validate(&model.registry)?;
        let first = op
            .factors()
            .first()
            .ok_or_else(|| Error::InvalidParams("a move must act on at least one qudit".into()))?;
        Ok(Move { anchor: model.registry.id(first.qudit).cell, class_tag: class_tag(model, &op), op })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveSet {
    pub moves: Vec<Move>,
    pub s_max: usize,
    pub radius: usize,
}

impl MoveSet {
    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn ops(&self) -> Vec<PauliOp> {
        self.moves.iter().map(|m| m.op.clone()).collect()
    }

    /// Distinct class tags in first-appearance order.
    pub fn classes(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for m in &self.moves {
            if !out.contains(&m.class_tag.as_str()) {
                out.push(&m.class_tag);
            }
        }
        out
    }

    /// Whether `target` is a product of retained moves, up to phase.
    pub fn generates(&self, target: &PauliOp) -> Result<bool> {
        gf2_in_span(&self.ops(), target)
    }
}

/// True when `op` commutes with every symmetry generator of the model, or
/// when the model does not enforce its symmetry.
pub fn is_allowed(op: &PauliOp, model: &StabilizerModel) -> Result<bool> {
    op.validate(&model.registry)?;
    if !model.enforce_symmetry {
        return Ok(true);
    }
    Ok(model.symmetry.iter().all(|g| g.op.commutes_with(op)))
}

/// Symmetry check restricted to generators overlapping the operator.
pub(crate) struct LocalFilter<'a> {
    model: &'a StabilizerModel,
    incidence: Vec<Vec<u32>>,
}

impl<'a> LocalFilter<'a> {
    pub(crate) fn new(model: &'a StabilizerModel) -> Self {
        LocalFilter { model, incidence: model.symmetry_incidence() }
    }

    pub(crate) fn allows(&self, op: &PauliOp) -> bool {
        if !self.model.enforce_symmetry {
            return true;
        }
        op.factors().iter().all(|f| {
            self.incidence[f.qudit as usize]
                .iter()
                .all(|&g| self.model.symmetry[g as usize].op.commutes_with(op))
        })
    }
}

fn pauli_letter(f: &Factor) -> String {
    let pow = |k: u8| if k > 1 { k.to_string() } else { String::new() };
    match (f.x, f.z) {
        (x, 0) => format!("X{}", pow(x)),
        (0, z) => format!("Z{}", pow(z)),
        (1, 1) => "Y".to_string(),
        (x, z) => format!("X{}Z{}", pow(x), pow(z)),
    }
}

fn class_tag(model: &StabilizerModel, op: &PauliOp) -> String {
    let mut parts: Vec<(char, String)> = op
        .factors()
        .iter()
        .map(|f| (model.registry.id(f.qudit).sector.tag(), pauli_letter(f)))
        .collect();
    match parts.len() {
        1 => format!("single_{}_{}", parts[0].1, parts[0].0),
        _ => {
            parts.sort();
            let body: Vec<String> = parts.iter().map(|(s, p)| format!("{p}{s}")).collect();
            format!("pair_{}", body.join("_"))
        }
    }
}

/// Single-qudit Pauli exponents in candidate order: X, Z, Y for qubits;
/// the nontrivial powers of X and Z for ququarts.
fn local_paulis(dim: u8) -> Vec<(u8, u8)> {
    if dim == 2 {
        vec![(1, 0), (0, 1), (1, 1)]
    } else {
        (1..dim).map(|k| (k, 0)).chain((1..dim).map(|k| (0, k))).collect()
    }
}

/// Qubit moves restricted to a support, encoded as bit vectors over the
/// (x, z) pairs of that support.
fn local_bits(op: &PauliOp, support: &[u32]) -> u32 {
    let mut bits = 0u32;
    for f in op.factors() {
        let pos = support.iter().position(|&q| q == f.qudit).expect("factor inside support");
        bits |= ((f.x as u32 & 1) << (2 * pos)) | ((f.z as u32 & 1) << (2 * pos + 1));
    }
    bits
}

fn in_xor_span(basis: &[u32], target: u32) -> bool {
    let mut reduced: Vec<u32> = Vec::new();
    for &v in basis {
        let mut v = v;
        for &b in &reduced {
            v = v.min(v ^ b);
        }
        if v != 0 {
            reduced.push(v);
            reduced.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    let mut t = target;
    for &b in &reduced {
        t = t.min(t ^ b);
    }
    t == 0
}

/// Generating set of symmetry-allowed moves with support at most `s_max`
/// qudits whose cell centers lie within `radius` lattice units of each other.
///
/// Candidates are visited singles first, then pairs, each in qudit order.
/// A candidate is dropped when a retained move with identical operator
/// exists or, for qubits, when it is a product of retained moves supported
/// inside its own support.
pub fn enumerate_allowed_moves(model: &StabilizerModel, s_max: usize, radius: usize) -> Result<MoveSet> {
    if s_max == 0 {
        return Err(Error::InvalidParams("s_max must be at least 1".into()));
    }
    if s_max > 2 {
        return Err(Error::InvalidParams(format!("s_max = {s_max} is not supported; use 1 or 2")));
    }
    let filter = LocalFilter::new(model);
    let reg = &model.registry;
    let qubits = reg.all_qubits();
    let mut moves: Vec<Move> = Vec::new();
    // Retained moves grouped by exact support.
    let mut by_support: HashMap<Vec<u32>, Vec<usize>> = HashMap::new();

    let mut consider = |op: PauliOp, moves: &mut Vec<Move>| {
        if !filter.allows(&op) {
            return;
        }
        let support: Vec<u32> = op.factors().iter().map(|f| f.qudit).collect();
        let mut related: Vec<usize> = Vec::new();
        for mask in 1u32..(1 << support.len()) {
            let sub: Vec<u32> = (0..support.len()).filter(|i| mask >> i & 1 == 1).map(|i| support[i]).collect();
            if let Some(ids) = by_support.get(&sub) {
                related.extend(ids);
            }
        }
        let redundant = if qubits {
            let basis: Vec<u32> = related.iter().map(|&i| local_bits(&moves[i].op, &support)).collect();
            in_xor_span(&basis, local_bits(&op, &support))
        } else {
            related.iter().any(|&i| moves[i].op.factors() == op.factors())
        };
        if redundant {
            return;
        }
        by_support.entry(support.clone()).or_default().push(moves.len());
        moves.push(Move { anchor: reg.id(support[0]).cell, class_tag: class_tag(model, &op), op });
    };

    for q in 0..reg.len() as u32 {
        let d = reg.dim(q);
        for (x, z) in local_paulis(d) {
            consider(PauliOp::single(q, d, x, z), &mut moves);
        }
    }

    if s_max >= 2 {
        let g = &model.geometry;
        let wrap = |c: [i64; 3]| [c[0].rem_euclid(2 * g.lx as i64), c[1], c[2].rem_euclid(2 * g.lz as i64)];
        let mut at_center: HashMap<[i64; 3], Vec<u32>> = HashMap::new();
        for q in 0..reg.len() as u32 {
            at_center.entry(wrap(reg.id(q).cell.doubled_center())).or_default().push(q);
        }
        let r = 2 * radius as i64;
        for q1 in 0..reg.len() as u32 {
            let c = reg.id(q1).cell.doubled_center();
            let mut partners: Vec<u32> = Vec::new();
            for dx in -r..=r {
                for dy in -r..=r {
                    for dz in -r..=r {
                        if let Some(qs) = at_center.get(&wrap([c[0] + dx, c[1] + dy, c[2] + dz])) {
                            partners.extend(qs.iter().copied().filter(|&q2| q2 > q1));
                        }
                    }
                }
            }
            partners.sort_unstable();
            partners.dedup();
            let (d1, id1) = (reg.dim(q1), reg.id(q1));
            for q2 in partners {
                if g.doubled_distance(&id1.cell, &reg.id(q2).cell) > r {
                    continue;
                }
                let d2 = reg.dim(q2);
                for (x1, z1) in local_paulis(d1) {
                    for (x2, z2) in local_paulis(d2) {
                        let op = PauliOp::from_factors([
                            Factor { qudit: q1, dim: d1, x: x1, z: z1 },
                            Factor { qudit: q2, dim: d2, x: x2, z: z2 },
                        ])?;
                        consider(op, &mut moves);
                    }
                }
            }
        }
    }

    Ok(MoveSet { moves, s_max, radius })
}

/// X and Z on every qudit, ignoring the symmetry. Used by the decoder.
pub fn unconstrained_singles(model: &StabilizerModel) -> Vec<Move> {
    let reg = &model.registry;
    let mut out = Vec::with_capacity(2 * reg.len());
    for q in 0..reg.len() as u32 {
        let d = reg.dim(q);
        for (x, z) in [(1, 0), (0, 1)] {
            let op = PauliOp::single(q, d, x, z);
            out.push(Move { anchor: reg.id(q).cell, class_tag: class_tag(model, &op), op });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::build_spbm;
    use crate::complex::{build_lattice, Axis};
    use crate::pauli::{QuditId, Sector};

    fn spbm() -> StabilizerModel {
        build_spbm(build_lattice(2, 2, 2).unwrap()).unwrap()
    }

    fn single(m: &StabilizerModel, sector: Sector, cell: CellId, x: u8, z: u8) -> PauliOp {
        m.registry.single(&QuditId { sector, cell }, x, z).unwrap()
    }

    #[test]
    fn filter_examples() {
        let m = spbm();
        let e = CellId::edge(Axis::Z, 0, 0, 0);
        let zb = single(&m, Sector::B, e, 0, 1);
        assert!(!is_allowed(&zb, &m).unwrap());
        let zf = single(&m, Sector::F, m.geometry.perpendicular_face(&e).unwrap(), 0, 1);
        assert!(is_allowed(&zb.multiply(&zf).unwrap(), &m).unwrap());
        for t in &m.hamiltonian {
            assert!(is_allowed(&t.op, &m).unwrap());
        }
        let off = m.clone().with_symmetry(false);
        assert!(is_allowed(&zb, &off).unwrap());
    }

    #[test]
    fn unsymmetric_moveset_is_two_per_qubit() {
        let m = spbm().with_symmetry(false);
        let ms = enumerate_allowed_moves(&m, 2, 1).unwrap();
        assert_eq!(ms.len(), 2 * m.n_qudits());
        assert!(ms.moves.iter().all(|mv| mv.op.support_len() == 1));
    }

    #[test]
    fn symmetric_moveset_classes() {
        let m = spbm();
        let ms = enumerate_allowed_moves(&m, 2, 1).unwrap();
        let classes = ms.classes();
        assert!(classes.contains(&"pair_Zb_Zf"), "{classes:?}");
        assert!(classes.contains(&"pair_Xb_Xe"), "{classes:?}");
        for mv in &ms.moves {
            let single_b = mv.op.support_len() == 1
                && m.registry.id(mv.op.factors()[0].qudit).sector == Sector::B;
            assert!(!single_b, "{}", mv.class_tag);
            assert!(is_allowed(&mv.op, &m).unwrap());
        }
        let mut ops = ms.ops();
        ops.sort_by(|a, b| a.factors().cmp(b.factors()));
        ops.dedup();
        assert_eq!(ops.len(), ms.len());
    }

    #[test]
    fn deterministic_and_validated() {
        let m = spbm();
        assert_eq!(enumerate_allowed_moves(&m, 2, 1).unwrap(), enumerate_allowed_moves(&m, 2, 1).unwrap());
        assert!(enumerate_allowed_moves(&m, 0, 1).is_err());
    }

    #[test]
    fn unconstrained_singles_cover_every_qudit() {
        let m = spbm();
        assert_eq!(unconstrained_singles(&m).len(), 2 * m.n_qudits());
    }
}
