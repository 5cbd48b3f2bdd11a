//! Stabilizer models: the 2d toric code, the symmetry-protected boundary
//! memory (two 3d toric codes with a 2d toric code on their shared
//! boundary), the Z4 defect model, and the condensing term set.
//!
//! Builders validate their own output (all Hamiltonian terms commute, the
//! symmetry generators commute with the Hamiltonian, every logical is a
//! logical) and return [`Error::Contract`] instead of a broken model.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::complex::{Axis, CellId, CellKind, LatticeGeometry};
use crate::error::{Error, Result};
use crate::pauli::{Factor, PauliOp, QuditId, QuditRegistry, Sector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TermFamily {
    /// X^(e) star on a vertex.
    AvE,
    /// Z^(e) plaquette on a face.
    BfE,
    /// Z^(f) on the faces of a cube.
    AcF,
    /// X^(f) on the faces around an edge.
    BeF,
    AvB,
    BfB,
    /// Symmetry generator A_v^(b) · B^(f) on the perpendicular edge.
    ScriptA,
    /// Symmetry generator B_f^(b) · B_f^(e).
    ScriptB,
    Z4ScriptA,
    Z4ScriptB,
    Z4Ab,
    Z4Bb,
    CondX,
}

impl TermFamily {
    pub fn name(self) -> &'static str {
        match self {
            TermFamily::AvE => "A_v^e",
            TermFamily::BfE => "B_f^e",
            TermFamily::AcF => "A_c^f",
            TermFamily::BeF => "B_e^f",
            TermFamily::AvB => "A_v^b",
            TermFamily::BfB => "B_f^b",
            TermFamily::ScriptA => "script_A_v",
            TermFamily::ScriptB => "script_B_f",
            TermFamily::Z4ScriptA => "Z4_script_A",
            TermFamily::Z4ScriptB => "Z4_script_B",
            TermFamily::Z4Ab => "Z4_A_b",
            TermFamily::Z4Bb => "Z4_B_b",
            TermFamily::CondX => "cond_X",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TermLabel {
    pub family: TermFamily,
    pub anchor: CellId,
}

impl TermLabel {
    pub fn new(family: TermFamily, anchor: CellId) -> Self {
        TermLabel { family, anchor }
    }
}

impl fmt::Display for TermLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.family.name(), self.anchor)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub label: TermLabel,
    pub op: PauliOp,
    /// Term enters the Hamiltonian together with its Hermitian conjugate.
    pub hermitian_pair: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetryGenerator {
    pub label: TermLabel,
    pub op: PauliOp,
    /// The two Hamiltonian terms whose product this generator is.
    pub factors: [TermLabel; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogicalKind {
    /// Member of the independent conjugate-pair basis.
    Basis,
    /// Product of basis logicals from different sectors.
    Composite,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicalPair {
    pub name: String,
    pub z_like: PauliOp,
    pub x_like: PauliOp,
    pub kind: LogicalKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    ToricCode2d,
    Spbm,
    Z4Defect,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizerModel {
    pub tag: String,
    pub kind: ModelKind,
    pub geometry: LatticeGeometry,
    pub registry: QuditRegistry,
    pub hamiltonian: Vec<Term>,
    pub symmetry: Vec<SymmetryGenerator>,
    pub logicals: Vec<LogicalPair>,
    pub enforce_symmetry: bool,
}

impl StabilizerModel {
    pub fn with_symmetry(mut self, enforce: bool) -> Self {
        self.enforce_symmetry = enforce;
        self
    }

    pub fn n_qudits(&self) -> usize {
        self.registry.len()
    }

    pub fn term(&self, label: &TermLabel) -> Option<&Term> {
        self.hamiltonian.iter().find(|t| t.label == *label)
    }

    pub fn term_index(&self) -> HashMap<TermLabel, usize> {
        self.hamiltonian
            .iter()
            .enumerate()
            .map(|(i, t)| (t.label, i))
            .collect()
    }

    pub fn hamiltonian_ops(&self) -> Vec<PauliOp> {
        self.hamiltonian.iter().map(|t| t.op.clone()).collect()
    }

    /// For each qudit, the indices of the Hamiltonian terms acting on it.
    pub fn term_incidence(&self) -> Vec<Vec<u32>> {
        let mut inc = vec![Vec::new(); self.registry.len()];
        for (i, t) in self.hamiltonian.iter().enumerate() {
            for f in t.op.factors() {
                inc[f.qudit as usize].push(i as u32);
            }
        }
        inc
    }

    /// For each qudit, the indices of the symmetry generators acting on it.
    pub fn symmetry_incidence(&self) -> Vec<Vec<u32>> {
        let mut inc = vec![Vec::new(); self.registry.len()];
        for (i, g) in self.symmetry.iter().enumerate() {
            for f in g.op.factors() {
                inc[f.qudit as usize].push(i as u32);
            }
        }
        inc
    }

    pub fn logical_pair(&self, name: &str) -> Option<&LogicalPair> {
        self.logicals.iter().find(|p| p.name == name)
    }

    /// Resolves operator names such as `Zbar_b`, `Xbar_f_rot`, `composite_Z`.
    pub fn logical_operator(&self, name: &str) -> Result<&PauliOp> {
        let unknown = || Error::UnknownLogical(name.to_string());
        let (pair, z) = if let Some(rest) = name.strip_prefix("composite_") {
            let (p, rot) = match rest.strip_suffix("_rot") {
                Some(p) => (p, "_rot"),
                None => (rest, ""),
            };
            match p {
                "Z" => (format!("composite{rot}"), true),
                "X" => (format!("composite{rot}"), false),
                _ => return Err(unknown()),
            }
        } else if let Some(rest) = name.strip_prefix("Zbar_") {
            (rest.to_string(), true)
        } else if let Some(rest) = name.strip_prefix("Xbar_") {
            (rest.to_string(), false)
        } else if let Some(rest) = name.strip_prefix("membrane_") {
            let (p, rot) = match rest.strip_suffix("_rot") {
                Some(p) => (p, "_rot"),
                None => (rest, ""),
            };
            match p {
                "f" => (format!("membrane{rot}"), true),
                "e" => (format!("membrane{rot}"), false),
                _ => return Err(unknown()),
            }
        } else {
            return Err(unknown());
        };
        let p = self.logical_pair(&pair).ok_or_else(unknown)?;
        Ok(if z { &p.z_like } else { &p.x_like })
    }

    /// All operator names resolvable by [`Self::logical_operator`].
    pub fn logical_operator_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        for p in &self.logicals {
            let (zn, xn) = if let Some(rot) = p.name.strip_prefix("composite") {
                (format!("composite_Z{rot}"), format!("composite_X{rot}"))
            } else if let Some(rot) = p.name.strip_prefix("membrane") {
                (format!("membrane_f{rot}"), format!("membrane_e{rot}"))
            } else {
                (format!("Zbar_{}", p.name), format!("Xbar_{}", p.name))
            };
            out.push(zn);
            out.push(xn);
        }
        out
    }
}

/// Helper that assembles operators from (sector, cell) references.
struct Assembler<'a> {
    registry: &'a QuditRegistry,
}

impl Assembler<'_> {
    /// Product of `X^x Z^z` factors; cells without a qudit in `sector` are
    /// skipped, which realizes truncation at the open planes.
    fn op(&self, parts: impl IntoIterator<Item = (Sector, CellId, u8, u8)>) -> Result<PauliOp> {
        let mut factors = Vec::new();
        for (sector, cell, x, z) in parts {
            if let Some(q) = self.registry.index_of(&QuditId { sector, cell }) {
                factors.push(Factor { qudit: q, dim: self.registry.dim(q), x, z });
            }
        }
        PauliOp::from_factors(factors)
    }
}

fn has_face_qubit(g: &LatticeGeometry, f: &CellId) -> bool {
    !(f.kind == CellKind::Face(Axis::Y) && (f.y == 0 || f.y == g.depth as i64))
}

fn lower_plane_edges(g: &LatticeGeometry) -> impl Iterator<Item = CellId> + '_ {
    g.edges().filter(|e| g.on_lower_plane(e))
}

fn lower_plane_vertices(g: &LatticeGeometry) -> impl Iterator<Item = CellId> + '_ {
    g.vertices().filter(|v| v.y == 0)
}

fn lower_plane_faces(g: &LatticeGeometry) -> impl Iterator<Item = CellId> + '_ {
    g.faces().filter(|f| g.on_lower_plane(f))
}

fn bulk_registry(g: &LatticeGeometry, boundary_dim: Option<u8>) -> Result<QuditRegistry> {
    let mut reg = QuditRegistry::new();
    for e in g.edges() {
        reg.push(QuditId { sector: Sector::E, cell: e }, 2)?;
    }
    for f in g.faces().filter(|f| has_face_qubit(g, f)) {
        reg.push(QuditId { sector: Sector::F, cell: f }, 2)?;
    }
    if let Some(d) = boundary_dim {
        for e in lower_plane_edges(g) {
            reg.push(QuditId { sector: Sector::B, cell: e }, d)?;
        }
    }
    Ok(reg)
}

fn term(family: TermFamily, anchor: CellId, op: PauliOp) -> Term {
    Term { label: TermLabel::new(family, anchor), op, hermitian_pair: false }
}

/// Which boundary-adjacent bulk terms to drop. The Z4 boundary terms take
/// over the role of the y = 0 plaquettes and the y = 0 perpendicular stars.
#[derive(Clone, Copy)]
struct BulkOptions {
    lower_plaquettes: bool,
    lower_perpendicular_stars: bool,
}

fn bulk_terms(g: &LatticeGeometry, reg: &QuditRegistry, opts: BulkOptions) -> Result<Vec<Term>> {
    let asm = Assembler { registry: reg };
    let mut out = Vec::new();
    for v in g.vertices() {
        let star = g.coboundary_cells(&v)?;
        out.push(term(TermFamily::AvE, v, asm.op(star.into_iter().map(|e| (Sector::E, e, 1, 0)))?));
    }
    for f in g.faces() {
        if !opts.lower_plaquettes && g.on_lower_plane(&f) {
            continue;
        }
        let bd = g.boundary_cells(&f)?;
        out.push(term(TermFamily::BfE, f, asm.op(bd.into_iter().map(|e| (Sector::E, e, 0, 1)))?));
    }
    for c in g.cubes() {
        let bd = g.boundary_cells(&c)?;
        out.push(term(TermFamily::AcF, c, asm.op(bd.into_iter().map(|f| (Sector::F, f, 0, 1)))?));
    }
    for e in g.edges() {
        if g.on_lower_plane(&e) || g.on_upper_plane(&e) {
            continue;
        }
        if !opts.lower_perpendicular_stars && e.kind == CellKind::Edge(Axis::Y) && e.y == 0 {
            continue;
        }
        let cob = g.coboundary_cells(&e)?;
        out.push(term(TermFamily::BeF, e, asm.op(cob.into_iter().map(|f| (Sector::F, f, 1, 0)))?));
    }
    Ok(out)
}

fn boundary_toric_terms(g: &LatticeGeometry, reg: &QuditRegistry) -> Result<Vec<Term>> {
    let asm = Assembler { registry: reg };
    let mut out = Vec::new();
    for v in lower_plane_vertices(g) {
        let star = g.coboundary_cells(&v)?.into_iter().filter(|e| e.y == 0 && g.on_lower_plane(e));
        out.push(term(TermFamily::AvB, v, asm.op(star.map(|e| (Sector::B, e, 1, 0)))?));
    }
    for f in lower_plane_faces(g) {
        let bd = g.boundary_cells(&f)?;
        out.push(term(TermFamily::BfB, f, asm.op(bd.into_iter().map(|e| (Sector::B, e, 0, 1)))?));
    }
    Ok(out)
}

/// Kitaev's toric code on an `l × l` torus, realized on the boundary qubits
/// of the `y = 0` plane.
pub fn build_toric_code_2d(l: usize) -> Result<StabilizerModel> {
    let g = LatticeGeometry::new(l, l, 2)?;
    let mut reg = QuditRegistry::new();
    for e in lower_plane_edges(&g) {
        reg.push(QuditId { sector: Sector::B, cell: e }, 2)?;
    }
    let hamiltonian = boundary_toric_terms(&g, &reg)?;
    let asm = Assembler { registry: &reg };
    let logicals = vec![
        basis_pair("b", boundary_line_z(&asm, &g, Axis::Z)?, boundary_line_x(&asm, &g, Axis::Z)?),
        basis_pair("b_rot", boundary_line_z(&asm, &g, Axis::X)?, boundary_line_x(&asm, &g, Axis::X)?),
    ];
    let model = StabilizerModel {
        tag: format!("toric2d_L{l}"),
        kind: ModelKind::ToricCode2d,
        geometry: g,
        registry: reg,
        hamiltonian,
        symmetry: vec![],
        logicals,
        enforce_symmetry: false,
    };
    validate_model(&model)?;
    Ok(model)
}

/// The symmetry-protected boundary memory on `geometry`, with the boundary
/// symmetry enforced.
pub fn build_spbm(geometry: LatticeGeometry) -> Result<StabilizerModel> {
    let g = LatticeGeometry::new(geometry.lx, geometry.lz, geometry.depth)?;
    let reg = bulk_registry(&g, Some(2))?;
    let opts = BulkOptions { lower_plaquettes: true, lower_perpendicular_stars: true };
    let mut hamiltonian = bulk_terms(&g, &reg, opts)?;
    hamiltonian.extend(boundary_toric_terms(&g, &reg)?);
    let mut model = StabilizerModel {
        tag: format!("spbm_{}x{}x{}", g.lx, g.lz, g.depth),
        kind: ModelKind::Spbm,
        geometry: g,
        registry: reg,
        hamiltonian,
        symmetry: vec![],
        logicals: vec![],
        enforce_symmetry: true,
    };
    model.symmetry = build_symmetry_generators(&model)?;
    model.logicals = build_logicals(&model)?;
    validate_model(&model)?;
    Ok(model)
}

/// Local generators of the boundary 1-form symmetry: for each `y = 0`
/// vertex, `A_v^(b)` times the face star of its perpendicular edge; for each
/// `y = 0` face, `B_f^(b)` times `B_f^(e)`.
pub fn build_symmetry_generators(model: &StabilizerModel) -> Result<Vec<SymmetryGenerator>> {
    let g = &model.geometry;
    let index = model.term_index();
    if !model.hamiltonian.iter().any(|t| t.label.family == TermFamily::AvB) {
        return Err(Error::MissingBoundary(model.tag.clone()));
    }
    let lookup = |label: TermLabel| {
        index
            .get(&label)
            .map(|&i| &model.hamiltonian[i].op)
            .ok_or_else(|| Error::Contract(format!("missing term {label}")))
    };
    let mut out = Vec::new();
    for v in lower_plane_vertices(g) {
        let a = TermLabel::new(TermFamily::AvB, v);
        let b = TermLabel::new(TermFamily::BeF, g.perpendicular_edge(&v)?);
        let op = lookup(a)?.multiply(lookup(b)?)?;
        out.push(SymmetryGenerator { label: TermLabel::new(TermFamily::ScriptA, v), op, factors: [a, b] });
    }
    for f in lower_plane_faces(g) {
        let a = TermLabel::new(TermFamily::BfB, f);
        let b = TermLabel::new(TermFamily::BfE, f);
        let op = lookup(a)?.multiply(lookup(b)?)?;
        out.push(SymmetryGenerator { label: TermLabel::new(TermFamily::ScriptB, f), op, factors: [a, b] });
    }
    Ok(out)
}

fn basis_pair(name: &str, z_like: PauliOp, x_like: PauliOp) -> LogicalPair {
    LogicalPair { name: name.to_string(), z_like, x_like, kind: LogicalKind::Basis }
}

/// The other in-plane direction.
fn across(a: Axis) -> Axis {
    match a {
        Axis::X => Axis::Z,
        Axis::Z => Axis::X,
        Axis::Y => Axis::Y,
    }
}

/// Cells `cell(t)` for `t` running once around the periodic direction `dir`.
fn around(g: &LatticeGeometry, dir: Axis) -> std::ops::Range<i64> {
    match dir {
        Axis::X => 0..g.lx as i64,
        Axis::Z => 0..g.lz as i64,
        Axis::Y => 0..g.depth as i64 + 1,
    }
}

fn at(dir: Axis, t: i64) -> [i64; 3] {
    let mut c = [0; 3];
    c[dir as usize] = t;
    c
}

/// Z^(b) along the boundary line of `dir`-edges through the origin.
fn boundary_line_z(asm: &Assembler, g: &LatticeGeometry, dir: Axis) -> Result<PauliOp> {
    asm.op(around(g, dir).map(|t| {
        let [x, _, z] = at(dir, t);
        (Sector::B, CellId::edge(dir, x, 0, z), 0, 1)
    }))
}

/// X^(b) on the `dir`-edges crossed by a dual line running along the other
/// in-plane direction.
fn boundary_line_x(asm: &Assembler, g: &LatticeGeometry, dir: Axis) -> Result<PauliOp> {
    let run = across(dir);
    asm.op(around(g, run).map(|t| {
        let [x, _, z] = at(run, t);
        (Sector::B, CellId::edge(dir, x, 0, z), 1, 0)
    }))
}

/// Canonical logical representatives of the memory. `dir` is the direction
/// of the Z^(e) line; the `_rot` partners use the other in-plane direction.
fn sector_pairs(asm: &Assembler, g: &LatticeGeometry, dir: Axis, suffix: &str) -> Result<Vec<LogicalPair>> {
    let run = across(dir);
    let depth = g.depth as i64;
    // Z^(e) line along dir at y = 0.
    let zbar_e = asm.op(around(g, dir).map(|t| {
        let [x, _, z] = at(dir, t);
        (Sector::E, CellId::edge(dir, x, 0, z), 0, 1)
    }))?;
    // X^(e) dual membrane: all dir-edges in the plane spanned by run and y.
    let xbar_e = asm.op(around(g, run).flat_map(|t| {
        (0..=depth).map(move |y| {
            let [x, _, z] = at(run, t);
            (Sector::E, CellId::edge(dir, x, y, z), 1, 0)
        })
    }))?;
    // Z^(f) membrane spanning dir and y, made of faces with normal `run`.
    let zbar_f = asm.op(around(g, dir).flat_map(|t| {
        (0..depth).map(move |y| {
            let [x, _, z] = at(dir, t);
            (Sector::F, CellId::face(run, x, y, z), 0, 1)
        })
    }))?;
    // X^(f) dual line running along `run` through the bottom layer of cubes.
    let xbar_f = asm.op(around(g, run).map(|t| {
        let [x, _, z] = at(run, t);
        (Sector::F, CellId::face(run, x, 0, z), 1, 0)
    }))?;
    let zbar_b = boundary_line_z(asm, g, dir)?;
    let xbar_b = boundary_line_x(asm, g, dir)?;
    let composite = LogicalPair {
        name: format!("composite{suffix}"),
        z_like: zbar_f.multiply(&zbar_b)?,
        x_like: xbar_e.multiply(&xbar_b)?,
        kind: LogicalKind::Composite,
    };
    Ok(vec![
        basis_pair(&format!("e{suffix}"), zbar_e, xbar_e),
        basis_pair(&format!("f{suffix}"), zbar_f, xbar_f),
        basis_pair(&format!("b{suffix}"), zbar_b, xbar_b),
        composite,
    ])
}

/// Named logical operators of the memory: per-sector basis pairs in both
/// in-plane orientations plus the boundary-bulk composites.
pub fn build_logicals(model: &StabilizerModel) -> Result<Vec<LogicalPair>> {
    if model.kind != ModelKind::Spbm {
        return Err(Error::Contract(format!("{} is not a boundary-memory model", model.tag)));
    }
    let asm = Assembler { registry: &model.registry };
    let g = &model.geometry;
    let mut out = sector_pairs(&asm, g, Axis::Z, "")?;
    out.extend(sector_pairs(&asm, g, Axis::X, "_rot")?);
    // Basis pairs first, composites after, for a stable pairing matrix.
    out.sort_by_key(|p| p.kind == LogicalKind::Composite);
    check_logicals(model, &out)?;
    Ok(out)
}

/// Z4 boundary term exponent: +1 on edges leaving `v`, -1 on edges entering.
fn star_orientation(e: &CellId, v: &CellId) -> u8 {
    if e.x == v.x && e.z == v.z {
        1
    } else {
        3
    }
}

/// Counterclockwise circulation around a y = 0 face in the (x, z) plane.
fn plaquette_orientation(e: &CellId, f: &CellId) -> u8 {
    match e.kind {
        CellKind::Edge(Axis::X) if e.z == f.z => 1,
        CellKind::Edge(Axis::Z) if e.x != f.x => 1,
        _ => 3,
    }
}

/// The Z4 defect model: the same bulk with four-level boundary qudits.
pub fn build_z4_defect(geometry: LatticeGeometry) -> Result<StabilizerModel> {
    let g = LatticeGeometry::new(geometry.lx, geometry.lz, geometry.depth)?;
    let reg = bulk_registry(&g, Some(4))?;
    let opts = BulkOptions { lower_plaquettes: false, lower_perpendicular_stars: false };
    let mut hamiltonian = bulk_terms(&g, &reg, opts)?;
    let asm = Assembler { registry: &reg };

    let mut boundary = Vec::new();
    for v in lower_plane_vertices(&g) {
        let star: Vec<CellId> = g.coboundary_cells(&v)?.into_iter().filter(|e| g.on_lower_plane(e)).collect();
        let mut parts = Vec::new();
        for e in &star {
            parts.push((Sector::B, *e, star_orientation(e, &v), 0));
            parts.push((Sector::F, g.perpendicular_face(e)?, 1, 0));
        }
        let script = asm.op(parts)?;
        let square = asm.op(star.iter().map(|e| (Sector::B, *e, 2 * star_orientation(e, &v) % 4, 0)))?;
        boundary.push((TermFamily::Z4ScriptA, v, script));
        boundary.push((TermFamily::Z4Ab, v, square));
    }
    for f in lower_plane_faces(&g) {
        let bd = g.boundary_cells(&f)?;
        let mut parts = Vec::new();
        for e in &bd {
            parts.push((Sector::B, *e, 0, plaquette_orientation(e, &f)));
            parts.push((Sector::E, *e, 0, 1));
        }
        let script = asm.op(parts)?;
        let square = asm.op(bd.iter().map(|e| (Sector::B, *e, 0, 2 * plaquette_orientation(e, &f) % 4)))?;
        boundary.push((TermFamily::Z4ScriptB, f, script));
        boundary.push((TermFamily::Z4Bb, f, square));
    }
    // Group by family so that script terms precede their squares.
    boundary.sort_by_key(|(fam, _, _)| *fam);
    hamiltonian.extend(boundary.into_iter().map(|(family, anchor, op)| Term {
        label: TermLabel::new(family, anchor),
        op,
        hermitian_pair: true,
    }));

    let mut logicals = Vec::new();
    for (dir, suffix) in [(Axis::Z, ""), (Axis::X, "_rot")] {
        let pairs = sector_pairs(&asm, &g, dir, suffix)?;
        let xbar_e = &pairs[0].x_like;
        let zbar_f = &pairs[1].z_like;
        // Membranes terminated on the defect by unit-power boundary strings.
        let m_f = zbar_f.multiply(&asm.op(around(&g, dir).map(|t| {
            let [x, _, z] = at(dir, t);
            (Sector::B, CellId::edge(dir, x, 0, z), 0, 1)
        }))?)?;
        let run = across(dir);
        let m_e = xbar_e.multiply(&asm.op(around(&g, run).map(|t| {
            let [x, _, z] = at(run, t);
            (Sector::B, CellId::edge(dir, x, 0, z), 1, 0)
        }))?)?;
        logicals.push(LogicalPair {
            name: format!("membrane{suffix}"),
            z_like: m_f,
            x_like: m_e,
            kind: LogicalKind::Composite,
        });
    }

    let model = StabilizerModel {
        tag: format!("z4_{}x{}x{}", g.lx, g.lz, g.depth),
        kind: ModelKind::Z4Defect,
        geometry: g,
        registry: reg,
        hamiltonian,
        symmetry: vec![],
        logicals,
        enforce_symmetry: false,
    };
    validate_model(&model)?;
    Ok(model)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedTerm {
    pub label: TermLabel,
    pub op: PauliOp,
    pub weight: f64,
}

/// `-J_x Σ_e X^(e)_e X^(b)_e` over the boundary-plane edges.
pub fn build_condensing_terms(model: &StabilizerModel, jx: f64) -> Result<Vec<WeightedTerm>> {
    if jx.is_nan() || jx <= 0.0 {
        return Err(Error::InvalidParams(format!("J_x must be positive, got {jx}")));
    }
    if model.kind != ModelKind::Spbm {
        return Err(Error::MissingBoundary(model.tag.clone()));
    }
    let asm = Assembler { registry: &model.registry };
    lower_plane_edges(&model.geometry)
        .map(|e| {
            let op = asm.op([(Sector::E, e, 1, 0), (Sector::B, e, 1, 0)])?;
            Ok(WeightedTerm { label: TermLabel::new(TermFamily::CondX, e), op, weight: jx })
        })
        .collect()
}

/// Pairs of Hamiltonian terms that share a qudit and fail to commute.
pub(crate) fn noncommuting_term_pairs(model: &StabilizerModel) -> Vec<(usize, usize, u8)> {
    let inc = model.term_incidence();
    let mut out = Vec::new();
    for (i, t) in model.hamiltonian.iter().enumerate() {
        let mut seen: Vec<u32> = t
            .op
            .factors()
            .iter()
            .flat_map(|f| inc[f.qudit as usize].iter().copied())
            .filter(|&j| j as usize > i)
            .collect();
        seen.sort_unstable();
        seen.dedup();
        for j in seen {
            let c = t.op.commutation_phase(&model.hamiltonian[j as usize].op);
            if c != 0 {
                out.push((i, j as usize, c));
            }
        }
    }
    out
}

fn check_logicals(model: &StabilizerModel, logicals: &[LogicalPair]) -> Result<()> {
    for p in logicals {
        for (which, op) in [("z", &p.z_like), ("x", &p.x_like)] {
            op.validate(&model.registry)?;
            if let Some(t) = model.hamiltonian.iter().find(|t| !t.op.commutes_with(op)) {
                return Err(Error::Contract(format!("logical {}.{which} fails to commute with {}", p.name, t.label)));
            }
            if let Some(s) = model.symmetry.iter().find(|s| !s.op.commutes_with(op)) {
                return Err(Error::Contract(format!("logical {}.{which} fails to commute with {}", p.name, s.label)));
            }
        }
        if p.z_like.commutes_with(&p.x_like) {
            return Err(Error::Contract(format!("logical pair {} commutes with itself", p.name)));
        }
    }
    Ok(())
}

fn validate_model(model: &StabilizerModel) -> Result<()> {
    for t in &model.hamiltonian {
        t.op.validate(&model.registry)?;
    }
    if let Some(&(i, j, c)) = noncommuting_term_pairs(model).first() {
        return Err(Error::Contract(format!(
            "terms {} and {} have commutation phase {c}",
            model.hamiltonian[i].label, model.hamiltonian[j].label
        )));
    }
    for s in &model.symmetry {
        if let Some(t) = model.hamiltonian.iter().find(|t| !t.op.commutes_with(&s.op)) {
            return Err(Error::Contract(format!("symmetry {} fails to commute with {}", s.label, t.label)));
        }
    }
    check_logicals(model, &model.logicals)
}
