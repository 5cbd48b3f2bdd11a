//! Phase-tracked Pauli operators over a mixed registry of qubits (d = 2) and
//! four-level qudits (d = 4), plus GF(2) symplectic linear algebra.
//!
//! Every operator is stored in the normal form `i^phase · ⊗_q X_q^a Z_q^b`
//! with the qudit commutation rule `X Z = ω Z X`, where `ω = i` for d = 4
//! and `ω = -1` for d = 2.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::complex::CellId;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sector {
    /// Bulk edge qubits.
    E,
    /// Bulk face qubits.
    F,
    /// Boundary qudits on the edges of the y = 0 plane.
    B,
}

impl Sector {
    pub fn tag(self) -> char {
        match self {
            Sector::E => 'e',
            Sector::F => 'f',
            Sector::B => 'b',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct QuditId {
    pub sector: Sector,
    pub cell: CellId,
}

impl fmt::Display for QuditId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.sector.tag(), self.cell)
    }
}

/// Ordered list of qudits with their local dimensions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QuditRegistry {
    ids: Vec<QuditId>,
    dims: Vec<u8>,
    index: HashMap<QuditId, u32>,
}

impl QuditRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a qudit and returns its index. Four-level qudits are only
    /// permitted in the boundary sector.
    pub fn push(&mut self, id: QuditId, dim: u8) -> Result<u32> {
        let ok = dim == 2 || (dim == 4 && id.sector == Sector::B);
        if !ok {
            return Err(Error::Contract(format!("dimension {dim} not allowed for {id}")));
        }
        if let Some(&i) = self.index.get(&id) {
            return Err(Error::Contract(format!("duplicate qudit {id} (index {i})")));
        }
        let i = self.ids.len() as u32;
        self.ids.push(id);
        self.dims.push(dim);
        self.index.insert(id, i);
        Ok(i)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn index_of(&self, id: &QuditId) -> Option<u32> {
        self.index.get(id).copied()
    }

    pub fn id(&self, q: u32) -> QuditId {
        self.ids[q as usize]
    }

    pub fn dim(&self, q: u32) -> u8 {
        self.dims[q as usize]
    }

    pub fn ids(&self) -> &[QuditId] {
        &self.ids
    }

    pub fn all_qubits(&self) -> bool {
        self.dims.iter().all(|&d| d == 2)
    }

    pub fn single(&self, id: &QuditId, x: u8, z: u8) -> Option<PauliOp> {
        let q = self.index_of(id)?;
        Some(PauliOp::single(q, self.dim(q), x, z))
    }
}

/// One tensor factor `X^x Z^z` on a qudit of dimension `dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Factor {
    pub qudit: u32,
    pub dim: u8,
    pub x: u8,
    pub z: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PauliOp {
    phase: u8,
    factors: Vec<Factor>,
}

impl PauliOp {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn single(qudit: u32, dim: u8, x: u8, z: u8) -> Self {
        let (x, z) = (x % dim, z % dim);
        let factors = if x == 0 && z == 0 {
            vec![]
        } else {
            vec![Factor { qudit, dim, x, z }]
        };
        PauliOp { phase: 0, factors }
    }

    /// Product of factors applied left to right (each in `X^x Z^z` form).
    pub fn from_factors(factors: impl IntoIterator<Item = Factor>) -> Result<Self> {
        let mut out = PauliOp::identity();
        for f in factors {
            out = out.multiply(&PauliOp::single(f.qudit, f.dim, f.x, f.z))?;
        }
        Ok(out)
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase % 4;
        self
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn support_len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty() && self.phase == 0
    }

    /// True if the operator is proportional to the identity.
    pub fn is_scalar(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factor_on(&self, qudit: u32) -> Option<&Factor> {
        self.factors
            .binary_search_by_key(&qudit, |f| f.qudit)
            .ok()
            .map(|i| &self.factors[i])
    }

    pub fn multiply(&self, other: &PauliOp) -> Result<PauliOp> {
        let (a, b) = (&self.factors, &other.factors);
        let mut out = Vec::with_capacity(a.len() + b.len());
        // Moving every Z^{b_P} of the left operand past X^{a_Q} of the right
        // operand on the same qudit: Z^b X^a = ω^{-ab} X^a Z^b.
        let mut phase = (self.phase + other.phase) as u32;
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].qudit < b[j].qudit) {
                out.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j].qudit < a[i].qudit {
                out.push(b[j]);
                j += 1;
            } else {
                let (p, q) = (a[i], b[j]);
                if p.dim != q.dim {
                    return Err(Error::RegistryMismatch { qudit: p.qudit, left: p.dim, right: q.dim });
                }
                let d = p.dim as u32;
                let unit = 4 / d;
                phase += 4 * d - (unit * p.z as u32 * q.x as u32) % 4;
                let x = ((p.x + q.x) as u32 % d) as u8;
                let z = ((p.z + q.z) as u32 % d) as u8;
                if x != 0 || z != 0 {
                    out.push(Factor { qudit: p.qudit, dim: p.dim, x, z });
                }
                i += 1;
                j += 1;
            }
        }
        Ok(PauliOp { phase: (phase % 4) as u8, factors: out })
    }

    pub fn pow(&self, k: u32) -> Result<PauliOp> {
        let mut out = PauliOp::identity();
        for _ in 0..k {
            out = out.multiply(self)?;
        }
        Ok(out)
    }

    /// Returns `c` with `self · other = i^c · other · self`.
    pub fn commutation_phase(&self, other: &PauliOp) -> u8 {
        let (a, b) = (&self.factors, &other.factors);
        let (mut i, mut j) = (0, 0);
        let mut c: i64 = 0;
        while i < a.len() && j < b.len() {
            match a[i].qudit.cmp(&b[j].qudit) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    let (p, q) = (a[i], b[j]);
                    let unit = 4 / p.dim as i64;
                    c += unit * (p.x as i64 * q.z as i64 - p.z as i64 * q.x as i64);
                    i += 1;
                    j += 1;
                }
            }
        }
        c.rem_euclid(4) as u8
    }

    pub fn commutes_with(&self, other: &PauliOp) -> bool {
        self.commutation_phase(other) == 0
    }

    /// Checks that all qudits exist in `reg` with matching dimensions.
    pub fn validate(&self, reg: &QuditRegistry) -> Result<()> {
        for f in &self.factors {
            if f.qudit as usize >= reg.len() {
                return Err(Error::UnknownQudit(f.qudit));
            }
            let d = reg.dim(f.qudit);
            if d != f.dim {
                return Err(Error::RegistryMismatch { qudit: f.qudit, left: f.dim, right: d });
            }
        }
        Ok(())
    }

    /// Factors grouped by qudit identity, for human-readable output.
    pub fn describe(&self, reg: &QuditRegistry) -> String {
        let mut s = format!("i^{}", self.phase);
        for f in &self.factors {
            s.push_str(&format!(" {}[X^{}Z^{}]", reg.id(f.qudit), f.x, f.z));
        }
        s
    }
}

pub fn multiply(p: &PauliOp, q: &PauliOp) -> Result<PauliOp> {
    p.multiply(q)
}

pub fn commutation_phase(p: &PauliOp, q: &PauliOp) -> u8 {
    p.commutation_phase(q)
}

/// Dense bit-packed GF(2) matrix used for elimination.
struct BitMatrix {
    cols: usize,
    rows: Vec<Vec<u64>>,
}

impl BitMatrix {
    fn new(cols: usize) -> Self {
        BitMatrix { cols, rows: Vec::new() }
    }

    fn words(&self) -> usize {
        self.cols.div_ceil(64)
    }

    fn push_row(&mut self) -> &mut Vec<u64> {
        let w = self.words();
        self.rows.push(vec![0; w]);
        self.rows.last_mut().unwrap()
    }

    fn get(row: &[u64], c: usize) -> bool {
        row[c / 64] >> (c % 64) & 1 == 1
    }

    fn flip(row: &mut [u64], c: usize) {
        row[c / 64] ^= 1 << (c % 64);
    }

    /// Gauss-Jordan elimination over the first `pivot_cols` columns. Returns
    /// the pivot column of each of the leading rows.
    fn reduce(&mut self, pivot_cols: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..pivot_cols {
            let Some(p) = (r..self.rows.len()).find(|&i| Self::get(&self.rows[i], c)) else {
                continue;
            };
            self.rows.swap(r, p);
            let pivot = self.rows[r].clone();
            for (i, row) in self.rows.iter_mut().enumerate() {
                if i != r && Self::get(row, c) {
                    row.iter_mut().zip(&pivot).for_each(|(a, b)| *a ^= b);
                }
            }
            pivots.push(c);
            r += 1;
            if r == self.rows.len() {
                break;
            }
        }
        pivots
    }
}

/// Column layout shared by the symplectic routines: qudit `q` owns columns
/// `2k` (X exponent) and `2k + 1` (Z exponent).
fn column_map<'a>(ops: impl IntoIterator<Item = &'a PauliOp>) -> Result<BTreeMap<u32, usize>> {
    let mut cols = BTreeMap::new();
    for op in ops {
        for f in op.factors() {
            if f.dim != 2 {
                return Err(Error::UnsupportedDimension(f.qudit));
            }
            cols.insert(f.qudit, 0);
        }
    }
    for (k, v) in cols.values_mut().enumerate() {
        *v = k;
    }
    Ok(cols)
}

/// Rank over GF(2) of the `(a|b)` exponent vectors of qubit operators.
pub fn gf2_rank(generators: &[PauliOp]) -> Result<usize> {
    let cols = column_map(generators)?;
    let mut m = BitMatrix::new(2 * cols.len());
    for g in generators {
        let row = m.push_row();
        for f in g.factors() {
            let k = cols[&f.qudit];
            if f.x == 1 {
                BitMatrix::flip(row, 2 * k);
            }
            if f.z == 1 {
                BitMatrix::flip(row, 2 * k + 1);
            }
        }
    }
    let n = m.cols;
    Ok(m.reduce(n).len())
}

/// Finds a qubit Pauli `C` with `commutation_phase(g_i, C) = 2 · target_i`
/// for every generator. `target` entries are read mod 2.
pub fn solve_syndrome(generators: &[PauliOp], target: &[u8]) -> Result<PauliOp> {
    if generators.len() != target.len() {
        return Err(Error::InvalidParams(format!(
            "{} generators but {} syndrome bits",
            generators.len(),
            target.len()
        )));
    }
    let cols = column_map(generators)?;
    let n = 2 * cols.len();
    // The symplectic product <g, C> = g_a·C_b + g_b·C_a, so the row of g in
    // the unknowns (C_a, C_b) is (g_b, g_a). Column n holds the target bit.
    let mut m = BitMatrix::new(n + 1);
    for (g, &t) in generators.iter().zip(target) {
        let row = m.push_row();
        for f in g.factors() {
            let k = cols[&f.qudit];
            if f.z == 1 {
                BitMatrix::flip(row, 2 * k);
            }
            if f.x == 1 {
                BitMatrix::flip(row, 2 * k + 1);
            }
        }
        if t % 2 == 1 {
            BitMatrix::flip(row, n);
        }
    }
    let pivots = m.reduce(n);
    if m.rows[pivots.len()..].iter().any(|r| BitMatrix::get(r, n)) {
        return Err(Error::InfeasibleSyndrome);
    }
    let qudits: Vec<u32> = cols.keys().copied().collect();
    let mut xs = vec![0u8; qudits.len()];
    let mut zs = vec![0u8; qudits.len()];
    for (r, &c) in pivots.iter().enumerate() {
        if BitMatrix::get(&m.rows[r], n) {
            if c % 2 == 0 {
                xs[c / 2] = 1;
            } else {
                zs[c / 2] = 1;
            }
        }
    }
    let factors = qudits
        .iter()
        .enumerate()
        .filter(|(k, _)| xs[*k] | zs[*k] == 1)
        .map(|(k, &q)| Factor { qudit: q, dim: 2, x: xs[k], z: zs[k] })
        .collect();
    Ok(PauliOp { phase: 0, factors })
}

/// Whether `target` lies in the GF(2) span of the `(a|b)` vectors of
/// `generators`, ignoring phases.
pub fn gf2_in_span(generators: &[PauliOp], target: &PauliOp) -> Result<bool> {
    let mut all: Vec<PauliOp> = generators.to_vec();
    let base = gf2_rank(&all)?;
    all.push(target.clone());
    Ok(gf2_rank(&all)? == base)
}
