//! Machine-checked structural audits of a model. Failures are reported as
//! data in an [`AuditReport`], never as panics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codes::{LogicalKind, ModelKind, StabilizerModel, TermFamily, TermLabel};
use crate::error::{Error, Result};
use crate::pauli::{gf2_rank, PauliOp};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub details: Vec<String>,
}

impl Check {
    fn new(name: &str, details: Vec<String>) -> Self {
        Check { name: name.to_string(), pass: details.is_empty(), details }
    }

    fn with_outcome(name: &str, pass: bool, detail: String) -> Self {
        Check { name: name.to_string(), pass, details: vec![detail] }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub model_tag: String,
    pub checks: Vec<Check>,
    pub k_rank: Option<usize>,
    pub pairing_matrix: Vec<Vec<u8>>,
}

impl AuditReport {
    fn new(model: &StabilizerModel) -> Self {
        AuditReport { model_tag: model.tag.clone(), checks: vec![], k_rank: None, pairing_matrix: vec![] }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Concatenates several reports on the same model.
    pub fn merge(reports: impl IntoIterator<Item = AuditReport>) -> AuditReport {
        let mut it = reports.into_iter();
        let mut out = it.next().expect("at least one report");
        for r in it {
            out.checks.extend(r.checks);
            if r.k_rank.is_some() {
                out.k_rank = r.k_rank;
            }
            if !r.pairing_matrix.is_empty() {
                out.pairing_matrix = r.pairing_matrix;
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn pair_scan(rows: &[(TermLabel, &PauliOp)], cols: &[(TermLabel, &PauliOp)], triangular: bool) -> Vec<String> {
    rows.par_iter()
        .enumerate()
        .flat_map_iter(|(i, (la, a))| {
            let start = if triangular { i + 1 } else { 0 };
            cols[start..].iter().filter_map(move |(lb, b)| {
                let c = a.commutation_phase(b);
                (c != 0).then(|| format!("{la} x {lb}: phase {c}"))
            })
        })
        .collect()
}

/// Full pairwise commutation scan of Hamiltonian×Hamiltonian and
/// symmetry×Hamiltonian.
pub fn commutation_audit(model: &StabilizerModel) -> AuditReport {
    let terms: Vec<(TermLabel, &PauliOp)> = model.hamiltonian.iter().map(|t| (t.label, &t.op)).collect();
    let syms: Vec<(TermLabel, &PauliOp)> = model.symmetry.iter().map(|s| (s.label, &s.op)).collect();
    let mut r = AuditReport::new(model);
    r.checks.push(Check::new("hamiltonian_commutes", pair_scan(&terms, &terms, true)));
    r.checks.push(Check::new("symmetry_commutes_with_hamiltonian", pair_scan(&syms, &terms, false)));
    r
}

/// Each symmetry generator must equal the exact product of its two named
/// Hamiltonian terms; Z4 boundary squares must equal their partner terms.
pub fn factorization_audit(model: &StabilizerModel) -> AuditReport {
    let mut r = AuditReport::new(model);
    match model.kind {
        ModelKind::Spbm => {
            let mut bad = Vec::new();
            if model.symmetry.is_empty() {
                bad.push("model has no symmetry generators".to_string());
            }
            for s in &model.symmetry {
                let (Some(a), Some(b)) = (model.term(&s.factors[0]), model.term(&s.factors[1])) else {
                    bad.push(format!("{}: missing factor term", s.label));
                    continue;
                };
                match a.op.multiply(&b.op) {
                    Ok(p) if p == s.op && p.phase() == 0 => {}
                    Ok(p) => bad.push(format!(
                        "{} != {} * {} (product phase {})",
                        s.label, s.factors[0], s.factors[1], p.phase()
                    )),
                    Err(e) => bad.push(format!("{}: {e}", s.label)),
                }
            }
            r.checks.push(Check::new("symmetry_factorization", bad));
        }
        ModelKind::Z4Defect => {
            let mut bad = Vec::new();
            for (script, square) in [(TermFamily::Z4ScriptA, TermFamily::Z4Ab), (TermFamily::Z4ScriptB, TermFamily::Z4Bb)] {
                for t in model.hamiltonian.iter().filter(|t| t.label.family == script) {
                    let want = TermLabel::new(square, t.label.anchor);
                    match (model.term(&want), t.op.multiply(&t.op)) {
                        (Some(sq), Ok(p)) if p == sq.op => {}
                        (None, _) => bad.push(format!("{}: missing {want}", t.label)),
                        _ => bad.push(format!("({})^2 != {want}", t.label)),
                    }
                }
            }
            r.checks.push(Check::new("z4_squares", bad));
        }
        ModelKind::ToricCode2d => {
            r.checks.push(Check::with_outcome(
                "factorization_applicable",
                false,
                "model has neither symmetry generators nor Z4 boundary terms".into(),
            ));
        }
    }
    r
}

/// Logical qubit count expected from the physical picture: two per 2d
/// toric code, three per 3d bulk, minus three condensed by the gluing.
fn prose_logical_count(model: &StabilizerModel) -> Option<usize> {
    match model.kind {
        ModelKind::ToricCode2d => Some(2),
        ModelKind::Spbm => Some(6),
        ModelKind::Z4Defect => None,
    }
}

/// Rank-based logical count, pairing matrix over the basis pairs, and
/// commutation of every named logical with the Hamiltonian and symmetry.
pub fn logical_audit(model: &StabilizerModel) -> AuditReport {
    let mut r = AuditReport::new(model);
    let rank = match gf2_rank(&model.hamiltonian_ops()) {
        Ok(rank) => rank,
        Err(e) => {
            r.checks.push(Check::with_outcome("rank_supported", false, e.to_string()));
            return r;
        }
    };
    let k = model.n_qudits() - rank;
    r.k_rank = Some(k);

    let basis: Vec<_> = model.logicals.iter().filter(|p| p.kind == LogicalKind::Basis).collect();
    r.pairing_matrix = basis
        .iter()
        .map(|zi| basis.iter().map(|xj| zi.z_like.commutation_phase(&xj.x_like)).collect())
        .collect();

    let mut offdiag = Vec::new();
    for (i, row) in r.pairing_matrix.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            let ok = if i == j { c == 2 } else { c == 0 };
            if !ok {
                offdiag.push(format!("Z[{}] x X[{}]: phase {c}", basis[i].name, basis[j].name));
            }
        }
    }
    for (i, a) in basis.iter().enumerate() {
        for b in &basis[i + 1..] {
            for (kind, p, q) in [("Z", &a.z_like, &b.z_like), ("X", &a.x_like, &b.x_like)] {
                let c = p.commutation_phase(q);
                if c != 0 {
                    offdiag.push(format!("{kind}[{}] x {kind}[{}]: phase {c}", a.name, b.name));
                }
            }
        }
    }
    r.checks.push(Check::new("pairing_diagonal", offdiag));

    let mut not_logical = Vec::new();
    let mut not_symmetric = Vec::new();
    for p in &model.logicals {
        for (which, op) in [("z", &p.z_like), ("x", &p.x_like)] {
            for t in model.hamiltonian.iter().filter(|t| !t.op.commutes_with(op)) {
                not_logical.push(format!("{}.{which} x {}", p.name, t.label));
            }
            for s in model.symmetry.iter().filter(|s| !s.op.commutes_with(op)) {
                not_symmetric.push(format!("{}.{which} x {}", p.name, s.label));
            }
        }
    }
    r.checks.push(Check::new("logicals_commute_with_hamiltonian", not_logical));
    r.checks.push(Check::new("logicals_commute_with_symmetry", not_symmetric));

    r.checks.push(Check::with_outcome(
        "k_rank_matches_basis",
        k == basis.len(),
        format!("k_rank = {k}, independent constructed pairs = {}", basis.len()),
    ));
    if let Some(expected) = prose_logical_count(model) {
        r.checks.push(Check::with_outcome(
            "k_rank_matches_expected",
            k == expected,
            format!("k_rank = {k}, expected {expected}"),
        ));
    }
    r
}

/// Runs every audit applicable to the model.
pub fn full_audit(model: &StabilizerModel) -> AuditReport {
    let mut reports = vec![commutation_audit(model)];
    if model.kind != ModelKind::ToricCode2d {
        reports.push(factorization_audit(model));
    }
    if model.registry.all_qubits() {
        reports.push(logical_audit(model));
    }
    AuditReport::merge(reports)
}

/// Commutation phase of two membrane operators of the Z4 model. Operators
/// that fail to commute with the Hamiltonian are rejected.
pub fn z4_membrane_phase(model: &StabilizerModel, membrane_e: &PauliOp, membrane_f: &PauliOp) -> Result<u8> {
    if model.kind != ModelKind::Z4Defect {
        return Err(Error::Contract(format!("{} is not a Z4 model", model.tag)));
    }
    for (name, op) in [("membrane_e", membrane_e), ("membrane_f", membrane_f)] {
        op.validate(&model.registry)?;
        if let Some(t) = model.hamiltonian.iter().find(|t| !t.op.commutes_with(op)) {
            return Err(Error::Contract(format!("{name} fails to commute with {}", t.label)));
        }
    }
    Ok(membrane_e.commutation_phase(membrane_f))
}
