//! Energy barriers of logical operators: canonical local schedules with
//! symmetry legality checks, and an exhaustive ordering oracle.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::codes::{LogicalKind, StabilizerModel};
use crate::error::{Error, Result};
use crate::pauli::{Factor, PauliOp, Sector};
use crate::symmetry::Move;
use crate::thermal::Dynamics;

pub const SUBSET_DP_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub logical_name: String,
    pub steps: Vec<Move>,
    /// Energy after each step.
    pub profile: Vec<i64>,
    /// Number of violated symmetry generators after each step.
    pub symmetry_violations: Vec<usize>,
}

impl Schedule {
    pub fn max_energy(&self) -> i64 {
        self.profile.iter().copied().max().unwrap_or(0)
    }

    pub fn product(&self) -> Result<PauliOp> {
        self.steps.iter().try_fold(PauliOp::identity(), |acc, m| acc.multiply(&m.op))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Canonical,
    SubsetDp,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Canonical => "canonical",
            Method::SubsetDp => "subset_dp",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierReport {
    pub logical_name: String,
    pub max_energy: i64,
    pub profile: Vec<i64>,
    pub lx: usize,
    pub lz: usize,
    pub depth: usize,
    pub method: Method,
}

impl BarrierReport {
    fn new(model: &StabilizerModel, name: &str, profile: Vec<i64>, method: Method) -> Self {
        let g = model.geometry;
        BarrierReport {
            logical_name: name.to_string(),
            max_energy: profile.iter().copied().max().unwrap_or(0),
            profile,
            lx: g.lx,
            lz: g.lz,
            depth: g.depth,
            method,
        }
    }

    pub fn from_schedule(model: &StabilizerModel, s: &Schedule) -> Self {
        Self::new(model, &s.logical_name, s.profile.clone(), Method::Canonical)
    }
}

fn single(f: &Factor) -> PauliOp {
    PauliOp::single(f.qudit, f.dim, f.x, f.z)
}

/// Splits a logical into local steps. Boundary factors are paired with
/// their bulk partner (the perpendicular face for Z-type, the same edge for
/// X-type) when the logical contains it; everything else is applied one
/// qudit at a time in registry order, which sweeps membranes layer by layer.
fn decompose(model: &StabilizerModel, target: &PauliOp) -> Result<Vec<PauliOp>> {
    let reg = &model.registry;
    let g = &model.geometry;
    let mut used = vec![false; target.factors().len()];
    let position = |sector: Sector, cell| {
        let q = reg.index_of(&crate::pauli::QuditId { sector, cell })?;
        target.factors().iter().position(|f| f.qudit == q)
    };
    let mut steps = Vec::new();
    for (i, f) in target.factors().iter().enumerate() {
        let id = reg.id(f.qudit);
        if id.sector != Sector::B {
            continue;
        }
        let partner = if f.z != 0 && f.x == 0 {
            g.perpendicular_face(&id.cell).ok().and_then(|c| position(Sector::F, c))
        } else {
            position(Sector::E, id.cell)
        };
        if let Some(j) = partner.filter(|&j| !used[j]) {
            used[i] = true;
            used[j] = true;
            steps.push(PauliOp::from_factors([*f, target.factors()[j]])?);
        }
    }
    for (i, f) in target.factors().iter().enumerate() {
        if !used[i] {
            steps.push(single(f));
        }
    }
    Ok(steps)
}

/// Applies `steps` in order from the identity and records the profile.
fn profile_schedule(model: &StabilizerModel, name: &str, ops: Vec<PauliOp>) -> Result<Schedule> {
    let steps = ops.into_iter().map(|op| Move::from_op(model, op)).collect::<Result<Vec<_>>>()?;
    let dynamics = Dynamics::new(model, &[]);
    let mut state = dynamics.init_state();
    let mut profile = Vec::with_capacity(steps.len());
    let mut violations = Vec::with_capacity(steps.len());
    for m in &steps {
        dynamics.apply_op(&mut state, &m.op)?;
        profile.push(state.energy_units());
        violations.push(state.symmetry_syndrome.iter().filter(|&&c| c != 0).count());
    }
    Ok(Schedule { logical_name: name.to_string(), steps, profile, symmetry_violations: violations })
}

/// Checks that the schedule ends in the ground space and acts on every
/// basis logical exactly like the target.
fn check_logical_class(model: &StabilizerModel, s: &Schedule, target: &PauliOp) -> Result<()> {
    if s.profile.last().copied().unwrap_or(0) != 0 {
        return Err(Error::Contract(format!("schedule for {} ends with nonzero energy", s.logical_name)));
    }
    let product = s.product()?;
    for p in model.logicals.iter().filter(|p| p.kind == LogicalKind::Basis) {
        for op in [&p.z_like, &p.x_like] {
            if product.commutation_phase(op) != target.commutation_phase(op) {
                return Err(Error::Contract(format!(
                    "schedule for {} acts differently from the target on logical {}",
                    s.logical_name, p.name
                )));
            }
        }
    }
    Ok(())
}

/// The local decomposition of a logical, profiled without regard to the
/// symmetry. Symmetry violations after each step are recorded.
pub fn bare_schedule(model: &StabilizerModel, logical_name: &str) -> Result<Schedule> {
    let target = model.logical_operator(logical_name)?.clone();
    let s = profile_schedule(model, logical_name, decompose(model, &target)?)?;
    check_logical_class(model, &s, &target)?;
    Ok(s)
}

/// Canonical schedule for a named logical. Under an enforced symmetry every
/// prefix must commute with all symmetry generators; otherwise the first
/// offending step is reported.
pub fn canonical_schedule(model: &StabilizerModel, logical_name: &str) -> Result<Schedule> {
    let s = bare_schedule(model, logical_name)?;
    if model.enforce_symmetry {
        if let Some(step) = s.symmetry_violations.iter().position(|&v| v != 0) {
            return Err(Error::NoLegalSchedule { logical: logical_name.to_string(), step });
        }
    }
    Ok(s)
}

/// Minimal achievable maximum energy over all orderings of `moves`, where
/// the energy of a partial application depends only on the applied subset.
pub fn min_barrier_subset_dp(model: &StabilizerModel, name: &str, moves: &[Move]) -> Result<BarrierReport> {
    let k = moves.len();
    if k > SUBSET_DP_LIMIT {
        return Err(Error::SupportTooLarge(k));
    }
    if k == 0 {
        return Ok(BarrierReport::new(model, name, vec![], Method::SubsetDp));
    }
    if !model.registry.all_qubits() {
        return Err(Error::UnsupportedDimension(0));
    }
    let dynamics = Dynamics::new(model, moves);
    let size = 1usize << k;
    // Energies of every subset, visited in Gray-code order.
    let mut energy = vec![0i64; size];
    let mut state = dynamics.init_state();
    let mut gray = 0usize;
    for i in 1..size {
        let bit = i.trailing_zeros() as usize;
        dynamics.apply_move(&mut state, bit);
        gray ^= 1 << bit;
        energy[gray] = state.energy_units();
    }
    // best[S]: smallest possible running maximum over orderings reaching S.
    let mut best = vec![i64::MAX; size];
    let mut prev = vec![usize::MAX; size];
    best[0] = 0;
    for s in 1..size {
        let mut bits = s;
        while bits != 0 {
            let b = bits & bits.wrapping_neg();
            bits ^= b;
            let from = s ^ b;
            if best[from] < best[s] {
                best[s] = best[from];
                prev[s] = from;
            }
        }
        best[s] = best[s].max(energy[s]);
    }
    let mut path = Vec::with_capacity(k);
    let mut s = size - 1;
    while s != 0 {
        path.push(energy[s]);
        s = prev[s];
    }
    path.reverse();
    let mut report = BarrierReport::new(model, name, path, Method::SubsetDp);
    report.max_energy = best[size - 1];
    Ok(report)
}

/// Least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

pub const BARRIER_CSV_HEADER: &str = "Lx,Lz,D,logical,method,step,energy";

/// One row per step, starting from the unexcited state at step 0.
pub fn write_barrier_rows(w: &mut impl Write, r: &BarrierReport) -> std::io::Result<()> {
    for (step, e) in std::iter::once(0).chain(r.profile.iter().copied()).enumerate() {
        writeln!(w, "{},{},{},{},{},{},{}", r.lx, r.lz, r.depth, r.logical_name, r.method.name(), step, e)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::build_spbm;
    use crate::complex::build_lattice;

    fn spbm(l: usize, d: usize) -> StabilizerModel {
        build_spbm(build_lattice(l, l, d).unwrap()).unwrap()
    }

    #[test]
    fn bulk_line_barrier_is_constant() {
        for l in 2..=5 {
            let m = spbm(l, 2);
            assert_eq!(canonical_schedule(&m, "Zbar_e").unwrap().max_energy(), 4);
            assert_eq!(canonical_schedule(&m, "Xbar_f").unwrap().max_energy(), 4);
        }
    }

    #[test]
    fn composite_schedule_shape() {
        let m = spbm(3, 2);
        let s = canonical_schedule(&m, "composite_Z").unwrap();
        assert_eq!(s.steps.len(), 3 + 3);
        assert!(s.steps[..3].iter().all(|mv| mv.class_tag == "pair_Zb_Zf"));
        assert!(s.steps[3..].iter().all(|mv| mv.class_tag == "single_Z_f"));
        assert_eq!(*s.profile.last().unwrap(), 0);
        let x = canonical_schedule(&m, "composite_X").unwrap();
        assert!(x.steps[..3].iter().all(|mv| mv.class_tag == "pair_Xb_Xe"));
    }

    #[test]
    fn bare_boundary_logical_is_illegal() {
        let m = spbm(3, 2);
        match canonical_schedule(&m, "Zbar_b") {
            Err(Error::NoLegalSchedule { step, .. }) => assert_eq!(step, 0),
            other => panic!("expected NoLegalSchedule, got {other:?}"),
        }
        let off = m.clone().with_symmetry(false);
        assert_eq!(canonical_schedule(&off, "Zbar_b").unwrap().max_energy(), 4);
    }

    #[test]
    fn oracle_matches_and_bounds() {
        let m = spbm(2, 2);
        let s = canonical_schedule(&m, "Zbar_e").unwrap();
        assert_eq!(min_barrier_subset_dp(&m, "Zbar_e", &s.steps).unwrap().max_energy, 4);
        let c = canonical_schedule(&m, "composite_Z").unwrap();
        let dp = min_barrier_subset_dp(&m, "composite_Z", &c.steps).unwrap();
        assert!(dp.max_energy <= c.max_energy());
        assert_eq!(dp.max_energy, dp.profile.iter().copied().max().unwrap());
        assert_eq!(*dp.profile.last().unwrap(), 0);
        assert_eq!(min_barrier_subset_dp(&m, "none", &[]).unwrap().max_energy, 0);
        let many = vec![s.steps[0].clone(); 21];
        assert!(matches!(min_barrier_subset_dp(&m, "x", &many), Err(Error::SupportTooLarge(21))));
    }

    #[test]
    fn slope_of_a_line() {
        assert!((least_squares_slope(&[1.0, 2.0, 3.0], &[3.0, 5.0, 7.0]) - 2.0).abs() < 1e-12);
    }
}
