//! Metropolis dynamics over a move set, decode-by-cooling readout, and
//! memory-time experiments.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::codes::{build_spbm, LogicalPair, StabilizerModel};
use crate::complex::LatticeGeometry;
use crate::error::{Error, Result};
use crate::pauli::{solve_syndrome, Factor, PauliOp};
use crate::symmetry::{enumerate_allowed_moves, unconstrained_singles, Move, MoveSet};

/// RNG stream purposes. Each trial owns one stream per purpose.
const PURPOSE_DYNAMICS: u64 = 0;
const PURPOSE_BOOTSTRAP: u64 = 1;
const PURPOSES: u64 = 4;

pub const BOOTSTRAP_RESAMPLES: usize = 10_000;

fn rng_for(seed: u64, index: u64, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index * PURPOSES + purpose);
    rng
}

/// Energy of one term at commutation phase `c` with the error.
fn term_energy(hermitian_pair: bool, c: u8) -> i64 {
    match (hermitian_pair, c % 4) {
        (_, 0) => 0,
        (true, 2) => 4,
        (true, _) => 2,
        (false, _) => 2,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorState {
    /// Per-qudit X and Z exponents of the accumulated error.
    error_x: Vec<u8>,
    error_z: Vec<u8>,
    /// Commutation phase of each Hamiltonian term with the error.
    pub syndrome: Vec<u8>,
    /// Commutation phase of each symmetry generator with the error.
    pub symmetry_syndrome: Vec<u8>,
    energy: i64,
}

impl ErrorState {
    pub fn energy(&self) -> f64 {
        self.energy as f64
    }

    pub fn energy_units(&self) -> i64 {
        self.energy
    }

    /// The accumulated error, up to phase.
    pub fn error(&self, model: &StabilizerModel) -> PauliOp {
        let factors = (0..self.error_x.len())
            .filter(|&q| self.error_x[q] != 0 || self.error_z[q] != 0)
            .map(|q| Factor { qudit: q as u32, dim: model.registry.dim(q as u32), x: self.error_x[q], z: self.error_z[q] });
        PauliOp::from_factors(factors).expect("error factors are sorted and distinct")
    }
}

/// Effect of one operator: (term index, phase increment) pairs.
type Effects = Vec<(u32, u8)>;

/// Precomputed incidence data for fast incremental updates on one model.
pub struct Dynamics<'a> {
    pub model: &'a StabilizerModel,
    pub moves: &'a [Move],
    hermitian_pair: Vec<bool>,
    term_inc: Vec<Vec<u32>>,
    sym_inc: Vec<Vec<u32>>,
    move_effects: Vec<(Effects, Effects)>,
    cooling: Vec<Move>,
    cooling_effects: Vec<(Effects, Effects)>,
}

impl<'a> Dynamics<'a> {
    pub fn new(model: &'a StabilizerModel, moves: &'a [Move]) -> Self {
        let mut d = Dynamics {
            model,
            moves,
            hermitian_pair: model.hamiltonian.iter().map(|t| t.hermitian_pair).collect(),
            term_inc: model.term_incidence(),
            sym_inc: model.symmetry_incidence(),
            move_effects: vec![],
            cooling: unconstrained_singles(model),
            cooling_effects: vec![],
        };
        d.move_effects = moves.iter().map(|m| d.effects_of(&m.op)).collect();
        d.cooling_effects = d.cooling.iter().map(|m| d.effects_of(&m.op)).collect();
        d
    }

    fn effects_of(&self, op: &PauliOp) -> (Effects, Effects) {
        let collect = |inc: &[Vec<u32>], phase: &dyn Fn(u32) -> u8| {
            let mut idx: Vec<u32> = op.factors().iter().flat_map(|f| inc[f.qudit as usize].iter().copied()).collect();
            idx.sort_unstable();
            idx.dedup();
            idx.into_iter().filter_map(|i| Some((i, phase(i))).filter(|&(_, c)| c != 0)).collect::<Effects>()
        };
        let h = collect(&self.term_inc, &|i| self.model.hamiltonian[i as usize].op.commutation_phase(op));
        let s = collect(&self.sym_inc, &|i| self.model.symmetry[i as usize].op.commutation_phase(op));
        (h, s)
    }

    /// Identity error, zero syndrome, zero energy.
    pub fn init_state(&self) -> ErrorState {
        let n = self.model.n_qudits();
        ErrorState {
            error_x: vec![0; n],
            error_z: vec![0; n],
            syndrome: vec![0; self.model.hamiltonian.len()],
            symmetry_syndrome: vec![0; self.model.symmetry.len()],
            energy: 0,
        }
    }

    fn delta_energy(&self, state: &ErrorState, effects: &Effects) -> i64 {
        effects
            .iter()
            .map(|&(i, c)| {
                let hp = self.hermitian_pair[i as usize];
                let s = state.syndrome[i as usize];
                term_energy(hp, s + c) - term_energy(hp, s)
            })
            .sum()
    }

    fn apply_effects(&self, state: &mut ErrorState, op: &PauliOp, effects: &(Effects, Effects), de: i64) {
        for f in op.factors() {
            let q = f.qudit as usize;
            state.error_x[q] = (state.error_x[q] + f.x) % f.dim;
            state.error_z[q] = (state.error_z[q] + f.z) % f.dim;
        }
        for &(i, c) in &effects.0 {
            state.syndrome[i as usize] = (state.syndrome[i as usize] + c) % 4;
        }
        for &(i, c) in &effects.1 {
            state.symmetry_syndrome[i as usize] = (state.symmetry_syndrome[i as usize] + c) % 4;
        }
        state.energy += de;
    }

    /// Multiplies an arbitrary operator into the error; returns the energy change.
    pub fn apply_op(&self, state: &mut ErrorState, op: &PauliOp) -> Result<i64> {
        op.validate(&self.model.registry)?;
        let eff = self.effects_of(op);
        let de = self.delta_energy(state, &eff.0);
        self.apply_effects(state, op, &eff, de);
        Ok(de)
    }

    /// Energy change that move `k` would cause.
    pub fn move_delta(&self, state: &ErrorState, k: usize) -> i64 {
        self.delta_energy(state, &self.move_effects[k].0)
    }

    pub fn apply_move(&self, state: &mut ErrorState, k: usize) -> i64 {
        let de = self.move_delta(state, k);
        self.apply_effects(state, &self.moves[k].op, &self.move_effects[k], de);
        de
    }

    /// One Metropolis update with move `k`.
    pub fn metropolis_step(&self, state: &mut ErrorState, k: usize, beta: f64, rng: &mut impl Rng) -> bool {
        let de = self.move_delta(state, k);
        let accept = de <= 0 || rng.gen::<f64>() < (-beta * de as f64).exp();
        if accept {
            self.apply_effects(state, &self.moves[k].op, &self.move_effects[k], de);
        }
        accept
    }

    /// One sweep: `|moves|` uniformly drawn proposals. Returns acceptances.
    pub fn sweep(&self, state: &mut ErrorState, beta: f64, rng: &mut impl Rng) -> usize {
        let n = self.moves.len();
        if n == 0 {
            return 0;
        }
        (0..n).filter(|_| self.metropolis_step(state, rng.gen_range(0..n), beta, rng)).count()
    }

    /// Syndromes and energy recomputed from the explicit error operator.
    pub fn recompute(&self, state: &ErrorState) -> (Vec<u8>, Vec<u8>, i64) {
        let e = state.error(self.model);
        let syn: Vec<u8> = self.model.hamiltonian.iter().map(|t| t.op.commutation_phase(&e)).collect();
        let sym: Vec<u8> = self.model.symmetry.iter().map(|g| g.op.commutation_phase(&e)).collect();
        let energy = syn.iter().zip(&self.hermitian_pair).map(|(&c, &hp)| term_energy(hp, c)).sum();
        (syn, sym, energy)
    }

    /// Greedy zero-temperature descent with unconstrained single-qudit
    /// moves, then exact syndrome clearing, then logical readout.
    pub fn cool_and_readout(&self, state: &ErrorState, pair: &LogicalPair) -> Result<(i8, i8)> {
        if !self.model.registry.all_qubits() {
            return Err(Error::UnsupportedDimension(0));
        }
        let mut s = state.clone();
        let cap = 100 * self.model.n_qudits();
        for _ in 0..cap {
            let mut improved = false;
            for (k, m) in self.cooling.iter().enumerate() {
                let de = self.delta_energy(&s, &self.cooling_effects[k].0);
                if de < 0 {
                    self.apply_effects(&mut s, &m.op, &self.cooling_effects[k], de);
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
        if s.energy != 0 {
            let target: Vec<u8> = s.syndrome.iter().map(|&c| c / 2).collect();
            let fix = solve_syndrome(&self.model.hamiltonian_ops(), &target)?;
            self.apply_op(&mut s, &fix)?;
            if s.energy != 0 {
                return Err(Error::InfeasibleSyndrome);
            }
        }
        let e = s.error(self.model);
        let sign = |c: u8| if c.is_multiple_of(4) { 1 } else { -1 };
        Ok((sign(pair.z_like.commutation_phase(&e)), sign(pair.x_like.commutation_phase(&e))))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsParams {
    pub beta: f64,
    pub t_max: u64,
    pub checkpoints: Vec<u64>,
    pub seed: u64,
    pub trials: usize,
}

impl DynamicsParams {
    /// Checkpoints at powers of two up to `t_max`, plus `t_max` itself.
    pub fn new(beta: f64, t_max: u64, seed: u64, trials: usize) -> Self {
        let mut checkpoints: Vec<u64> = std::iter::successors(Some(1u64), |&c| c.checked_mul(2))
            .take_while(|&c| c <= t_max)
            .collect();
        if t_max > 0 && checkpoints.last() != Some(&t_max) {
            checkpoints.push(t_max);
        }
        DynamicsParams { beta, t_max, checkpoints, seed, trials }
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta.is_nan() || self.beta < 0.0 {
            return Err(Error::InvalidParams(format!("beta must be nonnegative, got {}", self.beta)));
        }
        if self.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParams("checkpoints must be strictly increasing".into()));
        }
        if self.checkpoints.iter().any(|&c| c == 0 || c > self.t_max) {
            return Err(Error::InvalidParams("checkpoints must lie in 1..=t_max".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub sweep: u64,
    pub readout_zb: i8,
    pub readout_xb: i8,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub seed: u64,
    pub checkpoints: Vec<Checkpoint>,
    /// First checkpoint with a flipped readout; `None` when censored.
    pub t_fail_zb: Option<u64>,
    pub t_fail_xb: Option<u64>,
}

/// Runs one trial from the identity error. Readouts use the boundary
/// logical pair `b`.
pub fn run_trial(dynamics: &Dynamics, params: &DynamicsParams, trial_index: usize) -> Result<TrialRecord> {
    let pair = dynamics
        .model
        .logical_pair("b")
        .ok_or_else(|| Error::UnknownLogical("b".into()))?;
    let mut rng = rng_for(params.seed, trial_index as u64, PURPOSE_DYNAMICS);
    let mut state = dynamics.init_state();
    let mut record = TrialRecord {
        trial_index,
        seed: params.seed,
        checkpoints: vec![Checkpoint { sweep: 0, readout_zb: 1, readout_xb: 1, energy: 0.0 }],
        t_fail_zb: None,
        t_fail_xb: None,
    };
    let mut t = 0u64;
    for &cp in &params.checkpoints {
        while t < cp {
            dynamics.sweep(&mut state, params.beta, &mut rng);
            t += 1;
        }
        let (zb, xb) = dynamics.cool_and_readout(&state, pair)?;
        if zb < 0 && record.t_fail_zb.is_none() {
            record.t_fail_zb = Some(cp);
        }
        if xb < 0 && record.t_fail_xb.is_none() {
            record.t_fail_xb = Some(cp);
        }
        record.checkpoints.push(Checkpoint { sweep: cp, readout_zb: zb, readout_xb: xb, energy: state.energy() });
    }
    Ok(record)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub lx: usize,
    pub lz: usize,
    pub depth: usize,
    pub symmetry: bool,
    pub s_max: usize,
    pub radius: usize,
}

/// Failure time with censored values ordered above every finite one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
pub enum FailTime {
    Finite(u64),
    Censored,
}

impl FailTime {
    pub fn from_option(t: Option<u64>) -> Self {
        t.map_or(FailTime::Censored, FailTime::Finite)
    }

    pub fn is_finite(self) -> bool {
        matches!(self, FailTime::Finite(_))
    }
}

impl std::fmt::Display for FailTime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FailTime::Finite(t) => write!(f, "{t}"),
            FailTime::Censored => write!(f, "inf"),
        }
    }
}

impl Serialize for FailTime {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            FailTime::Finite(t) => s.serialize_u64(*t),
            FailTime::Censored => s.serialize_str("inf"),
        }
    }
}

/// Lower median (element `(n - 1) / 2` of the sorted sample).
pub fn lower_median(values: &[FailTime]) -> Option<FailTime> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    let k = (v.len() - 1) / 2;
    Some(*v.select_nth_unstable(k).1)
}

/// Percentile bootstrap 95% interval of the lower median.
pub fn bootstrap_ci(values: &[FailTime], resamples: usize, rng: &mut impl Rng) -> Option<(FailTime, FailTime)> {
    if values.is_empty() || resamples == 0 {
        return None;
    }
    let n = values.len();
    let mut buf = vec![FailTime::Censored; n];
    let mut medians: Vec<FailTime> = (0..resamples)
        .map(|_| {
            for slot in buf.iter_mut() {
                *slot = values[rng.gen_range(0..n)];
            }
            lower_median(&buf).expect("nonempty")
        })
        .collect();
    medians.sort_unstable();
    let lo = (0.025 * resamples as f64).floor() as usize;
    let hi = ((0.975 * resamples as f64).ceil() as usize).saturating_sub(1).max(lo);
    Some((medians[lo], medians[hi.min(resamples - 1)]))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesSummary {
    pub median: Option<FailTime>,
    pub ci95_low: Option<FailTime>,
    pub ci95_high: Option<FailTime>,
    pub censoring_fraction: f64,
    /// Half or more of the trials were censored, so the median is not
    /// informative beyond being at least `t_max`.
    pub censoring_flag: bool,
}

impl SeriesSummary {
    fn from_times(times: &[FailTime], rng: &mut impl Rng) -> Self {
        let censored = times.iter().filter(|t| !t.is_finite()).count();
        let frac = if times.is_empty() { 0.0 } else { censored as f64 / times.len() as f64 };
        let ci = bootstrap_ci(times, BOOTSTRAP_RESAMPLES, rng);
        SeriesSummary {
            median: lower_median(times),
            ci95_low: ci.map(|c| c.0),
            ci95_high: ci.map(|c| c.1),
            censoring_fraction: frac,
            censoring_flag: !times.is_empty() && 2 * censored >= times.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentParams {
    pub model: ModelParams,
    pub dynamics: DynamicsParams,
    pub move_count: usize,
    pub kinetics: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub params: ExperimentParams,
    pub zb: SeriesSummary,
    pub xb: SeriesSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub records: Vec<TrialRecord>,
    pub summary: ExperimentSummary,
}

pub fn build_memory_model(mp: &ModelParams) -> Result<(StabilizerModel, MoveSet)> {
    let model = build_spbm(LatticeGeometry::new(mp.lx, mp.lz, mp.depth)?)?.with_symmetry(mp.symmetry);
    let moves = enumerate_allowed_moves(&model, mp.s_max, mp.radius)?;
    Ok((model, moves))
}

/// Independent trials in parallel, merged by trial index, with lower
/// medians and bootstrap intervals of both failure times.
pub fn memory_experiment(mp: &ModelParams, dp: &DynamicsParams) -> Result<ExperimentResult> {
    dp.validate()?;
    let (model, moves) = build_memory_model(mp)?;
    let dynamics = Dynamics::new(&model, &moves.moves);
    let records = (0..dp.trials)
        .into_par_iter()
        .map(|i| run_trial(&dynamics, dp, i))
        .collect::<Result<Vec<_>>>()?;
    let zb: Vec<FailTime> = records.iter().map(|r| FailTime::from_option(r.t_fail_zb)).collect();
    let xb: Vec<FailTime> = records.iter().map(|r| FailTime::from_option(r.t_fail_xb)).collect();
    let mut rng_z = rng_for(dp.seed, u32::MAX as u64, PURPOSE_BOOTSTRAP);
    let mut rng_x = rng_for(dp.seed, u32::MAX as u64 + 1, PURPOSE_BOOTSTRAP);
    let summary = ExperimentSummary {
        params: ExperimentParams {
            model: *mp,
            dynamics: dp.clone(),
            move_count: moves.len(),
            kinetics: "metropolis, uniform proposals, 1 sweep = |moves| proposals",
        },
        zb: SeriesSummary::from_times(&zb, &mut rng_z),
        xb: SeriesSummary::from_times(&xb, &mut rng_x),
    };
    Ok(ExperimentResult { records, summary })
}

pub const MEMORY_CSV_HEADER: &str =
    "Lx,Lz,D,beta,symmetry,s_max,trial,seed,t_fail_Zb,t_fail_Xb,censored_Zb,censored_Xb";

/// Writes per-trial rows (no header comments) for one experiment.
pub fn write_memory_rows(w: &mut impl Write, result: &ExperimentResult) -> std::io::Result<()> {
    let p = &result.summary.params;
    for r in &result.records {
        let (zb, xb) = (FailTime::from_option(r.t_fail_zb), FailTime::from_option(r.t_fail_xb));
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            p.model.lx,
            p.model.lz,
            p.model.depth,
            p.dynamics.beta,
            if p.model.symmetry { "on" } else { "off" },
            p.model.s_max,
            r.trial_index,
            r.seed,
            zb,
            xb,
            u8::from(!zb.is_finite()),
            u8::from(!xb.is_finite()),
        )?;
    }
    Ok(())
}
