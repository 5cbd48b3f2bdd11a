//! Acceptance suite. Each criterion prints one PASS or FAIL line; the
//! process exits nonzero if any criterion fails.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spbm::barrier::least_squares_slope;
use spbm::codes::TermFamily;
use spbm::thermal::{build_memory_model, FailTime};
use spbm::*;

type Outcome = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn spbm(lx: usize, lz: usize, d: usize) -> StabilizerModel {
    build_spbm(build_lattice(lx, lz, d).unwrap()).unwrap()
}

fn z4(lx: usize, lz: usize, d: usize) -> StabilizerModel {
    build_z4_defect(build_lattice(lx, lz, d).unwrap()).unwrap()
}

fn a1_commutation() -> Outcome {
    let start = Instant::now();
    let mut models = 0;
    for lx in 2..=4 {
        for lz in 2..=4 {
            for d in 2..=3 {
                for m in [spbm(lx, lz, d), z4(lx, lz, d)] {
                    let r = commutation_audit(&m);
                    let bad: usize = r.checks.iter().map(|c| c.details.len()).sum();
                    ensure(r.passed(), format!("{}: {bad} violating pairs", m.tag))?;
                    models += 1;
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, format!("took {secs:.1} s"))?;
    Ok(format!("{models} models, 0 violating pairs, {secs:.1} s"))
}

fn a2_factorization() -> Outcome {
    let mut generators = 0;
    let mut squares = 0;
    for (l, d) in [(2, 2), (3, 2), (3, 3), (4, 2)] {
        let m = spbm(l, l, d);
        for s in &m.symmetry {
            let a = &m.term(&s.factors[0]).ok_or("missing factor")?.op;
            let b = &m.term(&s.factors[1]).ok_or("missing factor")?.op;
            let p = a.multiply(b).map_err(|e| e.to_string())?;
            ensure(p == s.op && p.phase() == 0, format!("{} is not an exact product", s.label))?;
            generators += 1;
        }
        ensure(factorization_audit(&m).passed(), format!("{} audit failed", m.tag))?;
        let z = z4(l, l, d);
        for (script, square) in [(TermFamily::Z4ScriptA, TermFamily::Z4Ab), (TermFamily::Z4ScriptB, TermFamily::Z4Bb)] {
            for t in z.hamiltonian.iter().filter(|t| t.label.family == script) {
                let sq = z.term(&codes::TermLabel::new(square, t.label.anchor)).ok_or("missing square")?;
                ensure(t.op.multiply(&t.op).unwrap() == sq.op, format!("square of {} differs", t.label))?;
                squares += 1;
            }
        }
        ensure(factorization_audit(&z).passed(), format!("{} audit failed", z.tag))?;
    }
    Ok(format!("{generators} symmetry generators exact, {squares} Z4 squares exact"))
}

fn a3_symmetry_filter() -> Outcome {
    let m = spbm(3, 3, 2);
    let ms = enumerate_allowed_moves(&m, 2, 1).map_err(|e| e.to_string())?;
    for mv in &ms.moves {
        let single_b = mv.op.support_len() == 1 && m.registry.id(mv.op.factors()[0].qudit).sector == Sector::B;
        ensure(!single_b, format!("retained single boundary move {}", mv.class_tag))?;
    }
    let classes = ms.classes();
    ensure(classes.contains(&"pair_Zb_Zf"), "pair_Zb_Zf missing")?;
    ensure(classes.contains(&"pair_Xb_Xe"), "pair_Xb_Xe missing")?;
    let bare = bare_schedule(&m, "Zbar_b").map_err(|e| e.to_string())?;
    let n = bare.steps.len();
    for (i, &v) in bare.symmetry_violations[..n - 1].iter().enumerate() {
        ensure(v >= 1, format!("bare Zbar_b prefix of length {} is symmetric", i + 1))?;
    }
    let comp = canonical_schedule(&m, "composite_Z").map_err(|e| e.to_string())?;
    ensure(comp.symmetry_violations.iter().all(|&v| v == 0), "composite_Z prefix violates the symmetry")?;
    Ok(format!(
        "{} moves, no single-B support; bare Zbar_b prefixes violate {:?}; composite_Z prefixes clean",
        ms.len(),
        &bare.symmetry_violations[..n - 1]
    ))
}

fn a4_confinement() -> Outcome {
    let start = Instant::now();
    let ls: Vec<usize> = (3..=8).collect();
    let mut maxima = Vec::new();
    for &l in &ls {
        let m = spbm(l, l, 3);
        maxima.push(canonical_schedule(&m, "composite_Z").map_err(|e| e.to_string())?.max_energy() as f64);
        for name in ["Zbar_e", "Xbar_f"] {
            let e = canonical_schedule(&m, name).map_err(|e| e.to_string())?.max_energy();
            ensure(e == 4, format!("{name} barrier {e} at L={l}"))?;
        }
    }
    let xs: Vec<f64> = ls.iter().map(|&l| l as f64).collect();
    let slope = least_squares_slope(&xs, &maxima);
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = maxima.iter().sum::<f64>() / maxima.len() as f64;
    let sxy: f64 = xs.iter().zip(&maxima).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = maxima.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = sxy * sxy / (sxx * syy);
    let secs = start.elapsed().as_secs_f64();
    ensure(slope >= 1.0, format!("slope {slope:.3}"))?;
    ensure(r2 >= 0.98, format!("r^2 {r2:.4}"))?;
    ensure(secs < 60.0, format!("took {secs:.1} s"))?;
    Ok(format!("composite_Z maxima {maxima:?}, slope {slope:.3}, r^2 {r2:.4}; bulk lines 4"))
}

fn a5_oracle() -> Outcome {
    let m = spbm(2, 2, 2);
    let canon = canonical_schedule(&m, "composite_Z").map_err(|e| e.to_string())?;
    let dp = min_barrier_subset_dp(&m, "composite_Z", &canon.steps).map_err(|e| e.to_string())?;
    ensure(dp.max_energy <= canon.max_energy(), format!("oracle {} > canonical {}", dp.max_energy, canon.max_energy()))?;
    let line = canonical_schedule(&m, "Zbar_e").map_err(|e| e.to_string())?;
    let dp_line = min_barrier_subset_dp(&m, "Zbar_e", &line.steps).map_err(|e| e.to_string())?;
    ensure(dp_line.max_energy == 4, format!("Zbar_e oracle barrier {}", dp_line.max_energy))?;
    Ok(format!("composite_Z oracle {} <= canonical {}; Zbar_e oracle 4", dp.max_energy, canon.max_energy()))
}

fn median_zb(l: usize, symmetry: bool, t_max: u64) -> std::result::Result<thermal::SeriesSummary, String> {
    let mp = ModelParams { lx: l, lz: l, depth: 2, symmetry, s_max: 2, radius: 1 };
    let dp = DynamicsParams::new(2.0, t_max, 2024, 200);
    Ok(memory_experiment(&mp, &dp).map_err(|e| e.to_string())?.summary.zb)
}

fn a6_memory_scaling() -> Outcome {
    const T_MAX: u64 = 1 << 14;
    let start = Instant::now();
    let mut on = Vec::new();
    let mut off = Vec::new();
    for l in [2, 3, 4] {
        on.push(median_zb(l, true, T_MAX)?);
        off.push(median_zb(l, false, T_MAX)?);
    }
    let fmt = |s: &thermal::SeriesSummary| {
        let show = |t: Option<FailTime>| t.map_or("-".to_string(), |t| t.to_string());
        format!("{} [{}, {}]", show(s.median), show(s.ci95_low), show(s.ci95_high))
    };
    let summary = format!(
        "t_max {T_MAX}; ON L=2,3,4: {}; {}; {} | OFF: {}; {}; {} ({:.0} s)",
        fmt(&on[0]),
        fmt(&on[1]),
        fmt(&on[2]),
        fmt(&off[0]),
        fmt(&off[1]),
        fmt(&off[2]),
        start.elapsed().as_secs_f64()
    );
    let med: Vec<FailTime> = on.iter().map(|s| s.median.unwrap()).collect();
    let mut failures = Vec::new();
    if !(med[0] < med[1] && med[1] < med[2]) {
        failures.push("ON medians not strictly increasing");
    }
    if on[0].ci95_high.unwrap() >= on[2].ci95_low.unwrap() {
        failures.push("ON CIs of L=2 and L=4 overlap");
    }
    let ratio_ok = match (off[0].median.unwrap(), off[2].median.unwrap()) {
        (FailTime::Finite(a), FailTime::Finite(b)) => (b as f64) < 4.0 * a as f64,
        _ => false,
    };
    if !ratio_ok {
        failures.push("OFF median at L=4 not below 4x L=2");
    }
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{}; {summary}", failures.join("; ")))
    }
}

fn a7_z4_membranes() -> Outcome {
    let mut phases = Vec::new();
    for (l, d) in [(2, 2), (3, 2), (3, 3)] {
        let m = z4(l, l, d);
        for suffix in ["", "_rot"] {
            let me = m.logical_operator(&format!("membrane_e{suffix}")).map_err(|e| e.to_string())?;
            let mf = m.logical_operator(&format!("membrane_f{suffix}")).map_err(|e| e.to_string())?;
            let c = z4_membrane_phase(&m, me, mf).map_err(|e| e.to_string())?;
            ensure((1..=3).contains(&c), format!("crossing phase {c} at {}", m.tag))?;
            phases.push(c);
        }
        let mf = m.logical_operator("membrane_f").unwrap();
        let mf_rot = m.logical_operator("membrane_f_rot").unwrap();
        let me = m.logical_operator("membrane_e").unwrap();
        let me_rot = m.logical_operator("membrane_e_rot").unwrap();
        for (a, b) in [(mf, mf_rot), (me, me_rot)] {
            let c = z4_membrane_phase(&m, a, b).map_err(|e| e.to_string())?;
            ensure(c == 0, format!("parallel phase {c} at {}", m.tag))?;
        }
    }
    Ok(format!("crossing phases {phases:?}, parallel phases 0"))
}

fn a8_dynamics_integrity() -> Outcome {
    let mut parts = Vec::new();
    for symmetry in [true, false] {
        let (m, ms) = build_memory_model(&ModelParams { lx: 3, lz: 3, depth: 2, symmetry, s_max: 2, radius: 1 })
            .map_err(|e| e.to_string())?;
        let d = Dynamics::new(&m, &ms.moves);
        let mut s = d.init_state();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut accepted = 0;
        while accepted < 10_000 {
            if d.metropolis_step(&mut s, rng.gen_range(0..ms.len()), 0.25, &mut rng) {
                accepted += 1;
            }
        }
        let (syn, sym, e) = d.recompute(&s);
        ensure(syn == s.syndrome && sym == s.symmetry_syndrome, "cached syndrome differs from recomputation")?;
        ensure(e == s.energy_units(), format!("cached energy {} vs {e}", s.energy_units()))?;
        let mut cold = d.init_state();
        for _ in 0..1000 {
            d.sweep(&mut cold, 1e6, &mut rng);
            ensure(cold.energy_units() == 0, "ground state gained energy at beta = 1e6")?;
        }
        parts.push(format!("symmetry {}: exact after 10^4 accepted moves, final energy {e}", if symmetry { "on" } else { "off" }));
    }
    Ok(parts.join("; "))
}

fn a9_baselines() -> Outcome {
    for l in 2..=4 {
        let m = build_toric_code_2d(l).map_err(|e| e.to_string())?;
        let k = logical_audit(&m).k_rank.ok_or("no rank")?;
        ensure(k == 2, format!("2d toric code L={l}: k = {k}"))?;
    }
    let m = spbm(2, 2, 2);
    let r = logical_audit(&m);
    let k = r.k_rank.ok_or("no rank")?;
    let basis = r.pairing_matrix.len();
    ensure(k == basis, format!("k_rank {k} vs {basis} constructed pairs"))?;
    let expected = r.check("k_rank_matches_expected").ok_or("expected-count check missing")?;
    ensure(r.passed(), format!("logical audit failed: {}", r.to_json()))?;
    Ok(format!("toric k = 2 for L = 2..4; SPBM k_rank {k} = {basis} pairs; {}", expected.details.join("")))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("A1 commutation", a1_commutation),
        ("A2 factorization", a2_factorization),
        ("A3 symmetry filter", a3_symmetry_filter),
        ("A4 confinement", a4_confinement),
        ("A5 oracle consistency", a5_oracle),
        ("A6 memory scaling", a6_memory_scaling),
        ("A7 Z4 membranes", a7_z4_membranes),
        ("A8 dynamics integrity", a8_dynamics_integrity),
        ("A9 baselines", a9_baselines),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        match f() {
            Ok(detail) => println!("{name}: PASS ({detail})"),
            Err(detail) => {
                println!("{name}: FAIL ({detail})");
                failed += 1;
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
