use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use serde_json::{json, Value};
use spbm::barrier::{write_barrier_rows, BarrierReport, BARRIER_CSV_HEADER, SUBSET_DP_LIMIT};
use spbm::thermal::{write_memory_rows, MEMORY_CSV_HEADER};
use spbm::verify::AuditReport;
use spbm::{
    build_lattice, build_spbm, build_z4_defect, canonical_schedule, commutation_audit, enumerate_allowed_moves,
    factorization_audit, full_audit, memory_experiment, min_barrier_subset_dp, thermal, z4_membrane_phase,
    DynamicsParams, Error, LatticeGeometry, ModelParams, StabilizerModel,
};

use crate::config::{Command, Format, RunConfig};
use crate::CliError;

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Runs the configured command. Returns whether every contracted check passed.
pub fn run(cfg: &RunConfig) -> Result<bool, CliError> {
    fs::create_dir_all(&cfg.out_dir)?;
    match cfg.command {
        Command::Verify => verify(cfg),
        Command::Moves => moves(cfg),
        Command::Barrier => barrier(cfg),
        Command::Memory => memory(cfg),
        Command::Z4check => z4check(cfg),
    }
}

fn geometry(cfg: &RunConfig) -> Result<LatticeGeometry, CliError> {
    Ok(build_lattice(cfg.lx, cfg.lz, cfg.depth)?)
}

fn spbm_model(cfg: &RunConfig) -> Result<StabilizerModel, CliError> {
    Ok(build_spbm(geometry(cfg)?)?.with_symmetry(cfg.symmetric()))
}

fn unix_time() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn csv_preamble(cfg: &RunConfig, model_tag: &str) -> String {
    let mut s = format!(
        "# spbm {VERSION}\n# model {model_tag}\n# config {}\n",
        serde_json::to_string(cfg).expect("config serializes")
    );
    if cfg.stamp {
        s.push_str(&format!("# generated_unix {}\n", unix_time()));
    }
    s
}

fn envelope(cfg: &RunConfig, model_tag: &str, mut payload: Value) -> Value {
    let obj = payload.as_object_mut().expect("payload is an object");
    obj.insert("version".into(), json!(VERSION));
    obj.insert("model".into(), json!(model_tag));
    obj.insert("config".into(), serde_json::to_value(cfg).expect("config serializes"));
    if cfg.stamp {
        obj.insert("generated_unix".into(), json!(unix_time()));
    }
    payload
}

fn create(cfg: &RunConfig, name: &str) -> Result<(PathBuf, BufWriter<File>), CliError> {
    let path = cfg.out_dir.join(name);
    let file = File::create(&path)?;
    Ok((path, BufWriter::new(file)))
}

fn write_json(cfg: &RunConfig, name: &str, value: &Value) -> Result<PathBuf, CliError> {
    let (path, mut w) = create(cfg, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(path)
}

fn print_checks(report: &AuditReport) {
    for c in &report.checks {
        println!("{:<40} {}", c.name, if c.pass { "pass" } else { "FAIL" });
        if !c.pass {
            for d in c.details.iter().take(5) {
                println!("    {d}");
            }
        }
    }
}

fn verify(cfg: &RunConfig) -> Result<bool, CliError> {
    let model = spbm_model(cfg)?;
    let report = full_audit(&model);
    print_checks(&report);
    let path = write_json(cfg, "audit.json", &envelope(cfg, &model.tag, json!({ "audit": report })))?;
    println!("wrote {}", path.display());
    Ok(report.passed())
}

fn moves(cfg: &RunConfig) -> Result<bool, CliError> {
    let model = spbm_model(cfg)?;
    let ms = enumerate_allowed_moves(&model, cfg.s_max, 1)?;
    let mut inventory: Vec<(String, usize, String)> = Vec::new();
    for mv in &ms.moves {
        match inventory.iter_mut().find(|(tag, _, _)| *tag == mv.class_tag) {
            Some(entry) => entry.1 += 1,
            None => {
                let support: Vec<String> =
                    mv.op.factors().iter().map(|f| model.registry.id(f.qudit).to_string()).collect();
                inventory.push((mv.class_tag.clone(), 1, support.join(" ")));
            }
        }
    }
    for (tag, count, example) in &inventory {
        println!("{tag:<16} {count:>6}  {example}");
    }
    let path = match cfg.format {
        Format::Csv => {
            let (path, mut w) = create(cfg, "moves.csv")?;
            write!(w, "{}", csv_preamble(cfg, &model.tag))?;
            writeln!(w, "class_tag,count,example_support")?;
            for (tag, count, example) in &inventory {
                writeln!(w, "{tag},{count},\"{example}\"")?;
            }
            w.flush()?;
            path
        }
        Format::Json => {
            let classes: Vec<Value> = inventory
                .iter()
                .map(|(tag, count, example)| json!({"class_tag": tag, "count": count, "example_support": example}))
                .collect();
            let payload = json!({"total": ms.len(), "s_max": ms.s_max, "radius": ms.radius, "classes": classes});
            write_json(cfg, "moves.json", &envelope(cfg, &model.tag, payload))?
        }
    };
    println!("wrote {}", path.display());
    Ok(true)
}

const BARRIER_LOGICALS: [&str; 6] = ["Zbar_e", "Xbar_f", "composite_Z", "composite_X", "Zbar_b", "Xbar_b"];

fn barrier(cfg: &RunConfig) -> Result<bool, CliError> {
    let model = spbm_model(cfg)?;
    let mut reports: Vec<BarrierReport> = Vec::new();
    let mut illegal: Vec<Value> = Vec::new();
    let mut ok = true;
    for name in BARRIER_LOGICALS {
        let bare_boundary = name.ends_with("_b");
        match canonical_schedule(&model, name) {
            Ok(s) => {
                if bare_boundary && model.enforce_symmetry {
                    println!("{name}: unexpectedly legal under the symmetry");
                    ok = false;
                }
                let canon = BarrierReport::from_schedule(&model, &s);
                println!("{name:<12} canonical {:>4}", canon.max_energy);
                if s.steps.len() <= SUBSET_DP_LIMIT {
                    let dp = min_barrier_subset_dp(&model, name, &s.steps)?;
                    println!("{name:<12} subset_dp {:>4}", dp.max_energy);
                    ok &= dp.max_energy <= canon.max_energy;
                    reports.push(canon);
                    reports.push(dp);
                } else {
                    reports.push(canon);
                }
            }
            Err(Error::NoLegalSchedule { logical, step }) => {
                println!("{name:<12} no legal schedule (step {step} breaks the symmetry)");
                ok &= bare_boundary;
                illegal.push(json!({"logical": logical, "step": step}));
            }
            Err(e) => return Err(e.into()),
        }
    }
    let (csv_path, mut w) = create(cfg, "barrier.csv")?;
    write!(w, "{}", csv_preamble(cfg, &model.tag))?;
    writeln!(w, "{BARRIER_CSV_HEADER}")?;
    for r in &reports {
        write_barrier_rows(&mut w, r)?;
    }
    w.flush()?;
    let payload = json!({"reports": reports, "illegal": illegal});
    let json_path = write_json(cfg, "barrier.json", &envelope(cfg, &model.tag, payload))?;
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(ok)
}

fn memory(cfg: &RunConfig) -> Result<bool, CliError> {
    let mp = ModelParams { lx: cfg.lx, lz: cfg.lz, depth: cfg.depth, symmetry: cfg.symmetric(), s_max: cfg.s_max, radius: 1 };
    let dp = DynamicsParams::new(cfg.beta, cfg.t_max, cfg.seed, cfg.trials);
    let result = memory_experiment(&mp, &dp)?;
    let tag = spbm_model(cfg)?.tag;
    let (csv_path, mut w) = create(cfg, "memory.csv")?;
    write!(w, "{}", csv_preamble(cfg, &tag))?;
    writeln!(w, "{MEMORY_CSV_HEADER}")?;
    write_memory_rows(&mut w, &result)?;
    w.flush()?;
    let s = &result.summary;
    let payload = json!({
        "params": s.params,
        "medians": {"Zb": s.zb.median, "Xb": s.xb.median},
        "ci95_low": {"Zb": s.zb.ci95_low, "Xb": s.xb.ci95_low},
        "ci95_high": {"Zb": s.zb.ci95_high, "Xb": s.xb.ci95_high},
        "censoring_fraction": {"Zb": s.zb.censoring_fraction, "Xb": s.xb.censoring_fraction},
        "censoring_flag": {"Zb": s.zb.censoring_flag, "Xb": s.xb.censoring_flag},
    });
    let json_path = write_json(cfg, "summary.json", &envelope(cfg, &tag, payload))?;
    let show = |t: Option<thermal::FailTime>| t.map_or("-".to_string(), |t| t.to_string());
    println!(
        "median t_fail Zb {} [{}, {}], censored {:.2}",
        show(s.zb.median),
        show(s.zb.ci95_low),
        show(s.zb.ci95_high),
        s.zb.censoring_fraction
    );
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(true)
}

fn z4check(cfg: &RunConfig) -> Result<bool, CliError> {
    let model = build_z4_defect(geometry(cfg)?)?;
    let audit = AuditReport::merge([commutation_audit(&model), factorization_audit(&model)]);
    print_checks(&audit);
    let op = |name: &str| model.logical_operator(name);
    let crossing = z4_membrane_phase(&model, op("membrane_e")?, op("membrane_f")?)?;
    let crossing_rot = z4_membrane_phase(&model, op("membrane_e_rot")?, op("membrane_f_rot")?)?;
    let parallel = z4_membrane_phase(&model, op("membrane_f")?, op("membrane_f_rot")?)?;
    println!("membrane phase (crossing) {crossing}, rotated {crossing_rot}, parallel {parallel}");
    let payload = json!({
        "audit": audit,
        "membrane_phase": crossing,
        "membrane_phase_rot": crossing_rot,
        "parallel_phase": parallel,
    });
    let path = write_json(cfg, "z4check.json", &envelope(cfg, &model.tag, payload))?;
    println!("wrote {}", path.display());
    Ok(audit.passed() && crossing != 0 && crossing_rot != 0 && parallel == 0)
}
