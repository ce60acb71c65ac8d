//! Command execution and report emission. Reports are deterministic: running
//! the same session with the same seed yields byte-identical output in both
//! formats (timing is never part of the report). Commands run on a small
//! scoped thread pool capped by HOMASCEND_THREADS, with results merged back
//! in declaration order.

use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::algebra::{check_dagger, is_flat};
use crate::ascent::{
    self, compatibility_report, ring_retract, vmax, GalleryReport, RetractOutcome,
};
use crate::error::{Error, Result};
use crate::extended::{
    is_extended, matrix_equiv_1x1, separability_idempotent, summand_of_extended, FiniteExtension,
};
use crate::fmodule::FModule;
use crate::krs::{is_isomorphic, krs_decompose};
use crate::mat::Mat;
use crate::pidmodel::{
    classify, completion_ascent, ext_pid, extend_pid, prop32_case1_pid, thm113_decision, vmax_pid,
    PIDModule, PIDPresentation, Side,
};
use crate::resolution::ext_dim;
use crate::session::{Command, Session};

#[derive(Serialize)]
pub struct Report {
    pub schema: u32,
    pub seed: u64,
    pub incomplete: bool,
    pub entries: Vec<Entry>,
}

#[derive(Serialize)]
pub struct Entry {
    pub index: usize,
    pub command: String,
    pub provenance: String,
    pub result: Value,
}

/// Execute every command. Independent commands may run concurrently; the
/// report always lists results in declaration order. An equivalence failure
/// anywhere aborts the run with the failing witness.
pub fn run(session: &Session, deadline: Option<Instant>) -> Result<Report> {
    let threads = std::env::var("HOMASCEND_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&t| t >= 1)
        .unwrap_or(1);
    let n = session.commands.len();
    let mut results: Vec<Option<Result<Value>>> = (0..n).map(|_| None).collect();
    let mut incomplete = false;
    let mut next = 0;
    while next < n {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            incomplete = true;
            break;
        }
        let batch_end = (next + threads).min(n);
        if threads == 1 || batch_end - next == 1 {
            results[next] = Some(execute(session, &session.commands[next]));
            next += 1;
        } else {
            let batch: Vec<usize> = (next..batch_end).collect();
            let mut outs: Vec<(usize, Result<Value>)> = Vec::with_capacity(batch.len());
            std::thread::scope(|scope| {
                let handles: Vec<_> = batch
                    .iter()
                    .map(|&i| {
                        let cmd = &session.commands[i];
                        scope.spawn(move || (i, execute(session, cmd)))
                    })
                    .collect();
                for h in handles {
                    outs.push(h.join().expect("worker thread panicked"));
                }
            });
            for (i, r) in outs {
                results[i] = Some(r);
            }
            next = batch_end;
        }
    }
    let mut entries = Vec::new();
    for (i, cmd) in session.commands.iter().enumerate() {
        match results[i].take() {
            Some(Ok(value)) => {
                let provenance = provenance_of(&value);
                entries.push(Entry {
                    index: i,
                    command: cmd.label(),
                    provenance,
                    result: value,
                });
            }
            Some(Err(e)) => return Err(e),
            None => {
                entries.push(Entry {
                    index: i,
                    command: cmd.label(),
                    provenance: "skipped".into(),
                    result: json!({"skipped": "deadline exceeded"}),
                });
            }
        }
    }
    Ok(Report {
        schema: 1,
        seed: session.config.seed,
        incomplete,
        entries,
    })
}

/// Reports are computed unless a field inside explicitly says otherwise.
fn provenance_of(v: &Value) -> String {
    fn has_asserted(v: &Value) -> bool {
        match v {
            Value::String(s) => s == "asserted-by-theorem",
            Value::Array(a) => a.iter().any(has_asserted),
            Value::Object(m) => m.values().any(has_asserted),
            _ => false,
        }
    }
    if has_asserted(v) {
        "mixed: see asserted-by-theorem fields".into()
    } else {
        "computed".into()
    }
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("serializable report fragment")
}

fn pid_value(m: &PIDModule) -> Value {
    json!({
        "free_rank": m.free_rank,
        "exponents": m.exponents,
        "display": m.to_string(),
    })
}

fn execute(session: &Session, cmd: &Command) -> Result<Value> {
    let cfg = &session.config;
    match cmd {
        Command::Dagger { map } => {
            let phi = session.map(map)?;
            Ok(to_value(&ascent::DaggerReport2::from(check_dagger(phi))))
        }
        Command::Flat { map } => {
            let phi = session.map(map)?;
            match is_flat(phi) {
                Some(w) => Ok(json!({"flat": true, "rank": w.rank})),
                None => Ok(json!({"flat": false})),
            }
        }
        Command::Ascend { map, module } => {
            let phi = session.map(map)?;
            let m = &session.module(module)?.module;
            let (rep, _) = compatibility_report(phi, m, cfg.ext_range)?;
            Ok(to_value(&rep))
        }
        Command::Ext { m, n, degree } => {
            let mm = &session.module(m)?.module;
            let nn = &session.module(n)?.module;
            let (dim, _) = ext_dim(mm, nn, *degree);
            Ok(json!({"dim": dim, "degree": degree}))
        }
        Command::Krs { module } => {
            let m = &session.module(module)?.module;
            let d = krs_decompose(m);
            let dims: Vec<usize> = d.pieces.iter().map(|p| p.dim()).collect();
            Ok(json!({"pieces": d.pieces.len(), "piece_dims": dims}))
        }
        Command::Iso { m, n } => {
            let mm = &session.module(m)?.module;
            let nn = &session.module(n)?.module;
            Ok(json!({"isomorphic": is_isomorphic(mm, nn).is_some()}))
        }
        Command::Extended { map, module } => {
            let phi = session.map(map)?.clone();
            let n = session.module(module)?.module.clone();
            if n.dim() > cfg.dimension_cap {
                return Err(Error::Unsupported(format!(
                    "module dimension {} exceeds the exhaustive-search cap {}",
                    n.dim(),
                    cfg.dimension_cap
                )));
            }
            let e = FiniteExtension::new(phi)?;
            match is_extended(&e, &n)? {
                Some(w) => Ok(json!({
                    "extended": true,
                    "descent_dim": w.module.dim(),
                })),
                None => {
                    // attach the summand-of-extended witness when separable
                    let summand = match separability_idempotent(&e)? {
                        Some(_) => {
                            let w = summand_of_extended(&e, &n)?;
                            json!({
                                "summand_of_extended": true,
                                "ambient_extended_dim": w.extended.dim(),
                            })
                        }
                        None => json!({"summand_of_extended": "inseparable extension"}),
                    };
                    Ok(json!({"extended": false, "witness": summand}))
                }
            }
        }
        Command::MatrixEquiv { map, scalar, field } => {
            let phi = session.map(map)?.clone();
            let e = FiniteExtension::new(phi)?;
            let ans = matrix_equiv_1x1(&e, scalar)?;
            Ok(json!({
                "scalar": field.fmt_elem(scalar),
                "equivalent_over_base": ans,
            }))
        }
        Command::Separability { map } => {
            let phi = session.map(map)?.clone();
            let e = FiniteExtension::new(phi)?;
            match separability_idempotent(&e)? {
                Some(sep) => Ok(json!({"separable": true, "unique": sep.unique})),
                None => Ok(json!({"separable": false})),
            }
        }
        Command::Summand { map, module } => {
            let phi = session.map(map)?.clone();
            let n = session.module(module)?.module.clone();
            let e = FiniteExtension::new(phi)?;
            let w = summand_of_extended(&e, &n)?;
            Ok(json!({
                "verified": true,
                "module_dim": n.dim(),
                "ambient_extended_dim": w.extended.dim(),
            }))
        }
        Command::Vmax { map, module, gens } => {
            let phi = session.map(map)?;
            let md = session.module(module)?;
            let n = &md.module;
            let algebra = n.algebra();
            let f = algebra.field();
            // build the R-span of the evaluated generators inside N
            let mut cols = Mat::zero(f, n.dim(), 0);
            for row in gens {
                if row.len() != md.gens.cols() {
                    return Err(Error::Invariant(format!(
                        "generator must have {} entries",
                        md.gens.cols()
                    )));
                }
                let mut v = Mat::zero(f, n.dim(), 1);
                for (i, expr) in row.iter().enumerate() {
                    let a = algebra.elem_from_mpoly(expr)?;
                    let term = n.action_of(&a).mul(&md.gens.col(i));
                    v = v.add(&term);
                }
                cols = cols.hstack(&v);
            }
            // close up under the R-action
            let n_over_r = FModule::restrict(phi, n);
            let (_, m_cols) = n_over_r.submodule(&cols);
            let res = vmax(phi, n, &m_cols)?;
            Ok(json!({
                "m_dim": m_cols.cols(),
                "v_dim": res.v_cols.cols(),
            }))
        }
        Command::Gallery { id, params } => {
            let l = params.get("L").copied().unwrap_or(cfg.ext_range as i64) as usize;
            let rep: GalleryReport = match id.as_str() {
                "2.8" => ascent::gallery_field_extension(l)?,
                "2.9" => {
                    let p = params.get("p").copied().unwrap_or(2) as u64;
                    let n = params.get("N").copied().unwrap_or(2) as usize;
                    if (p as usize) * n > cfg.dimension_cap {
                        return Err(Error::Unsupported(format!(
                            "target dimension {} exceeds the exhaustive-search cap {}",
                            (p as usize) * n,
                            cfg.dimension_cap
                        )));
                    }
                    ascent::gallery_frobenius(p, n, l)?
                }
                "2.10" => ascent::gallery_regular_quotient(),
                "2.11" => {
                    let n = params.get("n").copied().unwrap_or(2) as usize;
                    ascent::gallery_gorenstein(n, l)?
                }
                other => return Err(Error::Invariant(format!("unknown gallery id {other:?}"))),
            };
            Ok(to_value(&rep))
        }
        Command::PidClassify { gens, rows } => {
            let f = crate::field::Field::rationals();
            let m = classify(
                &f,
                &PIDPresentation {
                    gens: *gens,
                    rows: rows.clone(),
                },
                Side::OverR,
            );
            Ok(pid_value(&m))
        }
        Command::PidAscent { free, torsion } => {
            let m = PIDModule::new(*free, torsion.clone(), Side::OverR);
            let rep = completion_ascent(&m)?;
            let t = thm113_decision(&m)?;
            Ok(json!({
                "ascent": to_value(&rep),
                "prime_criterion": to_value(&t),
            }))
        }
        Command::PidExt { m, n, degree } => {
            let mm = PIDModule::new(m.0, m.1.clone(), Side::OverR);
            let nn = PIDModule::new(n.0, n.1.clone(), Side::OverR);
            let e = ext_pid(&mm, &nn, *degree);
            let mut out = pid_value(&e.module);
            if let Some(note) = e.note {
                out["note"] = json!(note);
            }
            Ok(out)
        }
        Command::PidExtend { free, torsion } => {
            let n = PIDModule::new(*free, torsion.clone(), Side::OverS);
            let m = extend_pid(&n);
            Ok(pid_value(&m))
        }
        Command::PidProp32 { a, b, class } => {
            let f = crate::field::Field::rationals();
            let rep = prop32_case1_pid(&f, *a, *b, class.clone())?;
            Ok(json!({
                "middle_over_s": pid_value(&rep.middle_over_s),
                "extended_witness": pid_value(&rep.extended_witness_over_r),
            }))
        }
        Command::PidVmax {
            torsion,
            free,
            gens,
            prec,
        } => {
            let f = crate::field::Field::rationals();
            let n = PIDModule::new(*free, torsion.clone(), Side::OverS);
            let rep = vmax_pid(&f, &n, gens, *prec)?;
            Ok(json!({
                "v": pid_value(&rep.v),
                "k_dim": rep.k_dim,
                "precision_used": rep.precision_used,
            }))
        }
    }
}

/// Re-run a declared map's retract search (used by the gallery but exposed
/// for sessions that want it directly).
#[allow(dead_code)]
fn retract_label(phi: &crate::algebra::AlgebraMap) -> String {
    match ring_retract(phi) {
        RetractOutcome::Found(_) => "found".into(),
        RetractOutcome::NotExists => "none".into(),
        RetractOutcome::Undecided(r) => format!("undecided: {r}"),
    }
}

/// Deterministic emission: pretty JSON with schema versioning, or aligned
/// plain text. Neither contains timing or machine-specific data.
pub fn emit(report: &Report, format: EmitFormat) -> String {
    match format {
        EmitFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        EmitFormat::Text => {
            let mut out = String::new();
            out.push_str(&format!(
                "homascend report (schema {}, seed {})\n",
                report.schema, report.seed
            ));
            if report.incomplete {
                out.push_str("WARNING: incomplete run (deadline exceeded)\n");
            }
            for e in &report.entries {
                out.push_str(&format!("\n[{}] {}\n", e.index, e.command));
                out.push_str(&format!("  provenance: {}\n", e.provenance));
                let pretty = serde_json::to_string_pretty(&e.result).expect("serializes");
                for line in pretty.lines() {
                    out.push_str("  ");
                    out.push_str(line);
                    out.push('\n');
                }
            }
            out
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Text,
    Json,
}
