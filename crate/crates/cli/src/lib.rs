//! Commands behind the `bvqft` binary: each runs the engine on an instance and produces a
//! deterministic JSON report, a plain-text ledger and an exit code.

use std::path::Path;

use serde_json::{json, Map, Value};

use bvqft::algebra::validate_algebra;
use bvqft::graded::format_scalar;
use bvqft::instances::Instance;
use bvqft::integral::{integral_suite, validate_integral, IntegralSuite};
use bvqft::io::load_instance;
use bvqft::ledger::Ledger;
use bvqft::observables::{compute_observables, Observables};
use bvqft::series::{Series, Vars};
use bvqft::solver::{qme_solve, verify_tensor_package, verify_theta, SolveOptions, SolverState};
use bvqft::transfer::{build_quantization_map, check_anomaly_free, compute_cohomology, TransferData};
use bvqft::Error;

pub const SCHEMA: &str = "bvqft-report/1";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_IDENTITY: i32 = 1;
pub const EXIT_ANOMALY: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Validate,
    Solve,
    Observables,
    Wdvv,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Solve => "solve",
            Command::Observables => "observables",
            Command::Wdvv => "wdvv",
        }
    }
}

/// Flag overrides; unset fields fall back to the instance's truncation.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub order: Option<usize>,
    pub hbar_max: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Value,
    pub text: String,
    pub exit_code: i32,
}

/// Sparse table of a series: `"word|h^k|component" -> "p/q"`.
pub fn series_table(s: &Series, vars: &Vars, components: Option<&[String]>) -> Value {
    let mut m = Map::new();
    for (w, k, i, c) in s.terms() {
        let key = match components {
            Some(labels) => format!("{}|h^{k}|{}", vars.word_label(w), labels[i]),
            None => format!("{}|h^{k}", vars.word_label(w)),
        };
        m.insert(key, Value::String(format_scalar(c)));
    }
    Value::Object(m)
}

fn tuple_key(labels: &[String], t: &[usize]) -> String {
    t.iter().map(|&a| labels[a].as_str()).collect::<Vec<_>>().join(",")
}

fn ledger_json(l: &Ledger) -> Value {
    serde_json::to_value(&l.entries).expect("ledger serializes")
}

fn exit_for(err: &Error) -> i32 {
    match err {
        Error::Anomaly(_) => EXIT_ANOMALY,
        Error::Input(_) | Error::Dimension(_) | Error::Io(_) | Error::Json(_) => EXIT_INPUT,
        Error::Identity { .. } | Error::Divisibility { .. } | Error::NotSemiClassical(_) => EXIT_IDENTITY,
    }
}

fn status_for(code: i32) -> &'static str {
    match code {
        EXIT_PASS => "pass",
        EXIT_IDENTITY => "identity-failure",
        EXIT_ANOMALY => "anomaly",
        _ => "input-error",
    }
}

struct Pipeline {
    td: TransferData,
    st: SolverState,
}

fn solve_pipeline(inst: &Instance, order: usize, hbar_max: usize, seed: Option<u64>, data: &mut Map<String, Value>) -> Result<Pipeline, Error> {
    let spec = &inst.spec;
    let coh = compute_cohomology(spec)?;
    data.insert("cohomology".into(), json!({ "labels": coh.labels, "ghosts": coh.ghosts }));
    let td = build_quantization_map(spec, &coh, hbar_max)?;
    let report = check_anomaly_free(&td);
    let invisibles: Vec<Value> = report
        .invisibles
        .iter()
        .map(|(l, a, col)| json!({ "hbar_order": l, "class": a, "kappa_column": col.iter().map(format_scalar).collect::<Vec<_>>() }))
        .collect();
    data.insert("anomaly".into(), json!({ "anomaly_free": report.anomaly_free, "invisibles": invisibles }));
    if !report.anomaly_free {
        return Err(report.into_error());
    }
    let st = qme_solve(spec, &td, SolveOptions { order, seed })?;
    Ok(Pipeline { td, st })
}

fn solve_data(p: &Pipeline, data: &mut Map<String, Value>) {
    let st = &p.st;
    let v = &st.vars;
    let comps: Vec<String> = st.labels.clone();
    let mut a = Map::new();
    for t in st.a.tuples() {
        let s = st.a.get(&t);
        if !s.is_zero() {
            a.insert(tuple_key(&st.labels, &t), series_table(s, v, Some(&comps)));
        }
    }
    data.insert("A".into(), Value::Object(a));
}

fn theta_table(spec_labels: &[String], st: &SolverState) -> Value {
    series_table(&st.theta, &st.vars, Some(spec_labels))
}

/// Runs a command on an in-memory instance.
pub fn run(cmd: Command, inst: &Instance, opts: RunOptions) -> Outcome {
    let order = opts.order.unwrap_or(inst.t_order);
    let hbar_max = opts.hbar_max.unwrap_or(inst.hbar_max);
    let check_seed = opts.seed.unwrap_or(1);
    let mut data = Map::new();
    let mut ledger = Ledger::new();
    let mut notes: Vec<String> = Vec::new();
    let result = run_inner(cmd, inst, order, hbar_max, opts.seed, check_seed, &mut data, &mut ledger, &mut notes);
    let (code, error) = match result {
        Ok(()) => (if ledger.all_pass() { EXIT_PASS } else { EXIT_IDENTITY }, None),
        Err(e) => (exit_for(&e), Some(e.to_string())),
    };
    let mut report = Map::new();
    report.insert("schema".into(), json!(SCHEMA));
    report.insert("command".into(), json!(cmd.name()));
    report.insert("instance".into(), json!(inst.spec.name));
    report.insert("truncation".into(), json!({ "t_order": order, "hbar_max": hbar_max }));
    if let Some(s) = opts.seed {
        report.insert("seed".into(), json!(s));
    }
    report.insert("status".into(), json!(status_for(code)));
    if let Some(e) = &error {
        report.insert("error".into(), json!(e));
    }
    report.insert("ledger".into(), ledger_json(&ledger));
    report.insert("notes".into(), json!(notes));
    report.insert("data".into(), Value::Object(data));

    let mut text = format!("bvqft {} {} (t-order {order}, hbar-max {hbar_max})\n", cmd.name(), inst.spec.name);
    text.push_str(&ledger.render());
    for n in &notes {
        text.push_str(&format!("NOTE  {n}\n"));
    }
    if let Some(e) = &error {
        text.push_str(&format!("ERROR  {e}\n"));
    }
    let passed = ledger.entries.iter().filter(|e| e.passed).count();
    text.push_str(&format!("{passed}/{} identities hold; status {}\n", ledger.entries.len(), status_for(code)));
    Outcome { report: Value::Object(report), text, exit_code: code }
}

#[allow(clippy::too_many_arguments)]
fn run_inner(
    cmd: Command,
    inst: &Instance,
    order: usize,
    hbar_max: usize,
    seed: Option<u64>,
    check_seed: u64,
    data: &mut Map<String, Value>,
    ledger: &mut Ledger,
    notes: &mut Vec<String>,
) -> Result<(), Error> {
    let spec = &inst.spec;
    if cmd == Command::Validate {
        ledger.extend(validate_algebra(spec));
        if let Some(c) = &spec.integral {
            let iv = validate_integral(spec, c)?;
            data.insert("integral".into(), json!({ "semi_classical": iv.semi_classical }));
            ledger.extend(iv.ledger);
        }
        return Ok(());
    }
    if cmd == Command::Wdvv && spec.integral.is_none() {
        return Err(Error::Input(format!("instance {} has no integral", spec.name)));
    }
    let p = solve_pipeline(inst, order, hbar_max, seed, data)?;
    let st = &p.st;
    ledger.extend(st.ledger.clone());
    let (pkg, weak) = verify_tensor_package(st, &st.vars_ghosts());
    ledger.extend(pkg);
    ledger.extend(verify_theta(spec, st)?);
    notes.extend(st.findings.iter().cloned());
    solve_data(&p, data);
    if cmd == Command::Solve {
        let v = &st.vars;
        data.insert("theta".into(), theta_table(&spec.basis.labels, st));
        let mut lam = Map::new();
        for t in st.lambda.tuples() {
            let s = st.lambda.get(&t);
            if !s.is_zero() {
                lam.insert(tuple_key(&st.labels, &t), series_table(s, v, Some(&spec.basis.labels)));
            }
        }
        data.insert("lambda".into(), Value::Object(lam));
        data.insert("weak_potentials".into(), series_table(&weak, v, Some(&st.labels)));
        data.insert(
            "gauge_paths".into(),
            Value::Array(st.gauge_paths.iter().map(|(n, g)| json!({ "order": n, "path": g })).collect()),
        );
        return Ok(());
    }
    let obs = compute_observables(spec, &p.td, st, check_seed)?;
    ledger.extend(obs.ledger.clone());
    if cmd == Command::Observables {
        observables_data(&spec.basis.labels, st, &obs, data);
        return Ok(());
    }
    let suite = integral_suite(spec, &p.td, st, Some(&obs), check_seed)?;
    ledger.extend(suite.ledger());
    wdvv_data(st, &suite, data, notes);
    Ok(())
}

fn observables_data(basis: &[String], st: &SolverState, obs: &Observables, data: &mut Map<String, Value>) {
    let v = &st.vars;
    let h = st.labels.len();
    let mut t = Map::new();
    for (g, s) in obs.coordinates.iter().enumerate() {
        t.insert(st.labels[g].clone(), series_table(s, v, None));
    }
    data.insert("quantum_coordinates".into(), Value::Object(t));
    let mut jac = Map::new();
    for b in 0..h {
        for g in 0..h {
            let s = &obs.jacobian[b][g];
            if !s.is_zero() {
                jac.insert(tuple_key(&st.labels, &[b, g]), series_table(s, v, None));
            }
        }
    }
    data.insert("jacobian".into(), Value::Object(jac));
    let mut p = Map::new();
    for (tup, s) in &obs.p_tensors {
        let z = s.at_zero();
        if tup.len() >= 2 && !z.is_zero() {
            p.insert(tuple_key(&st.labels, tup), series_table(&z, v, Some(&st.labels)));
        }
    }
    data.insert("p_tensors".into(), Value::Object(p));
    let mut c = Map::new();
    for (tup, s) in &obs.correlators {
        let z = s.at_zero();
        if !z.is_zero() {
            c.insert(tuple_key(&st.labels, tup), series_table(&z, v, Some(basis)));
        }
    }
    data.insert("correlators_at_zero".into(), Value::Object(c));
    if let Some(name) = &obs.cycle_name {
        data.insert("expectation_functional".into(), json!(name));
        let mut one = Map::new();
        for (g, s) in obs.one_point.iter().enumerate() {
            one.insert(st.labels[g].clone(), series_table(s, v, None));
        }
        data.insert("one_point".into(), Value::Object(one));
    }
    if let Some(z) = &obs.generating_function {
        data.insert("generating_function".into(), series_table(z, v, None));
    }
    if let Some(f) = &obs.free_energy {
        data.insert("free_energy".into(), series_table(f, v, None));
    }
}

fn wdvv_data(st: &SolverState, suite: &IntegralSuite, data: &mut Map<String, Value>, notes: &mut Vec<String>) {
    let v = &st.vars;
    let h = st.labels.len();
    let no = Vars::new(Vec::new()).expect("empty coordinates");
    let classical: Vec<Vec<String>> = suite.pairings.classical.data.iter().map(|r| r.iter().map(format_scalar).collect()).collect();
    let mut quantum = Map::new();
    let mut metric = Map::new();
    for a in 0..h {
        for b in 0..h {
            let q = &suite.pairings.quantum[a][b];
            if !q.is_zero() {
                quantum.insert(tuple_key(&st.labels, &[a, b]), series_table(q, &no, None));
            }
            let g = &suite.metric.g[a][b];
            if !g.is_zero() {
                metric.insert(tuple_key(&st.labels, &[a, b]), series_table(g, v, None));
            }
        }
    }
    let mut triple = Map::new();
    for a in 0..h {
        for b in 0..h {
            for c in 0..h {
                let s = suite.pairings.triple_at(a, b, c);
                if !s.is_zero() {
                    triple.insert(tuple_key(&st.labels, &[a, b, c]), series_table(s, &no, None));
                }
            }
        }
    }
    data.insert("integral".into(), json!({ "semi_classical": suite.validation.semi_classical }));
    data.insert("classical_pairing".into(), json!(classical));
    data.insert("quantum_pairing".into(), Value::Object(quantum));
    data.insert("trilinear_pairing".into(), Value::Object(triple));
    data.insert("metric".into(), Value::Object(metric));
    match &suite.wdvv {
        Ok(w) => {
            data.insert("potential".into(), series_table(&w.potential, v, None));
            data.insert("metric_nondegenerate".into(), json!(w.metric_inverse.is_some()));
            notes.extend(w.notes.iter().cloned());
        }
        Err(reason) => {
            data.insert("wdvv_skipped".into(), json!(reason));
            notes.push(format!("WDVV stage skipped: not semi-classical: {reason}"));
        }
    }
}

/// Loads and runs; unreadable or malformed files give exit code 3.
pub fn run_path(cmd: Command, path: &Path, opts: RunOptions) -> Outcome {
    match load_instance(path) {
        Ok(inst) => run(cmd, &inst, opts),
        Err(e) => {
            let report = json!({
                "schema": SCHEMA,
                "command": cmd.name(),
                "status": status_for(EXIT_INPUT),
                "error": e.to_string(),
            });
            Outcome { report, text: format!("ERROR  {e}\n"), exit_code: EXIT_INPUT }
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn render_report(report: &Value) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}
