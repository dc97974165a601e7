//! The acceptance suite: one test per criterion, each printing a single
//! `criterion N: PASS|FAIL` line.

#[path = "../../core/tests/common/mod.rs"]
mod common;
#[path = "../../core/tests/oracles/mod.rs"]
mod oracles;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use cbpmn::bundle::{self, Bundle, BundlePaths};
use cbpmn::commands;
use cbpmn_core::metrics::{
    execution_time, halstead, halstead_counts, structural_metrics, Baseline, CostParams,
};
use cbpmn_core::verify::{explore, is_goal, translate};
use cbpmn_core::{
    catch_context, diff, run_instance, Action, AtomicContext, ContextState, ContextVector,
    ContextualSituation, LogicalTime, Scalar,
};

type Outcome = Result<String, String>;

fn report(n: u32, what: &str, outcome: Outcome) {
    match outcome {
        Ok(detail) => println!("criterion {n}: PASS {what} ({detail})"),
        Err(why) => {
            println!("criterion {n}: FAIL {what}: {why}");
            panic!("criterion {n} failed: {why}");
        }
    }
}

fn ensure(ok: bool, why: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(why())
    }
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn kiosk_paths() -> BundlePaths {
    BundlePaths::in_dir(fixtures().join("kiosk"))
}

fn kiosk() -> Bundle {
    bundle::load(&kiosk_paths()).expect("kiosk bundle loads")
}

fn folded(b: &Bundle) -> ContextualSituation {
    b.scenario
        .vectors()
        .iter()
        .fold(ContextualSituation::empty(), |cs, v| cs.advance(v).unwrap())
}

#[test]
fn criterion_1_kiosk_golden_run() {
    report(1, "kiosk golden run", golden_run());
}

fn golden_run() -> Outcome {
    let started = Instant::now();
    let b = kiosk();
    let report = b.model.validate();
    ensure(report.is_empty(), || format!("invalid fixture: {report:?}"))?;
    let trace = run_instance(&b.model, &b.scenario).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();

    let adaptations: Vec<(String, Option<Action>, Vec<String>)> = trace
        .adaptations()
        .map(|e| {
            let inserted = e.inserted.iter().map(|a| a.to_string()).collect();
            (e.activity.to_string(), e.action.clone(), inserted)
        })
        .collect();
    let expected_kinds = [
        ("Patient Registration", "replace-role"),
        ("Patient Medical Info Collection", "data-level-change"),
        ("Treatment", "add-after"),
        ("Storage in Cloud", "reorder"),
        ("Bill Payment", "replace-medium"),
    ];
    ensure(adaptations.len() == 5, || {
        format!("{} adaptations", adaptations.len())
    })?;
    for ((activity, action, _), (want_activity, want_kind)) in
        adaptations.iter().zip(expected_kinds)
    {
        let kind = action.as_ref().map(|a| a.name()).unwrap_or("-");
        ensure(activity == want_activity && kind == want_kind, || {
            format!("{activity}: {kind}, expected {want_activity}: {want_kind}")
        })?;
    }
    ensure(
        matches!(&adaptations[4].1, Some(Action::ReplaceMedium(m)) if m == "cash"),
        || format!("bill payment action {:?}", adaptations[4].1),
    )?;
    ensure(adaptations[2].2.len() == 3, || {
        format!("transfer fragment inserted {:?}", adaptations[2].2)
    })?;

    let order: Vec<String> = trace
        .execution_order
        .iter()
        .map(|a| a.to_string())
        .collect();
    let expected = [
        "Patient Registration",
        "Patient Medical Info Collection",
        "Treatment",
        "Appointment Fixing with Specialist Physician at nearby Hospital",
        "Arrangement of Ambulance",
        "Transfer Patient at Hospital",
        "Bill Payment",
        "Storage in Cloud",
    ];
    ensure(order == expected, || format!("order {order:?}"))?;
    ensure(trace.final_chain.order() == trace.execution_order, || {
        "final chain differs from the execution order".into()
    })?;
    ensure(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!("5 adaptations, 8 activities, {elapsed:?}"))
}

#[test]
fn criterion_2_weather_diff() {
    report(2, "catchContext weather diff", weather_diff());
}

/// Times as `h.mm am|pm`, everything else as displayed.
fn spoken(v: &Scalar) -> String {
    match v {
        Scalar::Time(LogicalTime(t)) => {
            let (h, m) = (t.div_euclid(60), t.rem_euclid(60));
            let half = if h < 12 { "am" } else { "pm" };
            let h12 = if h % 12 == 0 { 12 } else { h % 12 };
            format!("{h12}.{m:02} {half}")
        }
        other => other.to_string(),
    }
}

fn tuple_form(s: &ContextState) -> String {
    let cs = &s.situation;
    let params = cs.involved_parameters().join(", ");
    let attrs: Vec<String> = cs
        .involved_attributes()
        .iter()
        .map(|a| a.to_string())
        .collect();
    let values: Vec<String> = cs.involved_values().iter().map(spoken).collect();
    format!("[⟨{params}⟩⟨{}⟩⟨{}⟩]", attrs.join(", "), values.join(", "))
}

fn weather_diff() -> Outcome {
    let ctx = |p: &str, a: &str, v: Scalar| AtomicContext::new(p, a, v);
    let earlier = ContextVector::new(
        LogicalTime::hm(10, 30),
        vec![
            ctx("Weather", "Status", Scalar::text("Sunny")),
            ctx("Watch", "Time", Scalar::Time(LogicalTime::hm(10, 30))),
        ],
    )
    .map_err(|e| e.to_string())?;
    let later = ContextVector::new(
        LogicalTime::hm(11, 0),
        vec![
            ctx("Weather", "Status", Scalar::text("Rainy")),
            ctx("Watch", "Time", Scalar::Time(LogicalTime::hm(11, 0))),
        ],
    )
    .map_err(|e| e.to_string())?;
    let before = ContextualSituation::empty()
        .advance(&earlier)
        .map_err(|e| e.to_string())?;
    let now = before.advance(&later).map_err(|e| e.to_string())?;

    let storage = ContextState {
        activity: "Storage in Cloud".into(),
        situation: before,
    };
    let changed = diff(&now, &storage);
    let text = tuple_form(&changed);
    let want = "[⟨Weather, Watch⟩⟨Weather.Status, Watch.Time⟩⟨Rainy, 11.00 am⟩]";
    ensure(text == want, || format!("got {text}"))?;
    ensure(changed.timestamp() == LogicalTime::hm(11, 0), || {
        format!("timestamp {}", changed.timestamp())
    })?;

    let b = kiosk();
    let registration = b
        .model
        .chain
        .get("Patient Registration")
        .ok_or("no Patient Registration in the kiosk chain")?;
    let scope = registration
        .event
        .as_ref()
        .ok_or("Patient Registration has no contextual event")?
        .scope(&registration.id);
    let state = ContextState::empty(registration.id.clone());
    let caught = catch_context(&now, &state, &scope).map_err(|e| e.to_string())?;
    ensure(caught == state, || {
        format!("registration state became {caught}")
    })?;
    Ok(text)
}

#[test]
fn criterion_3_reasoning_examples() {
    report(3, "reasoning examples", reasoning_examples());
}

fn reasoning_examples() -> Outcome {
    let cs = fixtures().join("hospital_cs.toml");
    let ask = |q: &str| {
        commands::query(&cs, q)
            .map(|s| s.trim_end().to_string())
            .map_err(|e| format!("{q}: {e}"))
    };
    let cases = [
        (
            "AND Resource WHERE parameter INSTANCE_OF Network",
            "Resource(BSNL_Network, Connectivity, =, Very Poor) AND Resource(Reliance_Network, Connectivity, =, Average)",
        ),
        (
            "AND Caregiver WHERE (attr Status = Present) AND (attr Expertise = Arthritis)",
            "NULL",
        ),
        (
            "ARITH Manpower(Healthcare_Assistant, Count) + Manpower(Healthcare_Assistant, Recruitment)",
            "Manpower(Healthcare_Assistant, Count, =, 16)",
        ),
        (
            "NOT Patient(X, Suffering, from, Malaria)",
            "¬Patient(X, Suffering, from, Malaria)",
        ),
        (
            "NOT NOT Patient(X, Suffering, from, Malaria)",
            "Patient(X, Suffering, from, Malaria)",
        ),
    ];
    for (q, want) in cases {
        let got = ask(q)?;
        ensure(got == want, || format!("{q}: got {got}"))?;
    }
    Ok(format!("{} queries", cases.len()))
}

#[test]
fn criterion_4_kiosk_net_properties() {
    report(4, "kiosk net verification", kiosk_net());
}

fn kiosk_net() -> Outcome {
    let started = Instant::now();
    let b = kiosk();
    let net = translate(&b.model).map_err(|e| e.to_string())?;
    let space = explore(&net, &net.initial, 100_000).map_err(|e| e.to_string())?;
    ensure(!space.partial, || {
        "exploration hit the marking limit".into()
    })?;
    let bounds = space.check_bounded(&net);
    ensure(bounds.is_k_bounded(1), || {
        format!("bounds {:?}", bounds.upper)
    })?;
    let live = space.check_liveness(&net).map_err(|e| e.to_string())?;
    ensure(live.dead_transitions.is_empty(), || {
        format!("dead transitions {:?}", live.dead_transitions)
    })?;
    let (goal, witness) = space
        .check_reachable(|m| is_goal(&net, m))
        .ok_or("goal unreachable")?;
    ensure(live.dead_markings == [goal], || {
        format!("dead markings {:?}, goal {goal}", live.dead_markings)
    })?;
    let mut m = net.initial.clone();
    for a in &witness {
        m = net
            .fire(&m, &space.arcs[*a].binding)
            .map_err(|e| e.to_string())?;
    }
    ensure(is_goal(&net, &m), || {
        "witness does not end in the goal".into()
    })?;
    let elapsed = started.elapsed();
    let markings = space.node_count();
    ensure(markings < 100_000, || format!("{markings} markings"))?;
    ensure(elapsed < Duration::from_secs(10), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "{markings} markings, {} arcs, witness of {} steps, {elapsed:?}",
        space.arc_count(),
        witness.len()
    ))
}

#[test]
fn criterion_5_metrics() {
    report(5, "metrics", metrics());
}

fn relative(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        ((a - b) / b).abs()
    }
}

fn metrics() -> Outcome {
    for n in [1, 5, 50] {
        let m = common::model(n, &[], &[], &[]);
        let s = structural_metrics(&m, Baseline::of(&m));
        ensure(s.mcc_extra == 2, || {
            format!("n = {n}: mcc_extra {}", s.mcc_extra)
        })?;
    }

    let b = kiosk();
    let s = structural_metrics(&b.model, Baseline::of(&b.model));
    ensure(s.mcc_extra == 2, || {
        format!("kiosk mcc_extra {}", s.mcc_extra)
    })?;
    let ideal = bundle::load(&BundlePaths {
        scenario: fixtures().join("kiosk/ideal_scenario.toml"),
        ..kiosk_paths()
    })
    .map_err(|e| e.to_string())?;
    let trace = run_instance(&ideal.model, &ideal.scenario).map_err(|e| e.to_string())?;
    ensure(trace.adaptations().count() == 0, || {
        "ideal run adapted".into()
    })?;
    let adapted = ideal.model.adapted(&trace);
    let s = structural_metrics(&adapted, Baseline::of(&ideal.model));
    ensure(s.noa_extra == 0, || {
        format!("ideal noa_extra {}", s.noa_extra)
    })?;

    let t = execution_time(&CostParams::unit(5)).map_err(|e| e.to_string())?;
    ensure(t == 25.0, || format!("execution_time(5) = {t}"))?;

    // Counts from the diagram's element kinds, then the formulas in plain f64.
    let chain = &b.model.chain;
    let tasks = chain.len() as f64;
    let events = chain.nodes().filter(|n| n.event.is_some()).count() as f64;
    let outputs: BTreeSet<&String> = chain.nodes().flat_map(|n| &n.output_data).collect();
    let output_uses: usize = chain.nodes().map(|n| n.output_data.len()).sum();
    let n1: f64 = 5.0; // start, end, task, sequence flow, contextual event
    let n2 = outputs.len() as f64 + 1.0;
    let t1 = 2.0 + tasks + (tasks + 1.0) + events;
    let t2 = output_uses as f64 + events;
    let c = halstead_counts(&b.model);
    ensure(
        (c.unique_flow, c.unique_data, c.total_flow, c.total_data)
            == (n1 as u64, n2 as u64, t1 as u64, t2 as u64),
        || format!("counts {c:?}"),
    )?;
    let h = halstead(&c).map_err(|e| e.to_string())?;
    let want = (
        n1 * n1.log2() + n2 * n2.log2(),
        (t1 + t2) * (n1 + n2).log2(),
        (n1 / 2.0) * (t2 / n2),
    );
    for (name, got, want) in [
        ("length", h.length, want.0),
        ("volume", h.volume, want.1),
        ("difficulty", h.difficulty, want.2),
    ] {
        ensure(relative(got, want) <= 1e-9, || {
            format!("{name} {got} vs {want}")
        })?;
    }
    Ok(format!(
        "length {:.6}, volume {:.6}, difficulty {:.6}",
        h.length, h.volume, h.difficulty
    ))
}

#[test]
fn criterion_6_property_suites() {
    report(6, "property suites", property_suites());
}

fn kiosk_fixpoints() -> Result<usize, String> {
    let b = kiosk();
    let cs = folded(&b);
    let mut checked = 0;
    for node in b.model.chain.nodes() {
        let Some(event) = &node.event else { continue };
        let state = ContextState::empty(node.id.clone());
        let caught =
            catch_context(&cs, &state, &event.scope(&node.id)).map_err(|e| e.to_string())?;
        let inst = b
            .model
            .graph
            .instantiate_at(&event.state_node, &caught)
            .map_err(|e| e.to_string())?;
        ensure(b.model.graph.rules.len() <= 5, || {
            "kiosk has more than 5 rules".into()
        })?;
        oracles::fixpoint_is_order_independent(&b.model.graph, &inst, &b.model.graph.rules)?;
        checked += 1;
    }
    Ok(checked)
}

fn cli_summaries(runs: usize) -> Result<usize, String> {
    let mut first: Option<(Vec<u8>, Vec<u8>)> = None;
    for i in 0..runs {
        let out = tempfile::tempdir().map_err(|e| e.to_string())?;
        let status = Command::new(env!("CARGO_BIN_EXE_cbpmn"))
            .arg("run")
            .arg("--bundle")
            .arg(fixtures().join("kiosk"))
            .arg("--out")
            .arg(out.path())
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.success(), || {
            format!("run {i}: {}", String::from_utf8_lossy(&status.stderr))
        })?;
        let read = |f: &str| std::fs::read(out.path().join(f)).map_err(|e| format!("{f}: {e}"));
        let got = (read(commands::SUMMARY_JSON)?, read(commands::TRACE_LOG)?);
        match &first {
            None => first = Some(got),
            Some(f) => ensure(*f == got, || format!("run {i} differs from run 0"))?,
        }
    }
    Ok(runs)
}

fn property_suites() -> Outcome {
    let mut failures = Vec::new();
    let mut passed = Vec::new();
    let mut check = |name: &str, r: Result<String, String>| match r {
        Ok(d) => passed.push(format!("{name}: {d}")),
        Err(e) => failures.push(format!("{name}: {e}")),
    };
    check(
        "(a) chain rewrites",
        oracles::chain_suite(0xAC01, 10_000).map(|_| "10000 sequences".into()),
    );
    check(
        "(b) diff",
        oracles::diff_suite(0xAC02, 1_000).map(|_| "1000 vectors".into()),
    );
    check(
        "(c) fixpoint",
        oracles::fixpoint_suite(0xAC03, 1_000)
            .and_then(|_| kiosk_fixpoints())
            .map(|k| format!("1000 random fixtures, {k} kiosk states")),
    );
    check(
        "(d) queries",
        oracles::query_suite(0xAC04, 2_000).map(|_| "2000 situations".into()),
    );
    check(
        "(e) cli summaries",
        cli_summaries(3).map(|n| format!("{n} identical runs")),
    );
    if failures.is_empty() {
        Ok(passed.join("; "))
    } else {
        Err(failures.join("; "))
    }
}
