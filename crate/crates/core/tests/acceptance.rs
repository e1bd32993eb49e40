//! Acceptance suite: one PASS/FAIL line per criterion, each with a pinned
//! time limit. Runs without the libtest harness so the lines always print.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use common::oracles;
use common::*;
use stormdesk_core::agent::{load_script, AgentIdentity, AgentOutput, AgentSession, EventPayload};
use stormdesk_core::analysis::{
    self, area_stat, locate_feature, radial_profile, tensor::select, track_compare, AreaStat, Extremum, RegionSel,
    Shape, Tensor, TimeSel, Trajectory,
};
use stormdesk_core::debate::{export_score_curve, run_debate, DebateConfig, RetrievalConfig};
use stormdesk_core::minisim::cases::{self, Case};
use stormdesk_core::minisim::{
    read_dataset, run_simulation, step, write_dataset, GridDataset, GridGeometry, GridState, Namelist, PerturbOp,
    Value, VarInfo,
};
use stormdesk_core::orchestrator::{
    CallKind, EngineConfig, RunReport, SessionEvent, SubtaskStatus,
};
use stormdesk_core::recovery::{FailureClass, FaultPlan};
use stormdesk_core::viz::{self, ChartSpec, MapSpec, Overlay, Series};

fn sha(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ------------------------------------------------------------------ debate

fn debate_protocol() {
    let topic = goal("debate_tc_topic.txt");
    let researchers = vec![
        AgentIdentity::researcher("Alice", "dynamics"),
        AgentIdentity::researcher("Bob", "synoptic steering"),
        AgentIdentity::researcher("Carol", "air-sea interaction"),
    ];
    let mut cfg = DebateConfig::new(topic.trim(), researchers, 6);
    cfg.retrieval = Some(RetrievalConfig { provider: format!("corpus:{}", fixtures().join("corpus").display()), k: 2 });
    let session = AgentSession::new(scenario("debate_tc"));
    let out = run_debate(&cfg, &session).expect("debate completes");
    let tr = &out.transcript;

    // (a) no rebuttals in the opening round
    assert_eq!(tr.iter().filter(|e| e.round == 1 && e.phase == "rebuttal").count(), 0);

    // (b) speaking order re-derived from the transcript of the previous round
    for round in 2..=6u32 {
        let mut received: BTreeMap<&str, usize> = cfg.base_order.iter().map(|n| (n.as_str(), 0)).collect();
        for e in tr.iter().filter(|e| e.round == round - 1 && e.phase == "rebuttal") {
            if let EventPayload::Agent(AgentOutput::Rebut { target, .. }) = &e.output {
                *received.get_mut(target.as_str()).unwrap() += 1;
            }
        }
        let mut expected: Vec<&str> = cfg.base_order.iter().map(String::as_str).collect();
        // Rebutted speakers first by descending count; stable within ties.
        expected.sort_by_key(|n| (received[n] == 0, usize::MAX - received[n]));
        for phase in ["rebuttal", "revision"] {
            let got: Vec<&str> = tr.iter().filter(|e| e.round == round && e.phase == phase).map(|e| e.agent.as_str()).collect();
            assert_eq!(got, expected, "round {round} {phase}");
        }
    }

    // (c) 18 score cards, every dimension in bounds
    let cards: Vec<[i64; 4]> = tr
        .iter()
        .filter_map(|e| match &e.output {
            EventPayload::Agent(AgentOutput::Score { scientificity, rationality, novelty, effectiveness }) => {
                Some([*scientificity, *rationality, *novelty, *effectiveness])
            }
            _ => None,
        })
        .collect();
    assert_eq!(cards.len(), 18);
    assert!(cards.iter().flatten().all(|d| (0..=10).contains(d)));

    // (d) Alice's exported totals match the fixture's host entries
    let script = load_script(fixtures().join("scenarios/debate_tc.json")).unwrap();
    let host: Vec<i64> = script
        .entries
        .iter()
        .filter(|e| e.agent == "Host")
        .map(|e| match &e.output {
            AgentOutput::Score { scientificity, rationality, novelty, effectiveness } => {
                scientificity + rationality + novelty + effectiveness
            }
            other => panic!("host entry {other:?}"),
        })
        .collect();
    let fixture_alice: Vec<i64> = host.chunks(3).map(|c| c[0]).collect();
    let alice: Vec<i64> = export_score_curve(&out).iter().filter(|r| r.agent == "Alice").map(|r| r.total as i64).collect();
    assert_eq!(alice, fixture_alice);
    assert_eq!((alice[0], alice[5]), (33, 38));

    // (e) the chief picked a top-scoring hypothesis
    assert!(out.selection_consistent);
    assert_eq!(out.final_hypothesis.author, "Alice");
}

// ------------------------------------------------------------------ simulator

fn mass_conservation() {
    let mut nl = Namelist::parse(Case::Typhoon.namelist_text()).unwrap();
    nl.set("nx", Value::Int(64));
    nl.set("ny", Value::Int(64));
    nl.set("alpha_heat", Value::Float(0.0));
    let cfg = nl.config().unwrap();
    let grid = GridGeometry { nx: 64, ny: 64, ref_lat: cfg.ref_lat, ref_lon: cfg.ref_lon, d_deg: cfg.d_deg };
    let mut r = rng(11);
    let n = grid.cells();
    let h: Vec<f64> = (0..n)
        .map(|k| {
            let (x, y) = ((k % 64) as f64 - 32.0, (k / 64) as f64 - 32.0);
            cfg.h_amb - 8.0 * (-(x * x + y * y) / 40.0).exp() + r.gen_range(-0.01..0.01)
        })
        .collect();
    let mut s = GridState {
        time: 0.0,
        grid,
        h,
        u: (0..n).map(|_| r.gen_range(-0.5..0.5)).collect(),
        v: (0..n).map(|_| r.gen_range(-0.5..0.5)).collect(),
        qv: (0..n).map(|_| r.gen_range(0.010..0.022)).collect(),
        tsk: (0..n).map(|_| r.gen_range(299.0..302.0)).collect(),
        smois: vec![0.3; n],
        rainc: vec![0.0; n],
        rainnc: vec![0.0; n],
    };
    let m0: f64 = s.h.iter().sum();
    for _ in 0..1000 {
        s = step(&s, &cfg).unwrap();
    }
    let m1: f64 = s.h.iter().sum();
    let rel = (m1 - m0).abs() / m0;
    assert!(rel <= 1e-12, "relative mass drift {rel:e}");
}

// ------------------------------------------------------------------ analysis

fn random_tensor(r: &mut ChaCha8Rng, times: usize, masked: bool) -> Tensor {
    let grid = GridGeometry { nx: 16, ny: 16, ref_lat: r.gen_range(-30.0..30.0), ref_lon: r.gen_range(90.0..150.0), d_deg: 0.25 };
    let n = grid.cells();
    // Coarse quantisation produces ties, exercising the tie-break rule.
    let mut values: Vec<f64> = (0..times * n).map(|_| (r.gen_range(-50.0f64..50.0) * 4.0).round() / 4.0).collect();
    let mask = masked.then(|| {
        let mut m: Vec<bool> = (0..n).map(|_| r.gen_bool(0.8)).collect();
        m[r.gen_range(0..n)] = true;
        m
    });
    if let Some(m) = &mask {
        for (k, v) in values.iter_mut().enumerate() {
            if !m[k % n] {
                *v = f64::NAN;
            }
        }
    }
    Tensor {
        name: "X".into(),
        units: "1".into(),
        grid,
        times: (0..times).map(|t| t as f64 * 3600.0).collect(),
        has_time_axis: true,
        values,
        mask,
    }
}

fn oracle_equivalence() {
    let mut r = rng(2024);
    for _ in 0..100 {
        // locate_feature
        let masked = r.gen_bool(0.5);
        let t = random_tensor(&mut r, 3, masked);
        for max in [false, true] {
            let mode = if max { Extremum::Max } else { Extremum::Min };
            assert_eq!(locate_feature(&t, mode).unwrap(), oracles::locate(&t, max));
        }
        // area_stat
        let (mean, lo, hi) = oracles::area(&t);
        assert_eq!(area_stat(&t, AreaStat::Mean).unwrap().to_bits(), mean.to_bits());
        assert_eq!(area_stat(&t, AreaStat::Min).unwrap(), lo);
        assert_eq!(area_stat(&t, AreaStat::Max).unwrap(), hi);
        // track_compare on two located tracks
        let b = random_tensor(&mut r, 3, false);
        let b = Tensor { grid: t.grid, ..b };
        let pa = locate_feature(&t, Extremum::Min).unwrap();
        let pb = locate_feature(&b, Extremum::Min).unwrap();
        let c = track_compare(&Trajectory { points: pa.clone() }, &Trajectory { points: pb.clone() }).unwrap();
        let (deltas, extreme) = oracles::compare(&pa, &pb);
        assert_eq!((c.deltas, c.extreme), (deltas, extreme));
        // divergence
        let u: Vec<f64> = (0..256).map(|_| r.gen_range(-20.0..20.0)).collect();
        let v: Vec<f64> = (0..256).map(|_| r.gen_range(-20.0..20.0)).collect();
        let dx = 0.25 * 111_000.0;
        let lib = analysis::ops::divergence_field(&u, &v, 16, 16, dx);
        let ora = oracles::divergence(&u, &v, 16, 16, dx);
        assert!(lib.iter().zip(&ora).all(|(a, b)| a.to_bits() == b.to_bits()));
        // radial_profile around a random cell
        let (ci, cj) = (r.gen_range(0..16), r.gen_range(0..16));
        let (lat, lon) = (t.grid.lat(cj), t.grid.lon(ci));
        let n_bins = r.gen_range(1..8);
        let r_max = r.gen_range(50.0..400.0);
        let lib: Vec<(usize, f64, usize)> =
            radial_profile(&t, lat, lon, r_max, n_bins).unwrap().iter().map(|b| (b.bin, b.mean, b.count)).collect();
        let ora = oracles::radial(&t, lat, lon, r_max, n_bins);
        assert_eq!(lib.len(), ora.len());
        assert!(lib.iter().zip(&ora).all(|(a, b)| a.0 == b.0 && a.1.to_bits() == b.1.to_bits() && a.2 == b.2));
    }
}

// ------------------------------------------------------------------ self-healing

fn squall_run(faults: &[FailureClass]) -> (Result<RunReport, String>, Vec<SessionEvent>, BTreeMap<String, String>) {
    let wd = tempfile::tempdir().unwrap();
    let e = engine("squall_complex", wd.path(), FaultPlan::new(faults), EngineConfig::default());
    let r = e.run(&goal("squall_soil_moisture.txt"), None).map_err(|e| e.to_string());
    let mut digests = BTreeMap::new();
    for rel in ["sim/out.masd", "sim/state.masd", "sim/ic.masd", "analysis/rain_track.csv", "analysis/cold_pool_deficit.csv"] {
        if let Ok(b) = std::fs::read(wd.path().join(rel)) {
            digests.insert(rel.to_string(), sha(&b));
        }
    }
    (r, e.ledger().events(), digests)
}

fn repairs(events: &[SessionEvent]) -> Vec<String> {
    events
        .iter()
        .filter_map(|e| match e {
            SessionEvent::Repair { class, .. } => Some(class.clone()),
            _ => None,
        })
        .collect()
}

fn self_healing() {
    let (clean, ev, reference) = squall_run(&[]);
    clean.expect("clean run");
    assert!(repairs(&ev).is_empty());
    assert_eq!(reference.len(), 5);
    for class in FailureClass::ALL.into_iter().filter(|c| *c != FailureClass::Unknown) {
        let (r, ev, digests) = squall_run(&[class]);
        r.unwrap_or_else(|e| panic!("{class}: {e}"));
        assert_eq!(repairs(&ev), [class.name()], "{class}");
        assert_eq!(digests, reference, "{class} changed the artifacts");
    }
    let three = [FailureClass::PrefixMismatch, FailureClass::VerticalLevelMismatch, FailureClass::TensorDimMismatch];
    let (r, ev, digests) = squall_run(&three);
    r.expect("combined run");
    assert_eq!(repairs(&ev).len(), 3);
    assert_eq!(digests, reference);
}

// ------------------------------------------------------------------ telemetry

fn telemetry_invariants() {
    let wd = tempfile::tempdir().unwrap();
    let e = engine("squall_complex", wd.path(), FaultPlan::default(), EngineConfig::default());
    let RunReport::Complex(report) = e.run(&goal("squall_soil_moisture.txt"), None).unwrap() else {
        panic!("squall goal should select the complex mode")
    };
    let recs = e.ledger().records();
    assert_eq!(recs.iter().filter(|r| r.agent == "MetaPlanner" && r.kind == CallKind::ToolExec).count(), 0);
    let s = &report.summary;
    assert_eq!(s.per_agent.values().sum::<usize>(), s.total);
    assert_eq!(s.per_kind.values().sum::<usize>(), s.total);
    assert_eq!(recs.iter().map(|r| r.seq).collect::<Vec<_>>(), (1..=recs.len() as u64).collect::<Vec<_>>());

    // Verify-follows-execute over the event log.
    let events = e.ledger().events();
    let deps: BTreeMap<u32, Vec<u32>> = report.roadmap.subtasks.iter().map(|t| (t.id, t.depends_on.clone())).collect();
    for (k, ev) in events.iter().enumerate() {
        let SessionEvent::Subtask { subtask: id, status: SubtaskStatus::Done | SubtaskStatus::Failed } = ev else { continue };
        let rest = &events[k + 1..];
        let next_start = rest
            .iter()
            .position(|e| matches!(e, SessionEvent::Subtask { subtask, status: SubtaskStatus::Running } if deps[subtask].contains(id)))
            .unwrap_or(rest.len());
        let n = rest[..next_start]
            .iter()
            .filter(|e| matches!(e, SessionEvent::StateRevision { subtask, .. } if subtask == id))
            .count();
        assert_eq!(n, 1, "subtask {id}");
    }

    let wd = tempfile::tempdir().unwrap();
    let e = engine("squall_count_variant", wd.path(), FaultPlan::default(), EngineConfig::default());
    let RunReport::Complex(report) = e.run(&goal("squall_soil_moisture.txt"), None).unwrap() else { panic!() };
    assert_eq!(report.summary.total, 164);
    let want: BTreeMap<String, usize> = [
        ("MetaPlanner", 28),
        ("wps_configurer", 15),
        ("fnl_processor", 23),
        ("wrf_real_executor", 38),
        ("wrf_main_simulator", 20),
        ("trajectory_analyzer", 40),
    ]
    .into_iter()
    .map(|(a, n)| (a.to_string(), n))
    .collect();
    assert_eq!(report.summary.per_agent, want);
}

// ------------------------------------------------------------------ physics directions

fn typhoon_sst() {
    let wd = tempfile::tempdir().unwrap();
    let e = engine("typhoon_complex", wd.path(), FaultPlan::default(), EngineConfig::default());
    e.run(&goal("typhoon_sst.txt"), None).unwrap();
    let nl = Namelist::load(wd.path().join("sim/namelist.input")).unwrap();
    assert_eq!(nl.get("sst_update").and_then(|v| v.as_int()), Some(0));
    let ctl = read_dataset(wd.path().join("sim/out_ctl.masd")).unwrap();
    let pert = read_dataset(wd.path().join("sim/out_pert.masd")).unwrap();
    let (a, b) = (ctl.field(0, "SKINTEMP").unwrap(), pert.field(0, "SKINTEMP").unwrap());
    assert!(a.iter().zip(b).all(|(x, y)| y - x == 2.0));
    let last = ctl.n_times() - 1;
    let min = |d: &GridDataset| d.field(last, "PSFC").unwrap().iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(min(&pert) < min(&ctl), "warm run should be deeper: {} vs {}", min(&pert), min(&ctl));
    let dev = std::fs::read_to_string(wd.path().join("analysis/track_deviation.csv")).unwrap();
    assert!(dev.starts_with("time_index,time_s,dlat,dlon\n"));
    assert_eq!(dev.lines().count(), 1 + ctl.n_times());
}

fn squall_outputs(dir: &Path, smois_factor: Option<f64>) -> GridDataset {
    cases::write_inputs(Case::Squall, dir, 7).unwrap();
    cases::link_vtable(dir).unwrap();
    let cfg = Namelist::parse(Case::Squall.namelist_text()).unwrap().config().unwrap();
    let ic = stormdesk_core::minisim::preprocess(&cfg, dir).unwrap();
    write_dataset(dir.join("ic.masd"), &ic).unwrap();
    let ic = match smois_factor {
        Some(f) => stormdesk_core::minisim::perturb_field(&dir.join("ic.masd"), &dir.join("ic_dry.masd"), "SMOIS", PerturbOp::Scale, f).unwrap(),
        None => ic,
    };
    let state = stormdesk_core::minisim::real_init(&cfg, &ic).unwrap();
    run_simulation(&cfg, &state, &dir.join("out.masd"), 4).unwrap()
}

/// (domain-total accumulated rain, 50 km cold-pool deficit around the rain peak)
fn rain_and_deficit(ds: &GridDataset) -> (f64, f64) {
    let rc = select(ds, "RAINC", TimeSel::Last, RegionSel::All).unwrap();
    let rn = select(ds, "RAINNC", TimeSel::Last, RegionSel::All).unwrap();
    let rain = analysis::transform_tensor(analysis::TransformOp::SumPair, &[&rc, &rn]).unwrap();
    let total: f64 = rain.values.iter().sum();
    let peak = locate_feature(&rain, Extremum::Max).unwrap()[0];
    let t2 = select(ds, "T2", TimeSel::Last, RegionSel::All).unwrap();
    let d = analysis::cold_pool_deficit(&t2, &Shape::Circle { lat: peak.lat, lon: peak.lon, radius_km: 50.0 }).unwrap();
    (total, d)
}

fn soil_moisture() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (rain_ctl, def_ctl) = rain_and_deficit(&squall_outputs(a.path(), None));
    let (rain_dry, def_dry) = rain_and_deficit(&squall_outputs(b.path(), Some(0.5)));
    assert!(rain_dry < rain_ctl, "rain {rain_dry} vs {rain_ctl}");
    assert!(def_ctl < 0.0, "control should form a cold pool, got {def_ctl}");
    assert!(def_dry.abs() < def_ctl.abs(), "deficit {def_dry} vs {def_ctl}");
}

// ------------------------------------------------------------------ simple mode

fn simple_pipelines() {
    let cases = [
        ("simple_intensity", &["inspect_dataset", "ingest_tensor", "locate_feature", "plot_cartesian_chart"][..], "typhoon_intensity_evolution"),
        ("simple_track", &["inspect_dataset", "ingest_tensor", "locate_feature", "plot_spatial_map"][..], "typhoon_track_with_slp"),
        (
            "simple_precip",
            &["list_directory", "inspect_dataset", "ingest_tensor", "transform_tensor", "locate_feature", "plot_spatial_map"][..],
            "typhoon_total_precipitation",
        ),
        (
            "simple_divergence",
            &["ingest_tensor", "transform_tensor", "locate_feature", "filter_by_geometry", "plot_spatial_map"][..],
            "typhoon_divergence_zone",
        ),
    ];
    for (name, middle, svg) in cases {
        let wd = typhoon_workdir();
        let e = engine(name, wd.path(), FaultPlan::default(), EngineConfig::default());
        let RunReport::Simple(r) = e.run(&goal(&format!("{name}.txt")), None).unwrap() else {
            panic!("{name} should run in simple mode")
        };
        let mut want = vec!["enter_easy_task_mode"];
        want.extend_from_slice(middle);
        want.push("generate_response");
        assert_eq!(r.tools, want, "{name}");
        let path = wd.path().join(format!("plots/{svg}.svg"));
        let text = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("{} missing", path.display()));
        match name {
            "simple_intensity" => assert!(text.contains(">922.769<"), "annotation missing"),
            "simple_precip" => assert!(text.contains(">453.68<")),
            "simple_divergence" => assert!(text.contains("overlay-rect")),
            _ => assert!(text.contains("overlay-trajectory")),
        }
    }
}

// ------------------------------------------------------------------ formats

fn random_dataset(r: &mut ChaCha8Rng) -> GridDataset {
    let grid = GridGeometry {
        nx: r.gen_range(1..20),
        ny: r.gen_range(1..20),
        ref_lat: r.gen_range(-80.0..80.0),
        ref_lon: r.gen_range(-180.0..180.0),
        d_deg: r.gen_range(0.01..2.0),
    };
    let nv = r.gen_range(1..5);
    let vars: Vec<VarInfo> = (0..nv).map(|k| VarInfo::new(&format!("V{k}"), "unit")).collect();
    let mut ds = GridDataset::new(grid, vars);
    ds.comment = if r.gen_bool(0.5) { format!("kind=test\nseed={}", r.gen::<u32>()) } else { String::new() };
    if r.gen_bool(0.3) {
        ds.mask = Some((0..grid.cells()).map(|_| r.gen_bool(0.7)).collect());
    }
    for t in 0..r.gen_range(0..6) {
        let fields = (0..nv).map(|_| (0..grid.cells()).map(|_| r.gen_range(-1e6..1e6)).collect()).collect();
        ds.push_time(t as f64 * 600.0, fields).unwrap();
    }
    ds
}

fn format_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = rng(99);
    for k in 0..50 {
        let ds = random_dataset(&mut r);
        let p = dir.path().join(format!("d{k}.masd"));
        write_dataset(&p, &ds).unwrap();
        assert_eq!(read_dataset(&p).unwrap(), ds);
    }
    // Repeated simulator runs.
    let cfg = Namelist::parse(Case::Squall.namelist_text()).unwrap().config().unwrap();
    let sdir = dir.path().join("squall");
    std::fs::create_dir_all(&sdir).unwrap();
    let _ = squall_outputs(&sdir, None);
    let state = GridState::from_dataset(&stormdesk_core::minisim::real_init(&cfg, &read_dataset(sdir.join("ic.masd")).unwrap()).unwrap().to_dataset()).unwrap();
    run_simulation(&cfg, &state, &sdir.join("again.masd"), 4).unwrap();
    // Thread count must not change the bytes.
    let two = stormdesk_core::minisim::SimConfig { nproc: 2, ..cfg.clone() };
    run_simulation(&two, &state, &sdir.join("again2.masd"), 2).unwrap();
    let a = std::fs::read(sdir.join("out.masd")).unwrap();
    assert_eq!(a, std::fs::read(sdir.join("again.masd")).unwrap());
    assert_eq!(a, std::fs::read(sdir.join("again2.masd")).unwrap());
    // Repeated renders.
    let ds = cases::synthetic_typhoon_dataset();
    let psfc = select(&ds, "PSFC", TimeSel::Index { index: 7 }, RegionSel::All).unwrap();
    let map = MapSpec {
        title: "PSFC".into(),
        field: psfc,
        colormap: "sequential-gray".into(),
        overlays: vec![Overlay::Star { lat: 20.0, lon: 120.0, label: "x".into() }],
    };
    assert_eq!(viz::render_map(&map).unwrap(), viz::render_map(&map).unwrap());
    let chart = ChartSpec {
        title: "c".into(),
        series: vec![Series { label: "s".into(), x: vec![0.0, 1.0, 2.0], y: vec![3.0, 1.0, 2.0] }],
        ..ChartSpec::default()
    };
    assert_eq!(viz::render_chart(&chart).unwrap(), viz::render_chart(&chart).unwrap());
}

// ------------------------------------------------------------------ driver

fn main() {
    let criteria: [(&str, u64, fn()); 9] = [
        ("debate protocol", 1, debate_protocol),
        ("mass conservation", 5, mass_conservation),
        ("analysis oracle equivalence", 1, oracle_equivalence),
        ("fault self-healing", 60, self_healing),
        ("telemetry invariants", 60, telemetry_invariants),
        ("SST perturbation direction", 30, typhoon_sst),
        ("soil moisture direction", 30, soil_moisture),
        ("simple-mode pipelines", 10, simple_pipelines),
        ("format round-trip and determinism", 10, format_determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (k, (name, limit, f)) in criteria.into_iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let t0 = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f));
        let dt = t0.elapsed();
        let (ok, why) = match outcome {
            Ok(()) if dt < Duration::from_secs(limit) => (true, String::new()),
            Ok(()) => (false, format!(" (over the {limit} s limit)")),
            Err(e) => {
                let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
                (false, format!(": {}", msg.unwrap_or_default()))
            }
        };
        if !ok {
            failed += 1;
        }
        println!("{} criterion {} {name} [{:.3} s, limit {limit} s]{why}", if ok { "PASS" } else { "FAIL" }, k + 1, dt.as_secs_f64());
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
