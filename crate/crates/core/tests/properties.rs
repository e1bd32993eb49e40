//! Property tests for the invariants the modules promise.

mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;

use common::oracles;
use stormdesk_core::agent::{AgentOutput, PlannedSubtask, ScenarioScript};
use stormdesk_core::analysis::{area_stat, locate_feature, AreaStat, Extremum, Tensor};
use stormdesk_core::debate::{speaking_order, Rebuttal, ScoreCard};
use stormdesk_core::minisim::{GridDataset, GridGeometry, Namelist, Value, VarInfo};
use stormdesk_core::orchestrator::{
    telemetry_summary, CallKind, CallRecord, Outcome, Roadmap, ToolCategory, KNOWN_WORKER_SPECS,
};
use stormdesk_core::recovery::{classify_failure, propose_repair, FailureClass, RepairAction, RepairContext};
use stormdesk_core::viz::Colormap;

fn grid(nx: usize, ny: usize) -> GridGeometry {
    GridGeometry { nx, ny, ref_lat: 10.0, ref_lon: 100.0, d_deg: 0.5 }
}

prop_compose! {
    fn dataset()(nx in 1usize..8, ny in 1usize..8, nv in 1usize..4, nt in 0usize..4, masked in any::<bool>(), seed in any::<u64>(), comment in "[a-z=\\n]{0,24}")
        -> GridDataset {
        use rand::{Rng, SeedableRng};
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g = grid(nx, ny);
        let mut ds = GridDataset::new(g, (0..nv).map(|k| VarInfo::new(&format!("V{k}"), "u")).collect());
        ds.comment = comment;
        if masked {
            ds.mask = Some((0..g.cells()).map(|_| r.gen_bool(0.5)).collect());
        }
        for t in 0..nt {
            let f = (0..nv).map(|_| (0..g.cells()).map(|_| r.gen_range(-1e3..1e3)).collect()).collect();
            ds.push_time(t as f64, f).unwrap();
        }
        ds
    }
}

prop_compose! {
    fn tensor()(nx in 1usize..10, ny in 1usize..10, nt in 1usize..4, seed in any::<u64>(), masked in any::<bool>()) -> Tensor {
        use rand::{Rng, SeedableRng};
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g = grid(nx, ny);
        let n = g.cells();
        let mask = masked.then(|| {
            let mut m: Vec<bool> = (0..n).map(|_| r.gen_bool(0.6)).collect();
            m[0] = true;
            m
        });
        let values = (0..nt * n)
            .map(|k| match &mask {
                Some(m) if !m[k % n] => f64::NAN,
                _ => r.gen_range(-5i32..5) as f64,
            })
            .collect();
        Tensor { name: "T".into(), units: "1".into(), grid: g, times: (0..nt).map(|t| t as f64).collect(), has_time_axis: true, values, mask }
    }
}

proptest! {
    #[test]
    fn dataset_bytes_round_trip(ds in dataset()) {
        let bytes = ds.to_bytes().unwrap();
        let back = GridDataset::from_bytes(&bytes).unwrap();
        prop_assert_eq!(&back, &ds);
        prop_assert_eq!(back.to_bytes().unwrap(), bytes);
    }

    #[test]
    fn locate_and_area_match_oracles(t in tensor()) {
        prop_assert_eq!(locate_feature(&t, Extremum::Min).unwrap(), oracles::locate(&t, false));
        prop_assert_eq!(locate_feature(&t, Extremum::Max).unwrap(), oracles::locate(&t, true));
        let (mean, lo, hi) = oracles::area(&t);
        prop_assert_eq!(area_stat(&t, AreaStat::Mean).unwrap().to_bits(), mean.to_bits());
        prop_assert_eq!(area_stat(&t, AreaStat::Min).unwrap(), lo);
        prop_assert_eq!(area_stat(&t, AreaStat::Max).unwrap(), hi);
    }

    #[test]
    fn speaking_order_is_a_keyed_permutation(targets in prop::collection::vec(0usize..5, 0..10)) {
        let base: Vec<String> = ["A", "B", "C", "D", "E"].iter().map(|s| s.to_string()).collect();
        let rebuttals: Vec<Rebuttal> = targets
            .iter()
            .map(|&t| Rebuttal { from: "x".into(), target: base[t].clone(), round: 1, critique: String::new() })
            .collect();
        let order = speaking_order(&base, &rebuttals).unwrap();
        let mut sorted = order.clone();
        sorted.sort();
        prop_assert_eq!(&sorted, &base);
        let count = |n: &str| targets.iter().filter(|&&t| base[t] == n).count();
        for w in order.windows(2) {
            let (a, b) = (count(&w[0]), count(&w[1]));
            // rebutted before unrebutted, more rebuttals first, base order within ties
            let pos = |n: &str| base.iter().position(|x| x == n).unwrap();
            let ok = (a > 0 && b == 0) || (a > 0 && b > 0 && (a > b || (a == b && pos(&w[0]) < pos(&w[1]))))
                || (a == 0 && b == 0 && pos(&w[0]) < pos(&w[1]));
            prop_assert!(ok, "{:?} with {:?}", order, targets);
        }
    }

    #[test]
    fn score_cards_respect_bounds(d in prop::array::uniform4(-3i64..14)) {
        match ScoreCard::new(d) {
            Some(c) => {
                prop_assert!(d.iter().all(|x| (0..=10).contains(x)));
                prop_assert_eq!(c.total as i64, d.iter().sum::<i64>());
            }
            None => prop_assert!(d.iter().any(|x| !(0..=10).contains(x))),
        }
    }

    #[test]
    fn telemetry_partitions(agents in prop::collection::vec((0usize..4, any::<bool>(), any::<bool>()), 0..60)) {
        let names = ["MetaPlanner", "a", "b", "c"];
        let recs: Vec<CallRecord> = agents
            .iter()
            .enumerate()
            .map(|(k, &(a, tool, err))| CallRecord {
                seq: k as u64 + 1,
                wallclock: k as f64,
                agent: names[a].into(),
                kind: if tool && a != 0 { CallKind::ToolExec } else { CallKind::ReasoningPlanning },
                tool: (tool && a != 0).then(|| "read_file".to_string()),
                category: (tool && a != 0).then_some(ToolCategory::Basic),
                outcome: if err { Outcome::Error("Unknown".into()) } else { Outcome::Ok },
            })
            .collect();
        let s = telemetry_summary(&recs);
        prop_assert_eq!(s.total, recs.len());
        prop_assert_eq!(s.per_agent.values().sum::<usize>(), s.total);
        prop_assert_eq!(s.per_kind.values().sum::<usize>(), s.total);
        prop_assert!(s.cumulative.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 < w[1].1));
    }

    #[test]
    fn colormap_stays_on_its_stops(frac in -1.0f64..2.0, which in 0usize..3) {
        let cm = [Colormap::DivergingBlueRed, Colormap::SequentialPrecip, Colormap::SequentialGray][which];
        let c = cm.color(frac);
        let stops = cm.stops();
        for ch in 0..3 {
            let lo = stops.iter().map(|s| s[ch]).min().unwrap();
            let hi = stops.iter().map(|s| s[ch]).max().unwrap();
            prop_assert!(lo <= c[ch] && c[ch] <= hi);
        }
    }

    #[test]
    fn realign_targets_the_shorter_length(a in 1usize..500, b in 1usize..500) {
        let msg = format!("shape mismatch: length {a} vs {b} on axis time");
        prop_assert_eq!(classify_failure("transform_tensor", &msg), FailureClass::TensorDimMismatch);
        let dir = std::env::temp_dir();
        let action = propose_repair(FailureClass::TensorDimMismatch, &RepairContext { message: &msg, workdir: &dir }).unwrap();
        prop_assert_eq!(action, RepairAction::RealignTensor { axis: "time".into(), target_len: a.min(b) });
    }

    #[test]
    fn namelist_edit_is_idempotent(v in 1i64..100) {
        let base = Namelist::parse(stormdesk_core::minisim::cases::Case::Squall.namelist_text()).unwrap();
        let mut once = base.clone();
        once.set("e_vert", Value::Int(v));
        let mut twice = once.clone();
        twice.set("e_vert", Value::Int(v));
        prop_assert_eq!(once.to_string(), twice.to_string());
        prop_assert_eq!(Namelist::parse(&once.to_string()).unwrap(), once);
    }

    #[test]
    fn random_dags_order_topologically(edges in prop::collection::vec((0u32..8, 0u32..8), 0..20)) {
        let plan: Vec<PlannedSubtask> = (1..=8u32)
            .map(|id| PlannedSubtask {
                id,
                description: format!("s{id}"),
                worker_spec: KNOWN_WORKER_SPECS[id as usize % KNOWN_WORKER_SPECS.len()].into(),
                // Edges only point to smaller ids, so the graph is acyclic.
                depends_on: edges.iter().filter(|(a, b)| a + 1 == id && b < a).map(|(_, b)| b + 1).collect(),
                artifacts: vec![],
            })
            .collect();
        let rm = Roadmap::from_plan("g", &plan, &KNOWN_WORKER_SPECS).unwrap();
        let order = rm.topological_order().unwrap();
        let pos: BTreeMap<u32, usize> = order.iter().enumerate().map(|(k, id)| (*id, k)).collect();
        for s in &rm.subtasks {
            for d in &s.depends_on {
                prop_assert!(pos[d] < pos[&s.id]);
            }
        }
    }

    #[test]
    fn scenario_json_round_trip(n in 0usize..6, pass in any::<bool>()) {
        let mut s = ScenarioScript::new("rt", 3);
        for k in 0..n {
            s.push("w", AgentOutput::Verdict { pass, note: format!("n{k}") });
            s.push("x", AgentOutput::Score { scientificity: 1, rationality: 2, novelty: 3, effectiveness: k as i64 });
        }
        let back = ScenarioScript::parse(&s.to_json()).unwrap();
        prop_assert_eq!(back.to_json(), s.to_json());
        prop_assert_eq!(back.counts().values().sum::<usize>(), 2 * n);
    }
}
