//! The Python module driven from an embedded interpreter.

use std::ffi::CString;
use std::path::Path;

use pyo3::prelude::*;
use pyo3::types::PyDict;

fn with_module(script: &str, workdir: &Path) {
    Python::attach(|py| {
        let m = pyo3::wrap_pymodule!(stormdesk::stormdesk)(py);
        let g = PyDict::new(py);
        g.set_item("sd", m).unwrap();
        g.set_item("wd", workdir.to_str().unwrap()).unwrap();
        let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures");
        g.set_item("fx", fixtures.to_str().unwrap()).unwrap();
        let code = CString::new(script).unwrap();
        if let Err(e) = py.run(&code, Some(&g), None) {
            e.print(py);
            panic!("python script failed");
        }
    });
}

#[test]
fn simulator_tools_and_analysis_round_trip() {
    let wd = tempfile::tempdir().unwrap();
    with_module(
        r#"
for name, args in [
    ("write_namelist", {"case": "typhoon"}),
    ("fetch_inputs", {"case": "typhoon"}),
    ("link_vtable", {}),
    ("preprocess", {}),
    ("real_init", {}),
    ("run_simulation", {}),
]:
    sd.run_tool(wd, name, args)
info = sd.inspect_dataset(wd + "/sim/out.masd")
assert info["n_times"] == 13, info
pts = sd.locate_feature(wd + "/sim/out.masd", "PSFC", "min")
assert len(pts) == 13 and all(p["value"] > 90000 for p in pts)
field = sd.read_field(wd + "/sim/out.masd", "PSFC", 0)
assert len(field) == info["nx"] * info["ny"]
assert min(field) == pts[0]["value"]
try:
    sd.run_tool(wd, "no_such_tool", {})
    raise AssertionError("expected ToolFailure")
except sd.ToolFailure:
    pass
assert issubclass(sd.VerificationFailure, sd.StormdeskError)
assert sd.select_mode("Plot the typhoon track") == "simple"
assert sd.select_mode("Run a control and perturbation experiment") == "complex"
"#,
        wd.path(),
    );
}

#[test]
fn debate_and_verify_write_artifacts() {
    let wd = tempfile::tempdir().unwrap();
    with_module(
        r#"
import os
topic = open(fx + "/goals/debate_tc_topic.txt").read().strip()
out = sd.debate(topic, "scripted:" + fx + "/scenarios/debate_tc.json", wd, corpus=fx + "/corpus")
assert out["author"] == "Alice" and out["selection_consistent"]
for a in out["artifacts"]:
    assert os.path.isfile(os.path.join(wd, a)), a

sd.write_typhoon_fixture(wd + "/sim/typhoon_output.masd")
r = sd.verify(fx + "/goals/simple_intensity.txt", "scripted:" + fx + "/scenarios/simple_intensity.json", wd)
assert r["run"]["mode"] == "simple"
assert os.path.isfile(os.path.join(wd, "plots/typhoon_intensity_evolution.svg"))
try:
    sd.verify(fx + "/goals/simple_intensity.txt", "bogus", wd)
    raise AssertionError("expected ConfigError")
except sd.ConfigError:
    pass
"#,
        wd.path(),
    );
}
