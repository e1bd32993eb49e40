#!/usr/bin/env python3
"""Regenerates the scripted scenarios, goals and retrieval corpus.

Run from anywhere: python3 crates/core/fixtures/generate.py
"""

import json
from pathlib import Path

HERE = Path(__file__).resolve().parent
SEED = 7

NAMELIST = "sim/namelist.input"
TYPHOON_OUT = "sim/typhoon_output.masd"


class Script:
    def __init__(self, name):
        self.name = name
        self.entries = []
        self.steps = {}

    def push(self, agent, output):
        step = self.steps.get(agent, 0)
        self.steps[agent] = step + 1
        self.entries.append({"agent": agent, "step": step, "output": output})

    def tool(self, agent, tool, **args):
        self.push(agent, {"type": "RequestTool", "tool": tool, "args": args})

    def final(self, agent, text):
        self.push(agent, {"type": "FinalResponse", "text": text})

    def write(self):
        doc = {"name": self.name, "seed": SEED, "entries": self.entries}
        (HERE / "scenarios" / f"{self.name}.json").write_text(json.dumps(doc, indent=1) + "\n")


def subtask(i, desc, spec, deps, artifacts):
    return {"id": i, "description": desc, "worker_spec": spec, "depends_on": deps, "artifacts": artifacts}


# ---------------------------------------------------------------- debate

RESEARCHERS = ["Alice", "Bob", "Carol"]
ROUNDS = 6
TOTALS = {
    "Alice": [33, 34, 36, 38, 38, 38],
    "Bob": [30, 32, 35, 36, 37, 37],
    "Carol": [31, 33, 35, 37, 37, 37],
}
# Who rebuts whom in each round from 2 on.
REBUTS = {
    2: {"Alice": "Bob", "Bob": "Alice", "Carol": "Alice"},
    3: {"Alice": "Carol", "Bob": "Carol", "Carol": "Bob"},
    4: {"Alice": "Bob", "Bob": "Carol", "Carol": "Bob"},
    5: {"Alice": "Carol", "Bob": "Alice", "Carol": "Alice"},
    6: {"Alice": "Bob", "Bob": "Alice", "Carol": "Bob"},
}
STATEMENTS = {
    "Alice": [
        "A warm sea-surface anomaly deepens the storm and the deeper vortex drifts poleward through beta drift.",
        "Warm anomalies deepen the vortex; the stronger outer circulation enhances beta drift and bends the track poleward.",
        "Deepening over warm water widens the outer wind field, so beta drift and the steering response both grow.",
        "Track deflection follows intensity: warm-anomaly deepening changes the vortex size and hence its beta drift.",
        "The deflection is an intensity-track coupling: deepening alters outer winds, which alters beta drift.",
        "Warm-SST deepening reshapes the outer circulation; the track bends through the resulting change in beta drift.",
    ],
    "Bob": [
        "A warm anomaly modifies the subtropical high and the steering flow pushes the storm north.",
        "Latent heating over the warm patch erodes the ridge and opens a northward steering channel.",
        "Ridge erosion from diabatic outflow shifts the steering flow northward.",
        "Diabatic outflow reshapes the ridge; steering change dominates the deflection.",
        "Steering change from outflow-ridge interaction explains most of the deflection.",
        "Outflow-ridge interaction alters steering and produces the northward deflection.",
    ],
    "Carol": [
        "Asymmetric surface fluxes over the anomaly create a convective asymmetry that drags the centre.",
        "Flux asymmetry builds convective asymmetry and a wavenumber-one propagation component.",
        "Wavenumber-one asymmetry from uneven fluxes moves the centre toward the warm side.",
        "Uneven fluxes force a wavenumber-one asymmetry that moves the centre toward warm water.",
        "Flux-driven asymmetry moves the centre toward warm water, partly offset by steering.",
        "The centre drifts toward warm water through flux-driven convective asymmetry.",
    ],
}
CITATIONS = {
    "Alice": ["Beta drift of tropical cyclones"],
    "Bob": ["Subtropical ridge response to tropical cyclone outflow"],
    "Carol": ["Sea surface temperature gradients and convective asymmetry"],
}


def split(total):
    base, extra = divmod(total, 4)
    return [base + (1 if k < extra else 0) for k in range(4)]


def speaking_order(prev):
    received = {n: 0 for n in RESEARCHERS}
    for target in prev.values():
        received[target] += 1
    # Rebutted researchers first, most rebuttals first; ties keep base order.
    return sorted(RESEARCHERS, key=lambda n: (received[n] == 0, -received[n]))


def debate_tc():
    s = Script("debate_tc")
    next_id = 1
    latest = {}
    for name in RESEARCHERS:
        s.push(name, {"type": "ProposeHypothesis", "statement": STATEMENTS[name][0], "citations": CITATIONS[name]})
        latest[name] = next_id
        next_id += 1
    for name in RESEARCHERS:
        dims = split(TOTALS[name][0])
        s.push("Host", {"type": "Score", "scientificity": dims[0], "rationality": dims[1], "novelty": dims[2], "effectiveness": dims[3]})
    prev = {}
    for r in range(2, ROUNDS + 1):
        order = speaking_order(prev)
        for name in order:
            target = REBUTS[r][name]
            s.push(name, {"type": "Rebut", "target": target, "critique": f"{name} questions the mechanism proposed by {target}."})
        for name in order:
            s.push(name, {"type": "Revise", "statement": STATEMENTS[name][r - 1]})
            latest[name] = next_id
            next_id += 1
        for name in RESEARCHERS:
            dims = split(TOTALS[name][r - 1])
            s.push("Host", {"type": "Score", "scientificity": dims[0], "rationality": dims[1], "novelty": dims[2], "effectiveness": dims[3]})
        prev = REBUTS[r]
    s.push("Chief", {"type": "SelectFinal", "hypothesis_id": latest["Alice"], "justification": "Highest final score and a testable intensity-track coupling."})
    s.write()


# ---------------------------------------------------------------- squall line

def squall_plan():
    return [
        subtask(1, "wps_configure", "wps_configurer", [], [NAMELIST]),
        subtask(2, "input_process", "fnl_processor", [1], ["sim/ic.masd"]),
        subtask(3, "sim_init", "wrf_real_executor", [2], ["sim/state.masd"]),
        subtask(4, "sim_main", "wrf_main_simulator", [3], ["sim/out.masd"]),
        subtask(5, "trajectory_analysis", "trajectory_analyzer", [4],
                ["analysis/rain_track.csv", "analysis/cold_pool_deficit.csv", "plots/squall_total_precip.svg"]),
    ]


def squall_workers(s, pad=None):
    """Tool calls of each squall worker; `pad` maps worker -> extra read-only calls."""
    pad = pad or {}

    def padding(agent):
        for k in range(pad.get(agent, 0)):
            if k % 2 == 0:
                s.tool(agent, "list_directory", path="sim")
            else:
                s.tool(agent, "read_file", path=NAMELIST)

    a = "wps_configurer"
    s.tool(a, "write_namelist", case="squall")
    padding(a)
    s.final(a, "Namelist written: Noah-MP land surface and YSU boundary layer, 48x48 at 0.1 deg.")

    a = "fnl_processor"
    s.tool(a, "fetch_inputs", case="squall", seed=SEED)
    s.tool(a, "link_vtable")
    padding(a)
    s.tool(a, "preprocess")
    s.final(a, "Inputs decoded into sim/ic.masd.")

    a = "wrf_real_executor"
    padding(a)
    s.tool(a, "real_init")
    s.final(a, "Initial state built.")

    a = "wrf_main_simulator"
    padding(a)
    s.tool(a, "run_simulation")
    s.final(a, "Simulation finished: 13 outputs.")

    a = "trajectory_analyzer"
    out = "sim/out.masd"
    s.tool(a, "ingest_tensor", path=out, var=["RAINC", "RAINNC"], time="all", **{"as": ["rainc", "rainnc"]})
    s.tool(a, "transform_tensor", op="sum_pair", inputs=["rainc", "rainnc"], **{"as": "rain"})
    s.tool(a, "track_feature", tensor="rain", mode="max", **{"as": "rain_track"})
    s.tool(a, "export_csv", name="rain_track", path="analysis/rain_track.csv")
    s.tool(a, "ingest_tensor", path=out, var=["RAINC", "RAINNC"], time="last", **{"as": ["rainc_end", "rainnc_end"]})
    s.tool(a, "transform_tensor", op="sum_pair", inputs=["rainc_end", "rainnc_end"], **{"as": "rain_end"})
    s.tool(a, "locate_feature", tensor="rain_end", mode="max", **{"as": "rain_peak"})
    s.tool(a, "ingest_tensor", path=out, var="T2", time="last", **{"as": "t2"})
    s.tool(a, "filter_by_geometry", tensor="t2", around="rain_peak", radius_km=50.0, **{"as": "t2_core"})
    s.tool(a, "deficit", masked="t2_core", full="t2", **{"as": "cold_pool"})
    s.tool(a, "export_csv", name="cold_pool", path="analysis/cold_pool_deficit.csv")
    padding(a)
    s.tool(a, "plot_spatial_map", tensor="rain_end", colormap="sequential-precip", title="Squall line total precipitation (mm)",
           trajectory="rain_track", star="rain_peak", star_mode="max", decimals=2, out="plots/squall_total_precip.svg")
    s.final(a, "Rain-core track and 50 km cold-pool deficit exported.")


def planner_plan(s, plan, notes_before=0):
    for k in range(notes_before):
        s.final("MetaPlanner", f"Planning note {k + 1}.")
    s.push("MetaPlanner", {"type": "PlanRoadmap", "subtasks": plan})


def planner_verdicts(s, n, notes_each=0, final="Hypothesis checked.", notes_last=0):
    # A FinalResponse asked for while a verdict is pending is an interim note;
    # the first one after the last verdict is the conclusion.
    for v in range(n):
        extra = notes_last if v == n - 1 else 0
        for k in range(notes_each + extra):
            s.final("MetaPlanner", f"Reviewing subtask {v + 1}, note {k + 1}.")
        s.push("MetaPlanner", {"type": "Verdict", "pass": True, "note": f"Subtask {v + 1} outputs are consistent."})
    s.final("MetaPlanner", final)


def squall_complex():
    s = Script("squall_complex")
    planner_plan(s, squall_plan())
    planner_verdicts(s, 5, final="Lower soil moisture should weaken the cold pool; the control pipeline is complete.")
    squall_workers(s)
    s.write()


def squall_count_variant():
    # Per-agent call totals: planner 28, workers 15/23/38/20/40 (164 total).
    s = Script("squall_count_variant")
    planner_plan(s, squall_plan(), notes_before=4)
    planner_verdicts(s, 5, notes_each=3, notes_last=2, final="Count variant complete.")
    base = {"wps_configurer": 1, "fnl_processor": 3, "wrf_real_executor": 1, "wrf_main_simulator": 1, "trajectory_analyzer": 12}
    target = {"wps_configurer": 15, "fnl_processor": 23, "wrf_real_executor": 38, "wrf_main_simulator": 20, "trajectory_analyzer": 40}
    squall_workers(s, pad={a: target[a] - 1 - base[a] for a in base})
    s.write()


# ---------------------------------------------------------------- typhoon

def typhoon_complex():
    s = Script("typhoon_complex")
    plan = [
        subtask(1, "Configure the typhoon domain", "wps_configurer", [], [NAMELIST]),
        subtask(2, "Decode first-guess inputs", "wps_preprocessor", [1], ["sim/ic.masd"]),
        subtask(3, "Control simulation", "wrf_main_simulator", [2], ["sim/out_ctl.masd"]),
        subtask(4, "SKINTEMP +2 K simulation", "wrf_main_simulator", [2], ["sim/ic_pert.masd", "sim/out_pert.masd"]),
        subtask(5, "Compare tracks", "trajectory_analyzer", [3, 4], ["analysis/track_deviation.csv"]),
    ]
    planner_plan(s, plan)
    planner_verdicts(s, 5, final="The warm run deepens further; track deviation reported.")

    s.tool("wps_configurer", "write_namelist", case="typhoon")
    s.final("wps_configurer", "Typhoon namelist written with sst_update = 0.")
    a = "wps_preprocessor"
    s.tool(a, "fetch_inputs", case="typhoon", seed=SEED)
    s.tool(a, "link_vtable")
    s.tool(a, "preprocess")
    s.final(a, "Initial conditions decoded.")
    a = "wrf_main_simulator#3"
    s.tool(a, "real_init", out="sim/state_ctl.masd")
    s.tool(a, "run_simulation", state="sim/state_ctl.masd", out="sim/out_ctl.masd")
    s.final(a, "Control run done.")
    a = "wrf_main_simulator#4"
    s.tool(a, "perturb_field", input="sim/ic.masd", output="sim/ic_pert.masd", var="SKINTEMP", op="add", value=2.0)
    s.tool(a, "real_init", ic="sim/ic_pert.masd", out="sim/state_pert.masd")
    s.tool(a, "run_simulation", state="sim/state_pert.masd", out="sim/out_pert.masd")
    s.final(a, "Perturbed run done.")
    a = "trajectory_analyzer"
    for tag in ("ctl", "pert"):
        s.tool(a, "ingest_tensor", path=f"sim/out_{tag}.masd", var="PSFC", time="all", **{"as": f"psfc_{tag}"})
        s.tool(a, "track_feature", tensor=f"psfc_{tag}", mode="min", **{"as": f"track_{tag}"})
        s.tool(a, "export_csv", name=f"track_{tag}", path=f"analysis/track_{tag}.csv")
    s.tool(a, "track_compare", a="track_ctl", b="track_pert", **{"as": "deviation"})
    s.tool(a, "export_csv", name="deviation", path="analysis/track_deviation.csv")
    s.tool(a, "plot_cartesian_chart", features="track_pert", scale=0.01, mark="min", decimals=1,
           title="Perturbed run central pressure", y_label="hPa", out="plots/typhoon_pert_intensity.svg")
    s.final(a, "Tracks compared.")
    s.write()


# ---------------------------------------------------------------- simple mode

def simple_intensity():
    s = Script("simple_intensity")
    a = "assistant"
    s.tool(a, "inspect_dataset", path=TYPHOON_OUT)
    s.tool(a, "ingest_tensor", path=TYPHOON_OUT, var="PSFC", time="all", **{"as": "psfc"})
    s.tool(a, "locate_feature", tensor="psfc", mode="min", **{"as": "center"})
    s.tool(a, "plot_cartesian_chart", features="center", scale=0.01, mark="min", decimals=3,
           title="Typhoon intensity evolution", y_label="minimum central pressure (hPa)",
           out="plots/typhoon_intensity_evolution.svg")
    s.final(a, "Peak intensity at output 7 (42 h) with a minimum central pressure of 922.769 hPa.")
    s.write()


def simple_track():
    s = Script("simple_track")
    a = "assistant"
    s.tool(a, "inspect_dataset", path=TYPHOON_OUT)
    s.tool(a, "ingest_tensor", path=TYPHOON_OUT, var="PSFC", time="all", **{"as": "psfc"})
    s.tool(a, "locate_feature", tensor="psfc", mode="min", **{"as": "track"})
    s.tool(a, "plot_spatial_map", tensor="psfc", time_index=7, scale=0.01, colormap="sequential-gray",
           title="Typhoon track over sea-level pressure at peak intensity (hPa)",
           trajectory="track", star="track", star_mode="min", decimals=1, out="plots/typhoon_track_with_slp.svg")
    s.final(a, "Track drawn over the pressure field at peak intensity.")
    s.write()


def simple_precip():
    s = Script("simple_precip")
    a = "assistant"
    s.tool(a, "list_directory", path="sim")
    s.tool(a, "inspect_dataset", path=TYPHOON_OUT)
    s.tool(a, "ingest_tensor", path=TYPHOON_OUT, var=["RAINC", "RAINNC"], time="last", **{"as": ["rainc", "rainnc"]})
    s.tool(a, "transform_tensor", op="sum_pair", inputs=["rainc", "rainnc"], **{"as": "rain"})
    s.tool(a, "locate_feature", tensor="rain", mode="max", **{"as": "peak"})
    s.tool(a, "plot_spatial_map", tensor="rain", colormap="sequential-precip", title="Typhoon total precipitation (mm)",
           star="peak", star_mode="max", decimals=2, out="plots/typhoon_total_precipitation.svg")
    s.final(a, "Maximum accumulated precipitation 453.68 mm, marked with a red star.")
    s.write()


def simple_divergence():
    s = Script("simple_divergence")
    a = "assistant"
    s.tool(a, "ingest_tensor", path=TYPHOON_OUT, var=["U10", "V10"], time=7, **{"as": ["u10", "v10"]})
    s.tool(a, "transform_tensor", op="divergence", inputs=["u10", "v10"], **{"as": "div"})
    s.tool(a, "locate_feature", tensor="div", mode="min", **{"as": "conv"})
    s.tool(a, "filter_by_geometry", tensor="div", around="conv", half_width_deg=1.0, **{"as": "zone"})
    s.tool(a, "plot_spatial_map", tensor="div", colormap="diverging-bluered", title="10-m divergence (s-1)",
           rect_from="zone", rect_label="strong convergence", out="plots/typhoon_divergence_zone.svg")
    s.final(a, "Strongest convergence -0.00287 s-1, boxed in red.")
    s.write()


# ---------------------------------------------------------------- goals and corpus

GOALS = {
    "squall_soil_moisture.txt": "Verify the hypothesis that abnormally dry soil ahead of a squall line weakens its cold pool. "
    "Run the control simulation of the squall-line case, track the rain core and measure the 2-m temperature deficit "
    "within 50 km of the core.\n",
    "typhoon_sst.txt": "Run control and perturbation groups with +2K SKINTEMP and sst_update = 0, then compare the "
    "typhoon tracks and central pressures.\n",
    "simple_intensity.txt": "Extract the minimum central pressure every 6 hours, plot the time-pressure evolution line "
    "chart, and mark the peak intensity time and value.\n",
    "simple_track.txt": "Track the typhoon movement path and plot the trajectory on a high-resolution map overlaid with "
    "the sea level pressure field at peak intensity.\n",
    "simple_precip.txt": "Calculate the total accumulated precipitation field (convective + non-convective), plot the "
    "spatial distribution using a meteorological color bar, and mark the maximum precipitation center and value with "
    "a red star.\n",
    "simple_divergence.txt": "Calculate the divergence field based on the 10-m wind field, plot the 2D filled contour "
    "map using a divergent color bar, and extract and highlight the extreme strong convergence zone.\n",
    "debate_tc_topic.txt": "What mechanisms produce anomalous track deflections of a typhoon passing over a warm "
    "sea-surface temperature anomaly?\n",
}

CORPUS = {
    "beta_drift.txt": ("Beta drift of tropical cyclones",
                       "The meridional gradient of planetary vorticity induces a poleward and westward drift of a "
                       "tropical cyclone vortex. Drift speed grows with the strength and size of the outer circulation."),
    "ridge_outflow.txt": ("Subtropical ridge response to tropical cyclone outflow",
                          "Diabatic outflow from an intense typhoon erodes the western flank of the subtropical ridge "
                          "and changes the steering flow and the track."),
    "sst_asymmetry.txt": ("Sea surface temperature gradients and convective asymmetry",
                          "Warm sea surface temperature anomalies produce asymmetric surface fluxes and convection, "
                          "giving a wavenumber-one asymmetry that shifts the typhoon centre."),
    "cold_pool.txt": ("Soil moisture control of squall line cold pools",
                      "Dry soil raises sensible heat flux and reduces evaporative cooling, weakening the cold pool "
                      "of a squall line."),
    "ocean_mixing.txt": ("Ocean mixed layer cooling under a typhoon",
                         "Wind-driven mixing cools the ocean surface beneath a typhoon and limits its intensity."),
}


def main():
    (HERE / "scenarios").mkdir(exist_ok=True)
    (HERE / "goals").mkdir(exist_ok=True)
    (HERE / "corpus").mkdir(exist_ok=True)
    for f in (debate_tc, squall_complex, squall_count_variant, typhoon_complex,
              simple_intensity, simple_track, simple_precip, simple_divergence):
        f()
    for name, text in GOALS.items():
        (HERE / "goals" / name).write_text(text)
    for name, (title, abstract) in CORPUS.items():
        (HERE / "corpus" / name).write_text(f"{title}\n{abstract}\n")


if __name__ == "__main__":
    main()
