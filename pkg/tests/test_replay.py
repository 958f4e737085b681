import copy
import json

from semirec.config import from_dict
from semirec.replay import replay_report
from semirec.report import run

CFG = {
    "system": {"space": {"bounds": [[-2, 2]]}, "generators": {"g1": "x^2", "g2": "x^3"}},
    "analyses": [
        {"id": "op", "kind": "orbit-points", "max_len": 2},
        {"id": "rec", "kind": "recurrent", "points": [-1]},
        {"id": "nw", "kind": "nonwandering", "x": -1, "radius": 0.1},
        {"id": "snw", "kind": "snw", "x": -1, "radius": 0.1},
        {"id": "cg", "kind": "chain-graph", "cells": 100, "lead": "g1", "eps": 0.5, "queries": [{"a": 1, "b": 1}, {"a": -1, "b": -1}]},
        {"id": "nc", "kind": "no-chain-cert", "a": -1, "lead": "g1", "eps": 0.9, "S": [[0, "inf"]]},
        {"id": "cj", "kind": "conjugacy", "target": {"space": {"bounds": [[-2, 2]]}, "generators": {"g1": "x^2", "g2": "-x^3"}},
         "rho": "-x", "rho_inv": "-x", "samples": 100, "boundary_samples": 10},
    ],
}


def _report():
    cfg = from_dict(CFG)
    return cfg, json.loads(json.dumps(run(cfg)))


def test_clean_report_replays():
    cfg, r = _report()
    log = replay_report(cfg, r)
    assert log.ok and log.checked >= 8


def test_tampering_is_detected():
    cfg, r = _report()
    bad = copy.deepcopy(r)
    bad["analyses"]["op"]["result"]["points"][0]["point"] += 0.01
    bad["analyses"]["nw"]["result"]["point"]["verdict"]["witness"]["word"] = ["g1", "g1"]
    bad["analyses"]["snw"]["result"]["point"]["verdict"]["certificate"]["lead_words"] = [["g2"]]
    q = bad["analyses"]["cg"]["result"]["queries"][0]["verdict"]["witness"]
    q["steps"][-1]["point"] = -1.0
    bad["analyses"]["nc"]["result"]["verdict"]["witness"]["epsilon"] = 1.5
    bad["analyses"]["cj"]["result"]["verdict"]["certificate"]["x"] = 0.0
    log = replay_report(cfg, bad)
    hit = {w.split("/")[0] for w in log.failures}
    assert hit == {"op", "nw", "snw", "cg", "nc", "cj"}
