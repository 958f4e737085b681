import copy
import csv
import io
import json
from pathlib import Path

import pytest

from semirec.cli import EXIT_BUDGET, EXIT_CONFIG, EXIT_OK, main
from semirec.config import ConfigError, from_dict
from semirec.report import SCHEMAS, emit_plot_data, run, strip_timing

CONFIGS = Path(__file__).resolve().parent.parent / "scripts" / "configs"

BASE = {
    "seed": 3,
    "system": {"space": {"kind": "box", "bounds": [[-2, 2]]}, "generators": {"g1": "x^2", "g2": "x^3"}},
    "analyses": [],
}


def _cfg(*analyses, **extra):
    d = copy.deepcopy(BASE)
    d["analyses"] = list(analyses)
    d.update(extra)
    return d


def _write(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return p


def test_empty_analyses_echo_config(tmp_path):
    out = tmp_path / "r.json"
    assert main(["analyze", str(_write(tmp_path, _cfg())), "--out", str(out)]) == EXIT_OK
    r = json.loads(out.read_text())
    assert r["analyses"] == {}
    assert r["config"]["system"]["generators"] == {"g1": "x^2", "g2": "x^3"}


def test_config_errors_exit_2(tmp_path, capsys):
    bad = [
        _cfg({"kind": "orbit"}),
        _cfg({"kind": "spiral", "x": 1}),
        _cfg({"kind": "omega", "x": 1, "pivot": "g7"}),
        _cfg({"kind": "no-chain-cert", "a": -1, "lead": "id", "eps": 0.5}),
        {"system": {"space": {"bounds": [[2, -2]]}, "generators": {"g": "x^2"}}},
        {"system": {"space": {"bounds": [[-2, 2]]}, "generators": {"g": "x^^2"}}},
        {"system": {"space": {"bounds": [[-2, 2]]}, "generators": {"g": "x"}}},
        _cfg(unknown=1),
    ]
    for i, data in enumerate(bad):
        assert main(["validate", str(_write(tmp_path, data, f"{i}.json"))]) == EXIT_CONFIG, data
    p = tmp_path / "broken.json"
    p.write_text("{")
    assert main(["analyze", str(p)]) == EXIT_CONFIG
    assert main(["analyze", str(tmp_path / "missing.json")]) == EXIT_CONFIG


def test_budget_cap_exits_3(tmp_path):
    data = _cfg({"kind": "chain-recurrent", "cells": 500})
    assert main(["analyze", str(_write(tmp_path, data)), "--max-cells", "100"]) == EXIT_BUDGET
    words = _cfg({"kind": "orbit-points", "max_len": 30})
    assert main(["analyze", str(_write(tmp_path, words, "w.json"))]) == EXIT_BUDGET


def test_validate_ok(capsys):
    assert main(["validate", str(CONFIGS / "square_cube.json")]) == EXIT_OK
    assert "ok" in capsys.readouterr().out


def test_square_cube_config_reproduces_examples(tmp_path):
    out = tmp_path / "r.json"
    assert main(["analyze", str(CONFIGS / "square_cube.json"), "--out", str(out)]) == EXIT_OK
    r = json.loads(out.read_text())
    a = r["analyses"]
    pts = {p["point"]: p["word"] for p in a["orbit-points"]["result"]["points"]}
    assert pts[-1.0] == "g2"
    assert a["snw-minus-1"]["result"]["point"]["verdict"]["status"] == "CertifiedNo"
    assert a["no-chain"]["result"]["verdict"]["status"] == "CertifiedYes"


def test_squares_half_config_reproduces_orbit(tmp_path):
    out = tmp_path / "r.json"
    assert main(["analyze", str(CONFIGS / "squares_half.json"), "--out", str(out)]) == EXIT_OK
    orb = json.loads(out.read_text())["analyses"]["orbit-of-1"]["result"]
    xs = [p["point"] for p in orb["points"]]
    for v in (1.0, 0.5, 0.25):
        assert min(abs(x - v) for x in xs) <= 1e-12
    assert 0 < orb["min_abs"] < 1e-3


def test_determinism_modulo_timing(tmp_path):
    outs = []
    for i in range(2):
        out = tmp_path / f"r{i}.json"
        assert main(["analyze", str(CONFIGS / "square_cube.json"), "--out", str(out)]) == EXIT_OK
        outs.append(json.loads(out.read_text()))
    assert json.dumps(strip_timing(outs[0]), sort_keys=True) == json.dumps(strip_timing(outs[1]), sort_keys=True)


def test_seed_override_changes_only_the_seed(tmp_path):
    data = _cfg(
        {"id": "conj", "kind": "conjugacy", "target": {"space": {"bounds": [[-2, 2]]}, "generators": {"g1": "x^2", "g2": "x^3"}},
         "rho": "x", "rho_inv": "x", "samples": 50, "boundary_samples": 5}
    )
    p = _write(tmp_path, data)
    out = tmp_path / "r.json"
    assert main(["analyze", str(p), "--seed", "99", "--out", str(out)]) == EXIT_OK
    r = json.loads(out.read_text())
    assert r["config"]["seed"] == 99
    assert r["analyses"]["conj"]["result"]["verdict"]["budgets"]["seed"] == 99


def test_budget_disclosure_names_budgets():
    cfg = from_dict(_cfg({"id": "rec", "kind": "recurrent", "points": [0.3], "pivot": "g1", "max_len": 10}))
    r = run(cfg)
    d = r["budget_disclosure"]
    assert d and d[0]["analysis"] == "rec" and d[0]["budgets"]["max_len"] == 10


def _csv_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_plot_schemas(tmp_path):
    cfg = from_dict(
        _cfg(
            {"id": "orbit", "kind": "orbit", "x": 0.5, "max_len": 3},
            {"id": "fix", "kind": "fix"},
            {"id": "op", "kind": "orbit-points", "max_len": 2},
            {"id": "om", "kind": "omega", "x": 0.0, "pivot": "g1"},
            {"id": "rec", "kind": "recurrent", "points": [-1, 0.3]},
            {"id": "nw", "kind": "nonwandering", "cells": 20, "max_len": 2},
            {"id": "snw", "kind": "snw", "x": 0.0},
            {"id": "cg", "kind": "chain-graph", "cells": 20, "lead": "g1", "eps": 0.3, "queries": [{"a": 1, "b": 1}]},
            {"id": "cr", "kind": "chain-recurrent", "cells": 20, "eps_schedule": [0.3], "lead_max_len": 1, "helper_max_len": 1},
            {"id": "ce", "kind": "chain-equivalent", "cells": 20, "a": 0, "b": 0, "eps_schedule": [0.3], "lead_max_len": 1},
            {"id": "nc", "kind": "no-chain-cert", "a": -1, "lead": ["g1"], "eps": 0.5},
            {"id": "cj", "kind": "conjugacy", "target": BASE["system"], "rho": "x", "rho_inv": "x", "samples": 20,
             "boundary_samples": 2, "transport": {"cells": 20, "sets": ["orbit-points"], "max_len": 2}},
        )
    )
    r = run(cfg)
    for aid, entry in r["analyses"].items():
        text = emit_plot_data(r, aid)
        header = text.splitlines()[0].split(",")
        assert header == SCHEMAS[entry["kind"]], aid
    assert len(_csv_rows(emit_plot_data(r, "cr"))) == 20
    chains = _csv_rows(emit_plot_data(r, "cg", "chains"))
    assert [c["step"] for c in chains] == ["0", "1"]
    assert _csv_rows(emit_plot_data(r, "nc"))[0]["hi"] == "inf"
    with pytest.raises(KeyError):
        emit_plot_data(r, "nope")


def test_plot_command(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["analyze", str(CONFIGS / "squares_half.json"), "--out", str(out)]) == EXIT_OK
    csv_path = tmp_path / "om.csv"
    assert main(["plot", str(out), "omega-g1", "--out", str(csv_path)]) == EXIT_OK
    assert csv_path.read_text().startswith("center,hits,max_count")
    assert main(["plot", str(out), "missing"]) == EXIT_CONFIG


def test_bad_seed_rejected():
    with pytest.raises(ConfigError):
        from_dict(_cfg(seed=-1))
