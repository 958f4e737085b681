"""Run the analyses of a config and turn the results into JSON reports and CSV tables."""

from __future__ import annotations

import csv
import io
import math
import time
from typing import Any

import numpy as np

from . import __version__
from .chain import (
    build_chain_graph,
    chain_equivalent,
    chain_exists,
    chain_recurrent_cells,
    certify_no_chain,
    classify,
    no_chain_certificate,
)
from .config import AnalysisConfig, AnalysisSpec, ConfigError, SystemConfig, validate
from .conjugacy import ConjugacyMap, check_conjugacy, compare_sets, transport_cells, transport_points
from .recurrence import fix_set, is_recurrent, is_recurrent_any_pivot, omega_limit, orbit_points
from .semigroup import GeneratorSystem, is_abelian_sampled, orbit
from .space import Grid
from .verdict import BudgetExceeded, Status, Verdict
from .wandering import is_nonwandering, is_strongly_nonwandering, nonwandering_cells, strongly_nonwandering_cells


class BudgetCapError(BudgetExceeded):
    pass


def clean(obj: Any) -> Any:
    """Plain JSON values: numpy scalars to Python, tuples to lists, infinities to strings."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    if isinstance(obj, Status):
        return obj.value
    return obj


def verdict_json(v: Verdict) -> dict:
    return clean({"status": v.status.value, "witness": v.witness, "certificate": v.certificate, "budgets": v.budgets, "note": v.note})


def _grid(sys: GeneratorSystem, cells, cfg: AnalysisConfig) -> Grid:
    if cells is None:
        raise ConfigError("a grid ('cells') is required")
    grid = Grid.uniform(sys.space, cells if isinstance(cells, int) else tuple(cells))
    if grid.n_cells > cfg.max_cells:
        raise BudgetCapError(f"{grid.n_cells} cells exceed the cap of {cfg.max_cells}")
    return grid


def _point(x):
    return float(x) if np.ndim(x) == 0 else tuple(float(v) for v in x)


def _sweep_json(sweep, sys) -> dict:
    counts = {s.value: len(sweep.cells(s)) for s in Status}
    return {"grid": sweep.grid.to_json(), "budgets": sweep.budgets, "counts": counts, "rows": sweep.rows(sys)}


# ---------------------------------------------------------------- analysis kinds


def _orbit(sys, p, cfg):
    o = orbit(sys, _point(p.x), p.max_len, p.tol_dedup, cfg.word_cap)
    pts = [e for e in o.entries]
    nonzero = [abs(e.point) for e in pts if np.ndim(e.point) == 0]
    return {
        "x": p.x,
        "max_len": p.max_len,
        "size": len(pts),
        "underflowed": o.underflowed,
        "nonfinite": o.nonfinite,
        "escaped": sum(e.escaped for e in pts),
        "min_abs": min(nonzero) if nonzero else None,
        "points": [{"point": e.point, "word": sys.format_word(e.word), "escaped": e.escaped} for e in pts],
    }


def _fix(sys, p, cfg):
    return {"points": fix_set(sys, p.resolution, p.tol_fix)}


def _orbit_points(sys, p, cfg):
    recs = orbit_points(sys, p.max_len, p.resolution, p.tol_fix, cfg.word_cap)
    return {
        "max_len": p.max_len,
        "points": [{"point": r.point, "word": sys.format_word(r.word), "residual": r.residual} for r in recs],
    }


def _omega(sys, p, cfg):
    om = omega_limit(sys, _point(p.x), sys.index(p.pivot), p.max_len, p.schedule, p.tol_cluster, p.block_cap, p.min_hits, cfg.word_cap)
    return {
        "x": p.x,
        "pivot": p.pivot,
        "budgets": om.budgets,
        "clusters": [
            {"center": c.center, "hits": c.hits, "counts": c.counts, "max_count": c.max_count, "witness": sys.format_word(c.witness)}
            for c in om.clusters
        ],
    }


def _recurrent(sys, p, cfg):
    out = []
    kw = dict(max_len=p.max_len, schedule=p.schedule, count_floor=p.count_floor, tol_cluster=p.tol_cluster, cap=cfg.word_cap)
    for x in p.points:
        if p.pivot is None:
            v = is_recurrent_any_pivot(sys, _point(x), **kw)
        else:
            v = is_recurrent(sys, _point(x), sys.index(p.pivot), **kw)
        out.append({"x": x, "verdict": verdict_json(v)})
    return {"results": out}


def _nonwandering(sys, p, cfg):
    out: dict = {}
    if p.x is not None:
        out["point"] = {"x": p.x, "radius": p.radius, "verdict": verdict_json(is_nonwandering(sys, _point(p.x), p.radius, p.max_len, p.certificate_sets))}
    if p.cells is not None:
        out["sweep"] = _sweep_json(nonwandering_cells(sys, _grid(sys, p.cells, cfg), p.max_len, p.certificate_sets), sys)
    return out


def _snw(sys, p, cfg):
    out: dict = {}
    if p.x is not None:
        v = is_strongly_nonwandering(sys, _point(p.x), p.radius, p.lead_max_len, p.helper_max_len, p.certificate_sets)
        out["point"] = {"x": p.x, "radius": p.radius, "verdict": verdict_json(v)}
    if p.cells is not None:
        sweep = strongly_nonwandering_cells(sys, _grid(sys, p.cells, cfg), p.lead_max_len, p.helper_max_len, p.certificate_sets)
        out["sweep"] = _sweep_json(sweep, sys)
    return out


def _chain_graph(sys, p, cfg):
    grid = _grid(sys, p.cells, cfg)
    lead = sys.parse_word(p.lead)
    gr = build_chain_graph(sys, grid, lead, p.eps, p.helper_max_len, cfg.word_cap)
    cls = classify(gr)
    queries = []
    for q in p.queries:
        a, b = _point(q["a"]), _point(q["b"])
        v = chain_exists(gr, a, b)
        if not v.yes:
            cert = no_chain_certificate(sys, b, lead, p.eps, p.certificate_sets)
            if cert is not None:
                v = chain_exists(gr, a, b, certificate=cert)
        queries.append({"a": q["a"], "b": q["b"], "verdict": verdict_json(v)})
    out = {
        "grid": grid.to_json(),
        "lead": sys.format_word(lead),
        "eps": p.eps,
        "eps_prime": gr.eps_prime,
        "helper_max_len": p.helper_max_len,
        "helpers": len(gr.helpers),
        "n_edges": gr.n_edges,
        "n_scc": len(set(cls.scc)),
        "on_cycle": sum(cls.on_cycle),
        "classification": cls.rows(),
        "queries": queries,
    }
    if p.include_edges:
        out["edges"] = gr.edge_rows()
    return out


def _chain_recurrent(sys, p, cfg):
    grid = _grid(sys, p.cells, cfg)
    sw = chain_recurrent_cells(sys, grid, p.lead_max_len, p.eps_schedule, p.helper_max_len)
    return {
        "grid": grid.to_json(),
        "budgets": sw.budgets(sys),
        "note": "every eps > 0 and every g in G is truncated to the schedule and the lead budget",
        "cr_cells": len(sw.cells()),
        "rows": sw.rows(sys),
    }


def _chain_equivalent(sys, p, cfg):
    grid = _grid(sys, p.cells, cfg)
    v = chain_equivalent(sys, grid, _point(p.a), _point(p.b), p.lead_max_len, p.eps_schedule, p.helper_max_len, p.certificate_sets)
    return {"a": p.a, "b": p.b, "verdict": verdict_json(v)}


def _no_chain(sys, p, cfg):
    v = certify_no_chain(sys, _point(p.a), sys.parse_word(p.lead), p.eps, p.S)
    return {"a": p.a, "lead": p.lead, "eps": p.eps, "verdict": verdict_json(v)}


def _conjugacy(sys, p, cfg):
    target = SystemConfig(**p.target).build()
    c = ConjugacyMap.from_strings(sys, target, p.rho, p.rho_inv, p.pairing)
    v = check_conjugacy(c, p.samples, p.boundary_samples, p.tol, seed=cfg.seed)
    out = {"map": c.to_json(), "verdict": verdict_json(v), "transport": {}}
    t = p.transport or {}
    if v.no or not t:
        return out
    k = int(t.get("dilation", 1))
    sets = t.get("sets", ["orbit-points"])
    src_grid = _grid(sys, t["cells"], cfg) if "cells" in t else None
    tgt_grid = _grid(target, t["cells"], cfg) if "cells" in t else None
    if tgt_grid is None:
        raise ConfigError("transport needs 'cells'")
    for name in sets:
        if name == "orbit-points":
            L = int(t.get("max_len", 4))
            a = transport_points(c, [r.point for r in orbit_points(sys, L)], tgt_grid)
            b = {tgt_grid.flat(tgt_grid.cell_of(r.point)) for r in orbit_points(target, L)}
        elif name == "nonwandering":
            L = int(t.get("nw_max_len", 6))
            src = nonwandering_cells(sys, src_grid, L).cells(Status.YES)
            a = transport_cells(c, src, src_grid, tgt_grid)
            b = nonwandering_cells(target, tgt_grid, L).cells(Status.YES)
        elif name == "chain-recurrent":
            sched = t.get("eps_schedule", [0.1, 0.05])
            W, H = int(t.get("lead_max_len", 2)), int(t.get("helper_max_len", 3))
            a = transport_cells(c, chain_recurrent_cells(sys, src_grid, W, sched, H).cells(), src_grid, tgt_grid)
            b = chain_recurrent_cells(target, tgt_grid, W, sched, H).cells()
        else:
            raise ConfigError(f"cannot transport {name!r}")
        rep = compare_sets(a.cells, b, tgt_grid, k).to_json()
        rep["outside_target_window"] = a.outside
        out["transport"][name] = rep
    return out


RUNNERS = {
    "orbit": _orbit,
    "fix": _fix,
    "orbit-points": _orbit_points,
    "omega": _omega,
    "recurrent": _recurrent,
    "nonwandering": _nonwandering,
    "snw": _snw,
    "chain-graph": _chain_graph,
    "chain-recurrent": _chain_recurrent,
    "chain-equivalent": _chain_equivalent,
    "no-chain-cert": _no_chain,
    "conjugacy": _conjugacy,
}


# ---------------------------------------------------------------- report


def _disclosures(aid: str, node: Any, path: str = "") -> list:
    """Every non-certified verdict below ``node`` with the budget that bounded it."""
    out = []
    if isinstance(node, dict):
        if node.get("status") == Status.INCONCLUSIVE.value and "budgets" in node:
            out.append({"analysis": aid, "where": path or "/", "budgets": node["budgets"], "note": node.get("note", "")})
        if "rows" in node and "budgets" in node and "counts" in node:
            n = node["counts"].get(Status.INCONCLUSIVE.value, 0)
            if n:
                out.append({"analysis": aid, "where": path + "/rows", "inconclusive_cells": n, "budgets": node["budgets"]})
        for k, v in node.items():
            if k not in ("rows", "witness", "certificate"):
                out.extend(_disclosures(aid, v, f"{path}/{k}"))
    elif isinstance(node, list):
        for i, v in enumerate(node):
            out.extend(_disclosures(aid, v, f"{path}/{i}"))
    return out


def run(cfg: AnalysisConfig) -> dict:
    """Run every analysis in order; ``timing`` is the only non-deterministic field."""
    sys = validate(cfg)
    t0 = time.perf_counter()
    report: dict = {"tool": "semirec", "version": __version__, "config": cfg.to_json(), "system": {}, "analyses": {}}
    if sys.claimed_abelian:
        report["system"]["abelian_check"] = verdict_json(is_abelian_sampled(sys, 64, seed=cfg.seed))
    timing = {}
    for spec in cfg.analyses:
        t = time.perf_counter()
        result = RUNNERS[spec.kind](sys, spec.params, cfg)
        timing[spec.id] = time.perf_counter() - t
        report["analyses"][spec.id] = {"kind": spec.kind, "result": clean(result)}
    report = clean(report)
    disclosure = []
    for aid, node in report["analyses"].items():
        disclosure.extend(_disclosures(aid, node["result"]))
    report["budget_disclosure"] = disclosure
    timing["total"] = time.perf_counter() - t0
    report["timing"] = timing
    return report


def strip_timing(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "timing"}


# ---------------------------------------------------------------- plot data

SCHEMAS = {
    "orbit": ["index", "x", "word"],
    "fix": ["x"],
    "orbit-points": ["x", "word", "residual"],
    "omega": ["center", "hits", "max_count"],
    "recurrent": ["x", "status", "note"],
    "nonwandering": ["cell", "x_center", "status", "witness_word"],
    "snw": ["cell", "x_center", "status", "witness_word"],
    "chain-graph": ["src", "dst", "witness"],
    "chain-recurrent": ["cell", "x_center", "status"],
    "chain-equivalent": ["lead_eps", "forward_len", "backward_len"],
    "no-chain-cert": ["set", "lo", "hi"],
    "conjugacy": ["set", "side", "cell"],
    "chains": ["query", "step", "x", "word"],
}


def _fmt(v):
    if isinstance(v, list):
        return ";".join(str(x) for x in v)
    return v


def plot_rows(report: dict, analysis_id: str, part: str | None = None) -> tuple:
    """(columns, rows) for an analysis; ``part='chains'`` gives chain witness steps."""
    if analysis_id not in report.get("analyses", {}):
        raise KeyError(f"unknown analysis id {analysis_id!r}")
    entry = report["analyses"][analysis_id]
    kind, r = entry["kind"], entry["result"]
    if part == "chains":
        rows = []
        for qi, q in enumerate(r.get("queries", [])):
            w = q["verdict"]["witness"]
            if q["verdict"]["status"] == Status.YES.value:
                for i, s in enumerate(w["steps"]):
                    rows.append({"query": qi, "step": i, "x": s["point"], "word": s["word"] or ""})
        return SCHEMAS["chains"], rows
    if part is not None:
        raise KeyError(f"unknown part {part!r}")
    if kind == "orbit":
        rows = [{"index": i, "x": p["point"], "word": p["word"]} for i, p in enumerate(r["points"])]
    elif kind == "fix":
        rows = [{"x": x} for x in r["points"]]
    elif kind == "orbit-points":
        rows = [{"x": p["point"], "word": p["word"], "residual": p["residual"]} for p in r["points"]]
    elif kind == "omega":
        rows = [{"center": c["center"], "hits": c["hits"], "max_count": c["max_count"]} for c in r["clusters"]]
    elif kind == "recurrent":
        rows = [{"x": q["x"], "status": q["verdict"]["status"], "note": q["verdict"]["note"]} for q in r["results"]]
    elif kind in ("nonwandering", "snw"):
        if "sweep" in r:
            rows = [{"cell": s["cell"], "x_center": s["center"], "status": s["status"], "witness_word": s["witness_word"]} for s in r["sweep"]["rows"]]
        else:
            v = r["point"]["verdict"]
            rows = [{"cell": "", "x_center": r["point"]["x"], "status": v["status"], "witness_word": (v["witness"] or {}).get("composition", "") if isinstance(v["witness"], dict) else ""}]
    elif kind == "chain-graph":
        if "edges" not in r:
            raise KeyError("edges were not included in the report")
        rows = r["edges"]
    elif kind == "chain-recurrent":
        rows = [{"cell": s["cell"], "x_center": s["x_center"], "status": s["status"]} for s in r["rows"]]
    elif kind == "chain-equivalent":
        w = r["verdict"]["witness"] or {}
        rows = [{"lead_eps": k, "forward_len": v[0], "backward_len": v[1]} for k, v in (w.get("chain_lengths") or {}).items()]
    elif kind == "no-chain-cert":
        v = r["verdict"]
        sets = (v["witness"] or {}).get("S", []) if v["status"] == Status.YES.value else []
        rows = [{"set": i, "lo": box[0][0], "hi": box[0][1]} for i, box in enumerate(sets)]
    elif kind == "conjugacy":
        rows = []
        for name, rep in r["transport"].items():
            rows += [{"set": name, "side": "transported_only", "cell": c} for c in rep["only_a"]]
            rows += [{"set": name, "side": "target_only", "cell": c} for c in rep["only_b"]]
    else:  # pragma: no cover - config validation rejects other kinds
        raise KeyError(kind)
    return SCHEMAS[kind], rows


def emit_plot_data(report: dict, analysis_id: str, part: str | None = None) -> str:
    columns, rows = plot_rows(report, analysis_id, part)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for row in rows:
        w.writerow({k: _fmt(v) for k, v in row.items()})
    return buf.getvalue()


def run_spec(sys: GeneratorSystem, spec: AnalysisSpec, cfg: AnalysisConfig) -> Any:
    """A single analysis without the report wrapper."""
    return clean(RUNNERS[spec.kind](sys, spec.params, cfg))
