"""Independent re-checks of the witnesses and certificates stored in a report.

Every check starts from the JSON alone (plus the config that produced it)
and re-evaluates words point by point or re-runs the interval validation
of a certificate.  Nothing computed during the original run is reused.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .certificate import InvariantSetCertificate
from .chain import EpsilonChain
from .config import AnalysisConfig, SystemConfig
from .conjugacy import ConjugacyMap
from .semigroup import GeneratorSystem, word_eval
from .space import as_coords, unpack_point
from .verdict import DomainError

TOL_REPLAY = 1e-9


@dataclass
class ReplayLog:
    checked: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def check(self, ok: bool, where: str):
        self.checked += 1
        if not ok:
            self.failures.append(where)


def _pt(x):
    return float(x) if np.ndim(x) == 0 else tuple(float(v) for v in x)


def _eval(sys, w, x):
    try:
        return word_eval(sys, w, _pt(x))
    except DomainError:
        return None


def _close(sys, a, b, tol) -> bool:
    return a is not None and sys.space.dist(a, _pt(b)) <= tol


def _cert_ok(sys, data) -> bool:
    try:
        return InvariantSetCertificate.from_json(sys, data).validate(sys)
    except (KeyError, ValueError, DomainError):
        return False


def _chain_ok(sys, data) -> bool:
    try:
        ch = EpsilonChain.from_json(sys, data)
    except (KeyError, ValueError):
        return False
    return ch.validate(sys, ch.eps)


def replay_verdict(sys: GeneratorSystem, kind: str, ctx: dict, v: dict, log: ReplayLog, where: str):
    """Re-check one serialized verdict; ``ctx`` carries the query it answered."""
    status = v["status"]
    if status == "CertifiedNo" and kind not in ("conjugacy",):
        log.check(_cert_ok(sys, v["certificate"]), where)
        return
    if status != "CertifiedYes":
        if kind == "snw" and v["note"].startswith("yes up to") and isinstance(v["witness"], dict):
            g_of = sys.parse_word
            for lead, hit in v["witness"].items():
                y = _eval(sys, g_of(lead) + g_of(hit["helper"]), hit["point"])
                log.check(
                    y is not None and sys.space.dist(hit["point"], _pt(ctx["x"])) < ctx["radius"]
                    and sys.space.dist(y, _pt(ctx["x"])) < ctx["radius"],
                    f"{where}/{lead}",
                )
        return
    w = v["witness"]
    if kind == "recurrent":
        pivot = sys.index(v["budgets"]["pivot"])
        tol = v["budgets"]["tol_cluster"]
        for s in w:
            word = sys.parse_word(s["word"])
            log.check(word.count(pivot) == s["count"] and _close(sys, _eval(sys, word, ctx["x"]), ctx["x"], tol), where)
    elif kind == "nonwandering":
        word = sys.parse_word(w["word"])
        y = _eval(sys, word, w["point"])
        c, r = _pt(ctx["x"]), ctx["radius"]
        log.check(len(word) >= 2 and y is not None and sys.space.dist(w["point"], c) < r and sys.space.dist(y, c) < r, where)
    elif kind == "snw":
        p = w["fixed_point"]
        fixed = all(_close(sys, _eval(sys, (i,), p), p, TOL_REPLAY) for i in range(sys.k))
        log.check(fixed and sys.space.dist(_pt(p), _pt(ctx["x"])) < ctx["radius"], where)
    elif kind == "chain":
        log.check(_chain_ok(sys, w), where)
    elif kind == "no-chain":
        log.check(_cert_ok(sys, w), where)
    else:
        raise ValueError(f"no replay rule for {kind!r}")


def _replay_conjugacy(sys, target, result, log, where):
    v = result["verdict"]
    if v["status"] != "CertifiedNo":
        return
    m = result["map"]
    c = ConjugacyMap.from_strings(sys, target, m["rho"], m["rho_inv"], dict(m["pairing"]))
    cert = v["certificate"]
    tol = v["budgets"]["tol"]
    x = as_coords(cert["x"], sys.dim)
    if cert["kind"] == "inverse":
        back = c.inverse(c.forward(x))
        log.check(float(sys.space.dist_batch(back, x)[0]) > tol, where)
        return
    if cert["kind"] == "generator":
        i, j = sys.index(cert["pair"][0]), target.index(cert["pair"][1])
        w_src, w_tgt, bound = (i,), (j,), tol
    else:
        w_src = sys.parse_word(cert["word"])
        w_tgt, bound = c.target_word(w_src), cert["bound"]
    lhs = c.forward(as_coords(word_eval(sys, w_src, _pt(cert["x"])), sys.dim))
    rhs = as_coords(word_eval(target, w_tgt, unpack_point(c.forward(x)[:, 0])), sys.dim)
    res = float(target.space.dist_batch(lhs, rhs)[0])
    log.check(not np.isfinite(res) or res > bound, where)


def replay_report(cfg: AnalysisConfig, report: dict) -> ReplayLog:
    """Walk every analysis of a report and re-check what it certifies."""
    sys = cfg.system.build()
    log = ReplayLog()
    specs = {a.id: a for a in cfg.analyses}
    for aid, entry in report["analyses"].items():
        kind, res, p = entry["kind"], entry["result"], specs[aid].params
        if kind == "orbit":
            for e in res["points"]:
                if not e["escaped"]:
                    y = _eval(sys, sys.parse_word(e["word"]), p.x)
                    log.check(y is not None and sys.space.dist(y, _pt(e["point"])) <= TOL_REPLAY * max(1.0, abs(np.max(y))), f"{aid}/{e['word']}")
        elif kind == "fix":
            for q in res["points"]:
                log.check(all(_close(sys, _eval(sys, (i,), q), q, p.tol_fix) for i in range(sys.k)), f"{aid}/{q}")
        elif kind == "orbit-points":
            for e in res["points"]:
                y = _eval(sys, sys.parse_word(e["word"]), e["point"])
                log.check(_close(sys, y, e["point"], p.tol_fix), f"{aid}/{e['point']}")
        elif kind == "omega":
            for c in res["clusters"]:
                y = _eval(sys, sys.parse_word(c["witness"]), p.x)
                log.check(_close(sys, y, c["center"], p.tol_cluster), f"{aid}/{c['center']}")
        elif kind == "recurrent":
            for r in res["results"]:
                replay_verdict(sys, "recurrent", {"x": r["x"]}, r["verdict"], log, f"{aid}/{r['x']}")
        elif kind in ("nonwandering", "snw"):
            if "point" in res:
                pt = res["point"]
                replay_verdict(sys, kind, pt, pt["verdict"], log, f"{aid}/point")
        elif kind == "chain-graph":
            for q in res["queries"]:
                replay_verdict(sys, "chain", q, q["verdict"], log, f"{aid}/{q['a']}->{q['b']}")
        elif kind == "chain-equivalent":
            replay_verdict(sys, "chain", res, res["verdict"], log, aid)
        elif kind == "no-chain-cert":
            replay_verdict(sys, "no-chain", res, res["verdict"], log, aid)
        elif kind == "conjugacy":
            _replay_conjugacy(sys, SystemConfig(**p.target).build(), res, log, aid)
    return log
