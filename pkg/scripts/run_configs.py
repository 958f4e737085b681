"""Run every config in scripts/configs (or the ones given) and write reports plus plot CSVs.

    python3 scripts/run_configs.py --out runs/
    python3 scripts/run_configs.py scripts/configs/chebyshev.json --out runs/
"""

import argparse
import json
import logging
from pathlib import Path

from semirec.config import load
from semirec.replay import replay_report
from semirec.report import SCHEMAS, emit_plot_data, run

HERE = Path(__file__).resolve().parent


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("configs", nargs="*", type=Path)
    ap.add_argument("--out", type=Path, default=Path("runs"))
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    paths = args.configs or sorted((HERE / "configs").glob("*.json"))
    for path in paths:
        cfg = load(path)
        report = run(cfg)
        dest = args.out / path.stem
        dest.mkdir(parents=True, exist_ok=True)
        (dest / "report.json").write_text(json.dumps(report, indent=2))
        for aid, entry in report["analyses"].items():
            no_edges = entry["kind"] == "chain-graph" and "edges" not in entry["result"]
            if entry["kind"] in SCHEMAS and not no_edges:
                (dest / f"{aid}.csv").write_text(emit_plot_data(report, aid))
            if entry["kind"] == "chain-graph" and any(q["verdict"]["status"] == "CertifiedYes" for q in entry["result"]["queries"]):
                (dest / f"{aid}-chains.csv").write_text(emit_plot_data(report, aid, "chains"))
        log = replay_report(cfg, json.loads(json.dumps(report)))
        logging.info("%s: %d analyses in %.2fs, %d replays, %d failures -> %s",
                     path.name, len(report["analyses"]), report["timing"]["total"], log.checked, len(log.failures), dest)


if __name__ == "__main__":
    main()
