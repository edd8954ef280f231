"""Render a PNG from a CSV written by the corrnoise CLI.

    python scripts/plot_csv.py trace.csv trace.png
    python scripts/plot_csv.py sweep.csv sweep.png --report sweep.json

The CSV kind is read off its header: coefficient lists (no header), simulate
traces, sweep rows and bound records are supported.
"""

import argparse
import csv
import json
import os

from corrnoise import plotting


def _num(s):
    if s in ("", None):
        return None
    if s in ("true", "false"):
        return s == "true"
    return float(s)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("csv")
    ap.add_argument("png")
    ap.add_argument("--report", help="sweep JSON report with fitted slopes (default <csv stem>.json)")
    ap.add_argument("--axis", default=None, help="sweep axis label when no report is available")
    args = ap.parse_args(argv)

    with open(args.csv, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    head = lines[0].split(",")
    if len(head) == 1 and head[0] not in ("step",):
        plotting.plot_coeffs(args.png, [float(s) for s in lines if s.strip()], os.path.basename(args.csv))
        return
    rows = list(csv.DictReader(lines))
    if head[:2] == ["step", "suboptimality"]:
        plotting.plot_trace(args.png, [int(r["step"]) for r in rows], [float(r["suboptimality"]) for r in rows])
    elif "algorithm" in head:
        report = args.report or os.path.splitext(args.csv)[0] + ".json"
        fits, axis = {}, args.axis or "dimension"
        if os.path.isfile(report):
            with open(report, encoding="utf-8") as fh:
                rep = json.load(fh)
            fits, axis = rep.get("fits", {}), rep.get("axis", axis)
        rows = [{k: (v if k == "algorithm" else _num(v)) for k, v in r.items()} for r in rows]
        plotting.plot_sweep(args.png, axis, rows, fits)
    elif "kappa" in head:
        rows = [{k: (v if k in ("profile", "lambda_support") else _num(v)) for k, v in r.items()} for r in rows]
        plotting.plot_bounds(args.png, rows)
    else:
        raise SystemExit(f"unrecognized CSV header: {','.join(head)}")


if __name__ == "__main__":
    main()
