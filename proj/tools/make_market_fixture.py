#!/usr/bin/env python3
"""Builds data/ieee14_market.json from data/ieee14.json.

Three bidding units at buses 1, 2 and 3 offer the Table I blocks every hour,
line 2-3 is limited to 40 MW and the daily load peaks at hour 11. The
synchronous condensers at buses 6 and 8 are kept as voltage-controlled buses
without active output.
"""

import argparse
import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent

BIDS = {
    1: [[24.1, 60], [26.9, 50], [29.7, 40]],
    2: [[26.7, 70], [29.6, 60], [32.7, 50]],
    3: [[35.7, 65], [42.6, 55], [51.1, 35]],
}

# Fraction of the static IEEE-14 load (259 MW) per hour, peak at hour 11.
PROFILE = [
    0.36, 0.34, 0.33, 0.33, 0.34, 0.37, 0.41, 0.45, 0.49, 0.51, 0.65, 0.53,
    0.52, 0.51, 0.50, 0.50, 0.51, 0.53, 0.52, 0.49, 0.46, 0.43, 0.40, 0.38,
]

RESERVE_FRACTIONS = {"r": 0.02, "sp": 0.03, "n1": 0.02, "n3": 0.03}


def build(base, profile):
    case = json.loads(base.read_text())
    case["name"] = "ieee14-market"
    for br in case["branches"]:
        if {br["from"], br["to"]} == {2, 3}:
            br["rating"] = 40.0
    static = sum(b["pd"] for b in case["buses"])
    gens = []
    for gid, bus in ((1, 1), (2, 2), (3, 3)):
        gens.append({
            "id": gid,
            "bus": bus,
            "p_min": 0.0 if gid < 3 else 10.0,
            "p_max": sum(q for _, q in BIDS[gid]),
            "p_set": 0.0,
            "startup_cost": 0.0 if gid < 3 else 300.0,
            "shutdown_cost": 0.0,
            "min_up": 1,
            "min_down": 1,
            "max_starts": 4,
            "initial_on": gid < 3,
            "reserve_caps": {"r": 5.0, "sp": 10.0, "n1": 10.0, "n3": 15.0},
            "reserve_prices": {"r": 3.0, "sp": 2.0, "n1": 1.0, "n3": 0.5},
        })
    case["generators"] = gens
    hours = []
    for f in profile:
        demand = round(static * f, 4)
        hours.append({
            "demand": demand,
            "reserve_req": {k: round(v * demand, 4)
                            for k, v in RESERVE_FRACTIONS.items()},
            "bids": {str(g): BIDS[g] for g in BIDS},
        })
    case["hours"] = hours
    return case


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--base", default=ROOT / "data" / "ieee14.json",
                        type=pathlib.Path)
    parser.add_argument("--out", default=ROOT / "data" / "ieee14_market.json",
                        type=pathlib.Path)
    parser.add_argument("--profile", type=float, nargs="*",
                        help="override the hourly load fractions")
    args = parser.parse_args()
    case = build(args.base, args.profile or PROFILE)
    args.out.write_text(json.dumps(case, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
