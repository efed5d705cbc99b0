"""Write every figure-data CSV into one directory.

    python3 scripts/reproduce_figures.py --out results/
"""
import argparse
import time
from pathlib import Path

from vortex_induct import cli

RUNS = [
    ("current_l1_5_10.csv", ["current", "--oam-list", "1,5,10"]),
    ("field_map_entering.csv", ["field-map", "--electron-z=-1e-5"]),
    ("field_map_middle.csv", ["field-map", "--electron-z=0"]),
    ("circuit_inductance.csv", ["circuit", "--inductance-list", "0,0.05,0.1,0.2"]),
    ("circuit_l5.csv", ["circuit", "--oam-list", "5", "--inductance-list", "0.1"]),
    ("circuit_l10.csv", ["circuit", "--oam-list", "10", "--inductance-list", "0.1"]),
    ("autocorr_l1_5_10.csv", ["autocorr", "--oam-list", "1,5,10"]),
    ("offset_l1_5_10.csv", ["offset", "--oam-list", "1,5,10"]),
    ("visibility.csv", ["visibility"]),
    ("energy_loss.csv", ["energy-loss", "--oam-list", "1,10,100"]),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--config", default=None)
    ap.add_argument("--skip", default="", help="comma-separated file names to skip")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    skip = set(filter(None, args.skip.split(",")))
    status = 0
    for name, argv in RUNS:
        if name in skip:
            continue
        if args.config:
            argv = argv + ["--config", args.config]
        t0 = time.perf_counter()
        code = cli.main(argv + ["--output", str(out / name)])
        print(f"{name:28s} exit {code}  {time.perf_counter() - t0:6.2f} s")
        status = status or code
    return status


if __name__ == "__main__":
    raise SystemExit(main())
