"""Render limit sets of the round and the bent genus 2 groups.

    python3 scripts/limit_sets.py [outdir] [--theta 0.6]
"""
import argparse
from pathlib import Path

from geoscan.fixtures import bend, conjugate_all, genus2_fuchsian
from geoscan.holonomy import MobiusMatrix
from geoscan.limitset import fit_circle, sample_limit_set, write_csv, write_svg


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("outdir", nargs="?", default="limitsets")
    ap.add_argument("--theta", type=float, default=0.6)
    ap.add_argument("--points", type=int, default=10_000)
    ap.add_argument("--max-word", type=int, default=2000)
    args = ap.parse_args()
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)

    disk = MobiusMatrix(1, -1j, 1, 1j)
    round_group = conjugate_all(genus2_fuchsian(), disk)
    groups = {"fuchsian": round_group, f"bent_{args.theta:g}": bend(round_group, args.theta)}
    for name, mats in groups.items():
        s = sample_limit_set(mats, args.points, args.max_word, seed=0)
        fit = fit_circle(s)
        write_svg(s, fit, out / f"{name}.svg")
        write_csv(s, out / f"{name}.csv")
        print(f"{name:12s} {fit.kind:6s} max residual {fit.max_residual:.3e}  -> {out / name}.svg")


if __name__ == "__main__":
    main()
