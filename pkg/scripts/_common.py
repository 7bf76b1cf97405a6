import argparse
from pathlib import Path

from fdatest.harness import ExperimentConfig

CONFIGS = Path(__file__).parent / "configs"


def parse(default_config: str, description: str):
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--config", type=Path, default=CONFIGS / default_config)
    p.add_argument("--replicates", type=int, help="override the replicate count")
    p.add_argument("--out", type=Path, help="also write the CSV table here")
    args = p.parse_args()
    cfg = ExperimentConfig.load(args.config)
    if args.replicates:
        cfg = cfg.replace(replicates=args.replicates)
    return cfg, args.out


def show(rows, keys, value, fmt="{:.3f}"):
    """Print ``rows`` pivoted to one line per ``keys`` tuple and one column per test."""
    tests = list(dict.fromkeys(r["test"] for r in rows))
    table = {}
    for r in rows:
        table.setdefault(tuple(r[k] for k in keys), {})[r["test"]] = r[value]
    print("  ".join(f"{k:>9}" for k in keys) + "  " + "  ".join(f"{t:>6}" for t in tests))
    for key, cells in table.items():
        left = "  ".join(f"{str(k):>9}" for k in key)
        print(left + "  " + "  ".join(f"{fmt.format(cells[t]):>6}" if t in cells else " " * 6 for t in tests))
