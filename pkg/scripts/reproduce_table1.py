"""Sizes and powers (shift 0.8 t) of all five tests under sBm contamination."""

from _common import parse, show

from fdatest.harness import run_robustness

cfg, out = parse("table1.json", __doc__)
res = run_robustness(cfg)
for quantity in ("size", "power"):
    print(f"\n{quantity}s (R = {cfg.replicates}, n = {cfg.n})")
    show([r for r in res.rows if r["quantity"] == quantity], ["epsilon"], "rate")
print(f"\nwall time {res.wall_time:.1f} s")
if out:
    res.to_csv(out)
