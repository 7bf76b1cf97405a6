"""Empirical power curves for one process and shift family."""

from _common import parse, show

from fdatest.harness import run_power_curves

cfg, out = parse("power_t1.json", __doc__)
res = run_power_curves(cfg)
show(res.rows, ["family", "c"], "power")
print(f"\nwall time {res.wall_time:.1f} s")
if out:
    res.to_csv(out)
