"""Asymptotic power against n^(-1/2) eta from one large null sample."""

from _common import parse, show

from fdatest.harness import run_asymptotic_power

cfg, out = parse("asymptotic_sbm.json", __doc__)
res = run_asymptotic_power(cfg)
show(res.rows, ["family", "c"], "power")
print(f"\nwall time {res.wall_time:.1f} s")
if out:
    res.to_csv(out)
