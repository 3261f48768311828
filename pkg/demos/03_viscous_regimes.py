"""
Dissipation strength and long-time behaviour
============================================

With nu > 0 the H^{1/2} norm decays once dissipation wins.  We compare
alpha = 1.25, 1.5, 2 at nu = 0.5, then the critical alpha = 1 with data
below and above the viscosity.
"""

import os
from dataclasses import replace
from pathlib import Path

from nonlocal_transport.config import parse_config
from nonlocal_transport.experiment import read_series_csv, run_scenario

root = Path(os.environ.get("NLT_OUTPUT_ROOT", "demo_output"))
text = Path(__file__).with_name("configs").joinpath("viscous_supercritical.ini").read_text()

for alpha in (1.25, 1.5, 2.0):
    spec = parse_config(text, overrides=[f"solver.alpha={alpha}", "solver.t_end=4",
                                         "scenario.snapshot_times=0, 1, 2, 4",
                                         f"scenario.output_dir={root / f'viscous_{alpha}'}"])
    res = run_scenario(spec)
    recs = read_series_csv(res.run_dir / "series.csv")
    print(f"alpha = {alpha}: {res.summary['outcome']['status']}, "
          f"hhalf {recs[0].hhalf:.4f} -> {recs[-1].hhalf:.4f}, max h2 {max(r.h2 for r in recs):.3f}")

# Critical case: nu = 2 exceeds max theta_0 = 1, nu = 0.5 does not.
for name in ("critical_small", "critical_large"):
    text = Path(__file__).with_name("configs").joinpath(f"{name}.ini").read_text()
    spec = parse_config(text, overrides=["solver.t_end=4", f"scenario.output_dir={root / name}"])
    res = run_scenario(spec)
    m = res.summary["monitors"]["hhalf_nonincreasing"]
    tag = " (exploratory)" if spec.exploratory else ""
    print(f"{name}{tag}: {res.summary['outcome']['status']}, hhalf_nonincreasing: {m['status']}")
