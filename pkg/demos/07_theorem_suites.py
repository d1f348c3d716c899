"""Run every randomized suite with a small trial count."""
from qmeter import SUITES, run_suite

for name in sorted(SUITES):
    res = run_suite(name, trials=50, seed=0)
    print(f"{name:10s} trials={res.trials:4d} violations={res.violations} max_defect={res.max_defect:.2e}")
