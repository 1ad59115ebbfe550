"""Run the bundled verification corpus and summarise each check."""

import time

from quenchlab.corpus import CHECK_NAMES, RUNNERS

for name in CHECK_NAMES:
    t0 = time.perf_counter()
    rep = RUNNERS[name]()
    dt = time.perf_counter() - t0
    status = "ok" if rep.passed else "FAILED"
    print(f"{name:16s} {status:6s} instances={rep.instances_run:7d}  max_violation={rep.max_violation: .2e}  {dt:5.1f}s")
