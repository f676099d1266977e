"""
Global behaviour of example15 in two stages
===========================================

The backward run of example15 stays bounded, so the growing-family
construction does not apply. Instead: above x1 = 3/2 the first component
decreases at rate at least 1/2, so every run enters {x1 <= 3/2} within
2 (x1(0) - 3/2) plus one delay bound; inside, the local region takes over.
"""
import numpy as np

from delaycert import (CertifyConfig, EventSpec, HistorySegment, IntegratorConfig, certify_global, example15,
                       first_crossing, integrate_dde)
from delaycert.sampling import sweep_inputs

sys = example15(r=1.0)
print(certify_global(sys, [1.0, 1.0], None, CertifyConfig(trials=2)).reason)

# One explicit history: constant (3, 1).
cfg = IntegratorConfig(step=0.05)
tr = integrate_dde(sys, HistorySegment.constant([3.0, 1.0], sys.r), (0.0, 50.0), cfg)
tc = first_crossing(tr, EventSpec(0, 1.5, "downward"))
print(f"history (3, 1): crossing at t = {tc:.3f}, bound {2 * (3.0 - 1.5) + sys.r:.3f}")

# Random histories with x1 up to 10 and random delays.
worst = 0.0
for k in range(20):
    hist, delays, kind = sweep_inputs(0, 99, k, np.zeros(2), np.array([10.0, 5.0]), sys.r, sys.m)
    tr = integrate_dde(sys, hist, (0.0, 60.0), cfg, delays=delays)
    x0 = hist(0.0)
    tc = 0.0 if x0[0] <= 1.5 else first_crossing(tr, EventSpec(0, 1.5, "downward"))
    bound = max(x0[0] - 1.5, 0.0) * 2 + sys.r
    worst = max(worst, tc / bound)
    print(f"  trial {k:2d} ({kind:10s}) x1(0)={x0[0]:5.2f} crossing {tc:6.3f} <= {bound:6.3f}")
print("largest crossing / bound:", round(worst, 3))

# The CLI runs the same sweep and then checks convergence:
#   delaycert escape-time --config configs/example15_escape.toml
