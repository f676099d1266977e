"""
Checking the structural hypotheses
==================================

The constructions need a cooperative field. The sampler below looks for
ordered pairs of states that break the ordering conditions; a non-monotone
system is caught with a replayable witness.
"""
from pathlib import Path

from delaycert import (CATALOG, catalog_system, check_quasimonotonicity, check_subhomogeneity, domain_box,
                       example15, linear_positive, load_system)

root = Path(__file__).resolve().parent.parent
bad = load_system(root / "configs" / "nonmonotone.toml")
rep = check_quasimonotonicity(bad, 2000, domain_box(bad), seed=0)
print("non-monotone fixture ok?", rep.ok, "first witness:", rep.violations[0])

for name in sorted(CATALOG):
    s = catalog_system(name)
    print(f"{name:10s} quasimonotone: {check_quasimonotonicity(s, 2000, domain_box(s), seed=0).ok}")

# Subhomogeneity f(lam x) <= lam f(x) holds for linear fields and fails for
# example15, whose saturating couplings do not scale.
for s in (linear_positive(), example15()):
    print(f"{s.name:10s} subhomogeneous (alpha=1): {check_subhomogeneity(s, 1.0, 2000, domain_box(s), seed=0).ok}")
