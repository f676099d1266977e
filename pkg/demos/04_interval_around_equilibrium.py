"""
An interval around a nonzero equilibrium
========================================

x' = 1 - 2 x(t) + x(t - d(t)) has equilibrium x* = 1. Shifting u = x - 1
gives u' = -2u + u(t - d) above the equilibrium, and the mirrored system
below it; each side gets its own corner.
"""
from delaycert import CertifyConfig, certify_shifted, scalar_shifted, shift_to_origin
from delaycert.systems import eval_undelayed_field

sys = scalar_shifted()
up, down = shift_to_origin(sys, "above"), shift_to_origin(sys, "below")
for u in (0.0, 0.4, 0.8):
    print(f"u = {u}: above {eval_undelayed_field(up, [u])}, below {eval_undelayed_field(down, [u])}")

cert = certify_shifted(sys, [1.8], [0.2], CertifyConfig(trials=10))
print(f"interval [{cert.zeta_lower[0]:.4f}, {cert.zeta_upper[0]:.4f}] -> {cert.status}")
