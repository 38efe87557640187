"""
How noise slows the best achievable decay
=========================================

A two-state system whose drift and input both carry the same scalar noise.
We certify an interval for the optimal mean-square rate at several noise
levels and look at how the interval and the solver effort change.
"""

# %%
import numpy as np

from msrate import certify, rnvi, systems

# %%
# The continuation solver walks tau from 0.5 down to 1e-5. Each stage gives
# a pair of bounds; the certificate keeps the best of each.
for sigma in systems.TWO_DIM_SIGMAS:
    spec = systems.two_dim(sigma)
    result = rnvi.run_continuation(spec)
    cert = certify.aggregate(spec, result)
    iters = [r.inner_iters for r in result.records]
    print(f"sigma={sigma:3.1f}  rho* in [{cert.rho_low:.4f}, {cert.rho_up:.4f}]"
          f"  width {cert.width:.1e}  inner iters {min(iters)}..{max(iters)}")

# %%
# More noise, slower decay. The interval stays narrow throughout.
#
# The gain attached to the upper bound is a plain linear feedback
# u = -K x. Its own rate must fall inside the certified interval.
spec = systems.two_dim(2.0)
cert = certify.aggregate(spec, rnvi.run_continuation(spec))
print("K_up =", np.round(cert.K_up, 4))
print("rate of K_up =", round(certify.closed_loop_rate(spec, cert.K_up), 6))

# %%
# How the two bounds close in as tau shrinks:
for s in cert.per_tau[::6]:
    print(f"tau={s.tau:8.2e}  J in [{s.J_low:+.5f}, {s.J_up:+.5f}]  Delta={s.Delta:.2e}")
