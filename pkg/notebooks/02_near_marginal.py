"""
A four-state system on the edge of stabilizability
==================================================

Open loop, this system grows in mean square. The question is whether any
feedback can make it decay, and by how much. The answer is yes, but only
barely, so both bounds have to be sharp to decide.
"""

# %%
import numpy as np

from msrate import certify, model, rnvi, systems

spec = systems.four_dim()
print("\n".join(model.validate(spec).lines()))

# %%
# A cheap bracket from one step of the Riccati map at the identity.
nb = certify.norm_bounds(spec)
print(f"one-step bracket: [{nb.alpha:.3f}, {nb.beta:.3f}]")

# %%
# That bracket straddles 1, so it says nothing. The continuation run does.
result = rnvi.run_continuation(spec)
cert = certify.aggregate(spec, result)
print(f"rho* in [{cert.rho_low:.4f}, {cert.rho_up:.4f}]")
print(f"best bounds at tau_low={cert.tau_low:g}, tau_up={cert.tau_up:g}")
print("K_up =\n", np.round(cert.K_up, 4))

# %%
# Small tau needs many more inner iterations here than in the
# two-state case: the regularizer is what keeps the map contractive.
for rec in result.records[::8] + [result.records[-1]]:
    print(f"tau={rec.tau:8.2e}  iters={rec.inner_iters:4d}  gamma={rec.gamma:.6f}")

# %%
# The gap between the bounds is fully explained by lambda_max(P^{-1}).
worst = max(abs((s.U - s.L) - s.Delta) for s in cert.per_tau)
print(f"largest gap identity error over {len(cert.per_tau)} stages: {worst:.1e}")
