"""
Locating the stabilizability threshold
======================================

Scale the drift matrix of the four-state system by theta. Somewhere past
theta = 1 no feedback can make the state decay in mean square. The
certified intervals pin down where.
"""

# %%
from msrate import certify, model, rnvi, systems

base = systems.four_dim()
rows = []
for theta in systems.theta_grid():
    spec = model.scale_A(base, theta)
    cert = certify.aggregate(spec, rnvi.run_continuation(spec))
    rows.append((theta, cert.rho_low, cert.rho_up))

for theta, lo, up in rows:
    if up < 1:
        verdict = "stabilizable"
    elif lo > 1:
        verdict = "not stabilizable"
    else:
        verdict = "undecided"
    print(f"theta={theta:.4f}  [{lo:.4f}, {up:.4f}]  {verdict}")

# %%
# The upper bound crosses 1 first and the lower bound one grid step
# later, so the threshold lies in a window two grid steps wide.
last_ok = max(t for t, _, up in rows if up < 1)
first_bad = min(t for t, lo, _ in rows if lo > 1)
print(f"threshold in ({last_ok:.4f}, {first_bad:.4f})")
