"""One slot of physics: draw CSI, shape the surface, compare delivery modes.

The surface splits each element's energy between the two half-spaces; in
the coupled model the transmission phase is pinned a quarter turn away
from the reflection phase, which leaves only a sign per element to choose.
"""

import numpy as np

from starcache.channel import FadingParams, Geometry, draw_channel_set
from starcache.env import project_total_power
from starcache.phy import BeamformingDecision, evaluate_link, noise_power
from starcache.stars import StarsProfile, coefficient_matrices, couple_transmission_phase, validate

rng = np.random.default_rng(3)
M, N = 4, 8
geometry = Geometry.random_users(rng)
channels = draw_channel_set(geometry, FadingParams(), rng, M, N)
sigma2 = noise_power()

theta_R = rng.uniform(0, 2 * np.pi, N)
independent = StarsProfile(np.full(N, np.sqrt(0.5)), rng.uniform(0, 2 * np.pi, N), theta_R)
coupled = StarsProfile(independent.beta_T, couple_transmission_phase(theta_R, 0b10110010), theta_R)
print("independent profile violations under the coupled rule:", len(validate(independent, "coupled")))
print("coupled profile violations:", len(validate(coupled, "coupled")))

P = 0.1  # W per antenna
Pb = np.sqrt(P / 2) * (rng.standard_normal((2, M)) + 1j * rng.standard_normal((2, M)))
Pb_T, Pb_R = project_total_power(Pb[0], Pb[1], M * P)
decision = BeamformingDecision(Pb_T, Pb_R, Pc_T=1e-6, Pc_R=1e-6)

# %% The mode follows from which requests the surface's own cache can serve.
for hits, label in [((True, True), "both cached at surface"), ((True, False), "T-user only"),
                    ((False, False), "neither")]:
    for name, prof in (("independent", independent), ("coupled", coupled)):
        T, R = coefficient_matrices(prof)
        mode, rates, P_w = evaluate_link(channels, T, R, decision, hits, False, 1e6, sigma2)
        print(f"{label:24s} {name:11s} {mode.value}: rates {rates[0] / 1e3:9.1f} / {rates[1] / 1e3:9.1f} kb/s, "
              f"P_w {P_w:.2e} W")

# %% Searching the coupled sign pattern exhaustively for the T-user's rate.
best = max(range(2**N), key=lambda m: evaluate_link(
    channels, *coefficient_matrices(StarsProfile(independent.beta_T, couple_transmission_phase(theta_R, m), theta_R)),
    decision, (False, False), False, 1e6, sigma2)[1][0])
print(f"best mask for the T-user: {best:0{N}b}")
