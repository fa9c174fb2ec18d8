"""How requests are drawn and how a network output becomes a cache slot.

Run with ``python3 demos/popularity_and_codecs.py``. Prints only; nothing is
written to disk.
"""

import numpy as np

from starcache.catalog import Catalog, sample_request_pair, zipf_pmf
from starcache.env import FrequencyTable, decode_cache_equal_width, decode_cache_frequency_aware

np.set_printoptions(precision=3, suppress=True)
rng = np.random.default_rng(0)

# %% Popularity. Skew concentrates mass on the first few contents.
for alpha in (0.4, 0.8, 1.2):
    p = zipf_pmf(50, alpha)
    print(f"alpha={alpha}: top-5 mass {p[:5].sum():.3f}, top-15 mass {p[:15].sum():.3f}")

# %% A few slots of request pairs (T-user, R-user).
cat = Catalog(50, 0.8)
pairs = [tuple(sample_request_pair(cat, rng)) for _ in range(8)]
print("requests:", pairs)

# %% Equal-width decode: every content owns 1/F of [0, 1].
phi = np.linspace(0.0, 1.0, 11)
print("phi        ", phi)
print("equal-width", decode_cache_equal_width(phi, 50))

# %% Frequency-aware decode. After some traffic the popular contents own
# wider segments, so the same phi lands on more popular items.
table = FrequencyTable(50, chi=0.3)
for _ in range(2000):
    table.record(sample_request_pair(cat, rng))
print("segment widths (first 8):", table.widths()[:8])
print("freq-aware ", decode_cache_frequency_aware(phi, table))

# %% chi trades popularity tracking for reachability; chi=1 is equal-width again.
flat = FrequencyTable(50, chi=1.0)
flat.counts[:] = table.counts
assert np.array_equal(decode_cache_frequency_aware(phi, flat), decode_cache_equal_width(phi, 50))
print("chi=1 decode matches equal-width")
