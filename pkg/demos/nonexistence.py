"""Which (N, k) admit a lattice with the second longest shadow?

For c = (1, -2k) both the theta series and the shadow series are forced.  A
coefficient that is fractional, negative, or odd where vectors come in +-pairs
rules the lattice out.

Run:  python3 demos/nonexistence.py
"""
from shadowlat.qseries import kmax, long_shadow_obstructions

cases = [(1, k) for k in range(8, 17)] + [(2, k) for k in range(1, kmax(2) + 1)] + [(3, k) for k in (4, 5)]
for N, k in cases:
    obs = long_shadow_obstructions(N, k)
    if not obs:
        print(f"N={N:2d} k={k:2d}: nothing forbidden up to q^20")
        continue
    first = obs[0]
    kinds = sorted({o.kind for o in obs})
    print(f"N={N:2d} k={k:2d}: {', '.join(kinds):<24} first at {first.where} q^{first.exponent}: {first.coefficient}")
