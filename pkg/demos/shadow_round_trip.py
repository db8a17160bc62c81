"""Decompose a theta series in the g1/g2 basis and predict the shadow from it.

Run:  python3 demos/shadow_round_trip.py
"""
from shadowlat.cli import load_lattice_file
from shadowlat.enumeration import coset_theta, minimum, root_system
from shadowlat.lattice import mod_params, shadow
from shadowlat.qseries import GRID, decompose_theta, format_series, shadow_prediction

PREC = 8 * GRID

for name in ["L_2_2", "L_2_3", "L_3_5", "L_2_6"]:
    lf = load_lattice_file(name)
    L, N = lf.lattice, lf.N
    k = L.dim // mod_params(N).sigma0
    print(f"== {name}: dim {L.dim}, det {L.det}, min {minimum(L)}, roots {root_system(L)}")

    dr = decompose_theta(L, N, k, prec=PREC)
    print("  c =", [str(x) for x in dr.c], " m =", dr.m_shadow)

    # the same coefficients, fed through s1 and s2, give the shadow
    pred = shadow_prediction(dr, N, k, PREC)
    seen = coset_theta(shadow(L), PREC, scale=N)
    print("  predicted :", format_series(pred))
    print("  enumerated:", format_series(seen))
    print("  agree     :", pred == seen)
