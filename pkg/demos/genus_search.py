"""Find the long-shadow lattices of a small level by walking Kneser neighbours.

Run:  python3 demos/genus_search.py [N k]
"""
import sys
import time

from shadowlat.cli import cmd_classify
from shadowlat.enumeration import minimum, root_system
from shadowlat.isometry import automorphism_group

cells = [(7, 1), (11, 1), (3, 2), (5, 2), (2, 2)]
if len(sys.argv) == 3:
    cells = [(int(sys.argv[1]), int(sys.argv[2]))]

for N, k in cells:
    t = time.perf_counter()
    res, matches = cmd_classify(N, k)
    sizes = [len(r.classes) for r in res.runs]
    print(f"(N,k) = ({N},{k}): genus classes {sizes}, complete {res.complete}, {time.perf_counter() - t:.1f} s")
    for L, hit in zip(res.lattices, matches):
        grp = automorphism_group(L)
        print(f"   min {minimum(L)}  roots {root_system(L)}  |Aut| {grp.order}  corpus: {', '.join(hit) or '-'}")
        print("  ", L.as_list())
