"""Two values in the plane: f(x, y) = {(x+1, y), (x, y+1)} on [0, 8]^2.

The interesting step is the classification: on axis 0 the branch (x+1, y)
always has the larger first coordinate, so the argmax multiplicity is 1 on
every cell and the whole square is one stratum.  The coloring then splits f
into g = (x+1, y) and h = (x, y+1), colors each single-valued map and takes
pairwise intersections.

Run:  python3 demos/02_plane.py [outdir]
"""

import sys
import time
from collections import Counter
from pathlib import Path

from fpf_chroma import (MultiMapSpec, bound, build_complex, certify_fixed_point_free, classify,
                        color_multimap, verify_coloring)
from fpf_chroma.svg import render_svg

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)

m = MultiMapSpec.from_strings(2, [["x0 + 1", "x1"], ["x0", "x1 + 1"]])

part = classify(m, build_complex([[(0, 8), (0, 8)]], 0.25), 0)
print("argmax multiplicity on axis 0:", dict(Counter(getattr(v, "M", "ambiguous") for v in part.multiplicity.values())))
print("ambiguous cells:", len(part.ambiguous))

t = time.perf_counter()
X = build_complex([[(0, 8), (0, 8)]], 0.25)
cert = certify_fixed_point_free(m, X)
C = color_multimap(m, X, cert)
rep = verify_coloring(m, X, C)
print(f"{len(C)} classes in {time.perf_counter() - t:.2f}s, bound(2, 2) = {bound(2, 2)}")
print(f"verifier: {'bright' if rep.bright else 'violations'}, smallest margin {rep.margin:.3f}")
print("class sizes:", [len(c) for c in C.classes])

(out / "plane.svg").write_text(render_svg(X, C.classes))
print("plot:", out / "plane.svg")
