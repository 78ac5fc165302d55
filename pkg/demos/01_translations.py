"""Bright colorings of translations on an interval.

A translation x -> x + 1 on [0, 12] has no fixed point, so some finite closed
cover has every piece disjoint from its own image (with a positive gap).
Three colors suffice: blocks of length 0.8 repeating with period 2.4.  Adding
a second value x + 2 forces the colorer into its argmax split, which colors
the two branches separately and intersects the results.

Run:  python3 demos/01_translations.py [outdir]
"""

import sys
from pathlib import Path

from fpf_chroma import (MultiMapSpec, bound, build_complex, certify_fixed_point_free,
                        color_multimap, verify_coloring)
from fpf_chroma.svg import render_svg

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)

for branches in (["x0 + 1"], ["x0 + 1", "x0 + 2"]):
    m = MultiMapSpec.from_strings(1, branches)
    X = build_complex([[(0, 12)]], 0.1)

    cert = certify_fixed_point_free(m, X)
    print(f"f(x) = {{{', '.join(branches)}}} on [0, 12]")
    print(f"  fixed-point free with displacement >= {cert.margin:.4f}")

    C = color_multimap(m, X, cert)
    rep = verify_coloring(m, X, C)
    print(f"  {len(C)} classes (ledger bound {bound(1, m.n)}), "
          f"verifier: {'bright' if rep.bright else 'violations'}, margin {rep.margin:.3f}")
    for i, (cells, tag) in enumerate(zip(C.classes, C.provenance)):
        spans = sorted((X[c].lo[0], X[c].hi[0]) for c in cells)
        print(f"    class {i}: {len(cells):3d} cells starting {spans[0][0]:.1f}-{spans[0][1]:.1f}  [{tag}]")

    name = out / f"translation_n{m.n}.svg"
    name.write_text(render_svg(X, C.classes))
    print(f"  plot: {name}\n")
