"""Where colorings cannot exist: fixed points.

A bright coloring exists exactly when the map is fixed-point free, so the
pipeline certifies that first.  x -> x^2 on [0, 2] fixes 0 and 1.  The pair
{x + 1, 3 - x} has a collision at x = 1 (both values equal 2), but 3 - x also
fixes x = 1.5, so on [0, 2] there is nothing to color.  Cutting the domain
to [0, 1.4] keeps the collision and drops the fixed point; the collision
cells then form their own stratum (tagged L).

Run:  python3 demos/03_fixed_points.py
"""

from fpf_chroma import (CounterexampleReport, MultiMapSpec, build_complex, certify_fixed_point_free,
                        color_multimap, verify_coloring)

cases = [
    (["x0*x0"], (0, 2)),
    (["x0 + 1", "3 - x0"], (0, 2)),
    (["x0 + 1", "3 - x0"], (0, 1.4)),
]

for branches, (a, b) in cases:
    m = MultiMapSpec.from_strings(1, branches)
    X = build_complex([[(a, b)]], 0.1)
    res = certify_fixed_point_free(m, X)
    label = f"{{{', '.join(branches)}}} on [{a}, {b}]"
    if isinstance(res, CounterexampleReport):
        print(f"{label}: fixed point of branch {res.branch} at x = {res.point[0]:.6g}")
        continue
    C = color_multimap(m, X, res)
    rep = verify_coloring(m, X, C)
    stages = sorted({tag.split(":")[0] for tag in C.provenance})
    print(f"{label}: {len(C)} classes, {'bright' if rep.bright else 'violations'}, stages {stages}")
