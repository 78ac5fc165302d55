import numpy as np
import pytest

from fpf_chroma.exprdsl import ExprError
from fpf_chroma.geometry import Cell, FiniteSet, build_complex
from fpf_chroma.multimap import (CounterexampleReport, EvaluationError, FpfCertificate, Inconclusive,
                                 MultiMapSpec, certify_fixed_point_free, continuity_report, enclose,
                                 evaluate)


def spec(k, *branches, **kw):
    return MultiMapSpec.from_strings(k, list(branches), **kw)


def test_spec_validation():
    with pytest.raises(ValueError):
        MultiMapSpec(1, ())
    with pytest.raises(ExprError):
        spec(1, ["x1"])


def test_evaluate_examples():
    assert evaluate(spec(1, "x0+1", "x0+2"), (0,)) == FiniteSet([(1,), (2,)])
    collided = evaluate(spec(1, "x0+1", "2-x0"), (0.5,))
    assert len(collided) == 1 and collided == FiniteSet([(1.5,)])
    two = evaluate(spec(2, ["x0+1", "x1"], ["x0", "x1+1"]), (0, 0))
    assert two.array().tolist() == [[0, 1], [1, 0]]


def test_evaluate_error_names_branch():
    with pytest.raises(EvaluationError) as exc:
        evaluate(spec(1, "x0", "sqrt(x0)"), (-1,))
    assert exc.value.branch == 1


def test_enclose_examples():
    c = Cell(7, (0.0,), (1.0,))
    assert enclose(spec(1, "x0+1"), c).boxes[0, 0] == pytest.approx([1, 2])
    assert enclose(spec(1, "x0*x0"), Cell(0, (-1.0,), (2.0,))).boxes[0, 0] == pytest.approx([0, 4])
    b = enclose(spec(1, "x0+1", "x0+3"), c).boxes
    np.testing.assert_allclose(b[:, 0], [[1, 2], [3, 4]])
    with pytest.raises(EvaluationError) as exc:
        enclose(spec(1, "1/x0"), Cell(3, (-1.0,), (1.0,)))
    assert exc.value.cell == 3 and exc.value.branch == 0


def test_enclosure_soundness_sampled():
    m = spec(2, ["sin(x0)*x1", "exp(-x0)"], ["x0*x0 - x1", "max(x0, x1)"])
    rng = np.random.default_rng(0)
    X = build_complex([[(-2, 2), (-1, 1)]], 0.5)
    for c in X.cells:
        boxes = enclose(m, c).boxes
        for _ in range(20):
            x = np.array(c.lo) + np.array(c.widths) * rng.random(2)
            for j in range(m.n):
                y = m.branch_point(j, x)
                assert np.all(boxes[j, :, 0] <= y) and np.all(y <= boxes[j, :, 1])


def test_certify_translation():
    X = build_complex([[(0, 10)]], 10)
    r = certify_fixed_point_free(spec(1, "x0+1"), X, 0)
    assert isinstance(r, FpfCertificate)
    assert r.margin == pytest.approx(1, abs=1e-12) and r.margin <= 1


def test_certify_square_finds_fixed_point():
    r = certify_fixed_point_free(spec(1, "x0*x0"), build_complex([[(0, 2)]], 0.1))
    assert isinstance(r, CounterexampleReport)
    x = r.point[0]
    assert abs(x * x - x) <= 1e-9
    assert min(abs(x), abs(x - 1)) <= 1e-9
    # away from 0 the witness is the other fixed point
    r = certify_fixed_point_free(spec(1, "x0*x0"), build_complex([[(0.5, 2)]], 0.1))
    assert r.point[0] == pytest.approx(1, abs=1e-9)


def test_certify_sine_delta_against_grid_oracle():
    grid = np.linspace(0, 10, 200_001)
    oracle = float(np.min(np.abs(0.1 * np.sin(grid) + 0.5)))
    assert oracle == pytest.approx(0.4, abs=1e-9)
    r = certify_fixed_point_free(spec(1, "x0 + 0.1*sin(x0) + 0.5"), build_complex([[(0, 10)]], 1), 4)
    assert isinstance(r, FpfCertificate)
    assert 0.4 - 1e-12 <= r.margin <= oracle


def test_certify_delta_goal_refines():
    m = spec(1, "2*x0 + 0.5", delta_goal=0.45)
    X = build_complex([[(0, 2)]], 1)
    r = certify_fixed_point_free(m, X, 6)
    assert r.depth > 0 and r.margin > certify_fixed_point_free(spec(1, "2*x0 + 0.5"),
                                                              build_complex([[(0, 2)]], 1), 6).margin


def test_certify_inconclusive_and_guard():
    # tangential fixed point at 0.3; without refinement the cell stays suspect
    # unless the witness search lands on it
    m = spec(1, "x0 + (x0 - 0.3)*(x0 - 0.3)")
    r = certify_fixed_point_free(m, build_complex([[(0, 1)]], 1), 0, refine=False)
    assert isinstance(r, (Inconclusive, CounterexampleReport))
    with pytest.raises(ValueError):
        certify_fixed_point_free(m, build_complex([[(0, 1)]], 1), -1)


def test_certify_mutates_only_by_refinement():
    X = build_complex([[(0, 2)]], 1)
    certify_fixed_point_free(spec(1, "x0 + 0.3*sin(5*x0) + 0.31"), X, 8)
    assert X.leaves([0, 1]) == set(X.active_ids)


def test_continuity_report():
    X = build_complex([[(0, 1)]], 0.25)
    r = continuity_report(spec(1, "x0+1", "x0+2"), X, 500, seed=1)
    assert r["lipschitz_estimate"] == pytest.approx(1, abs=1e-9)
    r = continuity_report(spec(1, "2*x0"), X, 500, seed=1)
    assert r["lipschitz_estimate"] == pytest.approx(2, abs=1e-9)
    assert continuity_report(spec(1, "5"), X, 100)["lipschitz_estimate"] == 0


def test_displacement_cancellation_is_exact():
    from fpf_chroma.exprdsl import Num, eval_point
    m = spec(2, ["x0 + 1", "x1"], ["3 - x0 + x0*x1", "x0 + x1 - 2"], ["sin(x0) + x0", "-x1 + x1"])
    disp = m.displacement_exprs()
    assert disp[0][0] == Num(1.0) and disp[0][1] == Num(0.0)
    rng = np.random.default_rng(5)
    for _ in range(200):
        p = rng.uniform(-3, 3, 2)
        for j in range(m.n):
            for a in range(2):
                want = eval_point(m.branches[j][a], p) - p[a]
                assert eval_point(disp[j][a], p) == pytest.approx(want, abs=1e-12)
