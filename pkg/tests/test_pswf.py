import math

import numpy as np
import pytest
from numpy.polynomial import legendre as npleg

from memsl_imaging.errors import EigenvalueUnderflow, OrderOutOfRange, UnderflowOrder
from memsl_imaging.pswf import (
    NOISE_KERNEL_TOTAL,
    build_basis,
    coupling,
    eval_inside,
    eval_outside,
    evaluate,
    interval_integral,
    kernel_constant,
    noise_kernel,
    whole_line_integral,
    write_table,
)
from oracles import nystrom_eigenfunctions, nystrom_eigenvalues, sinc_transform

# Singular values of the quadrature-factored sinc operator (3000 x 2m GL nodes).
NYSTROM_C1 = [0.5725817806378825, 0.06279127414981518, 0.001237479328466507, 9.200977049574688e-06,
              3.717928558069414e-08, 9.491436733976414e-11, 1.671571583392295e-13]
NYSTROM_C307 = [0.97855810354345, 0.730028561494117, 0.2237529118223459, 0.02119242388219775,
                0.0008690356504864137, 2.130420302239396e-05, 3.561898174145257e-07, 4.342373279692038e-09,
                4.036678339423503e-11]
# 90-digit arithmetic on the spheroidal recurrence, for orders far beyond double-precision
# quadrature (c, j, lambda_j).
DEEP = [(3.07, 10, 1.7523893883451951e-15), (3.07, 30, 8.5799045508488262e-72),
        (0.5, 10, 4.9326336087372672e-32), (0.5, 20, 9.7419980069783706e-74),
        (6.0, 10, 2.2189805452387269e-9), (6.0, 24, 6.7864267496301783e-39)]


@pytest.mark.parametrize("c, gold", [(1.0, NYSTROM_C1), (3.07, NYSTROM_C307)])
def test_eigenvalues_match_frozen_oracle(c, gold):
    b = build_basis(c, len(gold) - 1)
    for j, ref in enumerate(gold):
        tol = 1e-9 if ref > 1e-10 else 1e-6  # oracle noise floor is ~1e-17 absolute
        assert b.eigenvalues[j] == pytest.approx(ref, rel=tol)


@pytest.mark.parametrize("c, j, ref", DEEP)
def test_tiny_eigenvalues_keep_relative_accuracy(c, j, ref):
    b = build_basis(c, j)
    assert b.eigenvalues[j] == pytest.approx(ref, rel=1e-11)
    assert b.log_eigenvalues[j] == pytest.approx(math.log(ref), abs=1e-11)


def test_live_oracle_small_c():
    sv = nystrom_eigenvalues(0.5)
    b = build_basis(0.5, 4)
    np.testing.assert_allclose(b.eigenvalues[:4], sv[:4], rtol=1e-9)


def test_spectrum_ordering_and_parity():
    b = build_basis(3.07, 25)
    lam = b.eigenvalues
    assert np.all(lam > 0) and np.all(lam < 1)
    assert np.all(np.diff(lam) < 0)
    assert b.parities[:4] == ("even", "odd", "even", "odd")
    assert b.legendre.flags.writeable is False


@pytest.mark.parametrize("c", [0.5, 3.07, 6.0, 12.0])
def test_trace_is_shannon_number(c):
    b = build_basis(c, int(2 * c) + 30)
    assert np.sum(b.eigenvalues) == pytest.approx(2 * c / math.pi, abs=1e-10)


def test_small_c_limit():
    c = 1e-3
    b = build_basis(c, 2)
    assert b.eigenvalues[0] == pytest.approx(2 * c / math.pi, rel=1e-6)


def test_eigenfunctions_match_oracle(basis):
    x, lam, funcs = nystrom_eigenfunctions(basis.c, 7)
    for j in range(7):
        mine = eval_inside(basis, j, x) / math.sqrt(basis.eigenvalues[j])
        ref = funcs[j] * np.sign(funcs[j] @ mine)
        assert np.max(np.abs(mine - ref)) < 1e-8


def test_interval_norm_and_orthogonality(basis):
    x, w = npleg.leggauss(200)
    psi = np.array([eval_inside(basis, j, x) for j in range(10)])
    gram = (psi * w) @ psi.T
    np.testing.assert_allclose(gram, np.diag(basis.eigenvalues[:10]), atol=1e-13)


@pytest.mark.parametrize("j", [0, 1, 4, 7])
@pytest.mark.parametrize("s", [1.3, -2.7, 6.5])
def test_outside_values_reproduce_the_sinc_transform(basis, j, s):
    ref = sinc_transform(lambda t: eval_inside(basis, j, t), basis.c, s) / basis.eigenvalues[j]
    assert eval_outside(basis, j, s) == pytest.approx(ref, abs=1e-10)


def test_inside_points_also_satisfy_the_eigen_equation(basis):
    for j in (0, 3, 6):
        ref = sinc_transform(lambda t: eval_inside(basis, j, t), basis.c, 0.37) / basis.eigenvalues[j]
        assert eval_inside(basis, j, 0.37) == pytest.approx(ref, abs=1e-10)


def test_continuity_at_the_aperture_edge(basis):
    for j in range(10):
        for edge in (-1.0, 1.0):
            a = evaluate(basis, j, edge)
            b = evaluate(basis, j, edge * (1 + 1e-9))
            assert abs(a - b) < 1e-7


def test_evaluate_and_values_agree(basis):
    s = np.linspace(-5, 5, 41)
    table = basis.values(s, [0, 5])
    np.testing.assert_allclose(table[1], evaluate(basis, 5, s), atol=1e-15)


def test_parity_of_functions(basis):
    s = np.array([0.2, 0.8, 1.7, 4.0])
    for j in range(6):
        np.testing.assert_allclose(evaluate(basis, j, -s), (-1) ** j * evaluate(basis, j, s), atol=1e-14)


def test_couplings(basis):
    assert build_basis(3.07, 0).couplings[0] == pytest.approx(1.3414909806171174, rel=1e-12)
    for j in range(1, 20, 2):
        assert coupling(basis, j) == 0.0
    for j in range(0, 20, 2):
        psi0 = evaluate(basis, j, 0.0)
        assert coupling(basis, j) == pytest.approx(math.sqrt(2 * math.pi / basis.c) * abs(psi0), rel=1e-12)


def test_whole_line_integral_from_interval_integral(basis):
    # int_R sinc = 1, so integrating the eigen equation over the line gives
    # lambda_j int_R psi_j = int_{-1}^{1} psi_j.
    for j in range(0, 12, 2):
        assert abs(whole_line_integral(basis, j)) == pytest.approx(
            abs(interval_integral(basis, j)) / basis.eigenvalues[j], rel=1e-10
        )
    x, w = npleg.leggauss(100)
    assert interval_integral(basis, 2) == pytest.approx(np.sum(w * eval_inside(basis, 2, x)), rel=1e-12)


def test_coupling_to_eigenvalue_ratio_grows(basis):
    ratio = [basis.couplings[j] / basis.eigenvalues[j] for j in range(0, 20, 2)]
    assert np.all(np.diff(ratio) > 0)


def test_order_errors(basis):
    with pytest.raises(OrderOutOfRange):
        evaluate(basis, basis.j_max + 1, 0.0)
    with pytest.raises(ValueError):
        eval_inside(basis, 0, 1.5)
    with pytest.raises(ValueError):
        eval_outside(basis, 0, 0.5)


def test_underflow_reports_the_last_safe_order():
    with pytest.raises(UnderflowOrder) as info:
        build_basis(0.5, 200)
    safe = info.value.largest_safe_order
    b = build_basis(0.5, safe)
    assert b.eigenvalues[-1] > 1e-300


def test_deep_orders_are_still_evaluable_off_interval():
    # lambda_20 ~ 1e-73: quadrature cannot resolve the transform, but the
    # continuation must still join the interval values smoothly.
    b = build_basis(0.5, 20)
    inside = eval_inside(b, 20, 1.0)
    outside = eval_outside(b, 20, 1.0 + 1e-9)
    assert outside == pytest.approx(inside, rel=1e-6)
    far = eval_outside(b, 20, np.array([2.0, 4.0, 8.0]))
    assert np.all(np.isfinite(far)) and np.all(np.abs(far) > abs(inside))


def test_eigenvalue_underflow_guard():
    b = build_basis(3.07, 4)
    import dataclasses

    fake = dataclasses.replace(b, log_eigenvalues=b.log_eigenvalues - 1000.0)
    with pytest.raises(EigenvalueUnderflow):
        eval_outside(fake, 2, 3.0)


def test_noise_kernel(basis):
    grid = np.linspace(-1, 1, 101)
    G = noise_kernel(basis, grid)
    assert G.truncation_order == 40
    assert np.all(G.values > 0)
    np.testing.assert_allclose(G.values, G.values[::-1], rtol=1e-12)
    direct = sum(basis.couplings[j] ** 2 * evaluate(basis, j, grid) ** 2 for j in range(0, 21, 2))
    assert np.all(G.values >= direct - 1e-14)
    assert kernel_constant(basis) == pytest.approx(NOISE_KERNEL_TOTAL, abs=1e-12)


def test_kernel_constant_for_other_bandwidths():
    for c in (0.5, 6.0):
        assert kernel_constant(build_basis(c, 4)) == pytest.approx(2.0, abs=1e-10)


def test_write_table(tmp_path, basis):
    path = write_table(build_basis(3.07, 3), tmp_path / "t.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "c,j,lambda_j,A_j,parity"
    assert len(lines) == 5
    assert lines[2].startswith("3.07,1,") and lines[2].endswith(",0.0,odd")
