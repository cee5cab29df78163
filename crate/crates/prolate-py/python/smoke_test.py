"""Smoke test for the prolate_py extension module.

Build and install first (see the README), then run
    python crates/prolate-py/python/smoke_test.py
"""

import math

import prolate_py as p


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    h = p.Family.hermite()
    assert h.size == 1
    assert h.support[0] == -math.inf

    rep = h.solve(10, 0.7)
    assert rep.order == 2, rep
    assert rep.max_residual() < 1e-8
    assert len(rep.diff_coefficients(0.1)) == 3
    d = rep.commutation_defects()
    assert d["continuous"] < 1e-6 and d["discrete"] < 1e-8 and not d["boundary_leaks"], d
    bad = rep.commutation_defects(perturb=1e-2)
    assert bad["continuous"] > 1e-3 and bad["boundary_leaks"], bad

    # ground state kernel at t where the window covers one index
    k = h.kernel(0, 0.5, 0.3, -0.2)[0][0]
    assert close(k, math.exp(-(0.09 + 0.04) / 2) / math.sqrt(math.pi), 1e-13), k

    j = h.j_matrix(4, 0.5, full=True)
    assert all(close(j[i][i], 1.0, 1e-7) for i in range(5))

    sc = rep.spectral_check(count=5)
    assert max(sc["residuals"]) < 1e-4, sc

    s = p.Family.soliton(3)
    srep = s.solve(1, 0.4)
    beta = srep.coefficient("(L, 2sinh x)") / srep.coefficient("{k², L}")
    assert close(beta, -1.0, 1e-8), beta

    m = p.Family.hermite_matrix([[1.0, 0.3], [0.3, 2.0]])
    assert m.size == 4

    try:
        p.Family.laguerre(-2.0)
    except p.ProlateError as e:
        assert "a > -1" in str(e)
    else:
        raise AssertionError("invalid parameter accepted")

    print("smoke test passed:", rep)


if __name__ == "__main__":
    main()
