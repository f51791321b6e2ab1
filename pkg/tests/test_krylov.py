import numpy as np

from cgorecon.krylov import operator_from, solve


def test_solves_diagonal_system():
    diagonal = np.linspace(1.0, 3.0, 64).reshape(4, 4, 4) + 0.5j
    operator = operator_from((4, 4, 4), lambda x: diagonal * x)
    rhs = np.ones(64, dtype=complex)
    x, info, count = solve(operator, rhs, 1e-12, 200)
    assert info == 0
    assert count > 0
    np.testing.assert_allclose(x.reshape(4, 4, 4) * diagonal, 1.0, atol=1e-10)


def test_reports_non_convergence():
    rng = np.random.default_rng(0)
    matrix = rng.standard_normal((200, 200)) + 1j * rng.standard_normal((200, 200))
    operator = operator_from((200,), lambda x: matrix @ x)
    _, info, count = solve(operator, np.ones(200, dtype=complex), 1e-14, 5)
    assert info > 0
    assert count <= 30
