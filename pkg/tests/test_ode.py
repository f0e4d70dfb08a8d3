import numpy as np

from monotoda.ode import dopri45


def test_complex_oscillator_and_dense_output():
    res = dopri45(lambda t, y: 1j * y, 0.0, np.array([1.0 + 0j]), 3.0, tol=1e-11)
    assert res.status == "ok"
    assert abs(res.y[-1, 0] - np.exp(3j)) < 1e-9
    ts = np.linspace(0, 3, 17)
    assert np.abs(res(ts)[:, 0] - np.exp(1j * ts)).max() < 1e-7


def test_backward_integration():
    res = dopri45(lambda t, y: -y, 1.0, np.array([1.0]), 0.0, tol=1e-11)
    assert abs(res.y[-1, 0] - np.e) < 1e-9


def test_blowup_reported_not_raised():
    # y' = y^2, y(0) = 1 blows up at t = 1
    res = dopri45(lambda t, y: y * y, 0.0, np.array([1.0]), 2.0, tol=1e-10)
    assert res.status == "step-underflow"
    assert abs(res.t[-1] - 1.0) < 1e-6


def test_guard_stops_run():
    res = dopri45(lambda t, y: y, 0.0, np.array([1.0]), 10.0, guard=lambda y: y[0] > 100)
    assert res.status == "guard"
    assert res.y[-1, 0] > 100
