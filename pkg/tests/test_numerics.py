"""Tests for the shared numerical kernels."""

import numpy as np
import pytest

from lrpulse.numerics import Bracket, RunningIntegral, central_diff, find_root, integrate


class TestFindRoot:
    def test_cosine_root(self):
        root, iters = find_root(np.cos, Bracket(1.0, 2.0), tol=1e-12)
        assert abs(root - np.pi / 2) < 1e-11
        assert iters > 0

    def test_endpoint_root(self):
        root, _ = find_root(lambda x: x, Bracket(0.0, 1.0), tol=1e-12)
        assert root == 0.0

    def test_invalid_bracket(self):
        with pytest.raises(ValueError):
            find_root(lambda x: x + 2.0, Bracket(0.0, 1.0), tol=1e-9)

    def test_bad_tol(self):
        with pytest.raises(ValueError):
            find_root(np.cos, Bracket(1.0, 2.0), tol=0.0)

    def test_random_cubics(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            r = rng.uniform(-2.0, 2.0)
            f = lambda x: (x - r) * (x ** 2 + 1.0)
            root, _ = find_root(f, Bracket(-3.0, 3.0), tol=1e-10)
            assert abs(root - r) < 1e-9


class TestIntegrate:
    def test_sine(self):
        assert abs(integrate(np.sin, 0.0, np.pi) - 2.0) < 1e-9

    def test_polynomial(self):
        val = integrate(lambda x: 3.0 * x ** 2, 0.0, 2.0)
        assert abs(val - 8.0) < 1e-10

    def test_oscillatory(self):
        # mean of cos^2 over whole periods
        val = integrate(lambda x: np.cos(50.0 * x) ** 2, 0.0, 2.0 * np.pi,
                        abs_tol=1e-10, min_panels=1024)
        assert abs(val - np.pi) < 1e-9

    def test_degenerate_interval(self):
        assert integrate(np.sin, 1.0, 1.0) == 0.0

    def test_reversed_limits_flip_sign(self):
        fwd = integrate(np.sin, 0.0, 1.0)
        rev = integrate(np.sin, 1.0, 0.0)
        assert abs(fwd + rev) < 1e-12

    def test_bad_tol(self):
        with pytest.raises(ValueError):
            integrate(np.sin, 0.0, 1.0, abs_tol=0.0)


class TestCentralDiff:
    def test_exponential(self):
        d = central_diff(np.exp, 0.0, 1e-5)
        assert abs(d - 1.0) < 1e-9

    def test_matrix_valued(self):
        f = lambda t: np.array([[np.cos(t), 0.0], [0.0, np.sin(t)]])
        d = central_diff(f, 0.3, 1e-6)
        assert abs(d[0, 0] + np.sin(0.3)) < 1e-9
        assert abs(d[1, 1] - np.cos(0.3)) < 1e-9

    def test_bad_h(self):
        with pytest.raises(ValueError):
            central_diff(np.exp, 0.0, 0.0)


class TestRunningIntegral:
    def test_against_closed_form(self):
        F = RunningIntegral(np.sin, 0.0, 10.0, 256)
        rng = np.random.default_rng(11)
        for t in rng.uniform(0.0, 10.0, 100):
            assert abs(F(t) - (1.0 - np.cos(t))) < 1e-12

    def test_array_evaluation(self):
        F = RunningIntegral(lambda u: 2.0 * u, 0.0, 4.0, 64)
        ts = np.linspace(0.0, 4.0, 17)
        assert np.max(np.abs(F(ts) - ts ** 2)) < 1e-12

    def test_start_is_zero(self):
        F = RunningIntegral(np.cos, -1.0, 1.0, 32)
        assert F(-1.0) == 0.0
