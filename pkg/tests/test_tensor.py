"""Forms, wedge, Hodge star, Gram-Schmidt."""

import numpy as np
import pytest

from conftest import random_spd
from cottonlab.errors import DegenerateSeedError, DegreeError, NotPositiveDefiniteError
from cottonlab.tensor import (
    Frame,
    MVForm,
    form_inner,
    gram_schmidt,
    hodge_star,
    trace_form,
    wedge,
)
from oracles import brute_wedge_on


def _random_form(rng, degree, m=3, integer=False):
    n = len(MVForm.zero(degree, m).values)
    if integer:
        vals = [rng.integers(-3, 4, size=(m, m)).astype(float) for _ in range(n)]
    else:
        vals = [rng.normal(size=(m, m)) for _ in range(n)]
    return MVForm(degree, vals)


class TestWedge:
    def test_zero_times_anything(self, rng):
        z = MVForm.zero(1)
        b = _random_form(rng, 2)
        assert wedge(z, b).norm_max() == 0.0
        assert wedge(z, b).degree == 3

    def test_scalar_basis_forms(self):
        c = 2.5
        dx1 = MVForm(1, [np.eye(3) * c, np.zeros((3, 3)), np.zeros((3, 3))])
        dx2 = MVForm(1, [np.zeros((3, 3)), np.eye(3), np.zeros((3, 3))])
        w = wedge(dx1, dx2)
        assert np.allclose(w.values[0], c * np.eye(3))  # dx1^dx2 slot
        assert np.allclose(w.values[1], 0)
        assert np.allclose(w.values[2], 0)

    def test_degree_overflow(self, rng):
        with pytest.raises(DegreeError):
            wedge(_random_form(rng, 2), _random_form(rng, 2))

    @pytest.mark.parametrize("k,l", [(1, 1), (1, 2), (2, 1), (0, 3), (3, 0)])
    def test_against_brute_force(self, rng, k, l):
        a = _random_form(rng, k)
        b = _random_form(rng, l)
        w = wedge(a, b)
        for _ in range(5):
            vectors = rng.normal(size=(k + l, 3))
            direct = w(*vectors) if k + l else w.values[0]
            brute = brute_wedge_on(a, b, vectors)
            assert np.allclose(direct, brute, atol=1e-12)

    def test_associativity_exact_on_integer_forms(self, rng):
        for _ in range(50):
            a = _random_form(rng, 1, integer=True)
            b = _random_form(rng, 1, integer=True)
            c = _random_form(rng, 1, integer=True)
            left = wedge(wedge(a, b), c)
            right = wedge(a, wedge(b, c))
            for u, v in zip(left.values, right.values):
                assert np.array_equal(u, v)

    def test_graded_commutativity_of_trace(self, rng):
        for k, l in ((1, 1), (1, 2), (2, 1)):
            a = _random_form(rng, k, integer=True)
            b = _random_form(rng, l, integer=True)
            t1 = trace_form(wedge(a, b))
            t2 = trace_form(wedge(b, a))
            sign = (-1.0) ** (k * l)
            for u, v in zip(t1.values, t2.values):
                assert np.array_equal(u, sign * v)


class TestTraceForm:
    def test_identity_zero_form(self):
        f = MVForm(0, [np.eye(3)])
        assert trace_form(f).values[0][0, 0] == 3.0

    def test_so3_cube_trace_is_minus_six(self):
        # connection matrices of the rotation-group example
        l1 = np.zeros((3, 3)); l1[2, 1], l1[1, 2] = 1, -1
        l2 = np.zeros((3, 3)); l2[0, 2], l2[2, 0] = 1, -1
        l3 = np.zeros((3, 3)); l3[1, 0], l3[0, 1] = 1, -1
        omega = MVForm(1, [l1, l2, l3])
        cube = trace_form(wedge(omega, wedge(omega, omega)))
        assert cube.values[0][0, 0] == pytest.approx(-6.0, abs=1e-14)


class TestHodgeStar:
    def test_euclidean_dx1(self):
        dx1 = MVForm(1, [np.atleast_2d(1.0), np.atleast_2d(0.0), np.atleast_2d(0.0)])
        star = hodge_star(np.eye(3), 1, dx1)
        assert star.degree == 2
        assert star.values[0][0, 0] == 0.0  # dx1^dx2
        assert star.values[1][0, 0] == 0.0  # dx1^dx3
        assert star.values[2][0, 0] == 1.0  # dx2^dx3

    def test_orthonormal_frame_images(self):
        # *1 = vol, *(vol) = 1 for the unit metric
        one = MVForm(0, [np.atleast_2d(1.0)])
        vol = hodge_star(np.eye(3), 1, one)
        assert vol.degree == 3 and vol.values[0][0, 0] == 1.0
        back = hodge_star(np.eye(3), 1, vol)
        assert back.degree == 0 and back.values[0][0, 0] == 1.0

    def test_anisotropic_scaling(self):
        g = np.diag([4.0, 1.0, 1.0])
        dx1 = MVForm(1, [np.atleast_2d(1.0), np.atleast_2d(0.0), np.atleast_2d(0.0)])
        star = hodge_star(g, 1, dx1)
        assert star.values[2][0, 0] == pytest.approx(0.5, abs=1e-15)

    def test_involution_random(self, rng):
        for _ in range(30):
            g = random_spd(rng)
            for degree in range(4):
                n = len(MVForm.zero(degree, 1).values)
                a = MVForm(degree, [np.atleast_2d(v) for v in rng.normal(size=n)])
                for orientation in (1, -1):
                    back = hodge_star(g, orientation, hodge_star(g, orientation, a))
                    for u, v in zip(back.values, a.values):
                        assert np.allclose(u, v, atol=1e-12)

    def test_isometry(self, rng):
        for _ in range(20):
            g = random_spd(rng)
            for degree in range(4):
                n = len(MVForm.zero(degree, 1).values)
                a = MVForm(degree, [np.atleast_2d(v) for v in rng.normal(size=n)])
                sa = hodge_star(g, 1, a)
                na = form_inner(g, a, a)
                nsa = form_inner(g, sa, sa)
                assert nsa == pytest.approx(na, rel=1e-12)

    def test_rejects_indefinite_metric(self):
        g = np.diag([1.0, -1.0, 1.0])
        one = MVForm(0, [np.atleast_2d(1.0)])
        with pytest.raises(NotPositiveDefiniteError):
            hodge_star(g, 1, one)


class TestGramSchmidt:
    def test_euclidean_identity(self):
        f = gram_schmidt(np.eye(3), np.eye(3))
        assert np.allclose(f.matrix, np.eye(3))
        assert f.oriented

    def test_diagonal_rescaling(self):
        f = gram_schmidt(np.diag([4.0, 1.0, 1.0]), np.eye(3))
        assert np.allclose(f.matrix, np.diag([0.5, 1.0, 1.0]))

    def test_random_spd_orthonormalizes(self, rng):
        for _ in range(50):
            g = random_spd(rng)
            seed = rng.normal(size=(3, 3))
            while abs(np.linalg.det(seed)) < 1e-3:
                seed = rng.normal(size=(3, 3))
            f = gram_schmidt(g, seed)
            assert f.gram_defect(g) < 1e-12

    def test_first_vector_parallel_to_seed(self, rng):
        g = random_spd(rng)
        seed = rng.normal(size=(3, 3))
        f = gram_schmidt(g, seed)
        cross = np.cross(f.matrix[:, 0], seed[:, 0])
        assert np.linalg.norm(cross) < 1e-12 * np.linalg.norm(seed[:, 0])

    def test_orientation_preserved(self, rng):
        for _ in range(20):
            g = random_spd(rng)
            seed = rng.normal(size=(3, 3))
            if abs(np.linalg.det(seed)) < 1e-3:
                continue
            f = gram_schmidt(g, seed)
            assert (np.linalg.det(f.matrix) > 0) == (np.linalg.det(seed) > 0)
            assert f.oriented == (np.linalg.det(seed) > 0)

    def test_degenerate_seed(self):
        seed = np.ones((3, 3))
        with pytest.raises(DegenerateSeedError):
            gram_schmidt(np.eye(3), seed)


class TestFrame:
    def test_gram_defect(self):
        f = Frame(np.eye(3))
        assert f.gram_defect(np.eye(3)) == 0.0
        assert np.allclose(f.vector(1), [0, 1, 0])
