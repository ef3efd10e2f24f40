"""Curvature pipeline: Christoffel through Cotton, plus conformal behavior."""

import math

import numpy as np
import pytest

from cottonlab import charts
from cottonlab.errors import NotPositiveDefiniteError
from cottonlab.geometry import (
    Box,
    MetricData,
    MetricSpec,
    bianchi_residuals,
    christoffels,
    conformal_rescale,
    cotton_form,
    cotton_tensor,
    cotton_tensor_field,
    curvature_from_schouten,
    curvature_packet,
    divergence_sym2,
    einstein_field,
    metric_field,
    ricci_scalar,
    riemann,
    riemann_apply,
    schouten,
    tensor_norm_03,
)
from cottonlab.jets import eval_jet_many, derivatives_from_jets, parse
from oracles import constant_curvature_riemann, fd_cotton_form

FLAT = charts.euclidean_metric()
HYP = charts.hyperbolic_metric()
S3 = charts.round_s3_patch()
PERT = charts.perturbed_metric()


def sample(m, rng, n=10):
    return m.domain.sample(rng, n, margin=0.05)


class TestChristoffels:
    def test_flat_vanishes(self, rng):
        for p in sample(FLAT, rng, 5):
            assert np.max(np.abs(christoffels(FLAT, p))) == 0.0

    def test_hyperbolic_entries(self):
        G = christoffels(HYP, (0.0, 0.0, 1.0))
        assert G[2, 0, 0] == pytest.approx(1.0, abs=1e-14)
        assert G[0, 0, 2] == pytest.approx(-1.0, abs=1e-14)
        assert G[2, 2, 2] == pytest.approx(-1.0, abs=1e-14)
        assert np.allclose(G, G.transpose(0, 2, 1), atol=1e-15)

    def test_conformal_closed_form(self, rng):
        f = parse("x1*x2")
        m = conformal_rescale(FLAT, f)
        for p in sample(FLAT, rng, 6):
            G = christoffels(m, p)
            _, df, _, _ = derivatives_from_jets(eval_jet_many(f, p.reshape(1, 3)))
            df = df[0]
            want = np.zeros((3, 3, 3))
            for k in range(3):
                for i in range(3):
                    for j in range(3):
                        want[k, i, j] = (
                            (i == k) * df[j] + (j == k) * df[i] - (i == j) * df[k]
                        )
            assert np.allclose(G, want, atol=1e-12)

    def test_metric_compatibility(self, rng):
        # d_k g_ij reconstructed from the Christoffel expansion
        d = MetricData(PERT, sample(PERT, rng, 10))
        recon = np.einsum("nmki,nmj->nkij", d.gamma0, d.g0) + np.einsum(
            "nmkj,nim->nkij", d.gamma0, d.g0
        )
        assert np.max(np.abs(d.g1 - recon)) < 1e-10

    def test_rejects_indefinite(self):
        bad = MetricSpec.from_components(
            "bad",
            {"g11": "x1", "g12": "0", "g13": "0", "g22": "1", "g23": "0", "g33": "1"},
            Box((-1, -1, -1), (1, 1, 1)),
        )
        with pytest.raises(NotPositiveDefiniteError):
            christoffels(bad, (-0.5, 0.0, 0.0))


class TestRiemann:
    def test_flat_zero(self, rng):
        for p in sample(FLAT, rng, 3):
            assert np.max(np.abs(riemann(FLAT, p))) == 0.0

    def test_round_sphere_constant_curvature(self, rng):
        pts = sample(S3, rng, 20)
        d = MetricData(S3, pts)
        oracle = constant_curvature_riemann(d.g0, 1.0)
        assert np.max(np.abs(d.riem - oracle)) < 1e-10

    def test_hyperbolic_constant_curvature(self, rng):
        pts = sample(HYP, rng, 20)
        d = MetricData(HYP, pts)
        oracle = constant_curvature_riemann(d.g0, -1.0)
        scale = np.max(np.abs(oracle))
        assert np.max(np.abs(d.riem - oracle)) / scale < 1e-9

    def test_symmetries(self, rng):
        d = MetricData(PERT, sample(PERT, rng, 10))
        R = d.riem
        scale = np.max(np.abs(R))
        assert np.max(np.abs(R + R.transpose(0, 2, 1, 3, 4))) / scale < 1e-10
        assert np.max(np.abs(R + R.transpose(0, 1, 2, 4, 3))) / scale < 1e-10
        assert np.max(np.abs(R - R.transpose(0, 3, 4, 1, 2))) / scale < 1e-10


class TestRicciScalar:
    def test_flat(self):
        ric, scal = ricci_scalar(np.zeros((3, 3, 3, 3)), np.eye(3))
        assert np.max(np.abs(ric)) == 0.0 and scal == 0.0

    def test_sphere(self, rng):
        p = sample(S3, rng, 1)[0]
        g = MetricData(S3, p.reshape(1, 3)).g0[0]
        ric, scal = ricci_scalar(riemann(S3, p), g)
        assert np.allclose(ric, 2.0 * g, atol=1e-11)
        assert scal == pytest.approx(6.0, abs=1e-11)

    def test_hyperbolic(self, rng):
        p = sample(HYP, rng, 1)[0]
        g = MetricData(HYP, p.reshape(1, 3)).g0[0]
        ric, scal = ricci_scalar(riemann(HYP, p), g)
        assert np.allclose(ric, -2.0 * g, atol=1e-9)
        assert scal == pytest.approx(-6.0, rel=1e-10)


class TestSchouten:
    def test_flat(self):
        assert np.max(np.abs(schouten(np.zeros((3, 3)), 0.0, np.eye(3)))) == 0.0

    def test_sphere_half_metric(self, rng):
        p = sample(S3, rng, 1)[0]
        g = MetricData(S3, p.reshape(1, 3)).g0[0]
        ric, scal = ricci_scalar(riemann(S3, p), g)
        assert np.allclose(schouten(ric, scal, g), 0.5 * g, atol=1e-11)

    def test_einstein_algebra(self, rng):
        g = np.eye(3)
        lam = 1.7
        assert np.allclose(schouten(lam * g, 3 * lam, g), (lam / 4.0) * g, atol=1e-14)

    def test_trace_identity(self, rng):
        # tr_g Sch = scal / 4
        d = MetricData(PERT, sample(PERT, rng, 10))
        tr = np.einsum("nij,nij->n", d.ginv0, d.sch0)
        assert np.max(np.abs(tr - d.scal0 / 4.0)) < 1e-12 * (1 + np.max(np.abs(d.scal0)))


class TestCottonForm:
    @pytest.mark.parametrize("metric", [FLAT, S3, HYP])
    def test_constant_curvature_vanishes(self, rng, metric):
        d = MetricData(metric, sample(metric, rng, 8))
        scale = 1.0 + np.max(np.abs(d.riem))
        assert np.max(np.abs(d.cotton)) / scale < 1e-11

    def test_conformally_flat_vanishes(self, rng):
        m = charts.conformally_flat_metric("sin(x1) + x2^2")
        d = MetricData(m, sample(m, rng, 8))
        assert np.max(np.abs(d.cotton)) < 1e-8

    def test_generic_metric_matches_fd_oracle(self, rng):
        pts = sample(PERT, rng, 6)
        d = MetricData(PERT, pts)
        oracle = fd_cotton_form(PERT, pts)
        assert np.max(np.abs(d.cotton)) > 1e-3  # really nonzero
        assert np.max(np.abs(d.cotton - oracle)) < 1e-8 * (1 + np.max(np.abs(oracle)))

    def test_antisymmetry_and_cyclic_trace(self, rng):
        d = MetricData(PERT, sample(PERT, rng, 10))
        C = d.cotton
        assert np.max(np.abs(C + C.transpose(0, 2, 1, 3))) < 1e-12
        # contracted Bianchi: tr over (1,3) of nabla Sch equals dscal / 4
        tr13 = np.einsum("nik,nijk->nj", d.ginv0, d.nabla_sch)
        half_dscal = 0.25 * d.scal1
        assert np.max(np.abs(tr13 - half_dscal)) < 1e-8 * (1 + np.max(np.abs(half_dscal)))
        # and therefore the (1,3) trace of the Cotton form vanishes
        trC = np.einsum("nik,nijk->nj", d.ginv0, C)
        assert np.max(np.abs(trC)) < 1e-8 * (1 + np.max(np.abs(d.scal1)))


class TestCottonTensor:
    def test_zero_input(self):
        assert np.max(np.abs(cotton_tensor(np.zeros((3, 3, 3)), np.eye(3)))) == 0.0

    def test_symmetric_and_tracefree(self, rng):
        pts = sample(PERT, rng, 30)
        d = MetricData(PERT, pts)
        ct = d.cotton_tensor
        scale = 1.0 + np.max(np.abs(ct))
        assert np.max(np.abs(ct - ct.transpose(0, 2, 1))) / scale < 1e-8
        assert np.max(np.abs(np.einsum("nij,nij->n", d.ginv0, ct))) / scale < 1e-8

    def test_matches_pointwise_helper(self, rng):
        p = sample(PERT, rng, 1)[0]
        d = MetricData(PERT, p.reshape(1, 3))
        direct = cotton_tensor(d.cotton[0], d.g0[0], PERT.orientation)
        assert np.allclose(direct, d.cotton_tensor[0], atol=1e-14)


class TestDivergence:
    def test_metric_is_parallel(self, rng):
        p = sample(PERT, rng, 1)[0]
        div = divergence_sym2(PERT, metric_field(PERT), p)
        assert np.max(np.abs(div)) < 1e-12

    def test_einstein_combination(self, rng):
        for p in sample(PERT, rng, 5):
            div = divergence_sym2(PERT, einstein_field(PERT), p)
            assert np.max(np.abs(div)) < 1e-7

    def test_cotton_divergence_free(self, rng):
        for p in sample(PERT, rng, 4):
            div = divergence_sym2(PERT, cotton_tensor_field(PERT), p)
            assert np.max(np.abs(div)) < 1e-7


class TestConformal:
    def test_identity_factor(self):
        m = conformal_rescale(FLAT, "0")
        p = (0.3, -0.2, 0.5)
        d0 = MetricData(FLAT, np.array([p]))
        d1 = MetricData(m, np.array([p]))
        assert np.allclose(d0.g0, d1.g0, atol=1e-15)

    def test_exponential_factor(self):
        m = conformal_rescale(FLAT, "x1")
        p = np.array([[0.4, 0.0, 0.0]])
        got = MetricData(m, p).g0[0]
        assert np.allclose(got, math.exp(0.8) * np.eye(3), rtol=1e-15)

    @pytest.mark.parametrize("factor", ["0.3*x1", "sin(x1) + 0.2*x2^2", "0.2*x1*x3"])
    def test_cotton_form_invariance(self, rng, factor):
        pts = sample(PERT, rng, 8)
        d0 = MetricData(PERT, pts)
        d1 = MetricData(conformal_rescale(PERT, factor), pts)
        diff = tensor_norm_03(d0.g0, d1.cotton - d0.cotton)
        scale = 1.0 + tensor_norm_03(d0.g0, d0.cotton)
        assert np.max(diff / scale) < 1e-7

    def test_weighted_tensor_covariance(self, rng):
        from cottonlab.jets import eval_expr_many

        f = parse("0.3*x1 + 0.1*x2^2")
        pts = sample(PERT, rng, 8)
        d0 = MetricData(PERT, pts)
        d1 = MetricData(conformal_rescale(PERT, f), pts)
        weight = np.exp(-eval_expr_many(f, pts))
        diff = d1.cotton_tensor - weight[:, None, None] * d0.cotton_tensor
        assert np.max(np.abs(diff)) < 1e-10 * (1 + np.max(np.abs(d0.cotton_tensor)))


class TestCurvatureFromSchouten:
    def test_zero_schouten(self, rng):
        out = curvature_from_schouten(
            np.zeros((3, 3)), np.eye(3), rng.normal(size=3), rng.normal(size=3),
            rng.normal(size=3)
        )
        assert np.max(np.abs(out)) == 0.0

    @pytest.mark.parametrize("metric", [S3, PERT])
    def test_reconstruction_matches_riemann(self, rng, metric):
        pts = sample(metric, rng, 10)
        d = MetricData(metric, pts)
        worst = 0.0
        for n in range(pts.shape[0]):
            for _ in range(5):
                U, V, X = rng.normal(size=(3, 3))
                direct = riemann_apply(d.riem[n], d.g0[n], U, V, X)
                recon = curvature_from_schouten(d.sch0[n], d.g0[n], U, V, X)
                scale = 1.0 + np.max(np.abs(direct))
                worst = max(worst, np.max(np.abs(direct - recon)) / scale)
        assert worst < 1e-7


class TestBianchi:
    @pytest.mark.parametrize("metric", [PERT, HYP])
    def test_both_identities(self, rng, metric):
        r1, r2 = bianchi_residuals(metric, sample(metric, rng, 15))
        assert r1 < 1e-9
        assert r2 < 1e-7


class TestPacket:
    def test_json_round_trip(self):
        import json

        packet = curvature_packet(HYP, (0.0, 0.0, 1.0))
        doc = packet.to_json_dict()
        text = json.dumps(doc)
        back = json.loads(text)
        assert back["scal"] == pytest.approx(-6.0, abs=1e-10)
        assert list(back.keys()) == [
            "point", "gamma", "riemann", "ricci", "scal", "schouten",
            "cotton_form", "cotton_tensor",
        ]
