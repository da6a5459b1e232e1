"""Kernel-lane tests: fallback correctness and compiled/NumPy parity."""

import numpy as np
import pytest

from hallmhd import _kernels_np as knp
from hallmhd import kernels

try:
    from hallmhd import _kernels as kcy
except ImportError:
    kcy = None

needs_compiled = pytest.mark.skipif(kcy is None,
                                    reason="compiled extension not built")


@pytest.fixture
def data(rng):
    m = 513
    return {
        "a": rng.standard_normal((3, m)),
        "b": rng.standard_normal((3, m)),
        "u": rng.standard_normal((2, m)),
        "grad": rng.standard_normal((2, 3, m)),
        "k": rng.standard_normal((3, m)),
        "invk2": rng.random(m),
        "w": rng.random(m),
        "v": rng.standard_normal((3, m)) + 1j * rng.standard_normal((3, m)),
        "f": rng.standard_normal(m) + 1j * rng.standard_normal(m),
        "e": np.exp(-rng.random(m)),
    }


class TestFallbackCorrectness:
    def test_cross3(self, data):
        out = knp.cross3(data["a"], data["b"])
        expected = np.cross(data["a"].T, data["b"].T).T
        assert np.allclose(out, expected)

    def test_advect(self, data):
        out = knp.advect(data["u"], data["grad"])
        expected = np.einsum("cm,cjm->jm", data["u"], data["grad"])
        assert np.allclose(out, expected)

    def test_curl_mode(self, data):
        k, v = data["k"], data["v"]
        out = knp.curl_mode(k, v)
        kc = k.T
        vc = v.T
        expected = 1j * np.cross(kc, vc).T
        assert np.allclose(out, expected)

    def test_divergence_mode(self, data):
        out = knp.divergence_mode(data["k"], data["v"])
        assert np.allclose(out, 1j * np.sum(data["k"] * data["v"], axis=0))

    def test_project_removes_parallel_part(self, data):
        k = data["k"]
        invk2 = 1.0 / np.sum(k * k, axis=0)
        out = knp.project_mode(k, invk2, data["v"])
        assert np.max(np.abs(np.sum(k * out, axis=0))) < 1e-10

    def test_sums(self, data):
        f = data["f"]
        assert knp.abs2_sum(f) == pytest.approx(np.sum(np.abs(f) ** 2))
        assert knp.weighted_abs2_sum(data["w"], f) == pytest.approx(
            np.sum(data["w"] * np.abs(f) ** 2))

    def test_stage_kernels(self, data):
        e, f = data["e"], data["f"]
        y = 2.0 * f
        assert np.allclose(knp.if_stage_pre(e, y, 0.3, f), e * (y + 0.3 * f))
        assert np.allclose(knp.if_stage_mix(e, y, 0.3, f), e * y + 0.3 * f)
        assert np.allclose(knp.if_stage_end(e, y, 0.3, e, f),
                           e * y + 0.3 * e * f)
        out = knp.if_final(e, e, y, f, 2 * f, 3 * f, 4 * f, 0.1)
        expected = e * y + (0.1 / 6) * (e * f + 2 * e * (2 * f + 3 * f) + 4 * f)
        assert np.allclose(out, expected)


@needs_compiled
class TestLaneParity:
    @pytest.mark.parametrize("name,args", [
        ("cross3", ("a", "b")),
        ("advect", ("u", "grad")),
        ("curl_mode", ("k", "v")),
        ("divergence_mode", ("k", "v")),
        ("gradient_mode", ("k", "f")),
        ("project_mode", ("k", "invk2", "v")),
    ])
    def test_elementwise_kernels_agree(self, data, name, args):
        got = getattr(kcy, name)(*(data[a] for a in args))
        want = getattr(knp, name)(*(data[a] for a in args))
        assert np.allclose(np.asarray(got), np.asarray(want), atol=1e-13)

    def test_reductions_agree(self, data):
        f, w = data["f"], data["w"]
        assert kcy.abs2_sum(f) == pytest.approx(knp.abs2_sum(f), rel=1e-12)
        assert kcy.weighted_abs2_sum(w, f) == pytest.approx(
            knp.weighted_abs2_sum(w, f), rel=1e-12)

    def test_stage_kernels_agree(self, data):
        e, f = data["e"], data["f"]
        y = 1.5 * f
        pairs = [
            (kcy.if_stage_pre(e, y, 0.2, f), knp.if_stage_pre(e, y, 0.2, f)),
            (kcy.if_stage_mix(e, y, 0.2, f), knp.if_stage_mix(e, y, 0.2, f)),
            (kcy.if_stage_end(e, y, 0.2, e, f),
             knp.if_stage_end(e, y, 0.2, e, f)),
            (kcy.if_final(e, e, y, f, f, f, f, 0.2),
             knp.if_final(e, e, y, f, f, f, f, 0.2)),
        ]
        for got, want in pairs:
            assert np.allclose(got, want, atol=1e-14)

    def test_add_weighted_agrees(self, data):
        v, w = data["v"], data["w"]
        a = v.copy()
        b = v.copy()
        kcy.add_weighted(a, w, -0.7, v)
        knp.add_weighted(b, w, -0.7, v)
        assert np.allclose(a, b, atol=1e-14)


def test_selected_lane_exports_everything():
    for name in ("cross3", "advect", "curl_mode", "divergence_mode",
                 "gradient_mode", "project_mode", "abs2_sum",
                 "weighted_abs2_sum", "add_weighted", "if_stage_pre",
                 "if_stage_mix", "if_stage_end", "if_final"):
        assert callable(getattr(kernels, name))
