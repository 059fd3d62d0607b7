import numpy as np
import pytest

from bowts.errors import InvalidInputError
from bowts.metrics import (
    DistanceKind,
    d_chi2,
    d_euclidean,
    d_hist_intersect,
    d_js,
    distance,
    pairwise,
    parse_distance,
)

KINDS = list(DistanceKind)


def random_pairs(rng, count=1000):
    for _ in range(count):
        n = int(rng.integers(2, 40))
        h = rng.integers(0, 20, size=n).astype(float)
        k = rng.integers(0, 20, size=n).astype(float)
        # keep at least one nonzero bin so normalization is defined
        h[rng.integers(n)] += 1
        k[rng.integers(n)] += 1
        yield h, k


class TestExamples:
    def test_euclidean(self):
        assert d_euclidean([1, 0], [0, 1]) == pytest.approx(np.sqrt(2))
        assert d_euclidean([3, 4], [0, 0]) == 5.0
        assert d_euclidean([2, 7], [2, 7]) == 0.0

    def test_chi2(self):
        assert d_chi2([1, 0], [0, 1]) == pytest.approx(2, abs=1e-4)
        assert d_chi2([2, 0], [0, 2]) == pytest.approx(4, abs=1e-4)
        assert d_chi2([3, 1], [3, 1]) == 0.0

    def test_chi2_all_zero_pair(self):
        assert d_chi2([0, 0], [0, 0]) == 0.0

    def test_js(self):
        kl_pq = 0.5 * np.log2(0.5 / 0.25) + 0.5 * np.log2(0.5 / 0.75)
        kl_qp = 0.25 * np.log2(0.25 / 0.5) + 0.75 * np.log2(0.75 / 0.5)
        assert (kl_pq, kl_qp) == pytest.approx((0.20752, 0.18872), abs=1e-5)
        assert d_js([0.5, 0.5], [0.25, 0.75]) == pytest.approx(0.19812, abs=1e-4)
        assert d_js([0.5, 0.5], [0.25, 0.75]) == pytest.approx(0.5 * (kl_pq + kl_qp), abs=1e-8)

    def test_js_counts_normalized(self):
        assert d_js([2, 2], [1, 3]) == pytest.approx(d_js([0.5, 0.5], [0.25, 0.75]), abs=1e-12)

    def test_js_disjoint_is_finite(self):
        d = d_js([1, 0], [0, 1])
        assert np.isfinite(d) and d > 10

    def test_intersection(self):
        assert d_hist_intersect([0.5, 0.5], [0.25, 0.75]) == pytest.approx(0.25, abs=1e-4)
        assert d_hist_intersect([1, 0, 0], [0, 0, 5]) == 1.0
        assert d_hist_intersect([0.3, 0.7], [0.3, 0.7]) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("kind", KINDS)
def test_axioms(kind, rng):
    for h, k in random_pairs(rng):
        d = distance(h, k, kind)
        assert d >= 0
        assert d == pytest.approx(distance(k, h, kind), abs=1e-12)
        assert distance(h, h, kind) == pytest.approx(0.0, abs=1e-12)


def test_js_symmetry_100(rng):
    for h, k in list(random_pairs(rng, 100)):
        assert d_js(h, k) == pytest.approx(d_js(k, h), abs=1e-12)


def test_intersection_range(rng):
    for h, k in random_pairs(rng, 300):
        assert 0.0 <= d_hist_intersect(h, k) <= 1.0


@pytest.mark.parametrize("kind", [DistanceKind.EUCLIDEAN, DistanceKind.HISTOGRAM_INTERSECTION])
def test_triangle_inequality(kind, rng):
    pairs = list(random_pairs(rng, 300))
    for i in range(0, 297, 3):
        n = min(pairs[i][0].size, pairs[i + 1][0].size, pairs[i + 2][0].size)
        a, b, c = pairs[i][0][:n] + 1, pairs[i + 1][0][:n] + 1, pairs[i + 2][0][:n] + 1
        assert distance(a, c, kind) <= distance(a, b, kind) + distance(b, c, kind) + 1e-12


@pytest.mark.parametrize("kind", [DistanceKind.CHI_SQUARED, DistanceKind.HISTOGRAM_INTERSECTION, DistanceKind.EUCLIDEAN])
def test_shared_zero_bins_change_nothing(kind, rng):
    for h, k in random_pairs(rng, 50):
        pad = np.zeros(5)
        assert distance(np.r_[h, pad], np.r_[k, pad], kind) == pytest.approx(distance(h, k, kind), abs=1e-9)


def test_js_grows_with_separation():
    p = np.array([0.9, 0.1])
    q = np.array([0.1, 0.9])
    ds = [d_js(p, (1 - t) * p + t * q) for t in np.linspace(0, 1, 11)]
    assert np.all(np.diff(ds) > 0)


@pytest.mark.parametrize("kind", KINDS)
def test_pairwise_matches_scalar(kind, rng):
    A = rng.integers(0, 10, size=(13, 20)).astype(float) + rng.integers(0, 2, size=(13, 20))
    B = rng.integers(0, 10, size=(70, 20)).astype(float)
    A[:, 0] += 1
    B[:, 0] += 1
    D = pairwise(A, B, kind, chunk=5)
    assert D.shape == (13, 70)
    for i in range(13):
        for j in range(70):
            assert D[i, j] == pytest.approx(distance(A[i], B[j], kind), rel=1e-10, abs=1e-12)


class TestValidation:
    @pytest.mark.parametrize("name, kind", [
        ("chi2", DistanceKind.CHI_SQUARED), ("JS", DistanceKind.JENSEN_SHANNON),
        ("intersection", DistanceKind.HISTOGRAM_INTERSECTION), ("euclidean", DistanceKind.EUCLIDEAN),
    ])
    def test_aliases(self, name, kind):
        assert parse_distance(name) is kind

    def test_unknown(self):
        with pytest.raises(InvalidInputError, match="unknown distance"):
            parse_distance("cosine")

    def test_shape_mismatch(self):
        with pytest.raises(InvalidInputError):
            d_chi2([1, 2], [1, 2, 3])

    def test_negative_counts(self):
        with pytest.raises(InvalidInputError):
            d_chi2([-1, 2], [1, 2])
        with pytest.raises(InvalidInputError):
            pairwise([[-1.0, 2.0]], [[1.0, 1.0]], "js")

    def test_empty_histogram_for_normalized(self):
        with pytest.raises(InvalidInputError):
            d_js([0, 0], [1, 1])

    def test_nonpositive_eps(self):
        with pytest.raises(InvalidInputError):
            d_chi2([1, 0], [0, 1], eps=0)

    def test_normalization_flags(self):
        assert DistanceKind.JENSEN_SHANNON.uses_normalized
        assert not DistanceKind.CHI_SQUARED.uses_normalized
