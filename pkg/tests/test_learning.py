import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from sklearn.metrics import silhouette_samples as sk_silhouette

import hullforge.learning.gmm as gmm_mod
from conftest import blobs
from hullforge.errors import EmptyDataError, KRangeError, PerplexityError, SingleClusterError
from hullforge.learning import (
    GmmModel,
    Normalizer,
    component_prototypes,
    elbow_scan,
    fit_gmm,
    fit_normalizer,
    interpolate_designs,
    joint_p,
    kmeans,
    log_density,
    novelty_check,
    outlier_scores,
    prototype_report,
    responsibilities,
    sample_gmm,
    sample_hulls,
    select_k,
    silhouette_samples,
    silhouette_score,
    tsne_embed,
)
from hullforge.learning.cluster import wcss_of
from hullforge.learning.tsne import conditional_p, perplexities
from hullforge.params import COLUMNS, midrange_vector


def simplex_blobs(k, d, n_per, sep, seed):
    centers = sep * np.eye(k, d)
    return blobs(n_per, centers, 1.0, seed)


def manual_model(weights, means, covs):
    means = np.asarray(means, float)
    k, d = means.shape
    return GmmModel(k, np.asarray(weights, float), means, np.asarray(covs, float), 0.0, Normalizer.identity(d))


# --- normalizer -------------------------------------------------------------------


def test_normalizer_maps_to_unit_interval():
    n = fit_normalizer(np.array([[0.0], [10.0], [5.0]]))
    np.testing.assert_array_equal(n.apply(np.array([[0.0], [10.0]])).ravel(), [0.0, 1.0])


def test_normalizer_constant_column():
    X = np.array([[3.0, 1.0], [3.0, 2.0], [3.0, 4.0]])
    n = fit_normalizer(X)
    U = n.apply(X)
    assert np.all(U[:, 0] == 0.5)
    np.testing.assert_array_equal(n.invert(U)[:, 0], [3.0, 3.0, 3.0])


@given(arrays(float, (6, 4), elements=st.floats(-1e3, 1e3)))
def test_normalizer_round_trip(X):
    n = fit_normalizer(X)
    scale = np.maximum(np.abs(X).max(), 1.0)
    assert np.all(np.abs(n.invert(n.apply(X)) - X) <= 1e-12 * scale)


def test_normalizer_needs_two_rows():
    with pytest.raises(EmptyDataError):
        fit_normalizer(np.ones((1, 3)))


def test_normalizer_dict_round_trip():
    n = fit_normalizer(np.random.default_rng(0).random((5, 3)))
    m = Normalizer.from_dict(n.to_dict())
    assert n.lo.tobytes() == m.lo.tobytes() and n.hi.tobytes() == m.hi.tobytes()


# --- k-means ----------------------------------------------------------------------


def test_kmeans_single_cluster_is_mean():
    X = np.random.default_rng(1).normal(size=(50, 3))
    m = kmeans(X, 1)
    np.testing.assert_allclose(m.centroids[0], X.mean(0), atol=1e-12)
    assert m.wcss == pytest.approx(((X - X.mean(0)) ** 2).sum(), rel=1e-12)


def test_kmeans_k_equals_n():
    X = np.random.default_rng(2).normal(size=(12, 3))
    assert kmeans(X, 12).wcss == pytest.approx(0.0, abs=1e-20)


def test_kmeans_two_blobs():
    X, _ = blobs(100, [np.zeros(5), np.full(5, 10.0)], 0.1, 3)
    m = kmeans(X, 2, seed=4)
    c = m.centroids[np.argsort(m.centroids[:, 0])]
    assert np.abs(c[0]).max() < 0.05 and np.abs(c[1] - 10).max() < 0.05


def test_kmeans_invariants():
    X, _ = simplex_blobs(4, 6, 40, 4.0, 5)
    m = kmeans(X, 4, seed=2)
    assert np.all(np.diff(m.history) <= 1e-12 * m.history[0])
    assert set(m.labels.tolist()) <= set(range(4))
    assert m.wcss == wcss_of(X, m.centroids, m.labels)
    for j in range(4):
        np.testing.assert_allclose(m.centroids[j], X[m.labels == j].mean(0), atol=1e-12)


def test_kmeans_deterministic():
    X, _ = simplex_blobs(3, 4, 30, 3.0, 6)
    a, b = kmeans(X, 3, seed=9), kmeans(X, 3, seed=9)
    assert a.centroids.tobytes() == b.centroids.tobytes()


@pytest.mark.parametrize("k", [0, 11])
def test_kmeans_k_range(k):
    with pytest.raises(KRangeError):
        kmeans(np.zeros((10, 2)), k)


# --- elbow and silhouette -----------------------------------------------------------


def test_elbow_finds_six_blobs():
    X, _ = simplex_blobs(6, 45, 60, 8.0, 0)
    r = elbow_scan(X, 10, seed=0)
    assert r.suggested_k == 6
    assert not r.low_confidence
    assert np.all(np.diff(r.wcss) <= 0)


def test_elbow_single_blob_low_confidence():
    X = np.random.default_rng(3).normal(size=(300, 10))
    r = elbow_scan(X, 8, seed=0)
    assert r.low_confidence
    assert np.all(np.diff(r.wcss) <= 0)


def test_elbow_needs_k_max_3():
    with pytest.raises(KRangeError):
        elbow_scan(np.zeros((10, 2)), 2)


def test_silhouette_well_separated():
    X, y = blobs(50, [np.zeros(3), np.full(3, 100.0)], 1.0, 0)
    assert silhouette_score(X, y)[0] > 0.95


def test_silhouette_equidistant_point_scores_zero():
    X = np.array([[0.0], [2.0], [-2.0], [-2.0]])
    s = silhouette_samples(X, [0, 0, 1, 1])
    assert s[0] == 0.0


def test_silhouette_identical_points():
    s = silhouette_samples(np.ones((6, 2)), [0, 0, 0, 1, 1, 1])
    np.testing.assert_array_equal(s, 0.0)


def test_silhouette_single_cluster():
    with pytest.raises(SingleClusterError):
        silhouette_score(np.random.default_rng(0).random((5, 2)), [1] * 5)


@settings(max_examples=40, deadline=None)
@given(
    arrays(float, (20, 3), elements=st.floats(-10, 10)),
    st.lists(st.integers(0, 3), min_size=20, max_size=20),
)
def test_silhouette_bounds_and_sklearn_agreement(X, labels):
    labels = np.array(labels)
    if len(set(labels.tolist())) < 2:
        return
    s = silhouette_samples(X, labels)
    assert np.all((s >= -1) & (s <= 1))
    ref = sk_silhouette(X, labels)
    np.testing.assert_allclose(s, ref, atol=1e-6)


# --- mixture fitting ------------------------------------------------------------------


def test_gmm_single_component_is_ml_gaussian():
    X = np.random.default_rng(0).normal(size=(400, 4)) @ np.diag([1, 2, 3, 4])
    m = fit_gmm(X, 1)
    U = m.normalizer.apply(X)
    np.testing.assert_allclose(m.means[0], U.mean(0), atol=1e-9)
    np.testing.assert_allclose(m.covariances[0], np.cov(U, rowvar=False, bias=True), atol=1e-9)
    assert abs(m.weights.sum() - 1) < 1e-12


def test_gmm_recovers_two_components():
    rng = np.random.default_rng(1)
    d, n = 45, 2000
    z = rng.random(n) < 0.3
    X = rng.standard_normal((n, d)) + np.where(z, 0.0, 5.0)[:, None]
    m = fit_gmm(X, 2, seed=0)
    order = np.argsort(component_prototypes(m)[:, 0])
    np.testing.assert_allclose(m.weights[order], [0.3, 0.7], atol=0.05)
    truth = m.normalizer.apply(np.vstack([np.zeros(d), np.full(d, 5.0)]))
    assert np.abs(m.means[order] - truth).max() < 0.1


def em_datasets():
    a, _ = simplex_blobs(3, 4, 80, 4.0, 0)
    b = np.random.default_rng(1).standard_t(3, size=(200, 3))
    c, _ = blobs(60, [np.zeros(2), np.array([1.0, 0.0])], 0.6, 2)
    return [a, b, c]


@pytest.mark.parametrize("which", range(3))
def test_em_log_likelihood_non_decreasing(which):
    X = em_datasets()[which]
    for seed in range(20):
        m = fit_gmm(X, 3, seed=seed, restarts=1)
        h = np.array(m.history)
        assert np.all(np.diff(h) >= -1e-9), (seed, np.diff(h).min())


def test_em_iterates_stay_valid(monkeypatch):
    # every M-step yields simplex weights and Cholesky-factorable covariances
    seen = []
    original = gmm_mod._m_step

    def checked(U, R, floor):
        out = original(U, R, floor)
        w, _, covs, _ = out
        assert np.all(w >= 0) and abs(w.sum() - 1) < 1e-12
        np.linalg.cholesky(covs)
        seen.append(1)
        return out

    monkeypatch.setattr(gmm_mod, "_m_step", checked)
    X, _ = simplex_blobs(3, 6, 40, 3.0, 4)
    fit_gmm(X, 4, seed=0)
    assert len(seen) > 3


def test_gmm_covariance_floor_keeps_spd():
    # fewer points than dimensions: sample covariance is singular
    X = np.random.default_rng(0).random((10, 20))
    with pytest.warns(UserWarning):
        m = fit_gmm(X, 1)
    assert np.linalg.eigvalsh(m.covariances[0]).min() >= m.floor * (1 - 1e-9)


def test_gmm_persistence_bit_exact(tmp_path):
    X, _ = simplex_blobs(2, 3, 50, 3.0, 0)
    m = fit_gmm(X, 2, seed=3)
    back = GmmModel.load(m.save(tmp_path / "m.json"))
    for attr in ("weights", "means", "covariances"):
        assert getattr(back, attr).tobytes() == getattr(m, attr).tobytes()
    assert back.train_loglik == m.train_loglik and back.seed == m.seed
    assert back.normalizer.lo.tobytes() == m.normalizer.lo.tobytes()


def test_select_k_by_bic():
    X, _ = simplex_blobs(3, 2, 200, 6.0, 0)
    model, scores = select_k(X, range(1, 6), seed=0)
    assert model.k == 3
    assert min(scores, key=scores.get) == 3


def test_fit_gmm_k_range():
    with pytest.raises(KRangeError):
        fit_gmm(np.zeros((5, 2)) + np.arange(5)[:, None], 6)


# --- responsibilities --------------------------------------------------------------


def test_responsibility_dominance():
    m = manual_model([0.5, 0.5], [[0.0, 0.0], [50.0, 0.0]], [np.eye(2)] * 2)
    assert responsibilities(m, np.array([50.0, 0.0]))[1] > 0.999


def test_responsibility_symmetric_midpoint():
    m = manual_model([0.5, 0.5], [[-1.0, 0.0], [1.0, 0.0]], [np.eye(2)] * 2)
    np.testing.assert_allclose(responsibilities(m, np.zeros(2)), [0.5, 0.5], atol=1e-9)


def test_responsibilities_sum_to_one():
    m = manual_model([0.2, 0.3, 0.5], [[0, 0], [3, 0], [0, 3]], [np.eye(2), 2 * np.eye(2), 0.5 * np.eye(2)])
    x = np.random.default_rng(0).normal(scale=10, size=(1000, 2))
    R = responsibilities(m, x)
    assert np.all(R >= 0)
    assert np.abs(R.sum(1) - 1).max() < 1e-12


# --- sampling ---------------------------------------------------------------------


def test_component_frequencies():
    m = manual_model([0.2, 0.5, 0.3], np.eye(3), [np.eye(3)] * 3)
    _, comp = sample_gmm(m, 100_000, seed=0, return_components=True)
    freq = np.bincount(comp, minlength=3) / 100_000
    np.testing.assert_allclose(freq, [0.2, 0.5, 0.3], atol=0.01)


def test_sampling_deterministic():
    m = manual_model([0.5, 0.5], np.eye(2), [np.eye(2)] * 2)
    assert sample_gmm(m, 50, seed=3).tobytes() == sample_gmm(m, 50, seed=3).tobytes()


def test_tiny_covariance_concentrates():
    mu = np.array([[0.3, 0.7, 0.1]])
    m = manual_model([1.0], mu, [1e-12 * np.eye(3)])
    assert np.abs(sample_gmm(m, 1000, seed=0) - mu).max() < 1e-5


def test_sample_mean_within_three_sigma():
    n = 100_000
    sd = np.array([0.5, 1.0, 2.0, 0.1, 3.0])
    m = manual_model([1.0], [np.arange(5.0)], [np.diag(sd**2)])
    X = sample_gmm(m, n, seed=1)
    assert np.all(np.abs(X.mean(0) - np.arange(5.0)) < 3 * sd / math.sqrt(n))


def test_sample_hulls_in_range(training_rows):
    m = fit_gmm(training_rows, 1, seed=0)
    rows, draws = sample_hulls(m, 5, seed=0)
    from hullforge.params import validate_params

    for r in rows:
        validate_params(r)
    assert np.all(draws >= 1)


# --- extraction -------------------------------------------------------------------


def test_single_prototype_is_data_mean():
    X = np.random.default_rng(0).normal(size=(200, 3))
    m = fit_gmm(X, 1)
    np.testing.assert_allclose(component_prototypes(m)[0], X.mean(0), atol=1e-9)


def test_prototypes_own_their_component():
    X, _ = simplex_blobs(3, 4, 100, 5.0, 2)
    m = fit_gmm(X, 3, seed=1)
    R = responsibilities(m, component_prototypes(m))
    np.testing.assert_array_equal(R.argmax(1), np.arange(3))
    assert prototype_report(m, X) == []


def test_interpolation_endpoints_exact():
    rng = np.random.default_rng(0)
    a, b = midrange_vector(), midrange_vector()
    b[1:20] += rng.uniform(-0.01, 0.01, 19)
    np.testing.assert_array_equal(interpolate_designs(a, b, 0.0), a)
    np.testing.assert_array_equal(interpolate_designs(a, b, 1.0), b)


def test_interpolation_midpoint():
    a, b = midrange_vector(), midrange_vector()
    i = COLUMNS.index("Bd")
    a[i], b[i] = 0.1, 0.3
    assert interpolate_designs(a, b, 0.5)[i] == pytest.approx(0.2, abs=1e-15)


@pytest.mark.parametrize("t,expected", [(0.4, 0.0), (0.5, 0.0), (0.6, 1.0)])
def test_interpolation_flag_snap(t, expected):
    a, b = midrange_vector(), midrange_vector()
    i = COLUMNS.index("bit_BB")
    a[i], b[i] = 0.0, 1.0
    assert interpolate_designs(a, b, t)[i] == expected


def test_interpolation_t_outside():
    with pytest.raises(ValueError):
        interpolate_designs(midrange_vector(), midrange_vector(), 1.5)


def test_far_point_is_least_likely():
    X, _ = simplex_blobs(2, 3, 100, 4.0, 0)
    m = fit_gmm(X, 2, seed=0)
    far = X.mean(0) + 20 * X.std(0).max() * np.ones(3)
    scores = log_density(m, np.vstack([X, far]))
    assert scores[-1] < scores[:-1].min()


def test_outlier_scores_permutation_invariant():
    X, _ = simplex_blobs(2, 3, 60, 4.0, 1)
    m = fit_gmm(X, 2, seed=0)
    perm = np.random.default_rng(0).permutation(len(X))
    np.testing.assert_allclose(outlier_scores(m, X[perm]).scores, outlier_scores(m, X).scores[perm], rtol=1e-12)


def test_bottom_one_percent_count():
    X = np.random.default_rng(0).normal(size=(1000, 2))
    m = fit_gmm(X, 1)
    rep = outlier_scores(m, X, q=0.01)
    assert len(rep.indices) == 10
    assert np.all(rep.scores[rep.indices] <= np.sort(rep.scores)[9])


def test_novelty_exact_duplicate():
    T = np.random.default_rng(0).random((20, 5))
    d, novel = novelty_check(T[7], T)
    assert d == 0.0 and not novel


def test_novelty_offset():
    T = np.random.default_rng(0).random((20, 5))
    s = T[3].copy()
    s[2] += 0.1
    d, novel = novelty_check(s, T)
    assert d == pytest.approx(0.1, abs=1e-12) and novel


def test_novelty_permutation_invariant():
    T = np.random.default_rng(1).random((30, 4))
    s = np.full(4, 0.5)
    assert novelty_check(s, T)[0] == novelty_check(s, T[::-1])[0]


# --- t-SNE ------------------------------------------------------------------------


@pytest.fixture(scope="module")
def three_blobs():
    return simplex_blobs(3, 45, 50, 10.0, 0)


def test_joint_p_normalized(three_blobs):
    P = joint_p(three_blobs[0], 30)
    assert abs(P.sum() - 1) < 1e-9
    np.testing.assert_allclose(P, P.T, atol=0)


def test_perplexity_calibration(three_blobs):
    X = three_blobs[0]
    D = ((X[:, None] - X[None]) ** 2).sum(-1)
    P, _ = conditional_p(D, 30.0)
    assert np.abs(perplexities(P) - 30.0).max() < 1e-3


def test_tsne_separates_blobs(three_blobs):
    X, y = three_blobs
    r = tsne_embed(X, perplexity=30, iters=1000, seed=0)
    assert np.all(np.isfinite(r.coords)) and r.final_kl >= 0
    assert r.final_kl < r.initial_kl
    assert silhouette_score(r.coords, y)[0] > 0.5


def test_tsne_deterministic(three_blobs):
    a = tsne_embed(three_blobs[0], perplexity=20, iters=200, seed=4)
    b = tsne_embed(three_blobs[0], perplexity=20, iters=200, seed=4)
    assert a.coords.tobytes() == b.coords.tobytes()


def test_tsne_perplexity_error():
    with pytest.raises(PerplexityError):
        tsne_embed(np.random.default_rng(0).random((50, 3)), perplexity=30)


def test_embedding_csv(tmp_path, three_blobs):
    r = tsne_embed(three_blobs[0][:40], perplexity=10, iters=100, seed=0)
    path = r.write_csv(tmp_path / "e.csv", labels=np.zeros(40, int))
    lines = path.read_text().splitlines()
    assert lines[0] == "row_id,tsne_1,tsne_2,label" and len(lines) == 41
