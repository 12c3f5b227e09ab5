import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from mmbeam import SequentialBeamformer
from mmbeam.array_channel import ArrayGeometry, ClusterChannelParams, generate_channel
from mmbeam.link import EffectiveChannel2x2

SMALL = dict(bs_shape=(4, 4), ue_elements=4, codebook_sizes=(4, 4, 4))


@pytest.fixture
def channels():
    rng = np.random.default_rng(8)
    bs, ue = ArrayGeometry.planar(4, 4), ArrayGeometry.linear(4)
    return (generate_channel(ClusterChannelParams(), bs, ue, rng).matrix,
            generate_channel(ClusterChannelParams(), bs, ue, rng).matrix * 0.5)


def test_params_roundtrip():
    est = SequentialBeamformer(estimator="phbf2", beta=4.0, **SMALL)
    params = est.get_params()
    assert params["estimator"] == "phbf2" and params["beta"] == 4.0
    est.set_params(snr_db=0.0)
    assert est.snr_db == 0.0
    twin = clone(est)
    assert twin.get_params() == est.get_params()


def test_fit_sets_attributes(channels):
    H1, _ = channels
    est = SequentialBeamformer(random_state=3, **SMALL).fit(H1)
    assert est.n_evaluated_ == 15 * 3
    assert est.backup_pair_ == est.secondary_pair_
    assert est.secondary_pair_.bs_index != est.baseline_pair_.bs_index
    assert est.secondary_pair_.ue_index != est.baseline_pair_.ue_index


def test_transform_and_score(channels):
    H1, _ = channels
    est = SequentialBeamformer(estimator="perfect_csi", **SMALL)
    eff = est.fit_transform(H1)
    assert isinstance(eff, EffectiveChannel2x2)
    assert est.score(H1) == pytest.approx(np.log2(est.search_result_.best_score))


def test_two_node(channels):
    H1, H2 = channels
    est = SequentialBeamformer(mode="two_node", random_state=0, **SMALL).fit(H1, H2)
    assert est.n_evaluated_ == 16 * 3
    assert est.secondary_pair_.node == "bs2"
    assert est.score(H1, H2) > 0
    with pytest.raises(ValueError):
        est.transform(H1)


def test_reproducible_with_seed(channels):
    H1, _ = channels
    a = SequentialBeamformer(random_state=11, **SMALL).fit(H1)
    b = SequentialBeamformer(random_state=11, **SMALL).fit(H1)
    np.testing.assert_array_equal(a.search_result_.scores, b.search_result_.scores)


def test_not_fitted(channels):
    with pytest.raises(NotFittedError):
        SequentialBeamformer(**SMALL).transform(channels[0])


@pytest.mark.parametrize("kw", [dict(mode="three_node"), dict(estimator="ls"), dict(random_state=-1)])
def test_bad_params(kw, channels):
    with pytest.raises(ValueError):
        SequentialBeamformer(**SMALL, **kw).fit(channels[0])


def test_bad_channels(channels):
    est = SequentialBeamformer(**SMALL)
    with pytest.raises(ValueError):
        est.fit(np.ones((4, 15)))
    with pytest.raises(ValueError):
        est.fit(np.full((4, 16), np.nan))
    with pytest.raises(TypeError):
        est.fit(np.array([["a"] * 16] * 4))
