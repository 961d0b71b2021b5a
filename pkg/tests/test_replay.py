import numpy as np
import pytest
from scipy import stats

from kqlearn.learner import SarsaTuple
from kqlearn.replay import BufferEntry, EmptyBufferError, ReplayBuffer, ReplayConfig

N_DRAWS = 100_000


def entry(k, priority=0.0):
    s = np.array([float(k), 0.0])
    return BufferEntry(SarsaTuple(s, np.zeros(1), float(k), s, np.zeros(1)), priority)


def counts(buf, rng, n=N_DRAWS):
    ids = list(buf.ids())
    c = np.zeros(len(ids))
    for _ in range(n):
        c[ids.index(buf.sample(rng)[0])] += 1
    return c


def test_config_validation():
    with pytest.raises(ValueError):
        ReplayConfig(mode="yes")
    with pytest.raises(ValueError):
        ReplayConfig(mode="uniform", capacity=0)
    with pytest.raises(ValueError):
        ReplayConfig(priority_floor=0.0)
    with pytest.raises(ValueError):
        BufferEntry(None, -1.0)


def test_push_and_fifo_eviction():
    buf = ReplayBuffer(ReplayConfig(capacity=3, mode="uniform"))
    assert buf.push(entry(0)) == 0 and len(buf) == 1
    for k in range(1, 4):
        buf.push(entry(k))
    assert len(buf) == 3
    assert list(buf.ids()) == [1, 2, 3]
    with pytest.raises(KeyError):
        buf.get(0)
    assert [buf.get(i).tuple.r for i in buf.ids()] == [1.0, 2.0, 3.0]


def test_fifo_order_exact_over_many_wraps():
    buf = ReplayBuffer(ReplayConfig(capacity=5, mode="uniform"))
    for k in range(23):
        buf.push(entry(k))
        live = [buf.get(i).tuple.r for i in buf.ids()]
        assert live == [float(j) for j in range(max(0, k - 4), k + 1)]


def test_priorities_survive_eviction_of_others():
    buf = ReplayBuffer(ReplayConfig(capacity=3, mode="prioritized"))
    for k, p in enumerate([0.5, 2.0, 7.0]):
        buf.push(entry(k, p))
    buf.push(entry(3, 1.0))
    assert [buf.get(i).priority for i in buf.ids()] == [2.0, 7.0, 1.0]


def test_empty_and_disabled_buffers_reject_sampling():
    rng = np.random.default_rng(0)
    with pytest.raises(EmptyBufferError):
        ReplayBuffer(ReplayConfig(mode="uniform")).sample(rng)
    off = ReplayBuffer(ReplayConfig(mode="off"))
    off.push(entry(0))
    with pytest.raises(EmptyBufferError):
        off.sample(rng)


def test_single_entry_always_drawn():
    rng = np.random.default_rng(1)
    for mode in ("uniform", "prioritized"):
        buf = ReplayBuffer(ReplayConfig(mode=mode))
        buf.push(entry(9, 3.0))
        assert all(buf.sample(rng)[0] == 0 for _ in range(100))


def test_uniform_frequencies():
    buf = ReplayBuffer(ReplayConfig(mode="uniform"))
    for k in range(4):
        buf.push(entry(k))
    freq = counts(buf, np.random.default_rng(2)) / N_DRAWS
    sigma = np.sqrt(0.25 * 0.75 / N_DRAWS)
    assert np.all(np.abs(freq - 0.25) <= 3 * sigma)


def test_prioritized_ratio():
    buf = ReplayBuffer(ReplayConfig(mode="prioritized", priority_floor=1e-9))
    buf.push(entry(0, 3.0))
    buf.push(entry(1, 1.0))
    freq = counts(buf, np.random.default_rng(3)) / N_DRAWS
    sigma = np.sqrt(0.75 * 0.25 / N_DRAWS)
    assert np.all(np.abs(freq - [0.75, 0.25]) <= 3 * sigma)


@pytest.mark.parametrize("seed", range(4))
@pytest.mark.parametrize("mode", ["uniform", "prioritized"])
def test_chi_square_goodness_of_fit(seed, mode):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 17))
    cap = int(rng.integers(max(2, n // 2), n + 1))
    buf = ReplayBuffer(ReplayConfig(capacity=cap, mode=mode, priority_floor=1e-3))
    for k in range(n):
        buf.push(entry(k, float(rng.exponential()) if rng.random() < 0.8 else 0.0))
    live = [buf.get(i).priority for i in buf.ids()]
    if mode == "prioritized":
        expected = (np.array(live) + 1e-3) / (np.sum(live) + 1e-3 * len(live))
    else:
        expected = np.full(len(live), 1.0 / len(live))
    assert np.allclose(buf.probabilities(), expected)
    observed = counts(buf, rng)
    assert stats.chisquare(observed, expected * N_DRAWS).pvalue > 1e-3


def test_zero_priority_still_sampled():
    buf = ReplayBuffer(ReplayConfig(mode="prioritized"))
    buf.push(entry(0, 1.0))
    i = buf.push(entry(1, 1.0))
    buf.update_priority(i, 0.0)
    assert buf.get(i).priority == 0.0
    c = counts(buf, np.random.default_rng(4), 20_000)
    assert c[1] > 0


def test_raising_priority_raises_frequency_only_for_that_entry():
    buf = ReplayBuffer(ReplayConfig(mode="prioritized"))
    for k, p in enumerate([1.0, 2.0, 3.0]):
        buf.push(entry(k, p))
    before = buf.probabilities()
    c0 = counts(buf, np.random.default_rng(5))
    buf.update_priority(0, 6.0)
    after = buf.probabilities()
    c1 = counts(buf, np.random.default_rng(5))
    assert c1[0] > c0[0]
    assert after[2] / after[1] == pytest.approx(before[2] / before[1], rel=1e-12)


def test_stale_update_is_counted_noop():
    buf = ReplayBuffer(ReplayConfig(capacity=2, mode="prioritized"))
    for k in range(3):
        buf.push(entry(k, 1.0))
    buf.update_priority(0, 50.0)
    buf.update_priority(99, 50.0)
    assert buf.stale_updates == 2
    assert np.allclose(buf.probabilities(), [0.5, 0.5])


def test_sampling_deterministic():
    buf = ReplayBuffer(ReplayConfig(mode="prioritized"))
    for k in range(6):
        buf.push(entry(k, k / 2))
    a = [buf.sample(np.random.default_rng(7))[0] for _ in range(3)]
    r1, r2 = np.random.default_rng(8), np.random.default_rng(8)
    assert [buf.sample(r1)[0] for _ in range(50)] == [buf.sample(r2)[0] for _ in range(50)]
    assert len(set(a)) == 1
