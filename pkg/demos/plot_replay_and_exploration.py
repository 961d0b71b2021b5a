"""
Replay buffers and the rho-greedy schedule
==========================================

A ring buffer with uniform or priority-proportional sampling, and the
linearly decaying probability of taking a uniformly random action.
"""

import numpy as np

from kqlearn import ReplayBuffer, ReplayConfig, RhoSchedule, SarsaTuple
from kqlearn.policy import rho_at
from kqlearn.replay import BufferEntry

rng = np.random.default_rng(0)
dummy = SarsaTuple(np.zeros(2), np.zeros(1), 0.0, np.zeros(2), None, True, False)

buf = ReplayBuffer(ReplayConfig(capacity=4, mode="prioritized"))
for p in (0.0, 1.0, 2.0, 5.0, 2.0):  # the fifth push evicts the first
    buf.push(BufferEntry(dummy, p))
counts = np.zeros(5, int)
for _ in range(20_000):
    entry_id, _ = buf.sample(rng)
    counts[entry_id] += 1
print("draws per entry id:", counts, "(priorities 1, 2, 5, 2; id 0 evicted)")

sched = RhoSchedule(1.0, 0.1, 100_000)
for t in (0, 25_000, 50_000, 100_000, 400_000):
    print(f"t = {t:7d}: explore with probability {rho_at(sched, t):.3f}")
