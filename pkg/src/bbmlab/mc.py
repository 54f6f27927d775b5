"""Deterministic Monte-Carlo plumbing: splittable streams and a chunked
mean estimator whose result is independent of the worker count.

Every random quantity in the package is a pure function of a 64-bit root
seed and a path of child indices.  Streams are realized with the Philox
counter-based generator keyed by ``SeedSequence(seed, spawn_key=path)``,
so child streams are statistically independent by construction and no
global RNG state exists anywhere.

`mc_mean` evaluates a user kernel over fixed-size chunks, chunk ``k``
drawing from ``stream.child(k)``, and reduces the per-chunk partial sums
in index order.  Chunk boundaries and the reduction order never depend
on the worker count, so a run with 8 threads is bitwise identical to a
serial run.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

# Outer-sample chunk size. Fixed: results are defined as the ordered
# reduction over chunks of exactly this size.
CHUNK = 4096


@dataclass(frozen=True)
class RandomStream:
    """A node in the seed tree: root seed plus a path of child indices."""

    seed: int
    path: tuple = ()

    def child(self, index: int) -> "RandomStream":
        return RandomStream(self.seed, self.path + (index,))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=self.path)
        return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class EnergyEstimate:
    """A Monte-Carlo scalar: value, standard error, sample count, seed."""

    value: float
    std_error: float
    samples: int
    seed: int

    def __post_init__(self):
        if self.std_error < 0:
            raise ValueError("std_error must be nonnegative")
        if self.samples <= 0:
            raise ValueError("samples must be positive")

    def agrees_with(self, other: float, n_sigma: float = 3.0, sigma_floor: float = 0.0) -> bool:
        tol = n_sigma * max(self.std_error, sigma_floor)
        return abs(self.value - other) <= tol


def _chunk_sums(kernel, stream, start, sizes):
    out = np.empty((len(sizes), 2))
    for j, m in enumerate(sizes):
        gen = stream.child(start + j).generator()
        vals = kernel(gen, m)
        out[j, 0] = float(np.sum(vals))
        out[j, 1] = float(np.sum(vals * vals))
    return out


def mc_mean(kernel, n: int, stream: RandomStream, workers: int = 1):
    """Mean and standard error of ``kernel`` values over ``n`` draws.

    ``kernel(gen, m)`` must return an array of ``m`` values using only
    ``gen`` for randomness.  Returns ``(mean, std_error)`` where the
    standard error comes from the sample variance of the values; when the
    values are themselves inner-loop averages this is exactly the nested
    (outer-level) variance estimate.
    """
    if n <= 0:
        raise ValueError("need a positive sample count")
    sizes = [CHUNK] * (n // CHUNK)
    if n % CHUNK:
        sizes.append(n % CHUNK)
    k = len(sizes)
    if workers > 1 and k > 1:
        nw = min(workers, k)
        # Split the chunk index range into contiguous slices per worker;
        # each slice keeps its own in-order partials.
        bounds = np.linspace(0, k, nw + 1).astype(int)
        with ThreadPoolExecutor(max_workers=nw) as pool:
            futs = [
                pool.submit(_chunk_sums, kernel, stream, int(b0), sizes[b0:b1])
                for b0, b1 in zip(bounds[:-1], bounds[1:])
                if b1 > b0
            ]
            parts = np.concatenate([f.result() for f in futs], axis=0)
    else:
        parts = _chunk_sums(kernel, stream, 0, sizes)
    # Ordered deterministic reduction.
    total = float(np.sum(parts[:, 0]))
    total_sq = float(np.sum(parts[:, 1]))
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0)
    se = np.sqrt(var / n)
    return mean, float(se)


def mc_estimate(kernel, n: int, stream: RandomStream, workers: int = 1) -> EnergyEstimate:
    mean, se = mc_mean(kernel, n, stream, workers)
    return EnergyEstimate(value=mean, std_error=se, samples=n, seed=stream.seed)


@dataclass
class RejectionDiagnostics:
    proposals: int = 0
    accepted: int = 0

    @property
    def rate(self) -> float:
        return self.accepted / self.proposals if self.proposals else 0.0


def rejection_fill(propose, accept, m: int, gen, max_rounds: int = 60, diag: RejectionDiagnostics = None):
    """Draw exactly ``m`` accepted samples by rejection.

    ``propose(gen, k)`` returns ``k`` candidate rows, ``accept(c)`` a
    boolean mask.  Candidates are consumed in proposal order so the
    output is a deterministic function of the stream.  Raises an error
    with diagnostics if the acceptance rate collapses.
    """
    got = 0
    pieces = []
    need = m
    for _ in range(max_rounds):
        k = int(need * 1.9) + 16
        cand = propose(gen, k)
        mask = accept(cand)
        if diag is not None:
            diag.proposals += k
            diag.accepted += int(np.sum(mask))
        take = cand[mask]
        if take.shape[0] > need:
            take = take[:need]
        pieces.append(take)
        got += take.shape[0]
        need = m - got
        if need == 0:
            return np.concatenate(pieces, axis=0) if len(pieces) > 1 else pieces[0]
    raise RuntimeError(
        f"rejection sampling stalled: {got}/{m} accepted after {max_rounds} rounds"
    )
