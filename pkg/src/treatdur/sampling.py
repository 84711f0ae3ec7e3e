"""Inverse-integrated-hazard sampling of (W, Y) pairs.

Each pair is driven by two standard exponential draws ``E = -log(U)``. Sample
``i`` of a batch takes its uniforms from Philox block ``i // 2`` under the key
``(seed, stream)``, so a draw depends only on ``(seed, stream, i)`` and a batch
is bit-identical however it is split across workers.
"""

from __future__ import annotations

import csv
import enum
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from treatdur.hazards import DomainError
from treatdur.model import TreatmentModel, invert_conditional

CHUNK = 1 << 16  # samples per work unit; even, so chunks start on a block boundary
_TWO_M53 = 2.0**-53
CSV_COLUMNS = ("w", "y", "cause", "absurd", "e_w", "e_y")


class Mode(str, enum.Enum):
    CORRECT = "correct"
    FLAWED = "flawed"


def _mode(mode) -> Mode:
    try:
        return Mode(mode)
    except ValueError:
        raise DomainError(f"unknown sampling mode {mode!r}") from None


@dataclass(frozen=True)
class DurationPair:
    w: float
    y: float
    absurd: bool
    exp_draws: tuple[float, float]


class DurationBatch(Sequence[DurationPair]):
    """Column-oriented batch of pairs; indexing yields :class:`DurationPair`."""

    def __init__(self, w, y, absurd, e_w, e_y, mode=Mode.CORRECT):
        self.w = np.asarray(w, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self.absurd = np.asarray(absurd, dtype=bool)
        self.e_w = np.asarray(e_w, dtype=float)
        self.e_y = np.asarray(e_y, dtype=float)
        self.mode = _mode(mode)
        for arr in (self.w, self.y, self.absurd, self.e_w, self.e_y):
            arr.setflags(write=False)

    @classmethod
    def from_pairs(cls, pairs: Sequence[DurationPair], mode=Mode.CORRECT) -> DurationBatch:
        return cls(
            [p.w for p in pairs],
            [p.y for p in pairs],
            [p.absurd for p in pairs],
            [p.exp_draws[0] for p in pairs],
            [p.exp_draws[1] for p in pairs],
            mode,
        )

    def __len__(self):
        return len(self.w)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return DurationBatch(self.w[i], self.y[i], self.absurd[i], self.e_w[i], self.e_y[i], self.mode)
        return DurationPair(
            float(self.w[i]), float(self.y[i]), bool(self.absurd[i]), (float(self.e_w[i]), float(self.e_y[i]))
        )

    def __iter__(self) -> Iterator[DurationPair]:
        for i in range(len(self)):
            yield self[i]

    def select(self, mask) -> DurationBatch:
        mask = np.asarray(mask, dtype=bool)
        return DurationBatch(self.w[mask], self.y[mask], self.absurd[mask], self.e_w[mask], self.e_y[mask], self.mode)

    @property
    def absurd_rate(self) -> float:
        return float(np.count_nonzero(self.absurd)) / len(self) if len(self) else 0.0

    def equals(self, other: DurationBatch) -> bool:
        return all(
            np.array_equal(a, b)
            for a, b in zip(
                (self.w, self.y, self.absurd, self.e_w, self.e_y),
                (other.w, other.y, other.absurd, other.e_w, other.e_y),
            )
        )

    def write_csv(self, fh, limit: int | None = None) -> None:
        """Write ``w,y,cause,absurd,e_w,e_y`` rows, floats with 17 significant digits."""
        n = len(self) if limit is None else min(limit, len(self))
        cause = np.where(self.y < self.w, "Y_FIRST", np.where(self.w < self.y, "W_FIRST", "TIE"))
        fh.write(",".join(CSV_COLUMNS) + "\n")
        w, y, ew, ey = (a[:n].tolist() for a in (self.w, self.y, self.e_w, self.e_y))
        ab = self.absurd[:n].astype(np.int8).tolist()
        cs = cause[:n].tolist()
        fh.writelines(
            f"{w[i]:.17g},{y[i]:.17g},{cs[i]},{ab[i]},{ew[i]:.17g},{ey[i]:.17g}\n" for i in range(n)
        )

    def to_csv(self, limit: int | None = None) -> str:
        buf = io.StringIO()
        self.write_csv(buf, limit)
        return buf.getvalue()


def read_csv(fh, mode=Mode.CORRECT) -> DurationBatch:
    rows = list(csv.DictReader(fh))
    if rows and tuple(rows[0].keys()) != CSV_COLUMNS:
        raise DomainError(f"expected columns {CSV_COLUMNS}, got {tuple(rows[0].keys())}")
    return DurationBatch(
        [float(r["w"]) for r in rows],
        [float(r["y"]) for r in rows],
        [r["absurd"] == "1" for r in rows],
        [float(r["e_w"]) for r in rows],
        [float(r["e_y"]) for r in rows],
        mode,
    )


def _exp_from_raw(raw: np.ndarray) -> np.ndarray:
    # midpoint of a 2**-53 cell: U lies strictly inside (0, 1)
    u = ((raw >> np.uint64(11)).astype(float) + 0.5) * _TWO_M53
    return -np.log(u)


def exponential_draws(seed: int, start: int, count: int, stream: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Standard exponential ``(E_W, E_Y)`` for samples ``start .. start+count-1``."""
    if seed < 0 or stream < 0:
        raise DomainError("seed and stream must be nonnegative")
    if count <= 0:
        return np.empty(0), np.empty(0)
    first_block = start // 2
    skip = start % 2
    n_blocks = (skip + count + 1) // 2
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, stream], dtype=np.uint64)
    counter = np.array([first_block & 0xFFFFFFFFFFFFFFFF, first_block >> 64, 0, 0], dtype=np.uint64)
    bitgen = np.random.Philox(key=key, counter=counter)
    raw = bitgen.random_raw(4 * n_blocks).reshape(-1, 2)[skip : skip + count]
    e = _exp_from_raw(raw)
    return e[:, 0].copy(), e[:, 1].copy()


def _invert(m: TreatmentModel, e_w, e_y, mode: Mode):
    w = m.hW.inverse_cumulative(e_w)
    res = invert_conditional(m, w, e_y, flawed=mode is Mode.FLAWED)
    return w, res.y, res.absurd


def sample_pair(m: TreatmentModel, rng=None, mode=Mode.CORRECT, draws=None) -> DurationPair:
    """Draw one pair from a ``numpy.random.Generator`` or from forced
    ``draws=(E_W, E_Y)``."""
    mode = _mode(mode)
    if draws is None:
        if rng is None:
            raise DomainError("need a generator or forced draws")
        e_w, e_y = _exp_from_raw(rng.bit_generator.random_raw(2))
    else:
        e_w, e_y = (float(d) for d in draws)
        if not (e_w >= 0 and e_y >= 0):
            raise DomainError(f"exponential draws must be nonnegative, got {draws!r}")
    w, y, absurd = _invert(m, np.float64(e_w), np.float64(e_y), mode)
    return DurationPair(float(w), float(y), bool(absurd), (float(e_w), float(e_y)))


def _chunks(n: int):
    return [(s, min(CHUNK, n - s)) for s in range(0, n, CHUNK)]


def _run_chunked(n: int, workers: int, job):
    chunks = _chunks(n)
    if workers <= 1 or len(chunks) == 1:
        parts = [job(s, c) for s, c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda sc: job(*sc), chunks))
    return [np.concatenate(cols) for cols in zip(*parts)]


def _check_n(n: int):
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")


def sample_batch(
    m: TreatmentModel, n: int, seed: int, mode=Mode.CORRECT, workers: int = 1, stream: int = 0
) -> DurationBatch:
    _check_n(n)
    mode = _mode(mode)

    def job(start, count):
        e_w, e_y = exponential_draws(seed, start, count, stream)
        w, y, absurd = _invert(m, e_w, e_y, mode)
        return w, y, absurd, e_w, e_y

    w, y, absurd, e_w, e_y = _run_chunked(int(n), workers, job)
    return DurationBatch(w, y, absurd, e_w, e_y, mode)


def coupled_sample(
    m1: TreatmentModel, m2: TreatmentModel, n: int, seed: int, mode=Mode.CORRECT, mode2=None, workers: int = 1
) -> tuple[DurationBatch, DurationBatch]:
    """Two batches driven by the same exponential draws, pair by pair."""
    _check_n(n)
    mode = _mode(mode)
    mode2 = mode if mode2 is None else _mode(mode2)

    def job(start, count):
        e_w, e_y = exponential_draws(seed, start, count)
        return (*_invert(m1, e_w, e_y, mode), *_invert(m2, e_w, e_y, mode2), e_w, e_y)

    w1, y1, a1, w2, y2, a2, e_w, e_y = _run_chunked(int(n), workers, job)
    return DurationBatch(w1, y1, a1, e_w, e_y, mode), DurationBatch(w2, y2, a2, e_w, e_y, mode2)


def reconstruct(m: TreatmentModel, pair: DurationPair, mode=Mode.CORRECT) -> DurationPair:
    """Re-run the inversions on a pair's stored exponential draws."""
    return sample_pair(m, mode=mode, draws=pair.exp_draws)
