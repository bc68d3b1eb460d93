"""Truncated single-mode Fock space and its operator calculus.

Everything is a dense complex matrix: desk-scale cutoffs (tens to a few
hundred levels) make dense algebra cheap and keep indexing transparent.
Row and column indices are photon numbers, so the annihilator has entries
``a[m-1, m] = sqrt(m)``.

Truncation corrupts operator products near the top of the ladder (the
canonical commutator picks up a rank-one artifact at the last level), so a
guard band of top levels is excluded from all comparisons.  The trusted
subspace is span{|0>, ..., |cutoff-1-guard>}.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "FockSpace",
    "default_guard",
    "annihilator",
    "creator",
    "number",
    "spectral_fn",
    "cosz",
    "sincz",
]


def default_guard(cutoff: int) -> int:
    """Guard-band width used when none is given.

    max(4, ceil(cutoff/8)), clamped so at least two levels stay trusted.
    """
    return min(cutoff - 2, max(4, -(-cutoff // 8)))


@dataclass(frozen=True)
class FockSpace:
    """Bosonic Hilbert space truncated to levels |0> .. |cutoff-1>.

    ``guard`` top levels are excluded from trusted comparisons; ``None``
    selects :func:`default_guard`.
    """

    cutoff: int
    guard: int | None = None

    def __post_init__(self):
        if not isinstance(self.cutoff, (int, np.integer)) or self.cutoff < 2:
            raise ValueError(f"cutoff must be an integer >= 2, got {self.cutoff!r}")
        if self.guard is None:
            object.__setattr__(self, "guard", default_guard(self.cutoff))
        if not isinstance(self.guard, (int, np.integer)) or not 0 <= self.guard <= self.cutoff - 2:
            raise ValueError(
                f"guard must satisfy 0 <= guard <= cutoff-2, got guard={self.guard!r} "
                f"with cutoff={self.cutoff}"
            )

    @property
    def trusted(self) -> int:
        """Number of trusted levels; the trusted subspace is |0> .. |trusted-1>."""
        return self.cutoff - self.guard


def annihilator(space: FockSpace) -> np.ndarray:
    """Truncated annihilation operator, a|m> = sqrt(m)|m-1>."""
    a = np.zeros((space.cutoff, space.cutoff), dtype=complex)
    m = np.arange(1, space.cutoff)
    a[m - 1, m] = np.sqrt(m)
    return a


def creator(space: FockSpace) -> np.ndarray:
    """Truncated creation operator, the conjugate transpose of the annihilator."""
    return annihilator(space).conj().T


def number(space: FockSpace) -> np.ndarray:
    """Photon number operator diag(0, 1, ..., cutoff-1).

    creator(space) @ annihilator(space) reproduces it to a few ulp (the
    square of a rounded sqrt(m) is not exactly m); the product
    annihilator @ creator is the one with the truncation artifact at the
    top level.
    """
    return np.diag(np.arange(space.cutoff, dtype=complex))


def spectral_fn(space: FockSpace, f: Callable[[int], complex]) -> np.ndarray:
    """Diagonal operator f(N) with entries f(0), ..., f(cutoff-1)."""
    values = np.empty(space.cutoff, dtype=complex)
    for m in range(space.cutoff):
        try:
            values[m] = complex(f(m))
        except Exception as exc:
            raise ValueError(f"spectral function evaluation failed at level m={m}") from exc
    return np.diag(values)


def _split_eval(x, on_nonneg, on_neg):
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(arr)
    neg = arr < 0.0
    out[~neg] = on_nonneg(np.sqrt(arr[~neg]))
    out[neg] = on_neg(np.sqrt(-arr[neg]))
    if np.ndim(x) == 0:
        return float(out[0])
    return out.reshape(np.shape(x))


def cosz(x):
    """Entire function cos(sqrt(x)), power series sum_k (-x)^k / (2k)!.

    Evaluates to cos(sqrt(x)) for x >= 0 and cosh(sqrt(-x)) for x < 0, so
    spectral arguments that go negative (they do, at photon number zero in
    the lowest two-atom branch) stay real and well defined.  Accepts scalars
    or arrays.
    """
    return _split_eval(x, np.cos, np.cosh)


def sincz(x):
    """Entire function sin(sqrt(x))/sqrt(x), power series sum_k (-x)^k / (2k+1)!.

    Evaluates to sin(sqrt(x))/sqrt(x) for x > 0, to 1 at x = 0, and to
    sinh(sqrt(-x))/sqrt(-x) for x < 0.  Accepts scalars or arrays.
    """

    def pos(r):
        out = np.ones_like(r)
        nz = r > 0.0
        out[nz] = np.sin(r[nz]) / r[nz]
        return out

    def neg(r):
        # r > 0 strictly here: the x == 0 case lands in the other branch
        return np.sinh(r) / r

    return _split_eval(x, pos, neg)
