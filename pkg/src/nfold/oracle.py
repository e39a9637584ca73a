"""Brute-force references: fiber enumeration, Graver bases by box search,
exhaustive optimization and conformal decompositions."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from .core import BoundsBox, IntMatrix, _pivots, conformal_leq, determinant, hermite_normal_form
from .graver import GraverBasis


class BudgetExceeded(RuntimeError):
    """Enumeration would exceed its budget; no partial answer is given."""


@dataclass(frozen=True)
class EnumerationBudget:
    max_points: int = 200_000
    max_radius: int = 8

    def __post_init__(self):
        if self.max_points < 1 or self.max_radius < 1:
            raise ValueError("budget limits must be positive")


DEFAULT_BUDGET = EnumerationBudget()


def enumerate_fiber(A: IntMatrix, b: Sequence[int], bounds: BoundsBox,
                    budget: EnumerationBudget = DEFAULT_BUDGET) -> list[tuple]:
    """All integer ``x`` in the box with ``A x = b``, in lexicographic order.

    Depth-first over coordinates; a prefix is dropped as soon as some row's
    residual falls outside the range the unassigned coordinates can reach.
    """
    m, n = A.shape
    if len(b) != m or len(bounds) != n:
        raise ValueError("dimensions of A, b and bounds disagree")
    if not bounds.is_finite():
        raise ValueError("fiber enumeration needs finite bounds")
    lo, hi = bounds.lower, bounds.upper
    if any(a > c for a, c in zip(lo, hi)):
        return []
    cols = A.columns()
    # reach[j][i]: min and max of sum_{k >= j} A[i][k] x_k over the box
    rmin = [[0] * m for _ in range(n + 1)]
    rmax = [[0] * m for _ in range(n + 1)]
    for j in range(n - 1, -1, -1):
        for i in range(m):
            a = cols[j][i]
            lo_t, hi_t = sorted((a * lo[j], a * hi[j]))
            rmin[j][i] = rmin[j + 1][i] + lo_t
            rmax[j][i] = rmax[j + 1][i] + hi_t
    out: list[tuple] = []
    x = [0] * n

    def dfs(j: int, residual: list) -> None:
        if j == n:
            if not any(residual):
                if len(out) >= budget.max_points:
                    raise BudgetExceeded(f"more than {budget.max_points} fiber points")
                out.append(tuple(x))
            return
        col = cols[j]
        nmin, nmax = rmin[j + 1], rmax[j + 1]
        for v in range(lo[j], hi[j] + 1):
            nxt = [r - a * v for r, a in zip(residual, col)]
            if all(nmin[i] <= nxt[i] <= nmax[i] for i in range(m)):
                x[j] = v
                dfs(j + 1, nxt)

    if all(rmin[0][i] <= b[i] <= rmax[0][i] for i in range(m)):
        dfs(0, list(b))
    return out


def _minimal(points: list[tuple], dim: int) -> list[tuple]:
    """Conformally minimal members of a set of nonzero vectors."""
    points = sorted(points, key=lambda p: (sum(map(abs, p)), p))
    keep: list[tuple] = []
    P = np.zeros((max(1, len(points)), dim), dtype=np.int64)
    for p in points:
        if keep:
            arr = np.array(p, dtype=np.int64)
            K = P[:len(keep)]
            if (((K * arr) >= 0) & (np.abs(K) <= np.abs(arr))).all(axis=1).any():
                continue
        P[len(keep)] = p
        keep.append(p)
    return keep


def brute_graver(A: IntMatrix, radius: int,
                 budget: EnumerationBudget = DEFAULT_BUDGET) -> GraverBasis:
    """Conformally minimal nonzero kernel points of ``A`` inside
    ``[-radius, radius]^n``; the true Graver basis once the radius is at
    least its largest entry."""
    if radius < 1:
        raise ValueError("radius must be at least 1")
    n = A.ncols
    box = BoundsBox((-radius,) * n, (radius,) * n)
    points = [p for p in enumerate_fiber(A, (0,) * A.nrows, box, budget) if any(p)]
    return GraverBasis.from_elements(n, _minimal(points, n))


def graver_entry_bound(A: IntMatrix) -> int:
    """A radius that contains every Graver element of ``A``.

    Each element is a sum of at most ``n - rank`` circuits with coefficients
    in ``[0, 1)``, and circuit entries are maximal minors, so
    ``(n - rank) * max |minor|`` suffices. Exponential in the size of
    ``A``; meant for tiny matrices.
    """
    n = A.ncols
    rank = len(_pivots(hermite_normal_form(A)[0]))
    if rank == n:
        return 1
    biggest = 1
    for rows in combinations(range(A.nrows), rank):
        for cols in combinations(range(n), rank):
            sub = IntMatrix(rank, rank, tuple(tuple(A[i, j] for j in cols) for i in rows))
            biggest = max(biggest, abs(determinant(sub)))
    return (n - rank) * biggest


def stable_brute_graver(A: IntMatrix, start: int = 1,
                        budget: EnumerationBudget = DEFAULT_BUDGET) -> GraverBasis:
    """``brute_graver`` at the first radius whose answer survives doubling."""
    r = start
    current = brute_graver(A, r, budget)
    while True:
        if 2 * r > budget.max_radius:
            raise BudgetExceeded(f"radius {2 * r} beyond budget")
        nxt = brute_graver(A, 2 * r, budget)
        if nxt == current:
            return current
        r, current = 2 * r, nxt


def brute_optimize(A: IntMatrix, b: Sequence[int], bounds: BoundsBox,
                   objective: Callable[[tuple], int], sense: str = "min",
                   budget: EnumerationBudget = DEFAULT_BUDGET) -> tuple[int | None, list[tuple]]:
    """Optimal value and every optimal point over the fiber; ``(None, [])``
    when the fiber is empty."""
    if sense not in ("min", "max"):
        raise ValueError("sense must be 'min' or 'max'")
    best, argbest = None, []
    for x in enumerate_fiber(A, b, bounds, budget):
        v = objective(x)
        if best is None or (v < best if sense == "min" else v > best):
            best, argbest = v, [x]
        elif v == best:
            argbest.append(x)
    return best, argbest


def brute_conformal_decomposition(x: Sequence[int], G: GraverBasis,
                                  max_terms: int) -> list[tuple[tuple, int]] | None:
    """Write ``x`` as a sum ``sum lambda_i g_i`` of Graver elements lying in
    the orthant of ``x`` with at most ``max_terms`` distinct ``g_i``.

    Returns ``[(g, lambda), ...]`` using the fewest distinct elements, or
    ``None`` when no such decomposition exists.
    """
    x = tuple(int(v) for v in x)
    if not any(x):
        return []
    cands = [g for g in G if conformal_leq(g, x)]

    @lru_cache(maxsize=None)
    def search(rest: tuple, start: int, terms: int):
        if not any(rest):
            return ()
        if terms == 0:
            return None
        for k in range(start, len(cands)):
            g = cands[k]
            if not conformal_leq(g, rest):
                continue
            most = min(abs(r) // abs(c) for r, c in zip(rest, g) if c)
            for lam in range(most, 0, -1):
                left = tuple(r - lam * c for r, c in zip(rest, g))
                found = search(left, k + 1, terms - 1)
                if found is not None:
                    return ((g, lam),) + found
        return None

    for budget in range(1, max_terms + 1):
        found = search(x, 0, budget)
        if found is not None:
            return list(found)
    return None
