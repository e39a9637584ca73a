"""Graver bases of matrices and of n-fold products of bimatrices."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Iterable, Sequence

from ._completion import complete
from .core import IntMatrix, block_diag, hstack, lattice_kernel_basis, vstack


@dataclass(frozen=True)
class Bimatrix:
    """An ``(r, s) x t`` bimatrix: top block ``A1`` (r x t) over ``A2`` (s x t)."""

    A1: IntMatrix
    A2: IntMatrix

    def __post_init__(self):
        if self.A1.ncols != self.A2.ncols:
            raise ValueError("both blocks of a bimatrix need the same width")
        if self.A1.ncols < 1:
            raise ValueError("bimatrix width must be at least 1")

    @classmethod
    def from_rows(cls, top: Sequence[Sequence[int]], bottom: Sequence[Sequence[int]],
                  t: int | None = None) -> Bimatrix:
        if t is None:
            t = len(top[0]) if top else len(bottom[0])
        return cls(IntMatrix.from_rows(top, t), IntMatrix.from_rows(bottom, t))

    @classmethod
    def boxminus(cls, D: IntMatrix) -> Bimatrix:
        """Identity on top, ``D`` below."""
        return cls(IntMatrix.identity(D.ncols), D)

    @property
    def r(self) -> int:
        return self.A1.nrows

    @property
    def s(self) -> int:
        return self.A2.nrows

    @property
    def t(self) -> int:
        return self.A1.ncols

    def stacked(self) -> IntMatrix:
        return vstack([self.A1, self.A2])


@dataclass(frozen=True)
class GraverBasis:
    """Sorted, duplicate-free, centrally symmetric set of Graver elements."""

    ambient_dim: int
    elements: tuple

    @classmethod
    def from_elements(cls, ambient_dim: int, elements: Iterable[Sequence[int]]) -> GraverBasis:
        found = set()
        for g in elements:
            g = tuple(int(a) for a in g)
            if len(g) != ambient_dim:
                raise ValueError(f"element of length {len(g)} in dimension {ambient_dim}")
            if any(g):
                found.add(g)
                found.add(tuple(-a for a in g))
        return cls(ambient_dim, tuple(sorted(found)))

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, g) -> bool:
        return tuple(g) in set(self.elements)

    def as_set(self) -> frozenset:
        return frozenset(self.elements)

    def to_json(self) -> str:
        return json.dumps({"ambient_dim": self.ambient_dim,
                           "elements": [list(g) for g in self.elements]})

    @classmethod
    def from_json(cls, text: str) -> GraverBasis:
        data = json.loads(text)
        return cls.from_elements(data["ambient_dim"], data["elements"])


def graver_basis(A: IntMatrix) -> GraverBasis:
    """Graver basis of ``A`` by normal-form completion from a kernel lattice basis."""
    kernel = lattice_kernel_basis(A)
    if not kernel:
        return GraverBasis(A.ncols, ())
    return GraverBasis.from_elements(A.ncols, complete(kernel, A.ncols))


def nfold_matrix(A: Bimatrix, n: int) -> IntMatrix:
    """The ``(r + n s) x n t`` n-fold product of ``A``."""
    if n < 1:
        raise ValueError("n-fold product needs n >= 1")
    top = hstack([A.A1] * n)
    return vstack([top, block_diag([A.A2] * n)])


def brick_type(x: Sequence[int], t: int) -> int:
    """Number of nonzero width-``t`` bricks of ``x``."""
    return sum(1 for k in range(0, len(x), t) if any(x[k:k + t]))


def n_liftings(y: Sequence[int], m: int, n: int) -> list[tuple]:
    """Every placement of the ``m`` bricks of ``y`` into ``n`` slots, in order."""
    if n < m:
        raise ValueError(f"cannot lift {m} bricks into {n} slots")
    if m == 0:
        raise ValueError("vector has no bricks")
    t, rem = divmod(len(y), m)
    if rem:
        raise ValueError("vector length is not a multiple of the brick count")
    bricks = [tuple(y[i * t:(i + 1) * t]) for i in range(m)]
    zero = (0,) * t
    out = []
    for slots in combinations(range(n), m):
        z = [zero] * n
        for brick, k in zip(bricks, slots):
            z[k] = brick
        out.append(sum(z, ()))
    return out


def _half(elements: Iterable[tuple]) -> list[tuple]:
    """One representative (the lexicographically larger) of each sign pair."""
    return [g for g in elements if g > tuple(-a for a in g)]


@lru_cache(maxsize=None)
def graver_complexity_bound(A: Bimatrix) -> int:
    """Upper bound on the Graver complexity: the largest coordinate sum of a
    nonnegative element of the Graver basis of ``A1 G2``, where the columns of
    ``G2`` are the Graver basis of ``A2``.

    The columns of ``G2`` come in pairs ``g, -g``. A nonnegative Graver
    element using both members of a pair is exactly ``e_g + e_-g`` (sum 2,
    present whenever ``A1 g != 0``); every other one corresponds to a Graver
    element of ``A1`` times one representative per pair, with the same
    coordinate sum. So the computation runs on the half-size matrix.
    """
    G2 = graver_basis(A.A2)
    if not len(G2):
        return 0
    reps = _half(G2.elements)
    M = A.A1.matmul(IntMatrix(A.t, len(reps), tuple(zip(*reps))))
    best = 2 if any(any(col) for col in M.columns()) else 0
    for lam in graver_basis(M):
        best = max(best, sum(map(abs, lam)))
    return best


@lru_cache(maxsize=None)
def _direct_nfold_graver(A: Bimatrix, n: int) -> GraverBasis:
    return graver_basis(nfold_matrix(A, n))


def nfold_graver(A: Bimatrix, n: int) -> GraverBasis:
    """Graver basis of the n-fold product of ``A``.

    For ``n`` above the complexity bound ``g`` the basis is the set of all
    n-liftings of the (cached) basis of the g-fold product.
    """
    if n < 1:
        raise ValueError("n-fold product needs n >= 1")
    g = graver_complexity_bound(A)
    if g == 0:
        return GraverBasis(n * A.t, ())
    if n <= g:
        return _direct_nfold_graver(A, n)
    base = _direct_nfold_graver(A, g)
    lifted = [z for y in base for z in n_liftings(y, g, n)]
    return GraverBasis.from_elements(n * A.t, lifted)


def lifting_size_bound(A: Bimatrix, n: int) -> int:
    """``C(n, g) * |G(A^(g))|`` with ``g`` the complexity bound; only
    meaningful for ``n >= g``."""
    g = graver_complexity_bound(A)
    if g == 0:
        return 0
    if n < g:
        raise ValueError(f"size bound applies for n >= {g}")
    return comb(n, g) * len(_direct_nfold_graver(A, g))


def extension_bimatrix(A: Bimatrix, W: Bimatrix) -> Bimatrix:
    """The ``(r+p, s+q) x (t+p+q)`` bimatrix whose n-fold product is a
    row and column permutation of ``[[A^(n), 0], [W^(n), I]]`` padded with
    the extra identity blocks."""
    if A.t != W.t:
        raise ValueError("A and W must share the brick width t")
    r, s, p, q = A.r, A.s, W.r, W.s
    Z = IntMatrix.zeros
    D1 = vstack([hstack([A.A1, Z(r, p), Z(r, q)]),
                 hstack([W.A1, IntMatrix.identity(p), Z(p, q)])])
    D2 = vstack([hstack([A.A2, Z(s, p), Z(s, q)]),
                 hstack([W.A2, Z(q, p), IntMatrix.identity(q)])])
    return Bimatrix(D1, D2)


def extended_matrix(A: Bimatrix, W: Bimatrix, n: int) -> IntMatrix:
    """``B = [[A^(n), 0], [W^(n), I]]``, columns ordered ``(x, slack)``."""
    An, Wn = nfold_matrix(A, n), nfold_matrix(W, n)
    return vstack([hstack([An, IntMatrix.zeros(An.nrows, Wn.nrows)]),
                   hstack([Wn, IntMatrix.identity(Wn.nrows)])])


def extended_graver(A: Bimatrix, W: Bimatrix, n: int) -> GraverBasis:
    """Graver basis of ``extended_matrix(A, W, n)``: completed directly up
    to the complexity bound of the extension bimatrix, lifted beyond it."""
    if n <= graver_complexity_bound(extension_bimatrix(A, W)):
        # same basis; completing B directly avoids the n-1 unused y blocks
        return graver_basis(extended_matrix(A, W, n))
    return lifted_extended_graver(A, W, n)


def lifted_extended_graver(A: Bimatrix, W: Bimatrix, n: int) -> GraverBasis:
    """Basis of ``extended_matrix(A, W, n)`` read off the n-fold basis of
    the extension bimatrix, for any ``n``.

    Elements are permuted to the ``(x^1..x^n, y^1..y^n, z^1..z^n)`` layout;
    those with ``y^2 = ... = y^n = 0`` restrict to the basis of ``B``.
    """
    D = extension_bimatrix(A, W)
    t, p, q = A.t, W.r, W.s
    width = t + p + q
    out = []
    for e in nfold_graver(D, n):
        bricks = [e[k * width:(k + 1) * width] for k in range(n)]
        if any(any(b[t:t + p]) for b in bricks[1:]):
            continue
        x = sum((b[:t] for b in bricks), ())
        z = sum((b[t + p:] for b in bricks), ())
        out.append(x + bricks[0][t:t + p] + z)
    return GraverBasis.from_elements(n * t + p + n * q, out)


def incidence_matrix(edges: Sequence[tuple[int, int]], vertices: int,
                     directed: bool = True) -> IntMatrix:
    """Vertex-edge incidence matrix; +1 at the tail and -1 at the head of a
    directed edge, 0/1 for undirected graphs."""
    rows = [[0] * len(edges) for _ in range(vertices)]
    for j, (a, b) in enumerate(edges):
        if directed:
            rows[a][j] += 1
            rows[b][j] -= 1
        else:
            rows[a][j] += 1
            rows[b][j] += 1
    return IntMatrix.from_rows(rows, len(edges))


def graph_graver_complexity(edges: Sequence[tuple[int, int]], vertices: int,
                            directed: bool = True) -> int:
    """Complexity bound of the boxminus bimatrix of a (di)graph's incidence matrix."""
    if not edges:
        return 0
    D = incidence_matrix(edges, vertices, directed)
    return graver_complexity_bound(Bimatrix.boxminus(D))


def exact_graver_complexity(A: Bimatrix, max_n: int) -> int:
    """Largest brick type over the bases of ``A^(n)`` for ``n <= max_n``.

    Uses direct completion at every ``n``; the cost grows exponentially, so
    this is only a check for tiny bimatrices. It equals the Graver complexity
    once ``max_n`` reaches it.
    """
    best = 0
    for n in range(1, max_n + 1):
        for z in _direct_nfold_graver(A, n):
            best = max(best, brick_type(z, A.t))
    return best
