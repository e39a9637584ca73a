"""Normal-form completion of a symmetric lattice generating set.

Only one representative of each ``+-g`` pair is stored. Conformal
reducibility checks run on int64 numpy arrays split into positive and
negative parts; the magnitudes are guarded so int64 never overflows, and
the authoritative values stay as Python ints.
"""

from __future__ import annotations

import heapq
from typing import Iterable, Sequence

import numpy as np

# Stored magnitudes stay far below 2**63 so sums of two never overflow.
_SAFE = 2 ** 61


_MASK_BITS = 62


def _support_masks(flags: np.ndarray) -> np.ndarray:
    """Bit ``i`` set where ``flags[..., i]`` holds; last axis at most 62 long."""
    weights = np.left_shift(np.int64(1), np.arange(flags.shape[-1], dtype=np.int64))
    return (flags.astype(np.int64) * weights).sum(axis=-1)


class OverflowGuard(ArithmeticError):
    """Entry magnitude too large for the vectorized reducibility test."""


class ConformalStore:
    """Growable set of vectors, queried for conformal reducers of ``v`` or ``-v``."""

    def __init__(self, dim: int):
        self.dim = dim
        self.size = 0
        cap = 64
        self._pos = np.zeros((cap, dim), dtype=np.int64)
        self._neg = np.zeros((cap, dim), dtype=np.int64)
        self._pmask = np.zeros(cap, dtype=np.int64)
        self._nmask = np.zeros(cap, dtype=np.int64)
        self.vectors: list[tuple] = []

    def _grow(self) -> None:
        cap = 2 * self._pos.shape[0]
        for name in ("_pos", "_neg"):
            old = getattr(self, name)
            new = np.zeros((cap, self.dim), dtype=np.int64)
            new[: self.size] = old[: self.size]
            setattr(self, name, new)
        for name in ("_pmask", "_nmask"):
            old = getattr(self, name)
            new = np.zeros(cap, dtype=np.int64)
            new[: self.size] = old[: self.size]
            setattr(self, name, new)

    def add(self, v: tuple) -> None:
        if max(map(abs, v), default=0) >= _SAFE:
            raise OverflowGuard(v)
        if self.size == self._pos.shape[0]:
            self._grow()
        arr = np.array(v, dtype=np.int64)
        self._pos[self.size] = np.maximum(arr, 0)
        self._neg[self.size] = np.maximum(-arr, 0)
        if self.dim <= _MASK_BITS:
            self._pmask[self.size] = _support_masks(arr > 0)
            self._nmask[self.size] = _support_masks(arr < 0)
        self.vectors.append(v)
        self.size += 1

    @property
    def pos(self) -> np.ndarray:
        return self._pos[: self.size]

    @property
    def pmask(self) -> np.ndarray:
        return self._pmask[: self.size]

    @property
    def nmask(self) -> np.ndarray:
        return self._nmask[: self.size]

    @property
    def neg(self) -> np.ndarray:
        return self._neg[: self.size]

    def find_reducer(self, vpos: np.ndarray, vneg: np.ndarray) -> tuple[int, int] | None:
        """Index and sign ``s`` of a stored ``h`` with ``s*h`` conformal to v."""
        if self.size == 0:
            return None
        P, N = self.pos, self.neg
        plus = (P <= vpos).all(axis=1) & (N <= vneg).all(axis=1)
        hit = np.flatnonzero(plus)
        if hit.size:
            return int(hit[0]), 1
        minus = (N <= vpos).all(axis=1) & (P <= vneg).all(axis=1)
        hit = np.flatnonzero(minus)
        if hit.size:
            return int(hit[0]), -1
        return None

    def normal_form(self, v: tuple) -> tuple:
        """Subtract conformal reducers from ``v`` until none remains."""
        arr = np.array(v, dtype=np.int64)
        vpos, vneg = np.maximum(arr, 0), np.maximum(-arr, 0)
        while True:
            if not vpos.any() and not vneg.any():
                return (0,) * self.dim
            found = self.find_reducer(vpos, vneg)
            if found is None:
                return tuple(int(a) for a in vpos - vneg)
            idx, sign = found
            hp, hn = (self.pos[idx], self.neg[idx]) if sign > 0 else (self.neg[idx], self.pos[idx])
            k = _multiplicity((vpos + vneg)[None, :], (hp + hn)[None, :])[0]
            vpos = vpos - k * hp
            vneg = vneg - k * hn

    def minimal_indices(self) -> list[int]:
        """Indices of elements not strictly conformally dominated by another."""
        keep = []
        P, N = self.pos, self.neg
        for i in range(self.size):
            p, q = P[i], N[i]
            le = (P <= p).all(axis=1) & (N <= q).all(axis=1)
            le_neg = (N <= p).all(axis=1) & (P <= q).all(axis=1)
            le[i] = False
            le_neg[i] = False
            if not (le.any() or le_neg.any()):
                keep.append(i)
        return keep


def _critical_sums(store: ConformalStore, r: np.ndarray) -> np.ndarray:
    """Sums ``r + h`` and ``r - h`` over stored ``h`` that are not conformal sums."""
    H = store.pos - store.neg
    out = []
    for signed in (H, -H):
        critical = ((r * signed) < 0).any(axis=1)
        out.append(r + signed[critical])
    return np.concatenate(out)


def _multiplicity(V: np.ndarray, R: np.ndarray) -> np.ndarray:
    """Largest ``k`` with ``k * R[i]`` conformal to ``V[i]``, row-wise."""
    Ra = np.abs(R)
    ratio = np.where(Ra > 0, np.abs(V) // np.maximum(Ra, 1), np.iinfo(np.int64).max)
    return ratio.min(axis=1)


def _first_reducers(store: ConformalStore, Vp: np.ndarray, Vn: np.ndarray,
                    P: np.ndarray, N: np.ndarray, pm: np.ndarray, nm: np.ndarray) -> np.ndarray:
    """For each row, index of the first stored ``h`` (given by parts P, N and
    support masks pm, nm) conformal to the row, or -1."""
    out = np.full(len(Vp), -1, dtype=np.int64)
    if store.dim <= _MASK_BITS:
        vpm = _support_masks(Vp > 0)
        vnm = _support_masks(Vn > 0)
        ok = ((pm[None, :] & ~vpm[:, None]) == 0) & ((nm[None, :] & ~vnm[:, None]) == 0)
        rows, cols = np.nonzero(ok)
        if rows.size:
            fit = (P[cols] <= Vp[rows]).all(axis=1) & (N[cols] <= Vn[rows]).all(axis=1)
            rows, cols = rows[fit], cols[fit]
            # np.nonzero is row-major, so the first hit per row is its first reducer.
            first = np.unique(rows, return_index=True)
            out[first[0]] = cols[first[1]]
        return out
    hits = ((P[None] <= Vp[:, None]) & (N[None] <= Vn[:, None])).all(axis=2)
    found = hits.any(axis=1)
    out[found] = hits[found].argmax(axis=1)
    return out


def _reduce_batch(store: ConformalStore, V: np.ndarray) -> np.ndarray:
    """Row-wise normal forms of ``V`` against the current store, vectorized."""
    V = V.copy()
    active = np.flatnonzero(V.any(axis=1))
    H = store.pos - store.neg
    P, N, pm, nm = store.pos, store.neg, store.pmask, store.nmask
    chunk = max(1, _CELLS // max(1, store.size * (1 if store.dim <= _MASK_BITS else store.dim)))
    while active.size and store.size:
        still = []
        for lo in range(0, active.size, chunk):
            rows = active[lo:lo + chunk]
            Vp = np.maximum(V[rows], 0)
            Vn = np.maximum(-V[rows], 0)
            plus = _first_reducers(store, Vp, Vn, P, N, pm, nm)
            minus = _first_reducers(store, Vp, Vn, N, P, nm, pm)
            minus[plus >= 0] = -1
            for idx, sign in ((plus, 1), (minus, -1)):
                mask = idx >= 0
                if mask.any():
                    target = rows[mask]
                    R = sign * H[idx[mask]]
                    V[target] -= _multiplicity(V[target], R)[:, None] * R
            moved = rows[(plus >= 0) | (minus >= 0)]
            still.append(moved[V[moved].any(axis=1)])
        active = np.concatenate(still) if still else active[:0]
    return V[V.any(axis=1)]


_CELLS = 1 << 22


def complete(generators: Iterable[Sequence[int]], dim: int) -> list[tuple]:
    """Graver basis (one representative per sign pair) of the lattice spanned
    by ``generators``.

    Pending candidates are bucketed by 1-norm and the lightest bucket is
    reduced first, in insertion order; each nonzero normal form joins the
    store and queues its critical sums with every stored element. The result
    is the set of conformally minimal stored elements, so it does not depend
    on processing order.
    """
    store = ConformalStore(dim)
    start = sorted(tuple(int(a) for a in g) for g in generators)
    if any(max(map(abs, g), default=0) >= _SAFE for g in start):
        raise OverflowGuard("generator entries too large")
    buckets: dict[int, list[np.ndarray]] = {}
    heap: list[int] = []

    def push(rows: np.ndarray) -> None:
        norms = np.abs(rows).sum(axis=1)
        for d in np.unique(norms):
            d = int(d)
            if d not in buckets:
                buckets[d] = []
                heapq.heappush(heap, d)
            buckets[d].append(rows[norms == d])

    if start:
        push(np.array(start, dtype=np.int64))
    while heap:
        d = heapq.heappop(heap)
        V = _reduce_batch(store, np.concatenate(buckets.pop(d)))
        for v in V:
            nf = store.normal_form(tuple(int(a) for a in v))
            if not any(nf):
                continue
            if store.size:
                sums = _critical_sums(store, np.array(nf, dtype=np.int64))
                if len(sums):
                    push(sums)
            store.add(nf)
    return [store.vectors[i] for i in store.minimal_indices()]
