"""Encoders for multiway tables, multicommodity flows and transportation,
plus the entry-disclosure audits for tables."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import INF, BoundsBox, IntMatrix, ext_int, is_finite
from .graver import Bimatrix, incidence_matrix, nfold_graver, nfold_matrix
from .objectives import Linear, SeparableObjective, Shifted
from .solver import GeneralizedInstance, NFoldInstance, SolveResult, minimize_linear


class EmptyFiber(Exception):
    """No table has the given margins."""


def _int_array(data, shape=None) -> np.ndarray:
    arr = np.array(data, dtype=object)
    if shape is not None and arr.shape != tuple(shape):
        raise ValueError(f"expected shape {tuple(shape)}, got {arr.shape}")
    return np.vectorize(int, otypes=[object])(arr) if arr.size else arr


# ---------------------------------------------------------------- tables


@dataclass(frozen=True)
class TableInstance:
    """Line-sum problem over ``m_1 x ... x m_d x n`` tables.

    ``margins[k]`` is the array of sums along axis ``k`` of the full
    (d+1)-way table, so its shape is the table shape with axis ``k``
    dropped; the last margin sums across layers. ``cost`` is an optional
    array of the full table shape.
    """

    dims: tuple
    n: int
    margins: tuple
    cost: object = None

    def __post_init__(self):
        if len(self.dims) < 2:
            raise ValueError("tables need at least two fixed dimensions")
        if self.n < 1 or any(m < 1 for m in self.dims):
            raise ValueError("table dimensions must be positive")
        if len(self.margins) != len(self.dims) + 1:
            raise ValueError(f"expected {len(self.dims) + 1} margin arrays")
        shape = self.shape
        for k, margin in enumerate(self.margins):
            want = shape[:k] + shape[k + 1:]
            arr = np.array(margin, dtype=object)
            if arr.shape != want:
                raise ValueError(f"margin {k} has shape {arr.shape}, expected {want}")
            if arr.size and min(int(v) for v in arr.flat) < 0:
                raise ValueError(f"margin {k} has a negative entry")
        if self.cost is not None and np.array(self.cost, dtype=object).shape != shape:
            raise ValueError(f"cost array must have shape {shape}")

    @property
    def shape(self) -> tuple:
        return tuple(self.dims) + (self.n,)

    @property
    def layer_size(self) -> int:
        return int(np.prod(self.dims))

    def coordinate(self, entry: Sequence[int]) -> int:
        """Position of a table cell in the layered variable vector."""
        if len(entry) != len(self.shape) or any(not 0 <= e < m for e, m in zip(entry, self.shape)):
            raise IndexError(f"entry {tuple(entry)} outside table of shape {self.shape}")
        return entry[-1] * self.layer_size + int(np.ravel_multi_index(tuple(entry[:-1]), self.dims))

    @classmethod
    def from_table(cls, table, cost=None) -> TableInstance:
        """The instance whose margins are read off ``table``."""
        arr = _int_array(table)
        return cls(tuple(arr.shape[:-1]), arr.shape[-1], tuple(table_margins(arr)), cost)


def table_margins(table) -> list:
    """Line sums of a table along each axis in turn, as nested lists."""
    arr = _int_array(table)
    return [arr.sum(axis=k).tolist() if arr.ndim > 1 else [int(arr.sum())]
            for k in range(arr.ndim)]


def line_sum_matrix(dims: Sequence[int]) -> IntMatrix:
    """Line-sum equations of an ``m_1 x ... x m_d`` array in row-major order.

    Rows are grouped by the summed axis (first axis first); within a group
    they follow the remaining indices lexicographically.
    """
    dims = tuple(dims)
    t = int(np.prod(dims))
    rows = []
    for k in range(len(dims)):
        rest = dims[:k] + dims[k + 1:]
        for idx in itertools.product(*map(range, rest)):
            row = [0] * t
            for v in range(dims[k]):
                cell = idx[:k] + (v,) + idx[k:]
                row[int(np.ravel_multi_index(cell, dims))] = 1
            rows.append(row)
    return IntMatrix.from_rows(rows, t)


def table_bimatrix(dims: Sequence[int]) -> Bimatrix:
    t = int(np.prod(dims))
    return Bimatrix(IntMatrix.identity(t), line_sum_matrix(dims))


def table_rhs(inst: TableInstance) -> tuple:
    """``(b^0, b^1, ..., b^n)``: across-layer sums, then per-layer line sums
    in the row order of ``line_sum_matrix``."""
    d = len(inst.dims)
    margins = [_int_array(m) for m in inst.margins]
    b = list(margins[d].flat)
    for layer in range(inst.n):
        for k in range(d):
            # margin k has the layer axis last
            b.extend(margins[k][..., layer].flat)
    return tuple(int(v) for v in b)


def encode_table(inst: TableInstance, objective: SeparableObjective | None = None) -> NFoldInstance:
    """n-fold program over layers; identity top block for sums across layers."""
    A = table_bimatrix(inst.dims)
    nt = inst.n * A.t
    if objective is None:
        if inst.cost is not None:
            cost = _int_array(inst.cost)
            w = [0] * nt
            for entry in itertools.product(*map(range, inst.shape)):
                w[inst.coordinate(entry)] = int(cost[entry])
            objective = SeparableObjective.linear(w)
        else:
            objective = SeparableObjective.zero(nt)
    return NFoldInstance(A, inst.n, BoundsBox.nonnegative(nt), table_rhs(inst), objective)


def decode_table(inst: TableInstance, x: Sequence[int]) -> np.ndarray:
    out = np.zeros(inst.shape, dtype=object)
    for entry in itertools.product(*map(range, inst.shape)):
        out[entry] = x[inst.coordinate(entry)]
    return out


def _entry_extreme(inst, A, G, b, j, sign, lo=0, hi=INF) -> SolveResult:
    nt = inst.n * inst.layer_size
    lower = [0] * nt
    upper = [INF] * nt
    lower[j] = max(0, lo)
    upper[j] = hi
    w = [0] * nt
    w[j] = sign
    return minimize_linear(A, G, w, BoundsBox(tuple(lower), tuple(upper)), b)


def entry_range(inst: TableInstance, entry: Sequence[int]) -> tuple[int, int]:
    """Smallest and largest value of one cell over all tables with the margins."""
    j = inst.coordinate(entry)
    enc = encode_table(inst)
    A, G = enc.matrix(), nfold_graver(enc.A, enc.n)
    low = _entry_extreme(inst, A, G, enc.b, j, 1)
    if not low.optimal:
        raise EmptyFiber("no table has these margins")
    high = _entry_extreme(inst, A, G, enc.b, j, -1)
    return low.point[j], high.point[j]


def entry_uniqueness(inst: TableInstance, entry: Sequence[int]) -> bool:
    """Whether the cell takes a single value across the whole fiber."""
    low, high = entry_range(inst, entry)
    return low == high


def entry_value_set(inst: TableInstance, entry: Sequence[int]) -> list[int]:
    """All values the cell takes across the fiber, found by shrinking a
    window from both ends: each round adds the current min and max inside
    the window and then excludes them."""
    j = inst.coordinate(entry)
    enc = encode_table(inst)
    A, G = enc.matrix(), nfold_graver(enc.A, enc.n)
    lo, hi = -INF, INF
    values = set()
    while lo <= hi:
        low = _entry_extreme(inst, A, G, enc.b, j, 1, lo, hi)
        if not low.optimal:
            break
        high = _entry_extreme(inst, A, G, enc.b, j, -1, lo, hi)
        lhat, uhat = low.point[j], high.point[j]
        values.update((lhat, uhat))
        lo, hi = lhat + 1, uhat - 1
    return sorted(values)


# ---------------------------------------------------------------- flows


def _term(cost) -> object:
    if cost is None:
        return Linear(0)
    if isinstance(cost, int):
        return Linear(cost)
    return cost


@dataclass(frozen=True)
class TransshipmentInstance:
    """Many-commodity flow on a fixed digraph.

    ``demands[k][v]`` is the net outflow of commodity ``k`` at vertex ``v``
    (positive for supply). ``edge_costs[e]`` applies to the combined flow
    on edge ``e``; ``commodity_costs[k][e]`` to commodity ``k`` alone. Costs
    are univariate terms or plain ints (linear).
    """

    vertices: int
    edges: tuple
    demands: tuple
    capacities: tuple
    edge_costs: tuple = None
    commodity_costs: tuple = None

    def __post_init__(self):
        if not self.edges:
            raise ValueError("digraph needs at least one edge")
        for a, b in self.edges:
            if not (0 <= a < self.vertices and 0 <= b < self.vertices) or a == b:
                raise ValueError(f"bad edge {(a, b)}")
        if not self.demands:
            raise ValueError("need at least one commodity")
        if any(len(d) != self.vertices for d in self.demands):
            raise ValueError("each demand vector needs one entry per vertex")
        if len(self.capacities) != len(self.edges):
            raise ValueError("need one capacity per edge")
        if any(c < 0 for c in self.capacities):
            raise ValueError("capacities must be nonnegative")
        if self.edge_costs is not None and len(self.edge_costs) != len(self.edges):
            raise ValueError("need one edge cost per edge")
        if self.commodity_costs is not None and (
                len(self.commodity_costs) != len(self.demands)
                or any(len(c) != len(self.edges) for c in self.commodity_costs)):
            raise ValueError("commodity costs must be commodities x edges")

    @property
    def commodities(self) -> int:
        return len(self.demands)

    def incidence(self) -> IntMatrix:
        return incidence_matrix(self.edges, self.vertices)

    def f_terms(self) -> list:
        costs = self.edge_costs or (None,) * len(self.edges)
        return [_term(c) for c in costs]

    def g_terms(self) -> list:
        t = len(self.edges)
        costs = self.commodity_costs or ((None,) * t,) * self.commodities
        return [_term(c) for row in costs for c in row]

    def cost(self, flows: Sequence[Sequence[int]]) -> int:
        """Total cost of per-commodity flows ``flows[k][e]``."""
        combined = [sum(col) for col in zip(*flows)]
        f, g = self.f_terms(), self.g_terms()
        return (sum(fe(v) for fe, v in zip(f, combined))
                + sum(gk(v) for gk, v in zip(g, (v for row in flows for v in row))))

    def check(self, flows: Sequence[Sequence[int]]) -> list[str]:
        """Violated constraints of a candidate flow, empty when feasible."""
        D = self.incidence()
        problems = []
        for k, x in enumerate(flows):
            if any(v < 0 for v in x):
                problems.append(f"commodity {k} has a negative flow")
            if D.matvec(x) != tuple(self.demands[k]):
                problems.append(f"commodity {k} violates its demands")
        for e, total in enumerate(sum(col) for col in zip(*flows)):
            if total > self.capacities[e]:
                problems.append(f"edge {e} exceeds its capacity")
        return problems


def encode_transshipment_slack(inst: TransshipmentInstance) -> NFoldInstance:
    """(l+1)-fold program: brick 0 is a slack commodity filling every edge
    to capacity, so capacities become equalities over the identity top
    block. Requires finite capacities."""
    if not all(is_finite(c) for c in inst.capacities):
        raise ValueError("the slack encoding needs finite capacities")
    D = inst.incidence()
    t, l = len(inst.edges), inst.commodities
    u = tuple(int(c) for c in inst.capacities)
    Du = D.matvec(u)
    d0 = tuple(Du[v] - sum(d[v] for d in inst.demands) for v in range(inst.vertices))
    b = u + d0 + tuple(v for d in inst.demands for v in d)
    slack = [Shifted(fe, -1, ue) for fe, ue in zip(inst.f_terms(), u)]
    objective = SeparableObjective(tuple(slack + inst.g_terms()))
    n = l + 1
    return NFoldInstance(Bimatrix.boxminus(D), n, BoundsBox.nonnegative(n * t), b, objective)


def encode_transshipment_weighted(inst: TransshipmentInstance) -> GeneralizedInstance:
    """l-fold program with incidence rows per commodity and the combined
    flow as the weighted image, boxed by ``0 <= W x <= u``."""
    D = inst.incidence()
    t, l = len(inst.edges), inst.commodities
    A = Bimatrix(IntMatrix.zeros(0, t), D)
    W = Bimatrix(IntMatrix.identity(t), IntMatrix.zeros(0, t))
    hat = BoundsBox((0,) * t, tuple(ext_int(c) for c in inst.capacities))
    b = tuple(v for d in inst.demands for v in d)
    return GeneralizedInstance(A, W, l, BoundsBox.nonnegative(l * t), hat, b,
                               SeparableObjective(tuple(inst.f_terms())),
                               SeparableObjective(tuple(inst.g_terms())))


def decode_transshipment(inst: TransshipmentInstance, x: Sequence[int],
                         slack: bool = False) -> list[list[int]]:
    """Per-commodity flows from a solution of either encoding."""
    t = len(inst.edges)
    start = t if slack else 0
    return [list(x[start + k * t:start + (k + 1) * t]) for k in range(inst.commodities)]


@dataclass(frozen=True)
class TransportationInstance:
    """Multicommodity transportation from ``m`` suppliers to ``n`` consumers.

    ``supplies[i][k]``, ``consumptions[j][k]``, ``capacities[i][j]`` (may be
    ``inf``), ``volumes[k]``; ``edge_costs[i][j]`` applies to the volume on
    edge ``(i, j)`` and ``commodity_costs[j][i][k]`` to a single commodity.
    """

    volumes: tuple
    supplies: tuple
    consumptions: tuple
    capacities: tuple
    edge_costs: tuple = None
    commodity_costs: tuple = None

    def __post_init__(self):
        m, n, l = self.m, self.n, self.l
        if m < 1 or n < 1 or l < 1:
            raise ValueError("need at least one supplier, consumer and commodity")
        if any(v < 0 for v in self.volumes):
            raise ValueError("volumes must be nonnegative")
        for name, rows, count in (("supplies", self.supplies, m),
                                  ("consumptions", self.consumptions, n)):
            if len(rows) != count or any(len(r) != l for r in rows):
                raise ValueError(f"{name} must have one length-{l} vector per party")
            if any(v < 0 for r in rows for v in r):
                raise ValueError(f"{name} must be nonnegative")
        if len(self.capacities) != m or any(len(r) != n for r in self.capacities):
            raise ValueError("capacities must be suppliers x consumers")
        if any(ext_int(c) < 0 for r in self.capacities for c in r):
            raise ValueError("capacities must be nonnegative")
        if self.edge_costs is not None and (
                len(self.edge_costs) != m or any(len(r) != n for r in self.edge_costs)):
            raise ValueError("edge costs must be suppliers x consumers")
        if self.commodity_costs is not None and (
                len(self.commodity_costs) != n
                or any(len(r) != m or any(len(c) != l for c in r) for r in self.commodity_costs)):
            raise ValueError("commodity costs must be consumers x suppliers x commodities")

    @property
    def m(self) -> int:
        return len(self.supplies)

    @property
    def n(self) -> int:
        return len(self.consumptions)

    @property
    def l(self) -> int:
        return len(self.volumes)

    def f_terms(self) -> list:
        # consumer-major, supplier-minor, matching the weighted image
        return [_term(self.edge_costs[i][j] if self.edge_costs else None)
                for j in range(self.n) for i in range(self.m)]

    def g_terms(self) -> list:
        return [_term(self.commodity_costs[j][i][k] if self.commodity_costs else None)
                for j in range(self.n) for i in range(self.m) for k in range(self.l)]


def transportation_bimatrices(volumes: Sequence[int], m: int) -> tuple[Bimatrix, Bimatrix]:
    l = len(volumes)
    A = Bimatrix(IntMatrix.identity(m * l),
                 IntMatrix.from_rows([[int(c % l == k) for c in range(m * l)] for k in range(l)],
                                     m * l))
    V = IntMatrix.from_rows([[volumes[c % l] if c // l == i else 0 for c in range(m * l)]
                             for i in range(m)], m * l)
    return A, Bimatrix(IntMatrix.zeros(0, m * l), V)


def encode_transportation(inst: TransportationInstance) -> GeneralizedInstance:
    """n-fold program over consumers: brick ``j`` holds ``x[j][i][k]``."""
    m, n, l = inst.m, inst.n, inst.l
    A, W = transportation_bimatrices(inst.volumes, m)
    b = tuple(int(v) for r in inst.supplies for v in r) + \
        tuple(int(v) for r in inst.consumptions for v in r)
    upper = tuple(ext_int(inst.capacities[i][j]) for j in range(n) for i in range(m))
    return GeneralizedInstance(A, W, n, BoundsBox.nonnegative(n * m * l),
                               BoundsBox((0,) * (n * m), upper), b,
                               SeparableObjective(tuple(inst.f_terms())),
                               SeparableObjective(tuple(inst.g_terms())))


def decode_transportation(inst: TransportationInstance, x: Sequence[int]) -> list:
    """``flows[i][j][k]``."""
    m, n, l = inst.m, inst.n, inst.l
    return [[[x[(j * m + i) * l + k] for k in range(l)] for j in range(n)] for i in range(m)]


def transportation_violations(inst: TransportationInstance, flows) -> list[str]:
    m, n, l = inst.m, inst.n, inst.l
    problems = []
    for i in range(m):
        for k in range(l):
            if sum(flows[i][j][k] for j in range(n)) != inst.supplies[i][k]:
                problems.append(f"supplier {i} commodity {k} supply mismatch")
    for j in range(n):
        for k in range(l):
            if sum(flows[i][j][k] for i in range(m)) != inst.consumptions[j][k]:
                problems.append(f"consumer {j} commodity {k} consumption mismatch")
    for i in range(m):
        for j in range(n):
            if any(v < 0 for v in flows[i][j]):
                problems.append(f"edge {(i, j)} has a negative flow")
            load = sum(inst.volumes[k] * flows[i][j][k] for k in range(l))
            if load > ext_int(inst.capacities[i][j]):
                problems.append(f"edge {(i, j)} exceeds its capacity")
    return problems


# ---------------------------------------------------------------- universality


def k3_incidence(m: int) -> IntMatrix:
    """Incidence matrix of ``K_{3,m}``: the m-fold product of ``[1 1 1]``
    under an identity top block, shape ``(3 + m) x 3m``."""
    if m < 1:
        raise ValueError("m must be at least 1")
    return nfold_matrix(Bimatrix.boxminus(IntMatrix.from_rows([[1, 1, 1]])), m)


def universal_matrix(m: int, n: int) -> IntMatrix:
    """The universal n-fold matrix over the bimatrix with identity top block
    and ``K_{3,m}`` incidence bottom block.

    ``n = 1`` returns the ``K_{3,m}`` incidence matrix itself, which is the
    displayed base case; ``n >= 2`` returns the n-fold product of the boxed
    incidence matrix.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    D = k3_incidence(m)
    if n == 1:
        return D
    return nfold_matrix(Bimatrix.boxminus(D), n)
