"""Graver-basis optimization: finiteness test, feasibility phase, Graver-best
augmentation, and the linear, separable, distance, convex-maximization and
weighted solvers built on them."""

from __future__ import annotations

import enum
import functools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from typing import Callable, Sequence

from .core import INF, BoundsBox, DimensionError, IntMatrix, hstack, is_finite, solve_diophantine, vstack
from .graver import Bimatrix, GraverBasis, extended_graver, nfold_graver, nfold_matrix
from .objectives import Linear, PiecewiseLinearConvex, SeparableObjective


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    INFINITE_IF_NONEMPTY = "infinite-if-nonempty"


@dataclass
class SolveResult:
    status: Status
    point: tuple | None = None
    value: int | None = None
    witness: tuple | None = None
    steps: int = 0
    basis_size: int = 0
    # objective value at each iterate of the final augmentation run
    history: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


class UnboundedRay(Exception):
    """``x + lambda g`` stays inside the bounds for every ``lambda >= 0``."""

    def __init__(self, direction):
        super().__init__(direction)
        self.direction = direction


class UnsupportedDimension(ValueError):
    pass


def _check_len(name: str, v: Sequence, n: int) -> None:
    if len(v) != n:
        raise DimensionError(f"{name} has length {len(v)}, expected {n}")


def check_finiteness(G: GraverBasis, bounds: BoundsBox) -> tuple | None:
    """First ``g`` in ``G`` that can be added indefinitely without leaving
    the bound shape, or ``None`` when every such feasible set is finite."""
    _check_len("bounds", bounds.lower, G.ambient_dim)
    lo_fin = [is_finite(v) for v in bounds.lower]
    hi_fin = [is_finite(v) for v in bounds.upper]
    for g in G:
        if all((gi <= 0 or not hf) and (gi >= 0 or not lf)
               for gi, lf, hf in zip(g, lo_fin, hi_fin)):
            return g
    return None


def univariate_min(f: Callable[[int], int], r: int, s: int) -> int:
    """Minimizer of a convex ``f`` on ``[r, s]`` by bisection on the sign of
    ``f(mid + 1) - f(mid)``; on a tie ``mid`` itself is returned."""
    if r > s:
        raise ValueError(f"empty interval [{r}, {s}]")
    while r < s:
        mid = (r + s) // 2
        a, b = f(mid), f(mid + 1)
        if a < b:
            s = mid
        elif a > b:
            r = mid + 1
        else:
            return mid
    return r


def _first_argmin(f: Callable[[int], int], r: int, s: int) -> int:
    """Smallest minimizer of a convex ``f`` on ``[r, s]``."""
    while r < s:
        mid = (r + s) // 2
        if f(mid) <= f(mid + 1):
            s = mid
        else:
            r = mid + 1
    return r


def _step_limit(x: Sequence[int], g: Sequence[int], bounds: BoundsBox) -> int | float:
    limit = INF
    for xi, gi, lo, hi in zip(x, g, bounds.lower, bounds.upper):
        if gi > 0 and hi != INF:
            limit = min(limit, (hi - xi) // gi)
        elif gi < 0 and lo != -INF:
            limit = min(limit, (xi - lo) // -gi)
    return limit


def line_search(f: SeparableObjective, x: Sequence[int], g: Sequence[int],
                bounds: BoundsBox) -> tuple[int, int]:
    """Best ``lambda`` in ``{0..s}`` for the step ``x + lambda g`` and the
    resulting value; raises ``UnboundedRay`` when ``s`` is infinite."""
    limit = _step_limit(x, g, bounds)
    if limit == INF:
        raise UnboundedRay(tuple(g))
    support = [i for i, gi in enumerate(g) if gi]
    base = sum(f.terms[i](x[i]) for i in support)
    rest = f(x) - base

    def along(lam: int) -> int:
        return sum(f.terms[i](x[i] + lam * g[i]) for i in support)

    lam = univariate_min(along, 0, limit)
    return lam, rest + along(lam)


class _Direction:
    __slots__ = ("g", "support")

    def __init__(self, g):
        self.g = g
        self.support = [(i, gi) for i, gi in enumerate(g) if gi]


def _best_step(f: SeparableObjective, x: list, fx: int, dirs: list,
               bounds: BoundsBox) -> tuple[int, int, int] | None:
    """(change in value, index into dirs, lambda) of the best strict
    improvement among ``dirs``; earlier directions win ties."""
    best = None
    terms = f.terms
    for k, d in enumerate(dirs):
        limit = INF
        for i, gi in d.support:
            if gi > 0:
                hi = bounds.upper[i]
                if hi != INF:
                    limit = min(limit, (hi - x[i]) // gi)
            else:
                lo = bounds.lower[i]
                if lo != -INF:
                    limit = min(limit, (x[i] - lo) // -gi)
        if limit == INF:
            raise UnboundedRay(d.g)
        if limit == 0:
            continue
        base = sum(terms[i](x[i]) for i, _ in d.support)

        def along(lam, sup=d.support):
            return sum(terms[i](x[i] + lam * gi) for i, gi in sup)

        # a convex function that does not drop at the first step never drops
        if along(1) >= base:
            continue
        lam = _first_argmin(along, 1, limit)
        delta = along(lam) - base
        if best is None or delta < best[0]:
            best = (delta, k, lam)
    return best


def _parallel_best(f, x, fx, dirs, bounds, threads):
    size = -(-len(dirs) // threads)
    chunks = [(lo, dirs[lo:lo + size]) for lo in range(0, len(dirs), size)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda c: (c[0], _best_step(f, x, fx, c[1], bounds)), chunks))
    best = None
    # chunks are in direction order, so a strict comparison keeps the first tie
    for offset, res in parts:
        if res is not None and (best is None or res[0] < best[0]):
            best = (res[0], res[1] + offset, res[2])
    return best


def augment_to_optimum(G: GraverBasis, f: SeparableObjective, x0: Sequence[int],
                       bounds: BoundsBox, *, threads: int = 1,
                       on_step: Callable[[tuple], None] | None = None) -> SolveResult:
    """Repeat Graver-best steps from a feasible ``x0`` until none improves.

    Among equal improvements the lexicographically smallest direction wins,
    then the smallest step length. ``on_step`` sees every new iterate.
    """
    n = G.ambient_dim
    _check_len("x0", x0, n)
    _check_len("objective", f.terms, n)
    if not bounds.contains(x0):
        raise ValueError("starting point violates the bounds")
    witness = check_finiteness(G, bounds)
    if witness is not None:
        return SolveResult(Status.INFINITE_IF_NONEMPTY, witness=witness, basis_size=len(G))
    x = [int(v) for v in x0]
    fx = f(x)
    history = [fx]
    dirs = [_Direction(g) for g in G]
    steps = 0
    while True:
        if threads > 1 and len(dirs) > 1:
            best = _parallel_best(f, x, fx, dirs, bounds, threads)
        else:
            best = _best_step(f, x, fx, dirs, bounds)
        if best is None:
            break
        delta, k, lam = best
        for i, gi in dirs[k].support:
            x[i] += lam * gi
        fx += delta
        steps += 1
        history.append(fx)
        if on_step is not None:
            on_step(tuple(x))
    return SolveResult(Status.OPTIMAL, tuple(x), fx, steps=steps,
                       basis_size=len(G), history=history)


def _auxiliary_objective(bounds: BoundsBox) -> SeparableObjective:
    terms = []
    for lo, hi in zip(bounds.lower, bounds.upper):
        pieces = [(0, 0)]
        if lo != -INF:
            pieces.append((-1, lo))
        if hi != INF:
            pieces.append((1, -hi))
        terms.append(PiecewiseLinearConvex(tuple(pieces)))
    return SeparableObjective(tuple(terms))


def find_feasible(A: IntMatrix, G: GraverBasis, bounds: BoundsBox, b: Sequence[int],
                  *, threads: int = 1) -> SolveResult:
    """A point of ``{A x = b, l <= x <= u}``, found by minimizing the total
    bound violation from an unconstrained integer solution.

    The result value is the auxiliary minimum: 0 with a point, or the
    positive residual violation when the set is empty.
    """
    _check_len("bounds", bounds.lower, A.ncols)
    _check_len("b", b, A.nrows)
    for lo, hi in zip(bounds.lower, bounds.upper):
        if lo == INF or hi == -INF or lo > hi:
            return SolveResult(Status.INFEASIBLE, basis_size=len(G))
    witness = check_finiteness(G, bounds)
    if witness is not None:
        return SolveResult(Status.INFINITE_IF_NONEMPTY, witness=witness, basis_size=len(G))
    xhat = solve_diophantine(A, b)
    if xhat is None:
        return SolveResult(Status.INFEASIBLE, basis_size=len(G), info={"stage": "diophantine"})
    if bounds.contains(xhat):
        return SolveResult(Status.OPTIMAL, xhat, 0, basis_size=len(G))
    widened = BoundsBox(tuple(min(lo, v) for lo, v in zip(bounds.lower, xhat)),
                        tuple(max(hi, v) for hi, v in zip(bounds.upper, xhat)))
    res = augment_to_optimum(G, _auxiliary_objective(bounds), xhat, widened, threads=threads)
    if res.status is not Status.OPTIMAL:
        # cannot happen: the widened box has the same finite pattern
        return res
    if res.value > 0:
        return SolveResult(Status.INFEASIBLE, value=res.value, steps=res.steps,
                           basis_size=len(G), info={"stage": "auxiliary"})
    return SolveResult(Status.OPTIMAL, res.point, 0, steps=res.steps, basis_size=len(G))


def minimize_separable(A: IntMatrix, G: GraverBasis, f: SeparableObjective,
                       bounds: BoundsBox, b: Sequence[int], *, threads: int = 1,
                       on_step=None) -> SolveResult:
    _check_len("objective", f.terms, A.ncols)
    start = find_feasible(A, G, bounds, b, threads=threads)
    if start.status is not Status.OPTIMAL:
        if start.status is Status.INFEASIBLE:
            start.info["auxiliary_value"] = start.value
            start.value = None
        return start
    res = augment_to_optimum(G, f, start.point, bounds, threads=threads, on_step=on_step)
    res.info["feasibility_steps"] = start.steps
    return res


def minimize_linear(A: IntMatrix, G: GraverBasis, w: Sequence[int], bounds: BoundsBox,
                    b: Sequence[int], **kw) -> SolveResult:
    return minimize_separable(A, G, SeparableObjective.linear(w), bounds, b, **kw)


def vertex_radius(A: IntMatrix, bounds: BoundsBox, b: Sequence[int], xhat: Sequence[int]) -> int:
    """An integer bounding ``|x_i|`` over every integer point of a bounded
    feasible region, and over ``xhat``.

    Each vertex coordinate is a ratio of determinants (Cramer's rule); the
    numerator is at most ``Delta * m * B * (1 + n * amax)`` where ``Delta``
    bounds every minor by the product of row-norm ceilings and ``B`` is the
    largest finite entry of ``b``, ``l`` and ``u``. Coordinates with a finite
    box use the box when it is smaller.
    """
    m, n = A.shape
    finite = [abs(v) for v in tuple(b) + bounds.lower + bounds.upper if is_finite(v)]
    big = max(finite, default=0)
    delta = 1
    for row in A.rows:
        sq = sum(a * a for a in row)
        root = math.isqrt(sq)
        delta *= max(1, root + (root * root < sq))
    amax = max((abs(a) for row in A.rows for a in row), default=0)
    cramer = max(big, delta * m * big * (1 + n * amax))
    rho = max((abs(v) for v in xhat), default=0)
    for lo, hi in zip(bounds.lower, bounds.upper):
        box = max(abs(lo), abs(hi)) if is_finite(lo) and is_finite(hi) else INF
        rho = max(rho, min(box, cramer))
    return int(rho)


def infinity_exponent(n: int, rho: int) -> int:
    """Least ``q >= 1`` with ``(2 rho + 1)^q > n (2 rho)^q``, compared exactly."""
    if rho == 0 or n <= 1:
        return 1
    k = 2 * rho
    # float estimate, then exact correction in both directions
    q = max(1, int(math.log(n) / math.log1p(1 / k)))
    while q > 1 and (k + 1) ** (q - 1) > n * k ** (q - 1):
        q -= 1
    while not (k + 1) ** q > n * k ** q:
        q += 1
    return q


def _linf(x, y) -> int:
    return max((abs(a - c) for a, c in zip(x, y)), default=0)


def _root_text(value: int, p: int) -> str:
    with localcontext() as ctx:
        ctx.prec = 30
        root = Decimal(value) ** (Decimal(1) / Decimal(p)) if value else Decimal(0)
        return format(root, "f")


def minimize_distance(A: IntMatrix, G: GraverBasis, p: int | float, target: Sequence[int],
                      bounds: BoundsBox, b: Sequence[int], *, method: str = "power",
                      threads: int = 1) -> SolveResult:
    """Closest feasible point to ``target`` in the l_p norm.

    Finite ``p``: the value is ``sum |x_i - target_i|^p`` (the p-th power of
    the distance). ``p = inf``: the value is the l_inf distance itself, found
    through an l_q problem with ``q`` large enough that its optimum also
    minimizes the l_inf distance (``method="power"``), or by bisection on the
    radius of a box around ``target`` (``method="bisection"``).
    """
    target = tuple(int(v) for v in target)
    _check_len("target", target, A.ncols)
    if p != INF:
        if not (isinstance(p, int) and p >= 1):
            raise ValueError("p must be a positive integer or inf")
        res = minimize_separable(A, G, SeparableObjective.power_distance(target, p),
                                 bounds, b, threads=threads)
        if res.optimal:
            res.info["distance_approx"] = _root_text(res.value, p)
        return res
    if method == "bisection":
        return _linf_bisection(A, G, target, bounds, b, threads)
    if method != "power":
        raise ValueError(f"unknown method {method!r}")
    witness = check_finiteness(G, bounds)
    if witness is not None:
        return SolveResult(Status.INFINITE_IF_NONEMPTY, witness=witness, basis_size=len(G))
    rho = vertex_radius(A, bounds, b, target)
    q = infinity_exponent(A.ncols, rho)
    res = minimize_separable(A, G, SeparableObjective.power_distance(target, q),
                             bounds, b, threads=threads)
    if res.optimal:
        res.info.update(q=q, rho=rho, power_value=res.value)
        res.value = _linf(res.point, target)
    return res


def _linf_bisection(A, G, target, bounds, b, threads) -> SolveResult:
    start = find_feasible(A, G, bounds, b, threads=threads)
    if not start.optimal:
        return start

    def box(r):
        return BoundsBox(tuple(max(lo, c - r) for lo, c in zip(bounds.lower, target)),
                         tuple(min(hi, c + r) for hi, c in zip(bounds.upper, target)))

    lo, hi, best = 0, _linf(start.point, target), start.point
    while lo < hi:
        mid = (lo + hi) // 2
        res = find_feasible(A, G, box(mid), b, threads=threads)
        if res.optimal:
            hi, best = mid, res.point
        else:
            lo = mid + 1
    return SolveResult(Status.OPTIMAL, best, hi, basis_size=len(G), info={"method": "bisection"})


def _primitive(v: tuple) -> tuple:
    d = math.gcd(*v)
    v = tuple(a // d for a in v)
    return v if v > tuple(-a for a in v) else tuple(-a for a in v)


def _half_plane(v) -> int:
    # 0 for angles in [0, pi), 1 for [pi, 2 pi)
    return 0 if v[1] > 0 or (v[1] == 0 and v[0] > 0) else 1


def _sort_by_angle(vectors: list) -> list:
    def cmp(a, c):
        ha, hc = _half_plane(a), _half_plane(c)
        if ha != hc:
            return ha - hc
        cross = a[0] * c[1] - a[1] * c[0]
        return -1 if cross > 0 else (1 if cross < 0 else 0)

    return sorted(vectors, key=functools.cmp_to_key(cmp))


def candidate_normals(W: IntMatrix, G: GraverBasis) -> list[tuple]:
    """Linear objectives whose maximizers over the feasible set hit every
    vertex of the projection ``W S``.

    The edges of the projected hull are parallel to projected Graver
    directions, so one objective inside each open sector between
    consecutive edge normals suffices.
    """
    d = W.nrows
    if d == 1:
        return [(1,), (-1,)]
    lines = sorted({_primitive(W.matvec(g)) for g in G if any(W.matvec(g))})
    if not lines:
        return [(0, 0)]
    if len(lines) == 1:
        v = lines[0]
        return [v, tuple(-a for a in v)]
    rays = []
    for a, c in lines:
        rays += [(-c, a), (c, -a)]
    rays = _sort_by_angle(rays)
    k = len(rays)
    return [(rays[i][0] + rays[(i + 1) % k][0], rays[i][1] + rays[(i + 1) % k][1])
            for i in range(k)]


def maximize_composite(A: IntMatrix, G: GraverBasis, W: IntMatrix, f: Callable,
                       bounds: BoundsBox, b: Sequence[int], *, threads: int = 1) -> SolveResult:
    """Maximize a convex ``f(W x)`` over the feasible set for ``d = 1, 2``
    rows of ``W``; ``f`` takes a tuple and returns a comparable value."""
    if W.nrows not in (1, 2):
        raise UnsupportedDimension("convex maximization supports W with 1 or 2 rows")
    _check_len("W columns", range(W.ncols), A.ncols)
    start = find_feasible(A, G, bounds, b, threads=threads)
    if not start.optimal:
        return start
    best = None
    for c in candidate_normals(W, G):
        if not any(c):
            res = start
        else:
            w = [-sum(ci * W[i, j] for i, ci in enumerate(c)) for j in range(W.ncols)]
            res = augment_to_optimum(G, SeparableObjective.linear(w), start.point, bounds,
                                     threads=threads)
        val = f(W.matvec(res.point))
        if best is None or val > best[0]:
            best = (val, res.point)
    return SolveResult(Status.OPTIMAL, best[1], best[0], basis_size=len(G))


def weighted_matrix(A: IntMatrix, W: IntMatrix) -> IntMatrix:
    """``[[A, 0], [W, I]]``."""
    d = W.nrows
    return vstack([hstack([A, IntMatrix.zeros(A.nrows, d)]),
                   hstack([W, IntMatrix.identity(d)])])


def minimize_weighted(A: IntMatrix, W: IntMatrix, G_B: GraverBasis, f: SeparableObjective,
                      g: SeparableObjective, bounds: BoundsBox, hat_bounds: BoundsBox,
                      b: Sequence[int], *, threads: int = 1) -> SolveResult:
    """Minimize ``f(W x) + g(x)`` subject to ``A x = b``, ``l <= x <= u`` and
    ``lhat <= W x <= uhat``, through the slack ``y = -W x``."""
    n, d = A.ncols, W.nrows
    _check_len("g", g.terms, n)
    _check_len("f", f.terms, d)
    _check_len("hat bounds", hat_bounds.lower, d)
    B = weighted_matrix(A, W)
    if G_B.ambient_dim != B.ncols:
        raise DimensionError("Graver basis does not match [[A,0],[W,I]]")
    lifted = bounds.concat(BoundsBox(tuple(-v for v in hat_bounds.upper),
                                     tuple(-v for v in hat_bounds.lower)))
    h = g + f.reflected()
    res = minimize_separable(B, G_B, h, lifted, tuple(b) + (0,) * d, threads=threads)
    if res.optimal:
        res.info["image"] = tuple(-v for v in res.point[n:])
        res.point = res.point[:n]
    return res


@dataclass(frozen=True)
class NFoldInstance:
    A: Bimatrix
    n: int
    bounds: BoundsBox
    b: tuple
    objective: SeparableObjective | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        _check_len("bounds", self.bounds.lower, self.n * self.A.t)
        _check_len("b", self.b, self.A.r + self.n * self.A.s)
        if self.objective is not None:
            _check_len("objective", self.objective.terms, self.n * self.A.t)

    def matrix(self) -> IntMatrix:
        return nfold_matrix(self.A, self.n)


@dataclass(frozen=True)
class GeneralizedInstance:
    A: Bimatrix
    W: Bimatrix
    n: int
    bounds: BoundsBox
    hat_bounds: BoundsBox
    b: tuple
    f: SeparableObjective
    g: SeparableObjective

    def __post_init__(self):
        if self.A.t != self.W.t:
            raise DimensionError("A and W must share the brick width")
        if self.n < 1:
            raise ValueError("n must be at least 1")
        nt, d = self.n * self.A.t, self.W.r + self.n * self.W.s
        _check_len("bounds", self.bounds.lower, nt)
        _check_len("hat bounds", self.hat_bounds.lower, d)
        _check_len("b", self.b, self.A.r + self.n * self.A.s)
        _check_len("f", self.f.terms, d)
        _check_len("g", self.g.terms, nt)


def solve_nfold_separable(inst: NFoldInstance, *, threads: int = 1) -> SolveResult:
    G = nfold_graver(inst.A, inst.n)
    f = inst.objective or SeparableObjective.zero(inst.n * inst.A.t)
    return minimize_separable(inst.matrix(), G, f, inst.bounds, inst.b, threads=threads)


def solve_nfold_linear(inst: NFoldInstance, w: Sequence[int] | None = None, *,
                       threads: int = 1) -> SolveResult:
    if w is not None:
        inst = NFoldInstance(inst.A, inst.n, inst.bounds, inst.b, SeparableObjective.linear(w))
    elif inst.objective is not None and not all(isinstance(t, Linear) for t in inst.objective.terms):
        raise ValueError("instance objective is not linear")
    return solve_nfold_separable(inst, threads=threads)


def solve_nfold_distance(inst: NFoldInstance, p, target: Sequence[int], *,
                         method: str = "power", threads: int = 1) -> SolveResult:
    G = nfold_graver(inst.A, inst.n)
    return minimize_distance(inst.matrix(), G, p, target, inst.bounds, inst.b,
                             method=method, threads=threads)


def solve_nfold_max(inst: NFoldInstance, W: IntMatrix, f: Callable, *,
                    threads: int = 1) -> SolveResult:
    G = nfold_graver(inst.A, inst.n)
    return maximize_composite(inst.matrix(), G, W, f, inst.bounds, inst.b, threads=threads)


def solve_nfold_generalized(inst: GeneralizedInstance, *, threads: int = 1) -> SolveResult:
    """Weighted problem over the n-fold products of ``A`` and ``W``.

    The Graver basis of ``[[A^(n), 0], [W^(n), I]]`` comes from the n-fold
    basis of the extension bimatrix, so only the lifted construction grows
    with ``n``.
    """
    G = extended_graver(inst.A, inst.W, inst.n)
    return minimize_weighted(nfold_matrix(inst.A, inst.n), nfold_matrix(inst.W, inst.n), G,
                             inst.f, inst.g, inst.bounds, inst.hat_bounds, inst.b,
                             threads=threads)
