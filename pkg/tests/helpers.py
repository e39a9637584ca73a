"""Seeded instance generators and checks shared by the test modules."""

from __future__ import annotations

import random

from nfold.apps import (
    TransportationInstance, TransshipmentInstance, decode_transportation,
    transportation_bimatrices, transportation_violations,
)
from nfold.core import BoundsBox, IntMatrix
from nfold.graver import Bimatrix, incidence_matrix, nfold_matrix
from nfold.objectives import Linear, PowerAbsDev, SeparableObjective
from nfold.oracle import brute_optimize, enumerate_fiber
from nfold.solver import NFoldInstance


def random_matrix(rng: random.Random, rows: int, cols: int, lo: int = -2, hi: int = 2) -> IntMatrix:
    return IntMatrix.from_rows([[rng.randint(lo, hi) for _ in range(cols)] for _ in range(rows)], cols)


def random_bimatrix(rng: random.Random, t: int) -> Bimatrix:
    r, s = rng.choice([(0, 1), (1, 0), (1, 1), (1, 1), (0, 2)])
    return Bimatrix(random_matrix(rng, r, t), random_matrix(rng, s, t))


def random_box_instance(seed: int, objective_kind: str = "linear") -> NFoldInstance:
    """Small n-fold instance with entries in [-2, 2] and bounds inside [0, 4].

    Four in five right-hand sides come from a random point of the box, so
    most instances are feasible; the rest are random.
    """
    rng = random.Random(seed)
    t = rng.randint(1, 3)
    n = rng.randint(1, 3)
    A = random_bimatrix(rng, t)
    dim = n * t
    lower = [rng.randint(0, 1) for _ in range(dim)]
    upper = [rng.randint(max(lo, 2), 4) for lo in lower]
    M = nfold_matrix(A, n)
    if rng.random() < 0.8:
        b = M.matvec([rng.randint(lo, hi) for lo, hi in zip(lower, upper)])
    else:
        b = tuple(rng.randint(-4, 4) for _ in range(M.nrows))
    if objective_kind == "linear":
        f = SeparableObjective(tuple(Linear(rng.randint(-3, 3)) for _ in range(dim)))
    else:
        terms = []
        for _ in range(dim):
            if rng.random() < 0.3:
                terms.append(Linear(rng.randint(-3, 3)))
            else:
                terms.append(PowerAbsDev(rng.randint(0, 3), rng.choice([1, 2, 3]), rng.randint(-1, 5)))
        f = SeparableObjective(tuple(terms))
    return NFoldInstance(A, n, BoundsBox(tuple(lower), tuple(upper)), tuple(b), f)


def oracle_min(inst: NFoldInstance):
    return brute_optimize(inst.matrix(), inst.b, inst.bounds, inst.objective)


def step_bound_holds(steps: int, gap: int, dim: int) -> bool:
    """``steps <= 1 + ceil(log(gap) / log((2d-2)/(2d-3)))``, compared exactly.

    With ``c = (2d-2)/(2d-3)`` and integer ``s``, ``s <= 1 + ceil(y)`` is
    ``s - 2 < y``, i.e. ``c^(s-2) < gap`` once ``s >= 2``.
    """
    if gap == 0:
        return steps == 0
    if steps <= 1:
        return True
    if dim <= 1:
        return False
    k = steps - 2
    return (2 * dim - 2) ** k < gap * (2 * dim - 3) ** k


K32_EDGES = tuple((i, j) for i in range(3) for j in (3, 4))
DIGRAPH4_EDGES = ((0, 1), (1, 2), (2, 3), (3, 0), (0, 2))


def _convex_term(rng: random.Random):
    if rng.random() < 0.5:
        return Linear(rng.randint(-2, 3))
    return PowerAbsDev(rng.randint(0, 2), rng.choice([1, 2]), rng.randint(0, 2))


def random_transshipment(seed: int) -> TransshipmentInstance:
    """Flow on K_{3,2} or a 4-vertex digraph with up to 3 commodities.

    Demands usually come from a random flow within capacity, so most
    instances are feasible.
    """
    rng = random.Random(seed)
    vertices, edges = rng.choice([(5, K32_EDGES), (4, DIGRAPH4_EDGES)])
    l = rng.randint(1, 3)
    caps = [rng.randint(0, 2) for _ in edges]
    D = incidence_matrix(edges, vertices)
    demands = []
    if rng.random() < 0.85:
        left = list(caps)
        for _ in range(l):
            x = [rng.randint(0, c) for c in left]
            left = [c - v for c, v in zip(left, x)]
            demands.append(D.matvec(x))
    else:
        demands = [tuple(rng.randint(-1, 1) for _ in range(vertices)) for _ in range(l)]
    return TransshipmentInstance(
        vertices, edges, tuple(map(tuple, demands)), tuple(caps),
        edge_costs=tuple(_convex_term(rng) for _ in edges),
        commodity_costs=tuple(tuple(rng.randint(-2, 3) for _ in edges) for _ in range(l)))


def oracle_transshipment(inst: TransshipmentInstance):
    """Least cost over every feasible multicommodity flow, or None."""
    D, t, l = inst.incidence(), len(inst.edges), inst.commodities
    A = nfold_matrix(Bimatrix(IntMatrix.zeros(0, t), D), l)
    b = tuple(v for d in inst.demands for v in d)
    box = BoundsBox((0,) * (l * t), tuple(inst.capacities) * l)
    best = None
    for x in enumerate_fiber(A, b, box):
        flows = [x[k * t:(k + 1) * t] for k in range(l)]
        if not inst.check(flows):
            c = inst.cost(flows)
            best = c if best is None else min(best, c)
    return best


def random_transportation(seed: int, m: int = 2, n: int = 2, l: int = 2) -> TransportationInstance:
    rng = random.Random(seed)
    volumes = tuple(rng.randint(1, 2) for _ in range(l))
    flows = [[[rng.randint(0, 1) for _ in range(l)] for _ in range(n)] for _ in range(m)]
    supplies = tuple(tuple(sum(flows[i][j][k] for j in range(n)) for k in range(l)) for i in range(m))
    consumptions = tuple(tuple(sum(flows[i][j][k] for i in range(m)) for k in range(l))
                         for j in range(n))
    # capacities admit the generating flow, often exactly
    caps = tuple(tuple(rng.choice([0, 1, "inf"]) if rng.random() < 0.15 else
                       sum(v * c for v, c in zip(volumes, flows[i][j])) + rng.choice([0, 0, 1])
                       for j in range(n)) for i in range(m))
    return TransportationInstance(
        volumes, supplies, consumptions, caps,
        edge_costs=tuple(tuple(_convex_term(rng) for _ in range(n)) for _ in range(m)),
        commodity_costs=tuple(tuple(tuple(rng.randint(-1, 3) for _ in range(l)) for _ in range(m))
                              for _ in range(n)))


def transportation_cost(inst: TransportationInstance, flows) -> int:
    m, n, l = inst.m, inst.n, inst.l
    f, g = inst.f_terms(), inst.g_terms()
    total = 0
    for j in range(n):
        for i in range(m):
            load = sum(inst.volumes[k] * flows[i][j][k] for k in range(l))
            total += f[j * m + i](load)
            total += sum(g[(j * m + i) * l + k](flows[i][j][k]) for k in range(l))
    return total


def oracle_transportation(inst: TransportationInstance):
    m, n = inst.m, inst.n
    A, _ = transportation_bimatrices(inst.volumes, m)
    M = nfold_matrix(A, n)
    b = tuple(v for r in inst.supplies for v in r) + tuple(v for r in inst.consumptions for v in r)
    cap = max(b, default=0)
    best = None
    for x in enumerate_fiber(M, b, BoundsBox((0,) * M.ncols, (cap,) * M.ncols)):
        flows = decode_transportation(inst, x)
        if not transportation_violations(inst, flows):
            c = transportation_cost(inst, flows)
            best = c if best is None else min(best, c)
    return best


def term_json(term):
    if isinstance(term, Linear):
        return term.w
    if isinstance(term, PowerAbsDev):
        return {"type": "power", "alpha": term.alpha, "beta": term.beta, "center": term.center}
    raise TypeError(f"no JSON form for {term!r}")


def bimatrix_json(A: Bimatrix) -> dict:
    return {"top": A.A1.tolist(), "bottom": A.A2.tolist(), "t": A.t}


def solve_payload(inst, **extra) -> dict:
    """CLI ``nfold-solve`` payload for an NFoldInstance."""
    payload = {"bimatrix": bimatrix_json(inst.A), "n": inst.n,
               "lower": list(inst.bounds.lower), "upper": list(inst.bounds.upper),
               "rhs": list(inst.b)}
    if inst.objective is not None:
        payload["objective"] = [term_json(t) for t in inst.objective.terms]
    payload.update(extra)
    return {k: v for k, v in payload.items() if v is not None}


def instance_text(kind: str, payload: dict) -> str:
    import json
    return json.dumps({"format_version": "1", "kind": kind, "payload": payload})
