"""Upper and lower bounds on exponents of graph tensors.

Formula calculators (sum inequality, the CW-type bound, border-rank to rank
conversion, cycle bound), an exact checker for the degeneration identity that
bounds the border rank of ``CW_q^k`` by ``q + 2``, and the complete-graph table.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from decimal import ROUND_CEILING, ROUND_FLOOR, Decimal
from math import comb
from typing import Sequence

from .cuts import cut_values
from .poly import PolyTensor, poly
from .tensors import Graph, SparseTensor, complete_graph, cw_tensor

OMEGA_MM = 2.3728639
ALPHA_DUAL = 0.3029805
Q_RANGE = (2, 10_000)
EXPANSION_BUDGET = 10**6


# ---------------------------------------------------------------------------
# formula calculators


def tau_from_sum_inequality(products: Sequence[int], r: float, tol: float = 1e-12) -> float:
    """The ``tau`` with ``sum_i N_i^tau = r``, by bisection."""
    products = [int(n) for n in products]
    if not products:
        raise ValueError("need at least one product")
    if any(n < 2 for n in products):
        raise ValueError("every product must be at least 2")
    if r <= len(products):
        raise ValueError(f"need r > p, got r={r}, p={len(products)}")

    def f(tau):
        return sum(n**tau for n in products) - r

    lo, hi = 0.0, 1.0
    while f(hi) < 0:
        hi *= 2
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def cw_objective(q: int, qm: float) -> float:
    """``log_q((q + 2) / 2^qm)``."""
    return (math.log2(q + 2) - qm) / math.log2(q)


def cw_tau_bound(k: int, qm: float, q_range: tuple[int, int] = Q_RANGE) -> tuple[int, float]:
    """Minimize the CW-type per-edge bound over integer ``q`` in the closed range.

    The value does not depend on ``k``; ``k`` only selects which Dicke
    subexponent ``qm`` is meant to be.
    """
    if k < 3:
        raise ValueError("k must be at least 3")
    lo, hi = max(2, q_range[0]), q_range[1]
    if lo > hi:
        raise ValueError(f"empty q range {q_range}")
    best_q, best = lo, cw_objective(lo, qm)
    for q in range(lo + 1, hi + 1):
        v = cw_objective(q, qm)
        if v < best:
            best_q, best = q, v
    return best_q, best


def border_to_rank_factor(k: int, h: int) -> int:
    return comb(h + k - 1, k - 1)


def power_trick_bound(a: int, b: int, s: int) -> int:
    """``ceil(b / a)^s * a``."""
    if a < 1 or b < 1 or s < 0:
        raise ValueError("need a, b >= 1 and s >= 0")
    return (-(-b // a)) ** s * a


@dataclass(frozen=True)
class CycleBound:
    k: int
    alpha: float
    value: float
    omega_form: float


def cycle_bound(k: int, alpha: float = ALPHA_DUAL, omega_mm: float = OMEGA_MM) -> CycleBound:
    """``k - alpha (1 + (1 - alpha)/(k - 1 + alpha))`` and ``(k - 1)/2 * omega``."""
    if k < 3 or k % 2 == 0:
        raise ValueError(f"k must be odd and at least 3, got {k}")
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    val = k - alpha * (1 + (1 - alpha) / (k - 1 + alpha))
    return CycleBound(k, alpha, val, (k - 1) / 2 * omega_mm)


@dataclass(frozen=True)
class FlatteningBounds:
    min_cut: int
    max_cut: int
    edges: int
    omega_lower: int
    tau_lower: float


def flattening_lower_bounds(g: Graph) -> FlatteningBounds:
    lo, hi = cut_values(g)
    e = len(g.edges)
    return FlatteningBounds(lo, hi, e, hi, hi / e if e else 0.0)


# ---------------------------------------------------------------------------
# border-rank identity for CW_q^k


@dataclass
class BorderCheck:
    q: int
    k: int
    passed: bool
    failed_order: int | None        # first eps power below 5 that does not vanish
    top: SparseTensor               # the eps^5 coefficient
    matches_cw: bool
    terms: int = 0                  # rank-one summands used, i.e. q + 2


def cw_border_expansion(q: int, k: int, constant: Sequence = (1, None)) -> PolyTensor:
    """``sum_i eps (b0 + eps^2 b_i)^k - (b0 + eps^3 sum_i b_i)^k + (c0 + c1 eps) b0^k``.

    ``constant = (c0, c1)``; ``c1=None`` means ``-q``, the correct value.
    """
    deg = 5
    dims = (q + 1,) * k
    c0, c1 = constant
    c1 = -q if c1 is None else c1
    total = PolyTensor.zero(dims, deg)
    for i in range(1, q + 1):
        vec = {0: poly(1), i: poly(0, 0, 1)}
        total = total + PolyTensor.rank_one([vec] * k, dims, deg).scale(poly(0, 1))
    vec = {0: poly(1), **{i: poly(0, 0, 0, 1) for i in range(1, q + 1)}}
    total = total - PolyTensor.rank_one([vec] * k, dims, deg)
    total = total + PolyTensor.rank_one([{0: poly(1)}] * k, dims, deg).scale(poly(c0, c1))
    return total


def check_cw_border_certificate(q: int, k: int, constant: Sequence = (1, None)) -> BorderCheck:
    if q < 1 or k < 2:
        raise ValueError("need q >= 1 and k >= 2")
    if (q + 2) * (q + 1) ** k > EXPANSION_BUDGET:
        raise ValueError(
            f"expansion of {(q + 2) * (q + 1) ** k} terms exceeds the budget of {EXPANSION_BUDGET}"
        )
    total = cw_border_expansion(q, k, constant)
    failed = None
    for d in range(5):
        if len(total.coefficient(d)):
            failed = d
            break
    top = total.coefficient(5)
    matches = top == cw_tensor(q, k)
    return BorderCheck(q, k, failed is None and matches, failed, top, matches, q + 2)


# ---------------------------------------------------------------------------
# the complete-graph table


def _ceil_decimals(x: float, places: int) -> Decimal:
    return Decimal(repr(x)).quantize(Decimal(1).scaleb(-places), rounding=ROUND_CEILING)


def _floor_decimals(x: float, places: int) -> Decimal:
    return Decimal(repr(x)).quantize(Decimal(1).scaleb(-places), rounding=ROUND_FLOOR)


def _ceil_significant(x: Decimal, digits: int) -> Decimal:
    exp = x.adjusted() - digits + 1
    return x.quantize(Decimal(1).scaleb(exp), rounding=ROUND_CEILING)


@dataclass
class ExponentReport:
    k: int
    edges: int
    omega_lower: int
    omega_upper: float              # published value, rounded outward
    tau_lower: float                # rounded down to 6 decimals
    tau_upper: float                # rounded up to 6 decimals
    omega_upper_exact: float
    tau_lower_exact: float
    tau_upper_exact: float
    lower_source: str = "flattening (max-cut)"
    upper_source: str = ""
    constants: dict = field(default_factory=dict)

    def cells(self) -> dict:
        """Display strings in the table's formatting."""
        return {
            "k": str(self.k),
            "omega_lower": str(self.omega_lower),
            "omega_upper": f"{_ceil_significant(Decimal(repr(self.omega_upper)), 6):f}",
            "edges": str(self.edges),
            "tau_lower": f"{self.tau_lower:.6f}",
            "tau_upper": f"{self.tau_upper:.6f}",
        }

    def to_dict(self) -> dict:
        return asdict(self)


def complete_graph_table(
    k_max: int = 10,
    omega_mm: float = OMEGA_MM,
    qm: float = 1.0,
    q_range: tuple[int, int] = Q_RANGE,
    k_min: int = 3,
) -> list[ExponentReport]:
    """Bounds on the exponent of ``T(K_k)`` for ``k_min <= k <= k_max``.

    Upper bounds: ``omega_mm`` for the triangle, the CW-type bound at ``k = 4``
    carried to larger ``k`` per edge, and the trivial edge count.  Published
    numbers are rounded outward (upper bounds up, lower bounds down) to 6
    decimals for ``tau`` and 6 significant digits for ``omega``.
    """
    if not 3 <= k_min <= k_max <= 24:
        raise ValueError("need 3 <= k_min <= k_max <= 24")
    q_star, tau_cw = cw_tau_bound(4, qm, q_range)
    tau_tri = omega_mm / 3
    rows = []
    for k in range(k_min, k_max + 1):
        e = comb(k, 2)
        fl = flattening_lower_bounds(complete_graph(k))
        options = [(tau_tri, "matrix multiplication (triangle)"), (1.0, "trivial (edge count)")]
        if k >= 4:
            options.append((tau_cw, f"CW construction, q={q_star}, q_M={qm:g}"))
        tau_exact, source = min(options)
        tau_up = _ceil_decimals(tau_exact, 6)
        omega_up = _ceil_significant(tau_up * e, 6)
        rows.append(
            ExponentReport(
                k=k,
                edges=e,
                omega_lower=fl.omega_lower,
                omega_upper=float(omega_up),
                tau_lower=float(_floor_decimals(fl.tau_lower, 6)),
                tau_upper=float(tau_up),
                omega_upper_exact=tau_exact * e,
                tau_lower_exact=fl.tau_lower,
                tau_upper_exact=tau_exact,
                upper_source=source,
                constants={"omega_mm": omega_mm, "q_M": qm, "q_star": q_star},
            )
        )
    return rows


TABLE_COLUMNS = ("k", "omega_lower", "omega_upper", "edges", "tau_lower", "tau_upper")
