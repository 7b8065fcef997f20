"""Signed-composition counts and the analytic entropy bound.

A signed composition of j is a sequence (n_1, m_1, ..., n_k, m_k) with
integers n_i, positive m_i and sum |n_i| + sum m_i = j. Q(j, k) counts those
with k pairs and Q(j) all of them. Every term (|n_i| + m_i = r_i) admits
2 r_i - 1 choices, so Q(j, k) is a weighted count of ordinary compositions
of j into k parts.

The bound chain runs through the Lambert W value w = W(1/e), the constant
a = 2w / (1 + w), the maximiser x_j = a j of h_j(x) = (2j/x - 1)^x, and the
central binomial estimate obtained from Gautschi's inequality. It ends at
h_top < log(2 (2/a - 1)^a) < log(3.4908).
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Sequence, Tuple

import numpy as np
from scipy import special

from stadium_entropy.coding import SignedComposition
from stadium_entropy.errors import (
    BoundCheckError,
    BracketError,
    ConvergenceError,
    DomainError,
)
from stadium_entropy.utils import BOUND_SLACK, int_le_bound

logger = logging.getLogger(__name__)

# Published constants the computed values are checked against
BASE_BOUND = 1.7454
FINAL_BOUND = 3.4908
FINAL_BOUND_LOWER = 3.4905

NEWTON_MAX_ITER = 100
W_RESIDUAL_TOL = 1e-15
IDENTITY_TOL = 1e-12
XJ_TOL = 1e-12


@dataclass
class CompositionCounts:
    """Exact Q(j, k) for 0 <= k <= j <= j_max; Q(0, 0) = 1 is the empty composition."""

    j_max: int
    rows: List[List[int]]

    def q(self, j: int, k: int) -> int:
        if not 0 <= j <= self.j_max:
            raise DomainError(f"j={j} outside [0, {self.j_max}]")
        if not 0 <= k <= j:
            return 0
        return self.rows[j][k]

    def total(self, j: int) -> int:
        return sum(self.rows[j])

    def partial_sum(self, upto: int) -> int:
        """Sum of Q(j) for 0 <= j <= upto (clipped to the computed range)."""
        return sum(self.total(j) for j in range(0, min(upto, self.j_max) + 1))


def count_Q(j_max: int) -> CompositionCounts:
    """Q(j, k) = sum over r of (2r - 1) Q(j - r, k - 1), with Q(0, 0) = 1."""
    if j_max < 1:
        raise DomainError(f"j_max must be at least 1, got {j_max}")
    rows = [[1]]
    for j in range(1, j_max + 1):
        row = [0] * (j + 1)
        for k in range(1, j + 1):
            row[k] = sum(
                (2 * r - 1) * rows[j - r][k - 1]
                for r in range(1, j - k + 2)
            )
        rows.append(row)
    return CompositionCounts(j_max, rows)


def enumerate_signed_compositions(j: int) -> Iterator[SignedComposition]:
    """All signed compositions of weight j, by brute force."""
    if j < 1:
        raise DomainError(f"Weight must be at least 1, got {j}")

    def extend(remaining: int, prefix: Tuple[Tuple[int, int], ...]):
        if remaining == 0:
            yield SignedComposition(prefix)
            return
        for m in range(1, remaining + 1):
            for size in range(0, remaining - m + 1):
                for n in (size, -size) if size else (0,):
                    yield from extend(remaining - m - size, prefix + ((n, m),))

    yield from extend(j, ())


def closed_form_q(j: int) -> int:
    """Q(j) from the generating function F / (1 - F), F(x) = x (1 + x) / (1 - x)^2."""
    if j < 0:
        raise DomainError(f"j must be non-negative, got {j}")
    if j <= 1:
        return 1
    return 4 * 3 ** (j - 2)


def composition_multiplicity(parts: Sequence[int]) -> int:
    """Number of signed compositions over the ordinary composition `parts`."""
    if any(r < 1 for r in parts):
        raise DomainError(f"Composition parts must be positive: {parts}")
    return math.prod(2 * r - 1 for r in parts)


def q_upper_bound(j: int, k: int) -> float:
    """The AM-GM estimate Q(j, k) <= (2j/k - 1)^k C(j, k)."""
    if not 1 <= k <= j:
        raise DomainError(f"Need 1 <= k <= j, got j={j}, k={k}")
    return (2.0 * j / k - 1.0) ** k * math.comb(j, k)


def lambert_w_over_e() -> float:
    """W(1/e), the solution of w e^w = 1/e, by Newton's method kept inside [0.2, 0.3]."""
    target = math.exp(-1.0)
    lo, hi = 0.2, 0.3
    w = 0.25
    for _ in range(NEWTON_MAX_ITER):
        ew = math.exp(w)
        residual = w * ew - target
        if residual > 0.0:
            hi = w
        else:
            lo = w
        dw = residual / (ew * (1.0 + w))
        new_w = w - dw
        if not lo <= new_w <= hi:
            new_w = 0.5 * (lo + hi)
        if abs(new_w - w) < 0.7e-16 * (2.0 + abs(new_w)):
            w = new_w
            break
        w = new_w
    else:
        raise ConvergenceError(
            f"Newton iteration for W(1/e) did not converge in {NEWTON_MAX_ITER} steps"
        )
    if abs(w * math.exp(w) - target) >= W_RESIDUAL_TOL:
        raise ConvergenceError(f"W(1/e)={w} has residual above {W_RESIDUAL_TOL}")
    return w


def compute_a() -> float:
    w = lambert_w_over_e()
    return 2.0 * w / (1.0 + w)


def _check_x(j: float, x: float) -> None:
    if not 0.0 < x < 2.0 * j:
        raise DomainError(f"x={x} outside (0, {2 * j}) for j={j}")


def k_fn(j: float, x: float) -> float:
    """k_j(x) = -2j / (2j - x) + ln(2j/x - 1), the derivative of log h_j."""
    _check_x(j, x)
    return -2.0 * j / (2.0 * j - x) + math.log(2.0 * j / x - 1.0)


def k_derivative(j: float, x: float) -> float:
    _check_x(j, x)
    return -4.0 * j / (x * (2.0 * j - x) ** 2)


def h_fn(j: float, x: float) -> float:
    """h_j(x) = (2j/x - 1)^x."""
    _check_x(j, x)
    return math.exp(x * math.log(2.0 * j / x - 1.0))


def g_fn(j: int, k: int) -> float:
    """g_j(k) = h_j(k) C(j, k), the AM-GM bound as a function of k."""
    if not 1 <= k <= j:
        raise DomainError(f"Need 1 <= k <= j, got j={j}, k={k}")
    return h_fn(j, k) * math.comb(j, k)


def solve_xj(j: int) -> float:
    """The zero of k_j on [1, j], where h_j attains its maximum."""
    if j < 2:
        raise DomainError(f"j must be at least 2, got {j}")
    lo, hi = 1.0, float(j)
    f_lo, f_hi = k_fn(j, lo), k_fn(j, hi)
    if f_lo * f_hi > 0.0:
        raise BracketError(f"k_{j} does not change sign on [1, {j}]")
    steps = int(math.ceil(math.log((hi - lo) / XJ_TOL) / math.log(2.0)))
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        f_mid = k_fn(j, mid)
        if f_mid == 0.0:
            return mid
        if f_mid * f_lo > 0.0:
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class BinomialBound:
    j: int
    exact: int
    gamma_form: float
    bound: float

    @property
    def holds(self) -> bool:
        return int_le_bound(self.exact, self.bound)


def binomial_bounds(j: int) -> BinomialBound:
    """C(j, floor(j/2)) with its gamma-ratio form and the Gautschi-type bound.

    For even j the gamma form is Gamma((j+1)/2) / Gamma(j/2 + 1) 2^j / sqrt(pi)
    and the bound sqrt(2/j) 2^j / sqrt(pi); for odd j the roles shift to
    Gamma(j/2 + 1) / Gamma((j+3)/2) and sqrt(2/(j+1)).
    """
    if j < 2:
        raise DomainError(f"j must be at least 2, got {j}")
    exact = math.comb(j, j // 2)
    log_scale = j * math.log(2.0) - 0.5 * math.log(math.pi)
    if j % 2 == 0:
        log_gamma = special.gammaln((j + 1) / 2.0) - special.gammaln(j / 2.0 + 1.0)
        bound_log = 0.5 * math.log(2.0 / j)
    else:
        log_gamma = special.gammaln(j / 2.0 + 1.0) - special.gammaln((j + 3) / 2.0)
        bound_log = 0.5 * math.log(2.0 / (j + 1))
    return BinomialBound(
        j,
        exact,
        float(np.exp(log_gamma + log_scale)),
        math.exp(bound_log + log_scale),
    )


def binomial_unimodality(j: int) -> bool:
    """C(j, k) increases up to k = floor(j/2) and decreases from ceil(j/2) on."""
    values = [math.comb(j, k) for k in range(j + 1)]
    middle = j // 2
    rising = all(a < b for a, b in zip(values[:middle], values[1 : middle + 1]))
    falling = all(
        a > b for a, b in zip(values[(j + 1) // 2 :], values[(j + 1) // 2 + 1 :])
    )
    return rising and falling


def historical_reference_lines() -> Dict[str, float]:
    """Earlier bounds and the known lower bound, for reporting only."""
    return {
        "log4": math.log(4.0),
        "log6": math.log(6.0),
        "log(1+sqrt2)": math.log(1.0 + math.sqrt(2.0)),
    }


@dataclass(frozen=True)
class BoundRow:
    j: int
    x_j: float
    h_max: float
    g_max: float
    q_exact: int
    chain_bound: float
    asymptotic_bound: float


@dataclass(frozen=True)
class BoundCheck:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class BoundReport:
    w: float
    w_residual: float
    a: float
    base: float
    base_identity: float
    final_bound: float
    log_bound: float
    rows: List[BoundRow] = field(default_factory=list)
    binomials: List[BinomialBound] = field(default_factory=list)
    checks: List[BoundCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> List[BoundCheck]:
        return [check for check in self.checks if not check.passed]

    def as_dict(self) -> dict:
        return {
            "w": self.w,
            "w_residual": self.w_residual,
            "a": self.a,
            "base": self.base,
            "base_identity": self.base_identity,
            "final_bound": self.final_bound,
            "log_bound": self.log_bound,
            "reference_lines": historical_reference_lines(),
            "rows": [
                {
                    "j": row.j,
                    "x_j": row.x_j,
                    "h_max": row.h_max,
                    "g_max": row.g_max,
                    "q_exact": row.q_exact,
                    "chain_bound": row.chain_bound,
                    "asymptotic_bound": row.asymptotic_bound,
                }
                for row in self.rows
            ],
            "binomials": [
                {"j": b.j, "exact": b.exact, "gamma_form": b.gamma_form, "bound": b.bound}
                for b in self.binomials
            ],
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail}
                for c in self.checks
            ],
            "passed": self.passed,
        }


def entropy_upper_bound(
    j_max: int = 40,
    g_j_max: int = 60,
    binomial_j_max: int = 200,
    strict: bool = True,
) -> BoundReport:
    """Evaluate every constant and inequality of the bound chain.

    Raises:
        BoundCheckError: If `strict` and any inequality fails.
    """
    w = lambert_w_over_e()
    a = 2.0 * w / (1.0 + w)
    base = (2.0 / a - 1.0) ** a
    final = 2.0 * base
    report = BoundReport(
        w=w,
        w_residual=abs(w * math.exp(w) - math.exp(-1.0)),
        a=a,
        base=base,
        base_identity=math.exp(2.0 * w),
        final_bound=final,
        log_bound=math.log(final),
    )
    checks = report.checks

    def check(name: str, passed: bool, detail: str = "") -> None:
        checks.append(BoundCheck(name, bool(passed), detail))

    scipy_w = float(special.lambertw(math.exp(-1.0)).real)
    check("w residual", report.w_residual < W_RESIDUAL_TOL, f"{report.w_residual:.3e}")
    check("w defining equation", abs(w * math.exp(w + 1.0) - 1.0) < 1e-14)
    check("w agrees with scipy", abs(w - scipy_w) < IDENTITY_TOL, f"scipy={scipy_w!r}")
    check("a in (0.435, 0.436)", 0.435 < a < 0.436, f"a={a!r}")
    check("2/a - 1 = 1/w", abs((2.0 / a - 1.0) - 1.0 / w) < IDENTITY_TOL)
    check(
        "(2/a - 1)^a = e^(2w)",
        abs(base - report.base_identity) < IDENTITY_TOL,
        f"{base!r} vs {report.base_identity!r}",
    )
    check(f"(2/a - 1)^a < {BASE_BOUND}", base < BASE_BOUND, f"{base!r}")
    check(
        f"final bound in ({FINAL_BOUND_LOWER}, {FINAL_BOUND})",
        FINAL_BOUND_LOWER < final < FINAL_BOUND,
        f"{final!r}",
    )
    check(
        "final bound = 2 e^(2w)",
        abs(final - 2.0 * report.base_identity) < IDENTITY_TOL,
    )
    check("k_j(0.435 j) > 0", all(k_fn(j, 0.435 * j) > 0 for j in (2, 5, 10, 100)))
    check("k_j(0.436 j) < 0", all(k_fn(j, 0.436 * j) < 0 for j in (2, 5, 10, 100)))

    counts = count_Q(max(j_max, 1))
    amgm_failures = [
        (j, k)
        for j in range(1, j_max + 1)
        for k in range(1, j + 1)
        if not int_le_bound(counts.q(j, k), q_upper_bound(j, k))
    ]
    check("Q(j,k) <= (2j/k - 1)^k C(j,k)", not amgm_failures, f"failures={amgm_failures[:5]}")

    # Rows start at j = 2, where x_j is an interior maximiser
    xj_failures, chain_failures, asymptotic_failures = [], [], []
    for j in range(2, j_max + 1):
        x_j = solve_xj(j)
        central = math.comb(j, j // 2)
        q = counts.total(j)
        chain = j * BASE_BOUND**j * central
        asymptotic = final**j * math.sqrt(j) / math.sqrt(0.5 * math.pi)
        row = BoundRow(
            j=j,
            x_j=x_j,
            h_max=h_fn(j, x_j),
            g_max=max(g_fn(j, k) for k in range(1, j + 1)),
            q_exact=q,
            chain_bound=chain,
            asymptotic_bound=asymptotic,
        )
        report.rows.append(row)
        if abs(x_j / j - a) >= 1e-10:
            xj_failures.append(j)
        if not int_le_bound(q, chain):
            chain_failures.append(j)
        if not int_le_bound(q, asymptotic):
            asymptotic_failures.append(j)
    check("x_j = a j", not xj_failures, f"failures={xj_failures}")
    check("Q(j) <= j 1.7454^j C(j, j/2)", not chain_failures, f"failures={chain_failures}")
    check(
        "Q(j) <= final^j sqrt(j) / sqrt(pi/2)",
        not asymptotic_failures,
        f"failures={asymptotic_failures}",
    )

    g_failures = []
    for j in range(2, g_j_max + 1):
        ceiling = BASE_BOUND**j * math.comb(j, j // 2) * (1.0 + BOUND_SLACK)
        if any(g_fn(j, k) > ceiling for k in range(1, j + 1)):
            g_failures.append(j)
    check("g_j(k) <= 1.7454^j C(j, j/2)", not g_failures, f"failures={g_failures}")

    report.binomials = [binomial_bounds(j) for j in range(2, binomial_j_max + 1)]
    binomial_failures = [b.j for b in report.binomials if not b.holds]
    check("central binomial bound", not binomial_failures, f"failures={binomial_failures}")

    for failure in report.failures:
        logger.error("Bound check failed: %s (%s)", failure.name, failure.detail)
    if strict and not report.passed:
        raise BoundCheckError(
            "Failed checks: " + ", ".join(f.name for f in report.failures)
        )
    logger.info(
        "a=%.12f, (2/a-1)^a=%.12f, bound=%.12f, log bound=%.12f",
        a,
        base,
        final,
        report.log_bound,
    )
    return report


@dataclass(frozen=True)
class GrowthRow:
    j: int
    q: int
    ratio: float
    root: float


@dataclass
class GrowthReport:
    rows: List[GrowthRow]
    limit: float = FINAL_BOUND

    @property
    def passed(self) -> bool:
        # Q(2)/Q(1) = 4 reflects Q(1) = 1 and is excluded from the ratio check
        return all(
            row.root <= self.limit and (row.j < 2 or row.ratio <= self.limit)
            for row in self.rows
        )


def q_growth_report(j_max: int) -> GrowthReport:
    """Exact Q(j+1)/Q(j) and (Q(1) + ... + Q(j))^(1/j) for 1 <= j <= j_max."""
    if j_max < 10:
        raise DomainError(f"j_max must be at least 10, got {j_max}")
    counts = count_Q(j_max + 1)
    rows = []
    running = 0
    for j in range(1, j_max + 1):
        q = counts.total(j)
        running += q
        rows.append(
            GrowthRow(
                j=j,
                q=q,
                ratio=float(Fraction(counts.total(j + 1), q)),
                root=math.exp(math.log(running) / j),
            )
        )
    return GrowthReport(rows)
