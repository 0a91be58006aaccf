"""Resource estimates for weaving an n-by-n cluster sheet from chains.

The weaving model consumes one pre-assembled chain per lattice row.
A row needs n gate successes; a chain carrying an edge budget of
floor(a * n) edges supplies that many attempts, so one row succeeds
with probability P(Binomial(floor(a*n), p) >= n), and the sheet
requires all n rows at once. Two routes to that quantity live here:

  exact_success  - the binomial tail itself, raised to the n-th power,
                   computed in exact rational arithmetic;
  success_bound  - a closed-form lower bound, per-row factor
                   1 - exp(-2 * (a*n*p - n + 1)^2 / (a*n)), valid once
                   a*n*p - n + 1 > 0 and 0 below that.

Both are monotone in the budget coefficient a, which is what
`solve_overhead` exploits to find the cheapest a meeting a target.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import GuardExceeded, ModelError
from .exact import as_probability, format_rational

SOLVE_RESOLUTION = 1e-6
WEAVE_MODELS = ("bound", "exact")


def _as_budget_coefficient(a) -> Fraction:
    """Coerce the budget coefficient to an exact Fraction.

    Floats convert to their exact binary value, which can sit a hair
    below the decimal the caller had in mind; pass a Fraction (or a
    rational string upstream) when floor(a * n) must land exactly.
    """
    if isinstance(a, Fraction):
        coeff = a
    elif isinstance(a, int):
        coeff = Fraction(a)
    elif isinstance(a, float):
        if not math.isfinite(a):
            raise ModelError(f"budget coefficient must be finite, got {a!r}")
        coeff = Fraction(a)
    else:
        raise ModelError(f"budget coefficient must be a number, got {type(a).__name__}")
    if coeff <= 0:
        raise ModelError(f"budget coefficient must be positive, got {a!r}")
    return coeff


def _check_side(n: int):
    if n < 2:
        raise ModelError(f"sheet side must be at least 2, got {n}")


def binomial_tail(trials: int, k_min: int, p: Fraction | int | str) -> Fraction:
    """P(Binomial(trials, p) >= k_min), exactly.

    Accumulated over integers: sum of C(trials, k) * num^k * (den-num)^(trials-k)
    against den^trials, so no rounding enters at any point.
    """
    if trials < 0:
        raise ModelError(f"trials must be non-negative, got {trials}")
    if not 0 <= k_min <= trials:
        raise ModelError(f"k_min must lie in [0, {trials}], got {k_min}")
    p = as_probability(p)
    num, den = p.numerator, p.denominator
    miss = den - num
    total = 0
    for k in range(k_min, trials + 1):
        total += math.comb(trials, k) * num**k * miss ** (trials - k)
    return Fraction(total, den**trials)


def exact_success(n: int, a: Fraction | int | float, p: Fraction | int | str) -> Fraction:
    """Probability that all n rows weave, with per-chain budget floor(a*n)."""
    _check_side(n)
    coeff = _as_budget_coefficient(a)
    p = as_probability(p)
    budget = math.floor(coeff * n)
    if budget < n:
        return Fraction(0)
    return binomial_tail(budget, n, p) ** n


def success_bound(n: int, a: float | Fraction | int, p: Fraction | float | int | str) -> float:
    """Closed-form lower bound on the weaving success probability.

    Zero when a*n*p - n + 1 <= 0 (the bound's validity edge), otherwise
    (1 - exp(-2 * (a*n*p - n + 1)^2 / (a*n)))^n, clamped to [0, 1].
    """
    _check_side(n)
    a_f = float(_as_budget_coefficient(a))
    if isinstance(p, float):
        if not 0 <= p <= 1:
            raise ModelError(f"probability must lie in [0, 1], got {p!r}")
        p_f = p
    else:
        p_f = float(as_probability(p))
    margin = a_f * n * p_f - n + 1
    if margin <= 0:
        return 0.0
    per_row = 1.0 - math.exp(-2.0 * margin * margin / (a_f * n))
    per_row = min(max(per_row, 0.0), 1.0)
    return per_row**n


@dataclass(frozen=True)
class SolveResult:
    """Outcome of an overhead solve: the budget coefficient meeting a target.

    For the exact model, `budget` is the minimal integer edge budget per
    chain and a = budget / n; for the bound model the solve bisects a
    real coefficient to `resolution` and budget is None.
    """

    n: int
    p: Fraction
    target: Fraction
    model: str
    a: float
    achieved: float
    budget: int | None = None

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "p": format_rational(self.p),
            "target": format_rational(self.target),
            "model": self.model,
            "a": self.a,
            "achieved": self.achieved,
            "budget": self.budget,
        }


def solve_overhead(
    n: int,
    p: Fraction | int | str,
    target: Fraction | int | str,
    model: str = "bound",
    *,
    resolution: float = SOLVE_RESOLUTION,
    max_growth_steps: int = 200,
) -> SolveResult:
    """Smallest budget coefficient a that meets a success target.

    model "bound" bisects the closed-form bound down to `resolution`;
    model "exact" finds the minimal integer edge budget by exact
    comparison (resolution plays no role there: the answer is discrete,
    a = budget / n). Both rely on monotonicity of the models in a.
    """
    _check_side(n)
    p = as_probability(p)
    target = as_probability(target)
    if p == 0:
        raise ModelError("success probability 0 admits no finite budget")
    if not 0 < target < 1:
        raise ModelError(f"target must lie strictly between 0 and 1, got {target}")
    if model not in WEAVE_MODELS:
        raise ModelError(f"model must be one of {WEAVE_MODELS}, got {model!r}")

    if model == "exact":
        target_exact = Fraction(target)

        def feasible(budget: int) -> Fraction | None:
            value = binomial_tail(budget, n, p) ** n
            return value if value >= target_exact else None

        hi = n
        achieved = feasible(hi)
        steps = 0
        while achieved is None:
            steps += 1
            if steps > max_growth_steps:
                raise GuardExceeded(
                    f"no integer budget up to {hi} meets target {target} (n={n}, p={p})"
                )
            hi *= 2
            achieved = feasible(hi)
        lo = n - 1  # a budget below n cannot yield n successes
        while hi - lo > 1:
            mid = (lo + hi) // 2
            mid_value = feasible(mid)
            if mid_value is None:
                lo = mid
            else:
                hi, achieved = mid, mid_value
        return SolveResult(
            n=n,
            p=p,
            target=target,
            model="exact",
            a=hi / n,
            achieved=float(achieved),
            budget=hi,
        )

    if resolution <= 0:
        raise ModelError(f"resolution must be positive, got {resolution}")
    p_f = float(p)
    target_f = float(target)
    lo = max((n - 1) / (n * p_f), 0.0)  # margin hits zero here, so the bound is 0
    gap = 1.0
    steps = 0
    while success_bound(n, lo + gap, p_f) < target_f:
        steps += 1
        if steps > max_growth_steps:
            raise GuardExceeded(
                f"bound never reaches target {target} within the growth cap (n={n}, p={p})"
            )
        gap *= 2.0
    hi = lo + gap
    while hi - lo > resolution:
        mid = (lo + hi) / 2.0
        if success_bound(n, mid, p_f) >= target_f:
            hi = mid
        else:
            lo = mid
    return SolveResult(
        n=n,
        p=p,
        target=target,
        model="bound",
        a=hi,
        achieved=success_bound(n, hi, p_f),
        budget=None,
    )


def per_site_cost(p: Fraction | int | str) -> Fraction:
    """Expected edges consumed per lattice site: 4 + 2 * (1/p - 1)."""
    p = as_probability(p)
    if p == 0:
        raise ModelError("per-site cost diverges at success probability 0")
    return 4 + 2 * (Fraction(1) / p - 1)


COST_NOTE = (
    "A frequently quoted per-site count of 9 edges at p = 1/2 follows a different "
    "accounting; this breakdown uses the closed form 4 + 2*(1/p - 1), which gives 6 there."
)


def cost_breakdown(p: Fraction | int | str) -> dict:
    """Per-site edge cost split into its three contributions.

    Two edges survive into the lattice, two are trimmed away shaping
    the sheet, and 2 * (1/p - 1) are expected losses from failed
    attempts along the way.
    """
    p = as_probability(p)
    if p == 0:
        raise ModelError("per-site cost diverges at success probability 0")
    failure = 2 * (Fraction(1) / p - 1)
    return {
        "lattice_edges": Fraction(2),
        "trim_loss": Fraction(2),
        "failure_loss": failure,
        "total": 4 + failure,
        "note": COST_NOTE,
    }


def weave_rows(
    ns: list[int],
    ps: list[Fraction],
    a_values: list[Fraction] | None = None,
    *,
    target: Fraction | None = None,
    model: str = "bound",
) -> list[dict]:
    """Grid of weaving success values, one dict per (n, a, p) combination.

    Exactly one of a_values / target must be given: fixed coefficients
    evaluate both models at each grid point, a target solves for the
    coefficient first (with the chosen model) and evaluates there.
    Columns: n, a, p, bound, exact, overhead, where overhead is the
    surplus edge count (a - 1) * n per chain.
    """
    if (a_values is None) == (target is None):
        raise ModelError("give either fixed budget coefficients or a target, not both")
    rows = []
    for n in ns:
        for p in ps:
            if a_values is not None:
                coeffs = [_as_budget_coefficient(a) for a in a_values]
            else:
                solved = solve_overhead(n, p, target, model)
                if solved.budget is not None:
                    coeffs = [Fraction(solved.budget, n)]
                else:
                    coeffs = [Fraction(solved.a)]
            for coeff in coeffs:
                rows.append(
                    {
                        "n": n,
                        "a": float(coeff),
                        "p": format_rational(p),
                        "bound": success_bound(n, coeff, p),
                        "exact": float(exact_success(n, coeff, p)),
                        "overhead": float((coeff - 1) * n),
                    }
                )
    return rows
