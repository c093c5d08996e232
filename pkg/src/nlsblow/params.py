"""Problem parameters, admissibility checks, and the closed-form exponent calculus.

The equation under study is ``i u_t + Lap(u) = lam |u|^alpha u`` on R^N with a
complex coefficient ``lam``.  Blow-up constructions additionally involve a
profile steepness ``k`` (the power in the space-dependent blow-up time
``|x|^k``).  Everything in this module is pure floating-point arithmetic on
``(N, alpha, lam, k)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "PhysParams",
    "AdmissibilityReport",
    "ExponentTable",
    "critical_power",
    "validate_assumptions",
    "exponent_table",
    "condition_A2",
    "min_admissible_k",
    "power_case",
]


def critical_power(N: int) -> float:
    """Energy-critical power 4/(N-2); +inf for N = 1, 2 where every power is allowed."""
    return math.inf if N <= 2 else 4.0 / (N - 2)


def _dim_ratio(num: float, N: int) -> float:
    """num/(N-2) with the N = 1, 2 convention that the bound is +inf."""
    return math.inf if N <= 2 else num / (N - 2)


@dataclass(frozen=True)
class PhysParams:
    """Problem data: dimension N, power alpha, coefficient lam, profile steepness k.

    ``Im(lam) > 0`` is required by every blow-up-mode operation; real ``lam``
    is allowed for conservation-law validation runs.
    """

    N: int
    alpha: float
    lam: complex
    k: float = 2.0

    def __post_init__(self):
        if self.N not in (1, 2, 3, 4, 5):
            raise ValueError(f"dimension N must be in 1..5, got {self.N}")
        if not self.alpha > 0:
            raise ValueError(f"power alpha must be positive, got {self.alpha}")
        if self.lam == 0:
            raise ValueError("coefficient lam must be nonzero")
        if not self.k > 0:
            raise ValueError(f"profile steepness k must be positive, got {self.k}")

    @property
    def im_lam(self) -> float:
        return self.lam.imag

    @property
    def re_lam(self) -> float:
        return self.lam.real

    def require_blowup_mode(self):
        """Raise unless Im(lam) > 0 and alpha > 1 (the blow-up construction range)."""
        if not self.im_lam > 0:
            raise ValueError(
                "blow-up mode needs Im(lam) > 0; real lam is for validation runs only"
            )
        if not self.alpha > 1:
            raise ValueError("blow-up mode needs alpha > 1")


@dataclass(frozen=True)
class AdmissibilityReport:
    """Outcome of the admissibility inequalities for one parameter set."""

    subcritical_or_critical: bool
    weak_coeff_ok: bool
    strict_coeff_ok: bool
    strict_required: bool
    theorem_applies: bool

    def failures(self) -> list[str]:
        """Human-readable list of the inequalities that failed (empty if none)."""
        out = []
        if not self.subcritical_or_critical:
            out.append("power outside 0 < alpha <= 4/(N-2)")
        if not self.weak_coeff_ok:
            out.append("coefficient inequality (alpha+2) Im(lam) >= alpha |lam| fails")
        if self.strict_required and not self.strict_coeff_ok:
            out.append(
                "strict inequality required: (alpha+2) Im(lam) > alpha |lam| "
                "(high power or critical power)"
            )
        return out

    def to_dict(self) -> dict:
        return {
            "subcritical_or_critical": self.subcritical_or_critical,
            "weak_coeff_ok": self.weak_coeff_ok,
            "strict_coeff_ok": self.strict_coeff_ok,
            "strict_required": self.strict_required,
            "theorem_applies": self.theorem_applies,
        }


def validate_assumptions(p: PhysParams) -> AdmissibilityReport:
    """Check the blow-up construction hypotheses on (N, alpha, lam).

    Requires 1 < alpha <= 4/(N-2) together with the coefficient inequality
    (alpha+2) Im(lam) >= alpha |lam|, strict when alpha > N/(N-2) or
    alpha = 4/(N-2).  For N = 1, 2 the dimensional bounds mean +inf, so only
    alpha > 1 and the weak coefficient inequality are needed there.
    """
    crit = critical_power(p.N)
    lhs = (p.alpha + 2) * p.im_lam
    rhs = p.alpha * abs(p.lam)
    subcritical_or_critical = 0 < p.alpha <= crit
    weak = lhs >= rhs
    strict = lhs > rhs
    strict_required = p.alpha > _dim_ratio(p.N, p.N) or p.alpha == crit
    applies = (
        subcritical_or_critical
        and p.alpha > 1
        and weak
        and (strict or not strict_required)
    )
    return AdmissibilityReport(
        subcritical_or_critical=subcritical_or_critical,
        weak_coeff_ok=weak,
        strict_coeff_ok=strict,
        strict_required=strict_required,
        theorem_applies=applies,
    )


@dataclass(frozen=True)
class ExponentTable:
    """All closed-form exponents the construction predicts for one (N, alpha, k).

    Norm scalings of the profile U (power of (-t)):

    * ``profile_lp(p)``       = -1/alpha + N/(p k)
    * ``profile_grad_lp(p)``  = -1/alpha - 1/k + N/(p k)
    * ``profile_lap_l2``      = -1/alpha - 2/k + N/(2k)
    * ``profile_gradlap_l2``  = -1/alpha - 3/k + N/(2k)

    Difference-decay exponents (power of the window length T_n - t):

    * ``mu1``  L2 rate, from integrating the Lap(U) source term.
    * ``mu2``  low-power gradient source exponent.
    * ``mu3``  high-power gradient source exponent.  Not available in closed
      form from first principles; here it is the minimum of the two terms of
      the quadratic-error majorant, i.e. min of ``2 mu1 - 1 - 2/k`` (sup-norm
      term) and ``mu1 (2N - alpha(N-2))/2 - 2/alpha - 2/k`` (the
      Gagliardo-Nirenberg term with the gradient factor treated as bounded).
      This is a derived implementation choice, validated numerically, not an
      a-priori formula.
    * ``mu4``  = -1/alpha - (6-N)/(2k), linear gradient source exponent.
    * ``mu5``  = the worst applicable source exponent together with mu4.  The
      low-power chain (and hence mu2) applies for alpha <= N/(N-2), the
      high-power chain (mu3) for alpha >= 2; only exponents whose estimate
      chain is valid for the given alpha participate in the minimum.  On the
      overlap this is exactly min(mu2, mu3, mu4).
    * ``predicted_mu`` = min(mu1, (mu5+1)/2): the L2 rate and the H1-dot rate
      obtained by integrating the gradient differential inequality once.
    """

    N: int
    alpha: float
    k: float
    mu1: float
    mu2: float
    mu3: float
    mu4: float
    mu5: float
    predicted_mu: float
    profile_lap_l2: float
    profile_gradlap_l2: float

    def profile_lp(self, p: float) -> float:
        """Predicted slope of log ||U(t)||_{L^p} against log(-t)."""
        if p == math.inf:
            return -1.0 / self.alpha
        return -1.0 / self.alpha + self.N / (p * self.k)

    def profile_grad_lp(self, p: float) -> float:
        """Predicted slope of log ||grad U(t)||_{L^p} against log(-t)."""
        base = -1.0 / self.alpha - 1.0 / self.k
        return base if p == math.inf else base + self.N / (p * self.k)

    @property
    def h1_dot_rate(self) -> float:
        """Rate (mu5+1)/2 for the gradient of the difference field."""
        return 0.5 * (self.mu5 + 1.0)

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "alpha": self.alpha,
            "k": self.k,
            "mu1": self.mu1,
            "mu2": self.mu2,
            "mu3": self.mu3,
            "mu4": self.mu4,
            "mu5": self.mu5,
            "predicted_mu": self.predicted_mu,
            "profile_lap_l2": self.profile_lap_l2,
            "profile_gradlap_l2": self.profile_gradlap_l2,
        }


def exponent_table(p: PhysParams) -> ExponentTable:
    """Fill every closed-form exponent for the given parameters."""
    N, a, k = p.N, p.alpha, p.k
    mu1 = 1.0 - 1.0 / a - (4.0 - N) / (2.0 * k)
    mu2 = mu1 * (a - N * (a - 1.0) / 2.0) - 1.0 / a - 1.0 / k
    mu3 = min(
        2.0 * mu1 - 1.0 - 2.0 / k,
        mu1 * (2.0 * N - a * (N - 2.0)) / 2.0 - 2.0 / a - 2.0 / k,
    )
    mu4 = -1.0 / a - (6.0 - N) / (2.0 * k)
    sources = [mu4]
    if a <= _dim_ratio(N, N):
        sources.append(mu2)
    if a >= 2.0:
        sources.append(mu3)
    if len(sources) == 1:  # outside both estimate branches; report the raw minimum
        sources += [mu2, mu3]
    mu5 = min(sources)
    return ExponentTable(
        N=N,
        alpha=a,
        k=k,
        mu1=mu1,
        mu2=mu2,
        mu3=mu3,
        mu4=mu4,
        mu5=mu5,
        predicted_mu=min(mu1, 0.5 * (mu5 + 1.0)),
        profile_lap_l2=-1.0 / a - 2.0 / k + N / (2.0 * k),
        profile_gradlap_l2=-1.0 / a - 3.0 / k + N / (2.0 * k),
    )


def condition_A2(p: PhysParams) -> bool:
    """True iff 1 < alpha < (N+2)/(N-2) (upper bound +inf for N = 1, 2)."""
    return 1.0 < p.alpha < _dim_ratio(p.N + 2, p.N)


def min_admissible_k(N: int, alpha: float, p_list=(), k_max: int = 512) -> int:
    """Smallest even integer k making the profile and its rates usable.

    Required simultaneously: (i) |U(t)| in L^p for every finite p in p_list,
    i.e. tail decay p k / alpha > N; (ii) 0 < mu1 < 1; (iii) mu5 > -1.
    Even k keeps |x|^k smooth at the origin.  Raises if nothing up to k_max
    works (e.g. alpha <= 1, where mu1 <= 0 for every k).
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    for k in range(2, k_max + 1, 2):
        if any(p * k / alpha <= N for p in p_list if p != math.inf):
            continue
        tab = exponent_table(PhysParams(N=N, alpha=alpha, lam=1j, k=float(k)))
        if 0.0 < tab.mu1 < 1.0 and tab.mu5 > -1.0:
            return k
    raise ValueError(
        f"no admissible even k <= {k_max} for N={N}, alpha={alpha}, p_list={tuple(p_list)}"
    )


def power_case(alpha: float, N: int) -> str:
    """Classify the gradient-estimate branch: 'low' or 'high' power.

    Low power covers 1 < alpha <= N/(N-2); high power covers
    2 <= alpha <= 4/(N-2).  Where both apply, 'low' wins (its estimate chain
    is simpler and any valid branch gives a valid bound).
    """
    low = 1.0 < alpha <= _dim_ratio(N, N)
    high = 2.0 <= alpha <= critical_power(N)
    if low:
        return "low"
    if high:
        return "high"
    raise ValueError(f"alpha={alpha} outside both estimate branches for N={N}")
