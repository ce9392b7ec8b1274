"""Confidence intervals for the ratio of two likelihood ratios.

Six constructions are provided: a regression-based interval using the
null-hypothesis variance, a logarithmic interval using the unrestricted
delta-method variance, an additive Wald interval, a Fieller interval from
the ratio quadratic, a bias-corrected bootstrap interval, and a Bayesian
quantile interval from independent conjugate beta posteriors.  All of them
target omega = LR1/LR2 for the requested sign; ``invert_interval`` maps a
result onto the reciprocal ratio LR2/LR1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
from scipy.special import ndtr, ndtri

from .core import Design, LrEstimates, PairedCounts, Target, estimable_mask, lr_estimates, omega_arrays
from .errors import BootstrapDegenerate, FiellerInvalid, ResampleExhausted

__all__ = [
    "Method",
    "BetaPrior",
    "PriorSet",
    "IntervalRequest",
    "IntervalResult",
    "ci_regression",
    "ci_logarithmic",
    "ci_wald",
    "ci_fieller",
    "ci_bootstrap",
    "ci_bayesian",
    "compute_intervals",
    "invert_interval",
    "normal_quantile",
]


class Method(str, Enum):
    REGRESSION = "regression"
    LOGARITHMIC = "logarithmic"
    WALD = "wald"
    FIELLER = "fieller"
    BOOTSTRAP = "bootstrap"
    BAYESIAN = "bayesian"


CLOSED_FORM_METHODS = (Method.REGRESSION, Method.LOGARITHMIC, Method.WALD, Method.FIELLER)
ALL_METHODS = CLOSED_FORM_METHODS + (Method.BOOTSTRAP, Method.BAYESIAN)


def normal_quantile(p: float) -> float:
    """Standard normal quantile (inverse CDF)."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile level must be in (0, 1), got {p}")
    return float(ndtri(p))


@dataclass(frozen=True)
class BetaPrior:
    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if self.alpha <= 0.0 or self.beta <= 0.0:
            raise ValueError("beta prior hyper-parameters must be positive")


@dataclass(frozen=True)
class PriorSet:
    """Independent beta priors for the four accuracy parameters."""

    se1: BetaPrior = field(default_factory=BetaPrior)
    sp1: BetaPrior = field(default_factory=BetaPrior)
    se2: BetaPrior = field(default_factory=BetaPrior)
    sp2: BetaPrior = field(default_factory=BetaPrior)


@dataclass(frozen=True)
class IntervalRequest:
    """Inputs shared by the interval constructors."""

    counts: PairedCounts
    target: Target
    level: float = 0.95
    methods: tuple = ALL_METHODS
    bootstrap_b: int = 2000
    bayes_m: int = 10000
    priors: PriorSet = field(default_factory=PriorSet)
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "target", Target(self.target))
        object.__setattr__(self, "methods", tuple(Method(m) for m in self.methods))
        if not 0.0 < self.level < 1.0:
            raise ValueError(f"confidence level must be in (0, 1), got {self.level}")
        if self.bootstrap_b < 2:
            raise ValueError("bootstrap needs B >= 2")
        if self.bayes_m < 2:
            raise ValueError("Bayesian interval needs M >= 2")

    @property
    def z(self) -> float:
        return normal_quantile(0.5 + self.level / 2.0)


@dataclass(frozen=True)
class IntervalResult:
    """One confidence interval with validity diagnostics."""

    method: Method
    target: Target
    level: float
    lower: float
    upper: float
    valid: bool
    point_estimate: float
    notes: str = ""
    resample_mean: float | None = None  # bootstrap / posterior mean, when applicable

    @property
    def length(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    @property
    def contains_one(self) -> bool:
        return self.contains(1.0)

    def to_dict(self) -> dict:
        out = {
            "method": self.method.value,
            "target": self.target.value,
            "level": self.level,
            "lower": self.lower,
            "upper": self.upper,
            "valid": self.valid,
            "point_estimate": self.point_estimate,
            "notes": self.notes,
        }
        if self.resample_mean is not None:
            out["resample_mean"] = self.resample_mean
        return out


# ---------------------------------------------------------------------------
# Closed-form constructors


def _null_log_variance(est: LrEstimates, target: Target) -> float:
    """Variance of log(omega_hat) under LR1 = LR2, from the regression model.

    The negative-LR form is the symmetric two-test sum, mirroring the
    positive-LR expression with Se and (1 - Sp) exchanged for (1 - Se)
    and Sp.
    """
    a = est.accuracy
    s, r = a.s, a.r
    if Target(target) is Target.POSITIVE:
        return ((1.0 - a.se1) / (s * a.se1) + a.sp1 / (r * (1.0 - a.sp1))
                + (1.0 - a.se2) / (s * a.se2) + a.sp2 / (r * (1.0 - a.sp2)))
    return (a.se1 / (s * (1.0 - a.se1)) + (1.0 - a.sp1) / (r * a.sp1)
            + a.se2 / (s * (1.0 - a.se2)) + (1.0 - a.sp2) / (r * a.sp2))


def _log_scale_interval(method, omega, var_log, target, level, z) -> IntervalResult:
    half = z * math.sqrt(var_log)
    return IntervalResult(method=method, target=target, level=level,
                          lower=omega * math.exp(-half), upper=omega * math.exp(half),
                          valid=True, point_estimate=omega)


def _regression(est: LrEstimates, target: Target, level: float, z: float) -> IntervalResult:
    omega = est.stats(target).omega
    return _log_scale_interval(Method.REGRESSION, omega,
                               _null_log_variance(est, target), target, level, z)


def _logarithmic(est: LrEstimates, target: Target, level: float, z: float) -> IntervalResult:
    stats = est.stats(target)
    return _log_scale_interval(Method.LOGARITHMIC, stats.omega,
                               stats.var_log_omega, target, level, z)


def _wald(est: LrEstimates, target: Target, level: float, z: float) -> IntervalResult:
    stats = est.stats(target)
    half = z * math.sqrt(stats.var_omega)
    lower, upper = stats.omega - half, stats.omega + half
    valid = lower > 0.0
    notes = "" if valid else "lower endpoint not positive; interval left unclamped"
    return IntervalResult(method=Method.WALD, target=target, level=level,
                          lower=lower, upper=upper, valid=valid,
                          point_estimate=stats.omega, notes=notes)


def _fieller(est: LrEstimates, target: Target, level: float, z: float) -> IntervalResult:
    stats = est.stats(target)
    z2 = z * z
    lr1, lr2 = stats.lr1, stats.lr2
    s11v, s22v, s12v = stats.var_lr1, stats.var_lr2, stats.cov_lr12
    a = lr2 * lr2 - s22v * z2  # leading coefficient of the ratio quadratic
    b = lr1 * lr2 - s12v * z2
    c = lr1 * lr1 - s11v * z2
    disc = b * b - a * c
    if disc <= 0.0:
        raise FiellerInvalid(
            "Fieller quadratic has no two real roots; the confidence set is "
            "the whole line or degenerate", discriminant=disc, denominator=a)
    sqrt_disc = math.sqrt(disc)
    roots = ((b - sqrt_disc) / a, (b + sqrt_disc) / a)
    if a <= 0.0:
        raise FiellerInvalid(
            "Fieller confidence set is the complement of a bounded interval "
            "(LR2 not bounded away from zero at this level)",
            discriminant=disc, denominator=a, roots=(min(roots), max(roots)))
    return IntervalResult(method=Method.FIELLER, target=target, level=level,
                          lower=roots[0], upper=roots[1], valid=True,
                          point_estimate=stats.omega)


def ci_regression(req: IntervalRequest) -> IntervalResult:
    """Interval from the paired-LR regression comparison (null variance)."""
    return _regression(lr_estimates(req.counts), req.target, req.level, req.z)


def ci_logarithmic(req: IntervalRequest) -> IntervalResult:
    """Log-scale interval with the unrestricted delta-method variance."""
    return _logarithmic(lr_estimates(req.counts), req.target, req.level, req.z)


def ci_wald(req: IntervalRequest) -> IntervalResult:
    """Additive Wald interval omega_hat +/- z * SE(omega_hat)."""
    return _wald(lr_estimates(req.counts), req.target, req.level, req.z)


def ci_fieller(req: IntervalRequest) -> IntervalResult:
    """Fieller interval: roots of (LR1 - w LR2)^2 = z^2 Var(LR1 - w LR2)."""
    return _fieller(lr_estimates(req.counts), req.target, req.level, req.z)


# ---------------------------------------------------------------------------
# Bootstrap


def _resample_tables(counts: PairedCounts, size: int, rng: np.random.Generator) -> np.ndarray:
    cells = counts.as_array().astype(float)
    if counts.design is Design.CASE_CONTROL:
        diseased = rng.multinomial(counts.s, cells[:4] / counts.s, size=size)
        healthy = rng.multinomial(counts.r, cells[4:] / counts.r, size=size)
        return np.hstack([diseased, healthy])
    return rng.multinomial(counts.n, cells / counts.n, size=size)


def bootstrap_omegas(counts: PairedCounts, b: int,
                     rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray, int]:
    """Draw exactly ``b`` estimable resamples; return both omega arrays.

    Degenerate resamples (a marginal Se or Sp of 0 or 1) are redrawn so the
    bootstrap distribution always has ``b`` points; the number of redraws is
    returned for auditing.  Raises ResampleExhausted after 100 * b
    degenerate draws.
    """
    tables = _resample_tables(counts, b, rng)
    mask = estimable_mask(tables)
    redraws = 0
    while not mask.all():
        bad = np.flatnonzero(~mask)
        redraws += bad.size
        if redraws > 100 * b:
            raise ResampleExhausted(
                f"{redraws} degenerate bootstrap resamples for B={b}")
        tables[bad] = _resample_tables(counts, bad.size, rng)
        mask[bad] = estimable_mask(tables[bad])
    pos, neg = omega_arrays(tables)
    return pos, neg, redraws


def ci_bootstrap(req: IntervalRequest, rng: np.random.Generator | None = None) -> IntervalResult:
    """Bias-corrected bootstrap interval from B multinomial resamples.

    Paired tables are resampled as one multinomial over the eight cells
    (size n), preserving the paired structure; case-control tables are
    resampled per stratum.  Quantiles use linear interpolation of the
    order statistics.
    """
    if rng is None:
        rng = np.random.default_rng(req.seed)
    est = lr_estimates(req.counts)
    omega_hat = est.stats(req.target).omega
    pos, neg, redraws = bootstrap_omegas(req.counts, req.bootstrap_b, rng)
    omegas = pos if req.target is Target.POSITIVE else neg
    b = req.bootstrap_b
    a_count = int(np.count_nonzero(omegas < omega_hat))
    if a_count == 0 or a_count == b:
        raise BootstrapDegenerate(
            f"all {b} bootstrap estimates fell on one side of the point "
            f"estimate (A={a_count}); the bias correction is infinite")
    z0 = ndtri(a_count / b)
    q1 = float(ndtr(2.0 * z0 - req.z))
    q2 = float(ndtr(2.0 * z0 + req.z))
    lower, upper = np.quantile(omegas, [q1, q2])
    notes = f"B={b}, z0={z0:.5f}, degenerate redraws={redraws}"
    return IntervalResult(method=Method.BOOTSTRAP, target=req.target, level=req.level,
                          lower=float(lower), upper=float(upper), valid=True,
                          point_estimate=omega_hat, notes=notes,
                          resample_mean=float(omegas.mean()))


# ---------------------------------------------------------------------------
# Bayesian


def posterior_omegas(counts: PairedCounts, m: int, priors: PriorSet,
                     rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Draw M independent posterior quadruples and return both omega arrays.

    Posteriors are the conjugate updates of the four beta priors by the
    marginal binomial successes; draws are taken in the fixed order
    se1, sp1, se2, sp2 so results are reproducible for a given generator.
    """
    c = counts
    se1 = rng.beta(c.s11 + c.s10 + priors.se1.alpha, c.s01 + c.s00 + priors.se1.beta, size=m)
    sp1 = rng.beta(c.r01 + c.r00 + priors.sp1.alpha, c.r11 + c.r10 + priors.sp1.beta, size=m)
    se2 = rng.beta(c.s11 + c.s01 + priors.se2.alpha, c.s10 + c.s00 + priors.se2.beta, size=m)
    sp2 = rng.beta(c.r10 + c.r00 + priors.sp2.alpha, c.r11 + c.r01 + priors.sp2.beta, size=m)
    omega_pos = (se1 / (1.0 - sp1)) / (se2 / (1.0 - sp2))
    omega_neg = ((1.0 - se1) / sp1) / ((1.0 - se2) / sp2)
    return omega_pos, omega_neg


def ci_bayesian(req: IntervalRequest, rng: np.random.Generator | None = None) -> IntervalResult:
    """Equal-tailed posterior quantile interval from M Monte-Carlo draws."""
    if rng is None:
        rng = np.random.default_rng(req.seed)
    est = lr_estimates(req.counts)
    omega_hat = est.stats(req.target).omega
    pos, neg = posterior_omegas(req.counts, req.bayes_m, req.priors, rng)
    omegas = pos if req.target is Target.POSITIVE else neg
    alpha = 1.0 - req.level
    lower, upper = np.quantile(omegas, [alpha / 2.0, 1.0 - alpha / 2.0])
    return IntervalResult(method=Method.BAYESIAN, target=req.target, level=req.level,
                          lower=float(lower), upper=float(upper), valid=True,
                          point_estimate=omega_hat, notes=f"M={req.bayes_m}",
                          resample_mean=float(omegas.mean()))


# ---------------------------------------------------------------------------
# Dispatch and reciprocal transform


def compute_intervals(req: IntervalRequest) -> dict[Method, IntervalResult]:
    """Compute every requested method for one table.

    The stochastic methods draw from independent sub-streams of ``req.seed``
    so each method's result does not depend on which other methods were
    requested.  A Fieller failure is reported as an invalid result rather
    than aborting the whole grid.
    """
    est = lr_estimates(req.counts)
    z = req.z
    results: dict[Method, IntervalResult] = {}
    for method in req.methods:
        if method is Method.REGRESSION:
            results[method] = _regression(est, req.target, req.level, z)
        elif method is Method.LOGARITHMIC:
            results[method] = _logarithmic(est, req.target, req.level, z)
        elif method is Method.WALD:
            results[method] = _wald(est, req.target, req.level, z)
        elif method is Method.FIELLER:
            try:
                results[method] = _fieller(est, req.target, req.level, z)
            except FiellerInvalid as exc:
                results[method] = IntervalResult(
                    method=Method.FIELLER, target=req.target, level=req.level,
                    lower=math.nan, upper=math.nan, valid=False,
                    point_estimate=est.stats(req.target).omega, notes=str(exc))
        elif method is Method.BOOTSTRAP:
            rng = np.random.default_rng(np.random.SeedSequence(req.seed, spawn_key=(0,)))
            results[method] = ci_bootstrap(req, rng)
        elif method is Method.BAYESIAN:
            rng = np.random.default_rng(np.random.SeedSequence(req.seed, spawn_key=(1,)))
            results[method] = ci_bayesian(req, rng)
    return results


def invert_interval(res: IntervalResult, omega_hat: float) -> IntervalResult:
    """Map an interval for omega onto the reciprocal ratio 1/omega.

    The multiplicative constructions invert endpoint-wise; the Wald interval
    instead divides both endpoints by omega_hat squared, preserving its
    additive symmetry around 1/omega_hat.
    """
    if omega_hat <= 0.0:
        raise ValueError("omega_hat must be positive")
    if res.method is Method.WALD:
        lower, upper = res.lower / omega_hat ** 2, res.upper / omega_hat ** 2
    else:
        lower, upper = 1.0 / res.upper, 1.0 / res.lower
    note = "reciprocal-ratio interval"
    return replace(res, lower=lower, upper=upper,
                   point_estimate=1.0 / omega_hat,
                   notes=f"{res.notes}; {note}" if res.notes else note)
