"""Data model, estimators, and delta-method variance algebra.

Two binary diagnostic tests are applied, together with a gold standard, to
every subject (paired design) or to fixed diseased / non-diseased samples
(case-control design).  The observed data form an eight-cell frequency
table; this module holds that table, the generative cell-probability model
with conditional-dependence factors, the maximum-likelihood estimators of
the accuracy parameters, and the variance-covariance propagation from
(Se, Sp) up to the likelihood-ratio ratios omega+ = LR1+/LR2+ and
omega- = LR1-/LR2-.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DegenerateTable, InvalidDependence

__all__ = [
    "Design",
    "Target",
    "CELL_NAMES",
    "PairedCounts",
    "AccuracyParams",
    "AccuracyEstimates",
    "RatioEstimates",
    "SeSpVarCov",
    "LrVarCov",
    "TargetStats",
    "LrEstimates",
    "vacek_cell_probabilities",
    "estimate_accuracy",
    "accuracy_from_frequencies",
    "lr_point_estimates",
    "var_cov_se_sp",
    "var_cov_lr",
    "var_omega",
    "lr_estimates",
    "estimable_mask",
    "omega_arrays",
]

CELL_NAMES = ("s11", "s10", "s01", "s00", "r11", "r10", "r01", "r00")


class Design(str, Enum):
    """Sampling design behind the eight-cell table."""

    PAIRED = "paired"
    CASE_CONTROL = "case-control"


class Target(str, Enum):
    """Which likelihood-ratio ratio is being compared."""

    POSITIVE = "pos"  # omega+ = LR1+/LR2+
    NEGATIVE = "neg"  # omega- = LR1-/LR2-


@dataclass(frozen=True)
class PairedCounts:
    """Observed frequencies of the two tests against the gold standard.

    ``sij`` counts diseased subjects with T1=i, T2=j; ``rij`` the same among
    non-diseased subjects.  Under the paired design ``n = s + r`` is the one
    sample size; under case-control, ``s`` and ``r`` are the independently
    fixed sizes of the diseased and non-diseased samples.
    """

    s11: int
    s10: int
    s01: int
    s00: int
    r11: int
    r10: int
    r01: int
    r00: int
    design: Design = Design.PAIRED

    def __post_init__(self):
        for name in CELL_NAMES:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ValueError(f"cell {name} must be an integer, got {value!r}")
            if value < 0:
                raise ValueError(f"cell {name} must be non-negative, got {value}")
        object.__setattr__(self, "design", Design(self.design))
        if self.s < 1 or self.r < 1:
            raise ValueError("both strata need at least one observation")

    @property
    def s(self) -> int:
        return self.s11 + self.s10 + self.s01 + self.s00

    @property
    def r(self) -> int:
        return self.r11 + self.r10 + self.r01 + self.r00

    @property
    def n(self) -> int:
        return self.s + self.r

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in CELL_NAMES], dtype=np.int64)

    def swap_tests(self) -> "PairedCounts":
        """Relabel test 1 as test 2 and vice versa (transposes each 2x2 block)."""
        return PairedCounts(
            s11=self.s11, s10=self.s01, s01=self.s10, s00=self.s00,
            r11=self.r11, r10=self.r01, r01=self.r10, r00=self.r00,
            design=self.design,
        )

    def to_dict(self) -> dict:
        out = {name: int(getattr(self, name)) for name in CELL_NAMES}
        out["design"] = self.design.value
        return out

    @classmethod
    def from_dict(cls, payload: dict) -> "PairedCounts":
        design = Design(payload.get("design", Design.PAIRED))
        cells = {}
        for name in CELL_NAMES:
            if name not in payload:
                raise ValueError(f"missing cell {name!r}")
            cells[name] = _require_integer_cell(name, payload[name])
        return cls(design=design, **cells)

    @classmethod
    def from_json(cls, source) -> "PairedCounts":
        """Parse from a JSON object ``{design, s11, ..., r00}``.

        ``source`` may be a path, a JSON string, or an open file object.
        """
        text = _read_text(source)
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"not valid JSON: {exc}") from exc
        if not isinstance(payload, dict):
            raise ValueError("JSON input must be an object with the eight cells")
        return cls.from_dict(payload)

    @classmethod
    def from_csv(cls, source, design: Design = Design.PAIRED) -> "PairedCounts":
        """Parse a two-row CSV mirroring the observed-frequency table.

        Each data row is ``d, c11, c10, c01, c00`` where ``d`` is 1 for the
        diseased row and 0 for the non-diseased row, and the four counts
        follow the outcome order (T1=1,T2=1), (1,0), (0,1), (0,0).  A header
        row is skipped if its second field is not numeric.
        """
        text = _read_text(source)
        rows = [row for row in csv.reader(io.StringIO(text)) if row and any(f.strip() for f in row)]
        if rows and len(rows[0]) >= 2 and not _is_number(rows[0][1]):
            rows = rows[1:]
        if len(rows) != 2:
            raise ValueError(f"expected two data rows (D=1 and D=0), got {len(rows)}")
        by_d = {}
        for row in rows:
            if len(row) < 5:
                raise ValueError(f"row has {len(row)} fields, need d plus four counts")
            d = row[0].strip()
            if d not in {"0", "1"}:
                raise ValueError(f"first field must be the gold-standard value 0 or 1, got {d!r}")
            by_d[d] = [_require_integer_cell(f"column {i + 2}", f) for i, f in enumerate(row[1:5])]
        if set(by_d) != {"0", "1"}:
            raise ValueError("need exactly one D=1 row and one D=0 row")
        s = by_d["1"]
        r = by_d["0"]
        return cls(s11=s[0], s10=s[1], s01=s[2], s00=s[3],
                   r11=r[0], r10=r[1], r01=r[2], r00=r[3], design=design)


def _read_text(source) -> str:
    if hasattr(source, "read"):
        return source.read()
    if isinstance(source, Path):
        return source.read_text()
    text = str(source)
    # Heuristic: anything that parses as a path to an existing file is a path.
    if "\n" not in text and "{" not in text and Path(text).is_file():
        return Path(text).read_text()
    return text


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def _require_integer_cell(name, value):
    if isinstance(value, bool):
        raise ValueError(f"cell {name} must be an integer, got a boolean")
    if isinstance(value, (int, np.integer)):
        cell = int(value)
    elif isinstance(value, float):
        if not value.is_integer():
            raise ValueError(f"cell {name} must be an integer, got {value}")
        cell = int(value)
    elif isinstance(value, str):
        token = value.strip()
        try:
            as_float = float(token)
        except ValueError:
            raise ValueError(f"cell {name} is not numeric: {value!r}") from None
        if not as_float.is_integer():
            raise ValueError(f"cell {name} must be an integer, got {value!r}")
        cell = int(as_float)
    else:
        raise ValueError(f"cell {name} is not numeric: {value!r}")
    if cell < 0:
        raise ValueError(f"cell {name} must be non-negative, got {cell}")
    return cell


# ---------------------------------------------------------------------------
# Generative model


@dataclass(frozen=True)
class AccuracyParams:
    """Generative accuracy parameters with conditional-dependence factors.

    ``eps1`` (diseased stratum) and ``eps0`` (non-diseased stratum) measure
    the residual dependence between the two tests given disease status.
    They must satisfy 0 <= eps1 <= min{Se1(1-Se2), Se2(1-Se1)} and the
    analogous bound for eps0, which keeps every cell probability in [0, 1].
    """

    se1: float
    sp1: float
    se2: float
    sp2: float
    pi: float
    eps1: float = 0.0
    eps0: float = 0.0

    def __post_init__(self):
        for name in ("se1", "sp1", "se2", "sp2", "pi"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must lie strictly in (0, 1), got {value}")
        if self.eps1 < 0.0 or self.eps0 < 0.0:
            raise InvalidDependence("dependence factors must be non-negative")
        if self.eps1 > self.eps1_max + 1e-12:
            raise InvalidDependence(
                f"eps1={self.eps1} exceeds its bound {self.eps1_max:.6g}")
        if self.eps0 > self.eps0_max + 1e-12:
            raise InvalidDependence(
                f"eps0={self.eps0} exceeds its bound {self.eps0_max:.6g}")

    @property
    def eps1_max(self) -> float:
        return min(self.se1 * (1.0 - self.se2), self.se2 * (1.0 - self.se1))

    @property
    def eps0_max(self) -> float:
        return min(self.sp1 * (1.0 - self.sp2), self.sp2 * (1.0 - self.sp1))

    @classmethod
    def with_dependence_fraction(cls, se1, sp1, se2, sp2, pi, k) -> "AccuracyParams":
        """Build params with eps_i set to ``k`` times its upper bound."""
        if not 0.0 <= k <= 1.0:
            raise InvalidDependence(f"dependence fraction k must be in [0, 1], got {k}")
        probe = cls(se1=se1, sp1=sp1, se2=se2, sp2=sp2, pi=pi)
        return cls(se1=se1, sp1=sp1, se2=se2, sp2=sp2, pi=pi,
                   eps1=k * probe.eps1_max, eps0=k * probe.eps0_max)

    def omega(self, target: Target) -> float:
        ratios = lr_point_estimates(self)
        return ratios.omega_pos if Target(target) is Target.POSITIVE else ratios.omega_neg


def vacek_cell_probabilities(params: AccuracyParams) -> np.ndarray:
    """Eight joint cell probabilities (p11, p10, p01, p00, q11, q10, q01, q00).

    The diseased block sums to pi and the non-diseased block to 1 - pi.
    """
    se1, se2, sp1, sp2 = params.se1, params.se2, params.sp1, params.sp2
    p = np.empty(8)
    p[0] = params.pi * (se1 * se2 + params.eps1)
    p[1] = params.pi * (se1 * (1 - se2) - params.eps1)
    p[2] = params.pi * ((1 - se1) * se2 - params.eps1)
    p[3] = params.pi * ((1 - se1) * (1 - se2) + params.eps1)
    pibar = 1.0 - params.pi
    p[4] = pibar * ((1 - sp1) * (1 - sp2) + params.eps0)
    p[5] = pibar * ((1 - sp1) * sp2 - params.eps0)
    p[6] = pibar * (sp1 * (1 - sp2) - params.eps0)
    p[7] = pibar * (sp1 * sp2 + params.eps0)
    if np.any(p < -1e-15) or np.any(p > 1.0 + 1e-15):
        raise InvalidDependence("a cell probability fell outside [0, 1]")
    return np.clip(p, 0.0, 1.0)


def stratum_probabilities(params: AccuracyParams) -> tuple[np.ndarray, np.ndarray]:
    """Per-stratum cell probabilities (each block sums to one, case-control)."""
    cells = vacek_cell_probabilities(params)
    return cells[:4] / params.pi, cells[4:] / (1.0 - params.pi)


# ---------------------------------------------------------------------------
# Estimation


@dataclass(frozen=True)
class AccuracyEstimates:
    """Maximum-likelihood accuracy estimates from one observed table.

    ``pi`` is None under case-control sampling, where prevalence is not
    identifiable.  ``eps1``/``eps0`` may be negative in noisy samples;
    they are reported as observed, never clamped.  ``s`` and ``r`` are the
    stratum totals (floats so that expected-frequency input is accepted).
    """

    se1: float
    sp1: float
    se2: float
    sp2: float
    pi: float | None
    eps1: float
    eps0: float
    s: float
    r: float
    design: Design = Design.PAIRED


def accuracy_from_frequencies(cells: Sequence[float],
                              design: Design = Design.PAIRED) -> AccuracyEstimates:
    """Accuracy estimates from an eight-cell frequency vector.

    Accepts observed integer counts or expected (real-valued) frequencies in
    the order ``(s11, s10, s01, s00, r11, r10, r01, r00)``.
    """
    c = np.asarray(cells, dtype=float)
    if c.shape != (8,):
        raise ValueError(f"need eight cells, got shape {c.shape}")
    if np.any(c < 0):
        raise ValueError("cells must be non-negative")
    s = float(c[:4].sum())
    r = float(c[4:].sum())
    if s <= 0.0 or r <= 0.0:
        raise DegenerateTable("a stratum is empty; accuracy is not estimable")
    se1 = (c[0] + c[1]) / s
    se2 = (c[0] + c[2]) / s
    sp1 = (c[6] + c[7]) / r
    sp2 = (c[5] + c[7]) / r
    for name, value in (("se1", se1), ("se2", se2), ("sp1", sp1), ("sp2", sp2)):
        if value <= 0.0 or value >= 1.0:
            raise DegenerateTable(
                f"estimated {name} = {value:g}; likelihood ratios are undefined")
    design = Design(design)
    pi = s / (s + r) if design is Design.PAIRED else None
    eps1 = (c[0] * c[3] - c[1] * c[2]) / (s * s)
    eps0 = (c[4] * c[7] - c[5] * c[6]) / (r * r)
    return AccuracyEstimates(se1=se1, sp1=sp1, se2=se2, sp2=sp2, pi=pi,
                             eps1=eps1, eps0=eps0, s=s, r=r, design=design)


def estimate_accuracy(counts: PairedCounts) -> AccuracyEstimates:
    """Accuracy estimates from an observed table (degenerate tables raise)."""
    return accuracy_from_frequencies(counts.as_array(), counts.design)


@dataclass(frozen=True)
class RatioEstimates:
    """Likelihood ratios of both tests and their ratios, for both signs."""

    lr1_pos: float
    lr2_pos: float
    omega_pos: float
    lr1_neg: float
    lr2_neg: float
    omega_neg: float

    def lr(self, target: Target) -> tuple[float, float]:
        if Target(target) is Target.POSITIVE:
            return self.lr1_pos, self.lr2_pos
        return self.lr1_neg, self.lr2_neg

    def omega(self, target: Target) -> float:
        return self.omega_pos if Target(target) is Target.POSITIVE else self.omega_neg


def lr_point_estimates(acc) -> RatioEstimates:
    """Likelihood ratios LR+ = Se/(1-Sp), LR- = (1-Se)/Sp and their ratios.

    ``acc`` is anything with se1, sp1, se2, sp2 attributes strictly in (0, 1)
    (generative parameters or estimates).
    """
    for name in ("se1", "sp1", "se2", "sp2"):
        value = getattr(acc, name)
        if not 0.0 < value < 1.0:
            raise DegenerateTable(f"{name} = {value:g} is not strictly inside (0, 1)")
    lr1_pos = acc.se1 / (1.0 - acc.sp1)
    lr2_pos = acc.se2 / (1.0 - acc.sp2)
    lr1_neg = (1.0 - acc.se1) / acc.sp1
    lr2_neg = (1.0 - acc.se2) / acc.sp2
    return RatioEstimates(
        lr1_pos=lr1_pos, lr2_pos=lr2_pos, omega_pos=lr1_pos / lr2_pos,
        lr1_neg=lr1_neg, lr2_neg=lr2_neg, omega_neg=lr1_neg / lr2_neg,
    )


# ---------------------------------------------------------------------------
# Delta-method variance propagation


@dataclass(frozen=True)
class SeSpVarCov:
    var_se1: float
    var_se2: float
    var_sp1: float
    var_sp2: float
    cov_se: float  # Cov(Se1_hat, Se2_hat); all cross (Se, Sp) covariances are 0
    cov_sp: float  # Cov(Sp1_hat, Sp2_hat)


def _effective_denominators(acc, n, design: Design) -> tuple[float, float]:
    """Effective per-stratum sample sizes: (n*pi, n*(1-pi)) or (n1, n2)."""
    design = Design(design)
    if design is Design.CASE_CONTROL:
        try:
            n1, n2 = n
        except TypeError:
            raise ValueError("case-control design needs sizes (n1, n2)") from None
        if n1 < 1 or n2 < 1:
            raise ValueError("both case-control sample sizes must be >= 1")
        return float(n1), float(n2)
    n = float(n)
    if n < 1:
        raise ValueError("sample size must be >= 1")
    return n * acc.pi, n * (1.0 - acc.pi)


def var_cov_se_sp(acc, n, design: Design = Design.PAIRED) -> SeSpVarCov:
    """Asymptotic variances and covariances of the accuracy estimators.

    ``n`` is the total paired sample size, or a pair ``(n1, n2)`` under
    case-control.  ``acc`` may hold parameters or plug-in estimates.
    """
    den_d, den_nd = _effective_denominators(acc, n, design)
    return _se_sp_var_cov(acc, den_d, den_nd)


def _se_sp_var_cov(acc, den_d: float, den_nd: float) -> SeSpVarCov:
    return SeSpVarCov(
        var_se1=acc.se1 * (1.0 - acc.se1) / den_d,
        var_se2=acc.se2 * (1.0 - acc.se2) / den_d,
        var_sp1=acc.sp1 * (1.0 - acc.sp1) / den_nd,
        var_sp2=acc.sp2 * (1.0 - acc.sp2) / den_nd,
        cov_se=acc.eps1 / den_d,
        cov_sp=acc.eps0 / den_nd,
    )


@dataclass(frozen=True)
class LrVarCov:
    var_lr1: float
    var_lr2: float
    cov_lr12: float


def _lr_var_cov(acc, sesp: SeSpVarCov, target: Target) -> LrVarCov:
    if Target(target) is Target.POSITIVE:
        f1, f2 = 1.0 - acc.sp1, 1.0 - acc.sp2
        var1 = (acc.se1 ** 2 * sesp.var_sp1 + f1 ** 2 * sesp.var_se1) / f1 ** 4
        var2 = (acc.se2 ** 2 * sesp.var_sp2 + f2 ** 2 * sesp.var_se2) / f2 ** 4
        cov = (acc.se1 * acc.se2 * sesp.cov_sp + f1 * f2 * sesp.cov_se) / (f1 ** 2 * f2 ** 2)
    else:
        g1, g2 = 1.0 - acc.se1, 1.0 - acc.se2
        var1 = (g1 ** 2 * sesp.var_sp1 + acc.sp1 ** 2 * sesp.var_se1) / acc.sp1 ** 4
        var2 = (g2 ** 2 * sesp.var_sp2 + acc.sp2 ** 2 * sesp.var_se2) / acc.sp2 ** 4
        cov = (g1 * g2 * sesp.cov_sp + acc.sp1 * acc.sp2 * sesp.cov_se) / (acc.sp1 ** 2 * acc.sp2 ** 2)
    return LrVarCov(var_lr1=var1, var_lr2=var2, cov_lr12=cov)


def var_cov_lr(acc, target: Target, n, design: Design = Design.PAIRED) -> LrVarCov:
    """Delta-method variances of the two LR estimators and their covariance."""
    return _lr_var_cov(acc, var_cov_se_sp(acc, n, design), target)


def _omega_variances(lr1, lr2, lrvc: LrVarCov) -> tuple[float, float]:
    var_log = (lrvc.var_lr1 / lr1 ** 2 + lrvc.var_lr2 / lr2 ** 2
               - 2.0 * lrvc.cov_lr12 / (lr1 * lr2))
    omega = lr1 / lr2
    return omega ** 2 * var_log, var_log


def var_omega(acc, target: Target, n, design: Design = Design.PAIRED) -> tuple[float, float]:
    """Return (Var(omega_hat), Var(log omega_hat)) for the requested sign."""
    ratios = lr_point_estimates(acc)
    lr1, lr2 = ratios.lr(target)
    return _omega_variances(lr1, lr2, var_cov_lr(acc, target, n, design))


# ---------------------------------------------------------------------------
# Assembled estimates for one table


@dataclass(frozen=True)
class TargetStats:
    """Point and variance estimates for one sign (positive or negative LRs)."""

    target: Target
    lr1: float
    lr2: float
    omega: float
    var_lr1: float
    var_lr2: float
    cov_lr12: float
    var_omega: float
    var_log_omega: float

    @property
    def se_lr1(self) -> float:
        return math.sqrt(self.var_lr1)

    @property
    def se_lr2(self) -> float:
        return math.sqrt(self.var_lr2)

    @property
    def se_omega(self) -> float:
        return math.sqrt(self.var_omega)


@dataclass(frozen=True)
class LrEstimates:
    """Everything estimated from one table: accuracy, ratios, variances."""

    accuracy: AccuracyEstimates
    ratios: RatioEstimates
    sesp: SeSpVarCov
    pos: TargetStats
    neg: TargetStats

    def stats(self, target: Target) -> TargetStats:
        return self.pos if Target(target) is Target.POSITIVE else self.neg

    @property
    def omega_pos(self) -> float:
        return self.pos.omega

    @property
    def omega_neg(self) -> float:
        return self.neg.omega


def lr_estimates(counts: PairedCounts) -> LrEstimates:
    """Full plug-in estimation for one observed table.

    Every parameter in the variance formulas, including the prevalence and
    the dependence factors, is replaced by its maximum-likelihood estimate;
    under either design the effective per-stratum denominators are the
    observed stratum totals.
    """
    acc = estimate_accuracy(counts)
    return _assemble_estimates(acc)


def _assemble_estimates(acc: AccuracyEstimates) -> LrEstimates:
    ratios = lr_point_estimates(acc)
    sesp = _se_sp_var_cov(acc, acc.s, acc.r)
    per_target = {}
    for target in (Target.POSITIVE, Target.NEGATIVE):
        lrvc = _lr_var_cov(acc, sesp, target)
        lr1, lr2 = ratios.lr(target)
        v_omega, v_log = _omega_variances(lr1, lr2, lrvc)
        per_target[target] = TargetStats(
            target=target, lr1=lr1, lr2=lr2, omega=lr1 / lr2,
            var_lr1=lrvc.var_lr1, var_lr2=lrvc.var_lr2, cov_lr12=lrvc.cov_lr12,
            var_omega=v_omega, var_log_omega=v_log,
        )
    return LrEstimates(accuracy=acc, ratios=ratios, sesp=sesp,
                       pos=per_target[Target.POSITIVE], neg=per_target[Target.NEGATIVE])


def estimates_from_params(params, n, design: Design = Design.PAIRED) -> LrEstimates:
    """Evaluate the same estimate bundle at known parameter values.

    Useful for sample-size work and for oracles: plugs the true parameters
    into the variance formulas at sample size ``n`` (or ``(n1, n2)``).
    """
    den_d, den_nd = _effective_denominators(params, n, design)
    pi = getattr(params, "pi", None) if Design(design) is Design.PAIRED else None
    acc = AccuracyEstimates(se1=params.se1, sp1=params.sp1, se2=params.se2,
                            sp2=params.sp2, pi=pi, eps1=params.eps1,
                            eps0=params.eps0, s=den_d, r=den_nd, design=Design(design))
    return _assemble_estimates(acc)


# ---------------------------------------------------------------------------
# Vectorized helpers shared by the bootstrap and the simulation harness


def estimable_mask(tables: np.ndarray) -> np.ndarray:
    """Boolean mask of rows whose accuracy parameters are all estimable.

    ``tables`` has shape (k, 8) in the standard cell order.  A row is
    estimable when both strata are non-empty and each marginal Se/Sp
    estimate lies strictly inside (0, 1).
    """
    t = np.asarray(tables)
    s = t[..., :4].sum(axis=-1)
    r = t[..., 4:].sum(axis=-1)
    se1_num = t[..., 0] + t[..., 1]
    se2_num = t[..., 0] + t[..., 2]
    sp1_num = t[..., 6] + t[..., 7]
    sp2_num = t[..., 5] + t[..., 7]
    ok = (s > 0) & (r > 0)
    for num, total in ((se1_num, s), (se2_num, s), (sp1_num, r), (sp2_num, r)):
        ok &= (num > 0) & (num < total)
    return ok


def omega_arrays(tables: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (omega_pos, omega_neg) for estimable rows of shape (k, 8)."""
    t = np.asarray(tables, dtype=float)
    s = t[..., :4].sum(axis=-1)
    r = t[..., 4:].sum(axis=-1)
    se1 = (t[..., 0] + t[..., 1]) / s
    se2 = (t[..., 0] + t[..., 2]) / s
    sp1 = (t[..., 6] + t[..., 7]) / r
    sp2 = (t[..., 5] + t[..., 7]) / r
    omega_pos = (se1 / (1.0 - sp1)) / (se2 / (1.0 - sp2))
    omega_neg = ((1.0 - se1) / sp1) / ((1.0 - se2) / sp2)
    return omega_pos, omega_neg
