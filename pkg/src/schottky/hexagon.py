"""Right-angled hexagon trigonometry, the rational norm Q, and the numeric
inequality suite for pants decompositions."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadLengths, BadSides, DomainError

RHO = 0.6
KAPPA_GRID = np.logspace(0.0, 2.0, 20)
A_GRID = np.logspace(-3.0, 1.0, 60)


def hexagon_e(a: float, b: float) -> float:
    """Side e with sinh(e) sinh(b/2) = cosh(a)."""
    if not b > 0 or not math.isfinite(b):
        raise BadSides(f"b must be positive and finite, got {b}")
    if a < 0 or not math.isfinite(a):
        raise BadSides(f"a must be nonnegative and finite, got {a}")
    return math.asinh(math.cosh(a) / math.sinh(b / 2))


def hexagon_e_bound(a: float, b: float, constant: float = 3.0) -> float:
    """The comparison value a + asinh(constant / b)."""
    if not b > 0:
        raise BadSides(f"b must be positive, got {b}")
    return a + math.asinh(constant / b)


def _d_argument(a, b):
    # cosh a (1 + cosh b) / (sinh a sinh b) = coth(a) coth(b/2), free of overflow
    return 1.0 / (np.tanh(a) * np.tanh(np.asarray(b) / 2))


def hexagon_d(a: float, b: float) -> float:
    """d = arccosh(cosh a (1 + cosh b) / (sinh a sinh b))."""
    if not (a > 0 and b > 0):
        raise BadSides(f"sides must be positive, got a={a}, b={b}")
    arg = float(_d_argument(a, b))
    if arg < 1.0:
        raise DomainError(f"arccosh argument {arg} < 1")
    return math.acosh(arg)


@dataclass(frozen=True)
class QValue:
    alpha_length: float
    beta_length: float
    q: float


def q_norm(alpha_length: float, beta_length: float) -> QValue:
    """Q = (beta / alpha)^2 for the squared-length norms."""
    for v in (alpha_length, beta_length):
        if not (v > 0 and math.isfinite(v)):
            raise BadLengths(f"lengths must be positive and finite, got {v}")
    return QValue(alpha_length, beta_length, (beta_length / alpha_length) ** 2)


# --- inequality suite ----------------------------------------------------------


@dataclass(frozen=True)
class SuiteRow:
    g: int
    check_id: str
    lhs: float
    rhs: float
    margin: float
    passed: bool


@dataclass
class SuiteReport:
    g_min: int
    g_max: int
    rows: list = field(default_factory=list)
    kappa_grid: tuple = ()
    a_grid: tuple = ()

    def row(self, g: int, check_id: str) -> SuiteRow:
        for r in self.rows:
            if r.g == g and r.check_id == check_id:
                return r
        raise KeyError((g, check_id))

    def failures(self, check_id: str) -> list:
        return [r for r in self.rows if r.check_id == check_id and not r.passed]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["g", "check_id", "lhs", "rhs", "margin", "pass"])
        for r in self.rows:
            w.writerow([r.g, r.check_id, repr(r.lhs), repr(r.rhs), repr(r.margin), "true" if r.passed else "false"])
        return buf.getvalue()


def log_power_sum(g_max: int, power: float = 1.6) -> np.ndarray:
    """Entry g - 1 holds sum_{i=1}^{g} log(2g - 2i + 2)^power = sum_{k=1}^{g} log(2k)^power."""
    k = np.arange(1, g_max + 1)
    return np.cumsum(np.log(2.0 * k) ** power)


def f_kappa(kappa: np.ndarray, g: int, a_grid: np.ndarray = A_GRID) -> np.ndarray:
    """f(kappa) = min over a of a / (a + asinh(1/b)) on the curve a b = kappa log(2g)."""
    big_l = math.log(2 * g)
    kappa = np.asarray(kappa, dtype=float)[:, None]
    a = np.asarray(a_grid)[None, :]
    inv_b = a / (kappa * big_l)
    return np.min(a / (a + np.arcsinh(inv_b)), axis=1)


def _rhs(g: int) -> float:
    return 2.0 / math.pi * g * math.log(2 * g)


def inequality_suite(g_min: int, g_max: int, kappa_grid: np.ndarray = KAPPA_GRID, a_grid: np.ndarray = A_GRID) -> SuiteReport:
    """Rows (i)-(iv) for each g in [g_min, g_max]."""
    if not 2 <= g_min <= g_max:
        raise ValueError("need 2 <= g_min <= g_max")
    kappa_grid = np.asarray(kappa_grid, dtype=float)
    sums = log_power_sum(g_max)
    report = SuiteReport(g_min, g_max, kappa_grid=tuple(kappa_grid.tolist()), a_grid=tuple(np.asarray(a_grid).tolist()))
    for g in range(g_min, g_max + 1):
        rhs = _rhs(g)
        big_l = math.log(2 * g)

        lhs = float(sums[g - 1])
        report.rows.append(SuiteRow(g, "i", lhs, rhs, lhs - rhs, lhs > rhs))

        f = f_kappa(kappa_grid, g, a_grid)
        monotone = bool(np.all(np.diff(f) > 0))
        best = float(np.max((f * (g - 1)) ** 2))
        exists = best > rhs
        ok = monotone and (exists or g == 2)
        report.rows.append(SuiteRow(g, "ii", best, rhs, best - rhs, ok))

        a = RHO / (2 * g) ** (1 / 3)
        b = kappa_grid * big_l / a
        d = np.arccosh(_d_argument(a, b))
        worst = float(np.min(d))
        target = 1.7 * big_l
        report.rows.append(SuiteRow(g, "iii", worst, target, worst - target, worst > target))

        val = math.pi * (2 * g - 2) ** 2 / (2 * g * big_l**2.8)
        report.rows.append(SuiteRow(g, "iv", val, 1.0, val - 1.0, val > 1.0))
    return report
