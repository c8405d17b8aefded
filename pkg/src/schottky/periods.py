"""Schottky period matrices from the double-coset cross-ratio series, with a
derivative-sum tail certificate; annulus extremal length."""

from __future__ import annotations

import cmath
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    BadRadii,
    BranchAmbiguity,
    ConvergenceGateFailed,
    NoContraction,
    NotClassical,
)
from .groups import CirclePairing, SchottkyGroupSpec, orbit_levels
from .measures import dimension_bracket
from .moebius import INF, batch_derivative, cross_ratio, loxodromic_data, map_sending
from .words import word_to_str

CUT_TOL = 1e-12
DEFAULT_N = 8


def thread_count() -> int:
    """Worker cap from SCHOTTKY_THREADS (default 1)."""
    raw = os.environ.get("SCHOTTKY_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


# --- tail certificate ----------------------------------------------------------


@dataclass(frozen=True)
class TailCertificate:
    N: int
    derivative_sum_at_N: float
    geometric_ratio: float
    bound: float
    z_probe: complex = 0j

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "derivative_sum_at_N": self.derivative_sum_at_N,
            "geometric_ratio": self.geometric_ratio,
            "bound": self.bound,
            "z_probe": [self.z_probe.real, self.z_probe.imag],
        }


def default_probe(spec: SchottkyGroupSpec) -> complex:
    """Point of the first source circle closest to 0."""
    if spec.pairings is None:
        raise NotClassical("default probe point needs circle pairings")
    c = spec.pairings[0].source
    if c.center == 0:
        return complex(c.radius)
    return c.center - c.radius * c.center / abs(c.center)


def _coset_derivative_sum(spec: SchottkyGroupSpec, z: complex, n: int) -> float:
    """Largest over k of the sum of |w'(z)| over length-n words not starting with g_k^{+-1}."""
    words, mats = orbit_levels(spec, n)[n]
    der = batch_derivative(mats, z)
    first = np.abs(words[:, 0])
    return max(math.fsum(der[first != k]) for k in range(1, spec.genus + 1))


def tail_certificate(spec: SchottkyGroupSpec, z_probe: Optional[complex] = None, N: int = DEFAULT_N) -> TailCertificate:
    """Geometric tail bound from the derivative sums at lengths N - 1 and N."""
    if N < 2:
        raise ValueError("N must be >= 2")
    if spec.genus == 1:
        # every nontrivial word lies in the cyclic subgroup: no coset terms at all
        probe = complex(z_probe) if z_probe is not None else 0j
        return TailCertificate(N, 0.0, 0.0, 0.0, probe)
    if z_probe is None:
        if not spec.classical_verified:
            raise NotClassical("tail certificate needs a classical group or an explicit probe point")
        z_probe = default_probe(spec)
    z = complex(z_probe)
    s_prev = _coset_derivative_sum(spec, z, N - 1)
    s_n = _coset_derivative_sum(spec, z, N)
    ratio = s_n / s_prev if s_prev > 0 else 0.0
    if not ratio < 1.0:
        raise NoContraction(f"derivative sums do not contract at N={N} (ratio {ratio:.4g})")
    return TailCertificate(N, s_n, ratio, s_n * ratio / (1.0 - ratio), z)


# --- period matrix -----------------------------------------------------------------


@dataclass(frozen=True)
class PeriodMatrix:
    genus: int
    entries: np.ndarray
    truncation: int
    tail_bound: float
    certificate: Optional[TailCertificate] = None
    gate_value: float = 0.0

    def symmetry_residual(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.T)))

    def riemann_matrix(self) -> np.ndarray:
        """tau = i P / (2 pi); its imaginary part is Re P / (2 pi)."""
        return 1j * self.entries / (2 * math.pi)

    def imaginary_part_positive(self) -> bool:
        """Positive definiteness of Im tau (the symmetrized real part of P) by Cholesky."""
        sym = (self.entries.real + self.entries.real.T) / 2
        try:
            np.linalg.cholesky(sym)
        except np.linalg.LinAlgError:
            return False
        return True

    def to_dict(self) -> dict:
        return {
            "genus": self.genus,
            "N": self.truncation,
            "tail_bound": self.tail_bound,
            "re": self.entries.real.tolist(),
            "im": self.entries.imag.tolist(),
        }


def _images(mats: np.ndarray, z) -> np.ndarray:
    if z is INF:
        return mats[:, 0, 0] / mats[:, 1, 0]
    return (mats[:, 0, 0] * z + mats[:, 0, 1]) / (mats[:, 1, 0] * z + mats[:, 1, 1])


def _image_gap(mats: np.ndarray, zp, zm) -> np.ndarray:
    """w(zp) - w(zm) without cancellation, for det-1 matrices."""
    c, d = mats[:, 1, 0], mats[:, 1, 1]
    if zp is INF:
        return 1.0 / (c * (c * zm + d))
    if zm is INF:
        return -1.0 / (c * (c * zp + d))
    return (zp - zm) / ((c * zp + d) * (c * zm + d))


def _log_terms(z1, z2, w1: np.ndarray, w2: np.ndarray, gap: np.ndarray) -> np.ndarray:
    """log of the cross ratio [z1, z2, w1, w2] = 1 + u, computed from u."""
    if z1 is INF:
        u = -gap / (z2 - w1)
    elif z2 is INF:
        u = gap / (z1 - w2)
    else:
        u = (z1 - z2) * gap / ((z1 - w2) * (z2 - w1))
    ratio = 1.0 + u
    cut = (ratio.real < 0) & (np.abs(ratio.imag) <= CUT_TOL * np.abs(ratio))
    if cut.any():
        raise BranchAmbiguity(f"{int(cut.sum())} cross ratios lie on the branch cut of log")
    small = np.abs(u) < 1e-3
    out = np.empty_like(u)
    us = u[small]
    out[small] = us * (1 - us * (1 / 2 - us * (1 / 3 - us * (1 / 4 - us * (1 / 5 - us * (1 / 6 - us / 7))))))
    out[~small] = np.log(ratio[~small])
    return out


def _coset_filter(words: np.ndarray, n: int, m: int) -> np.ndarray:
    if words.shape[1] == 0:
        return np.array([n != m])
    return (np.abs(words[:, 0]) != n) & (np.abs(words[:, -1]) != m)


def _entry(spec: SchottkyGroupSpec, data: list, n: int, m: int, N: int) -> complex:
    zm_n, zp_n = data[n - 1].fixed_minus, data[n - 1].fixed_plus
    zm_m, zp_m = data[m - 1].fixed_minus, data[m - 1].fixed_plus
    levels = orbit_levels(spec, N)
    re_parts, im_parts = [], []
    if n == m:
        lam = cmath.log(data[n - 1].multiplier)
        re_parts.append(lam.real)
        im_parts.append(lam.imag)
    for length in range(0, N + 1):
        words, mats = levels[length]
        sel = _coset_filter(words, n, m)
        if not sel.any():
            continue
        mm = mats[sel]
        w1 = _images(mm, zp_m)
        w2 = _images(mm, zm_m)
        gap = _image_gap(mm, zp_m, zm_m)
        if not (np.all(np.isfinite(w1)) and np.all(np.isfinite(w2))):
            terms = _scalar_terms(spec, words[sel], zm_n, zp_n, zm_m, zp_m)
        else:
            terms = _log_terms(zm_n, zp_n, w1, w2, gap)
        re_parts.extend(terms.real.tolist())
        im_parts.extend(terms.imag.tolist())
    return complex(math.fsum(re_parts), math.fsum(im_parts))


def _scalar_terms(spec, words, zm_n, zp_n, zm_m, zp_m) -> np.ndarray:
    out = []
    for w in words:
        gamma = spec.word_map(tuple(int(x) for x in w))
        cr = cross_ratio(zm_n, zp_n, gamma(zp_m), gamma(zm_m))
        if cr is INF or cr == 0:
            raise BranchAmbiguity(f"cross ratio degenerates for word {word_to_str(tuple(w))}")
        if cr.real < 0 and abs(cr.imag) <= CUT_TOL * abs(cr):
            raise BranchAmbiguity(f"cross ratio on the branch cut for word {word_to_str(tuple(w))}")
        out.append(cmath.log(cr))
    return np.array(out, dtype=complex)


def convergence_gate(spec: SchottkyGroupSpec, N: int) -> float:
    """Upper dimension estimate that must lie below 1 for the series to be trusted."""
    if spec.genus == 1:
        return 0.0
    if not spec.classical_verified:
        raise ConvergenceGateFailed("no circle pairings: the dimension bracket cannot certify convergence")
    return dimension_bracket(spec, N).upper


def period_matrix(
    spec: SchottkyGroupSpec,
    N: int = DEFAULT_N,
    z_probe: Optional[complex] = None,
    threads: Optional[int] = None,
) -> PeriodMatrix:
    """P_mn = delta_mn log lam_n + sum over double-coset reps gamma of
    log [z-_n, z+_n, gamma z+_m, gamma z-_m], truncated at word length N.

    The Riemann matrix is i P / (2 pi).
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    gate = convergence_gate(spec, N)
    if not gate < 1.0:
        raise ConvergenceGateFailed(f"dimension upper estimate {gate:.6g} is not below 1")
    g = spec.genus
    data = spec.fixed_data()
    pairs = [(n, m) for n in range(1, g + 1) for m in range(1, g + 1)]
    workers = threads if threads is not None else thread_count()
    if workers > 1 and len(pairs) > 1:
        orbit_levels(spec, N)  # fill the cache once before fanning out
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(lambda nm: _entry(spec, data, nm[0], nm[1], N), pairs))
    else:
        values = [_entry(spec, data, n, m, N) for n, m in pairs]
    entries = np.array(values, dtype=complex).reshape(g, g)
    cert = None
    tail = 0.0
    if g > 1:
        probe = z_probe
        if probe is None and not spec.classical_verified:
            probe = 0j
        cert = tail_certificate(spec, probe, max(N, 2))
        tail = cert.bound
    return PeriodMatrix(g, entries, N, tail, cert, gate)


# --- extremal length ---------------------------------------------------------------


def annulus_extremal_length(r1: float, r2: float) -> float:
    """Extremal length of the round annulus r1 < |z| < r2 for the separating curves."""
    if not (math.isfinite(r1) and math.isfinite(r2) and 0 < r1 < r2):
        raise BadRadii(f"need 0 < r1 < r2, got ({r1}, {r2})")
    return math.log(r2 / r1) / (2 * math.pi)


@dataclass(frozen=True)
class CheckResult:
    passed: bool
    lhs: float
    rhs: float
    slack: float
    identity_residual: Optional[float] = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def length_q_inequality(T: float, Q: float, radii: Optional[tuple] = None) -> CheckResult:
    """T >= (pi/2) Q, with slack; with radii (r1, r2) also |T - 2 pi E(r1, r2)|."""
    if T < 0 or Q < 0:
        raise ValueError("T and Q must be nonnegative")
    rhs = math.pi * Q / 2
    residual = None
    if radii is not None:
        residual = abs(T - 2 * math.pi * annulus_extremal_length(*radii))
    return CheckResult(T >= rhs, T, rhs, T - rhs, residual)


def normalized_annulus(pairing: CirclePairing) -> tuple:
    """Radii (r1, r2) of the two paired circles after moving the fixed points
    of the pairing map to 0 and INF.

    The conjugated generator is the dilation by the multiplier and carries one
    circle onto the other, so r2 / r1 = |multiplier| and log(r2 / r1) is the
    translation length.  Radii use the closed form r / | |c z0 + d|^2 - |c|^2 r^2 |
    for the image of |z - z0| = r under a det-1 map.
    """
    data = loxodromic_data(pairing.map)
    h = map_sending(data.fixed_minus, data.fixed_plus).inverse()
    c, d = h.c, h.d
    radii = []
    for circle in (pairing.source, pairing.target):
        den = abs(abs(c * circle.center + d) ** 2 - abs(c) ** 2 * circle.radius**2)
        if den == 0:
            raise BadRadii("circle passes through the pole of the normalizing map")
        radii.append(circle.radius / den)
    return min(radii), max(radii)
