"""Semiclassical phase machinery up to third order.

With ``psi = exp(i S / hbar)`` and ``S = sum hbar**n S_n`` the first four
terms satisfy (``p = sqrt(2 m (E - V))``, + branch)::

    S0' = p
    S1' = i p' / (2 p)
    S2' = -p'' / (4 p^2) + 3 p'^2 / (8 p^3)
    S3' = i (-p''' / (8 p^3) + 3 p' p'' / (4 p^4) - 3 p'^3 / (4 p^5))

S1 and S3 are purely imaginary; they are stored here as the real
coefficients of ``i``. The right- and left-moving actions are::

    Si = +S0 + hbar S1 + hbar^2 S2 + hbar^3 S3
    Sr = -S0 + hbar S1 - hbar^2 S2 + hbar^3 S3
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .constants import HBAR, M_E
from .errors import QuadratureError, TurningPointError
from .exact import quad
from .potentials import Potential

EPS_GUARD = 1e-25  # J


@dataclass(frozen=True)
class LocalMomentum:
    p: float
    p1: float
    p2: float
    p3: float

    @property
    def k(self) -> float:
        return self.p / HBAR

    @property
    def k1(self) -> float:
        return self.p1 / HBAR


def momentum_derivs(potential: Potential, energy: float, x: float, *, m: float = M_E) -> LocalMomentum:
    """Local momentum and its first three derivatives from V, V', V'', V'''."""
    v = float(potential.value(x))
    if energy - v <= EPS_GUARD:
        raise TurningPointError(f"classical turning point at x={x:g} m (E - V = {energy - v:g} J)")
    v1 = float(potential.deriv(x, 1))
    v2 = float(potential.deriv(x, 2))
    v3 = float(potential.deriv(x, 3))
    p = math.sqrt(2.0 * m * (energy - v))
    p1 = -m * v1 / p
    p2 = -m * v2 / p - (m * v1) ** 2 / p**3
    p3 = -m * v3 / p + m * v2 * p1 / p**2 - 2.0 * m * m * v1 * v2 / p**3 + 3.0 * (m * v1) ** 2 * p1 / p**4
    return LocalMomentum(p, p1, p2, p3)


def _terms(lm: LocalMomentum) -> tuple[float, float, float, float]:
    p, p1, p2, p3 = lm.p, lm.p1, lm.p2, lm.p3
    s0 = p
    s1 = 0.5 * p1 / p
    s2 = -p2 / (4.0 * p * p) + 3.0 * p1 * p1 / (8.0 * p**3)
    s3 = -p3 / (8.0 * p**3) + 3.0 * p1 * p2 / (4.0 * p**4) - 3.0 * p1**3 / (4.0 * p**5)
    return s0, s1, s2, s3


def s_prime_terms(potential: Potential, energy: float, x: float) -> tuple[float, float, float, float]:
    """``(S0', S1', S2', S3')`` at x on the + branch; S1', S3' as coefficients of i."""
    return _terms(momentum_derivs(potential, energy, x))


def compose(s0, s1, s2, s3, *, hbar: float = HBAR) -> tuple[complex, complex]:
    """Combine real term values into ``(Si, Sr)``. Works for the S_n or for their derivatives."""
    odd = 1j * (hbar * s1 + hbar**3 * s3)
    even = s0 + hbar * hbar * s2
    return even + odd, -even + odd


@dataclass(frozen=True)
class WkbPhase:
    """Action terms S0..S3 at ``x`` relative to ``x_ref`` together with their derivatives."""

    x: float
    x_ref: float
    S0: float
    S1: float
    S2: float
    S3: float
    dS0: float
    dS1: float
    dS2: float
    dS3: float

    @property
    def Si(self) -> complex:
        return compose(self.S0, self.S1, self.S2, self.S3)[0]

    @property
    def Sr(self) -> complex:
        return compose(self.S0, self.S1, self.S2, self.S3)[1]

    @property
    def Si1(self) -> complex:
        return compose(self.dS0, self.dS1, self.dS2, self.dS3)[0]

    @property
    def Sr1(self) -> complex:
        return compose(self.dS0, self.dS1, self.dS2, self.dS3)[1]

    def first_order(self) -> "WkbPhase":
        """Copy with the second- and third-order terms dropped."""
        return replace(self, S2=0.0, S3=0.0, dS2=0.0, dS3=0.0)


def integrate_phase(
    potential: Potential, energy: float, x_ref: float, x: float, *, epsrel: float = 1e-11
) -> WkbPhase:
    """Integrate each S_n' from ``x_ref`` to ``x`` separately.

    Raises TurningPointError if E <= V anywhere on the path, and
    QuadratureError if a term fails to converge.
    """
    dterms = s_prime_terms(potential, energy, x)
    if x == x_ref:
        return WkbPhase(x, x_ref, 0.0, 0.0, 0.0, 0.0, *dterms)
    lo, hi = sorted((x_ref, x))
    _check_allowed(potential, energy, lo, hi)

    def term(n):
        return lambda t: _terms(momentum_derivs(potential, energy, t))[n]

    # absolute floor per term from its magnitude along the path (S1 of an even
    # potential integrates to zero, where a purely relative target is unreachable)
    probe = np.linspace(lo, hi, 65)
    mags = np.max(np.abs([s_prime_terms(potential, energy, t) for t in probe]), axis=0) * (hi - lo)
    values = []
    for n in range(4):
        try:
            val = quad(term(n), x_ref, x, epsabs=epsrel * mags[n], epsrel=epsrel, limit=400)
        except QuadratureError as exc:
            raise QuadratureError(f"S{n} integral from {x_ref:g} to {x:g}: {exc}") from None
        values.append(val)
    return WkbPhase(x, x_ref, *values, *dterms)


def _check_allowed(potential: Potential, energy: float, lo: float, hi: float, samples: int = 2001) -> None:
    xs = np.linspace(lo, hi, samples)
    gap = energy - potential.value(xs)
    if np.min(gap) <= EPS_GUARD:
        bad = xs[int(np.argmin(gap))]
        raise TurningPointError(f"classical turning point inside [{lo:g}, {hi:g}] near x={bad:g} m")
