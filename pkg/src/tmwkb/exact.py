"""Reference transmission coefficients.

Closed forms for the inverted parabola (Kemble) and the sech^2 barrier
(Eckart / modified Poschl-Teller), plus the barrier-penetration WKB formula
``T = exp(-theta) / (1 + exp(-theta)/4)**2`` with
``theta = (2/hbar) * integral_{x1}^{x2} sqrt(2 m (V - E)) dx``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

from .constants import HBAR, M_E
from .errors import ConfigError, NoTurningPointsError, QuadratureError, UnsupportedReferenceError
from .potentials import ParabolicPotential, Potential, Sech2Potential

SCAN_POINTS = 10_000


@dataclass(frozen=True)
class TcResult:
    """One transmission-coefficient evaluation.

    ``n_steps`` is 0 for analytic methods. Failed evaluations carry
    ``tc = nan`` and a non-empty ``error``.
    """

    energy: float
    tc: float
    method: str
    n_steps: int = 0
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error


@dataclass(frozen=True)
class TurningPoints:
    x1: float
    x2: float


def quad(f, a: float, b: float, *, epsabs: float = 0.0, epsrel: float = 1e-10, limit: int = 200) -> float:
    """Adaptive Gauss-Kronrod quadrature that raises instead of warning."""
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, _err = integrate.quad(f, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(str(exc).strip().splitlines()[0]) from None
    if not math.isfinite(val):
        raise QuadratureError("non-finite quadrature result")
    return val


def exact_tc_parabolic(energy, alpha: float, *, hbar: float = HBAR, m: float = M_E):
    """Kemble transmission ``1 / (1 + exp(-2 pi E / (hbar omega)))``, ``omega = sqrt(2 alpha / m)``."""
    if not alpha > 0:
        raise ConfigError(f"alpha must be positive, got {alpha}")
    hw = hbar * math.sqrt(2.0 * alpha / m)
    return special.expit(2.0 * math.pi * np.asarray(energy, dtype=float) / hw)[()]


def sech2_strength(v0: float, a: float, *, hbar: float = HBAR, m: float = M_E) -> float:
    """Dimensionless ``8 m V0 a^2 / hbar^2``."""
    return 8.0 * m * v0 * a * a / hbar**2


def exact_tc_sech2(energy: float, v0: float, a: float, *, hbar: float = HBAR, m: float = M_E) -> float:
    """Transmission through ``V0 (sech^2(x/a) - 1)`` at energy E (zero at the barrier top).

    ``T = sinh^2(pi k a) / (sinh^2(pi k a) + cosh^2(pi/2 sqrt(8 m V0 a^2/hbar^2 - 1)))``
    with ``k = sqrt(2 m (E + V0)) / hbar``. Evaluated through logarithms so
    thick barriers do not overflow.
    """
    if not (v0 > 0 and a > 0):
        raise ConfigError("V0 and a must be positive")
    g = sech2_strength(v0, a, hbar=hbar, m=m)
    if g <= 1.0:
        raise ConfigError(f"8 m V0 a^2 / hbar^2 = {g:.4g} must exceed 1")
    if energy <= -v0:
        raise ConfigError(f"energy {energy:g} J has no incident channel (asymptote at {-v0:g} J)")
    k = math.sqrt(2.0 * m * (energy + v0)) / hbar
    s = math.pi * k * a
    c = 0.5 * math.pi * math.sqrt(g - 1.0)
    log_sinh = s + math.log(-math.expm1(-2.0 * s)) - math.log(2.0)
    log_cosh = c + math.log1p(math.exp(-2.0 * c)) - math.log(2.0)
    # T = 1 / (1 + (cosh c / sinh s)^2)
    return float(special.expit(-2.0 * (log_cosh - log_sinh)))


def exact_tc(potential: Potential, energy: float) -> float:
    """Dispatch to the closed form that matches ``potential``."""
    if isinstance(potential, ParabolicPotential):
        return float(exact_tc_parabolic(energy, potential.alpha))
    if isinstance(potential, Sech2Potential):
        return exact_tc_sech2(energy, potential.v0, potential.x0)
    raise UnsupportedReferenceError(
        f"no exact transmission for potential '{potential.name}'; supported: parabolic, sech2"
    )


def has_exact(potential: Potential) -> bool:
    return isinstance(potential, (ParabolicPotential, Sech2Potential))


def _barrier_top(potential: Potential) -> tuple[float, float]:
    lo, hi = potential.domain
    xs = np.linspace(lo, hi, SCAN_POINTS)
    vs = potential.value(xs)
    i = int(np.argmax(vs))
    a, b = xs[max(i - 1, 0)], xs[min(i + 1, len(xs) - 1)]
    res = optimize.minimize_scalar(
        lambda x: -float(potential.value(x)),
        bounds=(a, b),
        method="bounded",
        options={"xatol": 1e-14 * (hi - lo)},
    )
    if -res.fun >= vs[i]:
        return float(res.x), float(-res.fun)
    return float(xs[i]), float(vs[i])


def _top_tolerance(potential: Potential) -> float:
    lo, hi = potential.domain
    vs = potential.value(np.linspace(lo, hi, 65))
    return 1e-12 * max(float(np.max(np.abs(vs))), np.finfo(float).tiny)


def find_turning_points(potential: Potential, energy: float) -> TurningPoints:
    """Outermost classical turning points ``x1 < x2`` with ``V(x) = E``.

    A sign scan of ``V - E`` on a uniform grid brackets the roots, which are
    then polished by Brent's method.
    """
    lo, hi = potential.domain
    xs = np.linspace(lo, hi, SCAN_POINTS)
    g = potential.value(xs) - energy
    if g[0] >= 0 or g[-1] >= 0:
        raise ConfigError("energy must exceed the potential at both domain edges")
    above = np.nonzero(g > 0)[0]
    if above.size == 0:
        xt, vt = _barrier_top(potential)
        if vt <= energy:
            raise NoTurningPointsError(f"energy {energy:g} J is not below the barrier top {vt:g} J")
        # barrier peak narrower than the scan spacing
        above = np.array([int(np.searchsorted(xs, xt))])
        xs = np.insert(xs, above[0], xt)
        g = np.insert(g, above[0], vt - energy)

    def f(x):
        return float(potential.value(x)) - energy

    i1, i2 = above[0], above[-1]
    scale = hi - lo
    x1 = optimize.brentq(f, xs[i1 - 1], xs[i1], xtol=1e-15 * scale, rtol=4 * np.finfo(float).eps)
    x2 = optimize.brentq(f, xs[i2], xs[i2 + 1], xtol=1e-15 * scale, rtol=4 * np.finfo(float).eps)
    return TurningPoints(x1, x2)


def barrier_action(potential: Potential, energy: float, *, hbar: float = HBAR, m: float = M_E) -> float:
    """``theta = (2/hbar) * integral sqrt(2 m (V - E)) dx`` between the turning points.

    Returns 0 when E sits exactly on the barrier top.
    """
    _xt, vt = _barrier_top(potential)
    if abs(vt - energy) <= _top_tolerance(potential):
        return 0.0
    tp = find_turning_points(potential, energy)
    w = tp.x2 - tp.x1

    # x = x1 + w sin^2(u) removes the square-root zeros at both ends
    def integrand(u):
        su, cu = math.sin(u), math.cos(u)
        x = tp.x1 + w * su * su
        d = float(potential.value(x)) - energy
        return math.sqrt(2.0 * m * max(d, 0.0)) * 2.0 * w * su * cu

    return 2.0 / hbar * quad(integrand, 0.0, 0.5 * math.pi, epsabs=1e-10 * hbar, epsrel=1e-10)


def wkb_tc(potential: Potential, energy: float) -> float:
    """WKB tunneling probability ``exp(-theta) / (1 + exp(-theta)/4)**2``."""
    q = math.exp(-barrier_action(potential, energy))
    return q / (1.0 + 0.25 * q) ** 2
