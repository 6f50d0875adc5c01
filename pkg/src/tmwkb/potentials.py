"""Potential-energy landscapes on a finite computational domain.

All potentials are immutable, accept scalars or numpy arrays, and provide
derivatives up to third order (needed by the third-order WKB boundary).
Units are SI throughout: metres and joules.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ConfigError


def _check_domain(domain) -> tuple[float, float]:
    lo, hi = (float(v) for v in domain)
    if not (np.isfinite(lo) and np.isfinite(hi)) or hi <= lo:
        raise ConfigError(f"degenerate domain [{lo}, {hi}]")
    return lo, hi


@dataclass(frozen=True)
class Potential:
    """Base class. Subclasses implement ``_eval(x, order)`` for order 0..3."""

    name: str
    domain: tuple[float, float]

    @property
    def params(self) -> dict[str, float]:
        return {}

    @property
    def width(self) -> float:
        return self.domain[1] - self.domain[0]

    def value(self, x):
        return self._eval(np.asarray(x, dtype=float), 0)

    def deriv(self, x, order: int = 1):
        if order not in (1, 2, 3):
            raise ValueError(f"derivative order must be 1, 2 or 3, got {order}")
        return self._eval(np.asarray(x, dtype=float), order)

    def _eval(self, x, order):  # pragma: no cover - abstract
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantPotential(Potential):
    level: float = 0.0

    @property
    def params(self):
        return {"level": self.level}

    def _eval(self, x, order):
        if order == 0:
            return np.full_like(x, self.level, dtype=float)[()]
        return np.zeros_like(x, dtype=float)[()]


@dataclass(frozen=True)
class ParabolicPotential(Potential):
    """Inverted parabola ``V(x) = -alpha x**2`` with the barrier top at x = 0."""

    alpha: float = 1.0

    @property
    def params(self):
        return {"alpha": self.alpha}

    def _eval(self, x, order):
        a = self.alpha
        if order == 0:
            return -a * x * x
        if order == 1:
            return -2.0 * a * x
        if order == 2:
            return np.full_like(x, -2.0 * a)[()]
        return np.zeros_like(x)[()]


@dataclass(frozen=True)
class Sech2Potential(Potential):
    """``V(x) = V0 (sech^2(x/x0) - 1)``: zero at the top, ``-V0`` asymptotically.

    All three derivatives are analytic. With s = sech^2(u), t = tanh(u), u = x/x0::

        ds/du    = -2 s t
        d2s/du2  = 4 s t^2 - 2 s^2
        d3s/du3  = -8 s t^3 + 16 s^2 t
    """

    v0: float = 1e-18
    x0: float = 1e-9

    @property
    def params(self):
        return {"v0": self.v0, "x0": self.x0}

    def _eval(self, x, order):
        u = x / self.x0
        s = 1.0 / np.cosh(u) ** 2
        if order == 0:
            # -V0 tanh^2 is the same function without the cancellation in s - 1
            return -self.v0 * np.tanh(u) ** 2
        t = np.tanh(u)
        if order == 1:
            f = -2.0 * s * t
        elif order == 2:
            f = 4.0 * s * t * t - 2.0 * s * s
        else:
            f = -8.0 * s * t**3 + 16.0 * s * s * t
        return self.v0 * f / self.x0**order


@dataclass(frozen=True)
class TabulatedPotential(Potential):
    """Cubic-spline interpolant through user samples.

    The third derivative of a cubic spline is piecewise constant, so the
    third-order WKB boundary terms are less accurate for tabulated input.
    """

    x: tuple[float, ...] = ()
    v: tuple[float, ...] = ()
    _spline: CubicSpline = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_spline", CubicSpline(np.asarray(self.x), np.asarray(self.v)))

    def _eval(self, x, order):
        out = self._spline(x, order)
        return out[()] if isinstance(out, np.ndarray) else out


def make_constant(level: float, domain) -> ConstantPotential:
    lo, hi = _check_domain(domain)
    return ConstantPotential(name="constant", domain=(lo, hi), level=float(level))


def make_parabolic(alpha: float, domain) -> ParabolicPotential:
    if not alpha > 0:
        raise ConfigError(f"parabola coefficient must be positive, got {alpha}")
    lo, hi = _check_domain(domain)
    return ParabolicPotential(name="parabolic", domain=(lo, hi), alpha=float(alpha))


def make_sech2(v0: float, x0: float, domain) -> Sech2Potential:
    if not (v0 > 0 and x0 > 0):
        raise ConfigError(f"sech2 parameters must be positive, got V0={v0}, x0={x0}")
    lo, hi = _check_domain(domain)
    return Sech2Potential(name="sech2", domain=(lo, hi), v0=float(v0), x0=float(x0))


def make_tabulated(samples: Sequence[tuple[float, float]]) -> TabulatedPotential:
    """Build a spline potential from ``(x, V)`` pairs with strictly increasing x."""
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ConfigError("samples must be a sequence of (x, V) pairs")
    if len(arr) < 4:
        raise ConfigError(f"need at least 4 samples, got {len(arr)}")
    if not np.all(np.isfinite(arr)):
        raise ConfigError("samples contain non-finite values")
    if np.any(np.diff(arr[:, 0]) <= 0):
        raise ConfigError("sample abscissae must be strictly increasing")
    return TabulatedPotential(
        name="table",
        domain=(float(arr[0, 0]), float(arr[-1, 0])),
        x=tuple(arr[:, 0]),
        v=tuple(arr[:, 1]),
    )


def load_table(path: str | Path) -> TabulatedPotential:
    """Read a two-column ``x_m V_J`` file (whitespace or comma separated, ``#`` comments)."""
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].replace(",", " ").strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ConfigError(f"{path}:{lineno}: expected two columns, got {len(parts)}")
        try:
            rows.append((float(parts[0]), float(parts[1])))
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from None
    return make_tabulated(rows)
