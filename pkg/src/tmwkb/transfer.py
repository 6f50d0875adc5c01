"""Step-potential transfer matrices with plane-wave or WKB boundaries.

The domain ``[x0, xN]`` is cut into N equal segments with constant potential
``V_j = V(midpoint)``. Coefficients of ``A_j e^{i k_j x} + B_j e^{-i k_j x}``
are propagated left to right, ``(A_{j+1}, B_{j+1}) = M_j (A_j, B_j)``, and
the full product is ``M = M_N ... M_1 M_0``. With ``A_0 = 1`` and no wave
incident from the right, ``A_{N+1} = det(M) / M22``.

Every matrix carries a log-scale so that evanescent segments and long chains
never overflow: the true matrix is ``exp(scale_log) * entries``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .constants import HBAR, M_E
from .errors import ChainOverflowError, ConfigError, QuadratureError, ResonanceError, TurningPointError
from .exact import TcResult
from .potentials import Potential
from .wkb import WkbPhase, integrate_phase

BoundaryKind = Literal["pw", "wkb1", "wkb3"]
BOUNDARY_KINDS = ("pw", "wkb1", "wkb3")


@dataclass(frozen=True)
class ComplexMatrix2:
    entries: np.ndarray
    scale_log: float = 0.0

    @property
    def m11(self) -> complex:
        return complex(self.entries[0, 0])

    @property
    def m12(self) -> complex:
        return complex(self.entries[0, 1])

    @property
    def m21(self) -> complex:
        return complex(self.entries[1, 0])

    @property
    def m22(self) -> complex:
        return complex(self.entries[1, 1])

    def det_entries(self) -> complex:
        e = self.entries
        return complex(e[0, 0] * e[1, 1] - e[0, 1] * e[1, 0])

    def det(self) -> complex:
        return math.exp(2.0 * self.scale_log) * self.det_entries()

    def log_abs_det(self) -> float:
        return 2.0 * self.scale_log + math.log(abs(self.det_entries()))

    def value(self) -> np.ndarray:
        return math.exp(self.scale_log) * self.entries

    @classmethod
    def identity(cls) -> "ComplexMatrix2":
        return cls(np.eye(2, dtype=complex), 0.0)


@dataclass(frozen=True)
class StepGrid:
    energy: float
    x_edges: np.ndarray
    v_steps: np.ndarray
    k: np.ndarray  # k_1..k_N
    k0: complex
    k_end: complex  # k_{N+1}
    dv_left: float
    dv_right: float

    @property
    def n_steps(self) -> int:
        return len(self.v_steps)

    @property
    def k1(self) -> complex:
        return complex(self.k[0])

    @property
    def kN(self) -> complex:
        return complex(self.k[-1])


@dataclass(frozen=True)
class BoundaryTerms:
    alpha0: complex
    beta0: complex
    gamma0_plus: complex
    gamma0_minus: complex
    SNp: complex
    SNm: complex
    RN: float
    kprime0: float
    kprime_end: float


@dataclass(frozen=True)
class ScatteringAmplitudes:
    A0: complex
    B0: complex
    A_N1: complex
    B_N1: complex


def wavenumbers(energy: float, v, *, hbar: float = HBAR, m: float = M_E) -> np.ndarray:
    """``sqrt(2 m (E - V)) / hbar`` on the branch with ``Im k >= 0``."""
    k = np.sqrt(np.asarray(2.0 * m * (energy - np.asarray(v, dtype=float)), dtype=complex)) / hbar
    return np.where(k.imag < 0, -k, k)


def discretize(potential: Potential, energy: float, n_steps: int) -> StepGrid:
    if n_steps < 1:
        raise ConfigError(f"need at least one segment, got N={n_steps}")
    lo, hi = potential.domain
    x = np.linspace(lo, hi, n_steps + 1)
    v_steps = np.asarray(potential.value(0.5 * (x[:-1] + x[1:])), dtype=float)
    v_lo, v_hi = float(potential.value(lo)), float(potential.value(hi))
    if energy <= v_lo or energy <= v_hi:
        raise TurningPointError(
            f"E={energy:g} J must exceed the edge potentials V(x0)={v_lo:g}, V(xN)={v_hi:g}"
        )
    return StepGrid(
        energy=float(energy),
        x_edges=x,
        v_steps=v_steps,
        k=wavenumbers(energy, v_steps),
        k0=complex(wavenumbers(energy, v_lo)),
        k_end=complex(wavenumbers(energy, v_hi)),
        dv_left=float(potential.deriv(lo, 1)),
        dv_right=float(potential.deriv(hi, 1)),
    )


def _normalise(coef: np.ndarray, expo: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``coef * exp(expo)`` with the largest real exponent of each matrix pulled into a log scale."""
    c = np.max(expo.real, axis=(-2, -1))
    return coef * np.exp(expo - c[..., None, None]), c


def _interfaces(ka, kb, x) -> tuple[np.ndarray, np.ndarray]:
    """Plane-wave interface matrices from wavenumber ``ka`` (left) to ``kb`` (right) at ``x``."""
    ka, kb, x = np.broadcast_arrays(np.asarray(ka, complex), np.asarray(kb, complex), np.asarray(x, float))
    if np.any(kb == 0):
        idx = int(np.nonzero(kb == 0)[0][0]) if kb.ndim else 0
        raise TurningPointError(f"zero wavenumber on the right of interface {idx}: turning point on the grid")
    a = ka / kb
    coef = np.empty(ka.shape + (2, 2), complex)
    coef[..., 0, 0] = coef[..., 1, 1] = 0.5 * (1 + a)
    coef[..., 0, 1] = coef[..., 1, 0] = 0.5 * (1 - a)
    zd = -1j * (kb - ka) * x
    zs = -1j * (kb + ka) * x
    expo = np.empty_like(coef)
    expo[..., 0, 0], expo[..., 1, 1] = zd, -zd
    expo[..., 0, 1], expo[..., 1, 0] = zs, -zs
    return _normalise(coef, expo)


def step_matrices(grid: StepGrid) -> tuple[np.ndarray, np.ndarray]:
    """All interior interface matrices ``M_1..M_{N-1}`` as (entries, scale_logs) arrays."""
    return _interfaces(grid.k[:-1], grid.k[1:], grid.x_edges[1:-1])


def step_matrix(grid: StepGrid, l: int) -> ComplexMatrix2:
    """Interface matrix ``M_l`` between segments l and l+1 at ``x_l`` (1 <= l <= N-1)."""
    if not 1 <= l <= grid.n_steps - 1:
        raise IndexError(f"interface index {l} outside 1..{grid.n_steps - 1}")
    e, c = _interfaces(grid.k[l - 1], grid.k[l], grid.x_edges[l])
    return ComplexMatrix2(e, float(c))


def boundary_terms(grid: StepGrid, *, hbar: float = HBAR, m: float = M_E) -> BoundaryTerms:
    k0, k1, kN, kE = grid.k0, grid.k1, grid.kN, grid.k_end
    kp0 = -m * grid.dv_left / (k0.real * hbar**2)
    kpE = -m * grid.dv_right / (kE.real * hbar**2)
    alpha0 = k0 / k1
    # derivative matching of p^{-1/2} e^{i int k} gives i k0'/(2 k0 k1)
    beta0 = 1j * kp0 / (2.0 * k0 * k1)
    return BoundaryTerms(
        alpha0=alpha0,
        beta0=beta0,
        gamma0_plus=alpha0 + beta0,
        gamma0_minus=alpha0 - beta0,
        SNp=kE + kN,
        SNm=kE - kN,
        RN=kpE / (2.0 * kE.real),
        kprime0=kp0,
        kprime_end=kpE,
    )


def _check_kind(kind: str) -> None:
    if kind not in BOUNDARY_KINDS:
        raise ConfigError(f"unknown boundary kind {kind!r}; expected one of {BOUNDARY_KINDS}")


def boundary_left(grid: StepGrid, kind: BoundaryKind, phase: WkbPhase | None = None) -> ComplexMatrix2:
    """Matrix taking the exterior coefficients ``(A_0, B_0)`` to segment 1 at ``x0``."""
    _check_kind(kind)
    x0 = grid.x_edges[0]
    k1 = grid.k1
    if kind == "pw":
        e, c = _interfaces(grid.k0, k1, x0)
        return ComplexMatrix2(e, float(c))
    ez = np.array([[-1j * k1 * x0] * 2, [1j * k1 * x0] * 2])
    if kind == "wkb1":
        bt = boundary_terms(grid)
        gp, gm = bt.gamma0_plus, bt.gamma0_minus
        coef = np.array([[1 + gp, 1 - gm], [1 - gp, 1 + gm]]) / (2.0 * np.sqrt(HBAR * grid.k0))
        e, c = _normalise(coef, ez)
        return ComplexMatrix2(e, float(c))
    if phase is None:
        raise ConfigError("third-order boundary needs the WKB phase at x0")
    qi, qr = phase.Si1 / (HBAR * k1), phase.Sr1 / (HBAR * k1)
    coef = 0.5 * np.array([[1 + qi, 1 + qr], [1 - qi, 1 - qr]])
    expo = ez + 1j * np.array([[phase.Si, phase.Sr], [phase.Si, phase.Sr]]) / HBAR
    e, c = _normalise(coef, expo)
    return ComplexMatrix2(e, float(c))


def boundary_right(grid: StepGrid, kind: BoundaryKind, phase: WkbPhase | None = None) -> ComplexMatrix2:
    """Matrix taking segment-N coefficients to the exterior ``(A_{N+1}, B_{N+1})`` at ``xN``."""
    _check_kind(kind)
    xN = grid.x_edges[-1]
    kN = grid.kN
    if kind == "pw":
        e, c = _interfaces(kN, grid.k_end, xN)
        return ComplexMatrix2(e, float(c))
    ez = np.array([[1j * kN * xN, -1j * kN * xN]] * 2)
    if kind == "wkb1":
        bt = boundary_terms(grid)
        sp, sm, r = bt.SNp, bt.SNm, bt.RN
        coef = np.array([[1j * sp + r, 1j * sm + r], [1j * sm - r, 1j * sp - r]])
        coef = coef * np.sqrt(HBAR) / (2j * np.sqrt(grid.k_end))
        e, c = _normalise(coef, ez)
        return ComplexMatrix2(e, float(c))
    if phase is None:
        raise ConfigError("third-order boundary needs the WKB phase at xN")
    si1, sr1 = phase.Si1, phase.Sr1
    hk = HBAR * kN
    coef = np.array([[hk - sr1, -(hk + sr1)], [-(hk - si1), hk + si1]]) / (si1 - sr1)
    expo = ez - 1j * np.array([[phase.Si] * 2, [phase.Sr] * 2]) / HBAR
    e, c = _normalise(coef, expo)
    return ComplexMatrix2(e, float(c))


def chain_stack(entries: np.ndarray, scale_logs: np.ndarray) -> tuple[np.ndarray, float]:
    """Ordered product ``E[n-1] ... E[1] E[0]`` by pairwise (tree) reduction.

    Each partial product is renormalised by its largest entry, the factor
    being accumulated in the log scale. Works for real or complex stacks.
    """
    mats = np.asarray(entries)
    logs = np.asarray(scale_logs, dtype=float)
    if mats.ndim != 3 or mats.shape[1:] != (2, 2) or len(mats) == 0:
        raise ValueError("expected a non-empty (n, 2, 2) stack")
    if len(logs) != len(mats):
        raise ValueError("one scale per matrix required")
    _check_finite(mats, logs, 1)
    span = 1
    while len(mats) > 1:
        tail = None
        if len(mats) % 2:
            tail, tail_log = mats[-1:], logs[-1:]
            mats, logs = mats[:-1], logs[:-1]
        with np.errstate(over="ignore", invalid="ignore"):
            prod = mats[1::2] @ mats[0::2]
        plog = logs[0::2] + logs[1::2]
        span *= 2
        _check_finite(prod, plog, span)
        s = np.max(np.abs(prod), axis=(1, 2))
        s = np.where(s > 0, s, 1.0)
        mats = prod / s[:, None, None]
        logs = plog + np.log(s)
        if tail is not None:
            mats = np.concatenate([mats, tail])
            logs = np.concatenate([logs, tail_log])
    return mats[0], float(logs[0])


def _check_finite(mats: np.ndarray, logs: np.ndarray, span: int) -> None:
    bad = ~(np.all(np.isfinite(mats), axis=(1, 2)) & np.isfinite(logs))
    if np.any(bad):
        raise ChainOverflowError("transfer-matrix product overflowed", int(np.argmax(bad)) * span)


def chain_product(matrices: Sequence[ComplexMatrix2]) -> ComplexMatrix2:
    """``M_N ... M_1 M_0`` for matrices given in the order ``M_0 .. M_N``."""
    if len(matrices) < 2:
        raise ValueError("chain needs at least two matrices")
    entries = np.stack([np.asarray(mm.entries, dtype=complex) for mm in matrices])
    logs = np.array([mm.scale_log for mm in matrices], dtype=float)
    e, c = chain_stack(entries, logs)
    return ComplexMatrix2(e, c)


def _assemble(left: ComplexMatrix2, interior: tuple[np.ndarray, np.ndarray], right: ComplexMatrix2) -> ComplexMatrix2:
    e_int, c_int = interior
    entries = np.concatenate([left.entries[None], e_int, right.entries[None]])
    logs = np.concatenate([[left.scale_log], c_int, [right.scale_log]])
    e, c = chain_stack(entries, logs)
    return ComplexMatrix2(e, c)


def amplitudes(M: ComplexMatrix2) -> ScatteringAmplitudes:
    """Exterior amplitudes for ``A_0 = 1`` and nothing incident from the right."""
    e22 = M.m22
    if e22 == 0:
        raise ResonanceError("M22 vanished; transmission amplitude undefined")
    return ScatteringAmplitudes(
        A0=1.0,
        B0=-M.m21 / e22,
        A_N1=math.exp(M.scale_log) * M.det_entries() / e22,
        B_N1=0.0,
    )


def _log_abs_transmitted(M: ComplexMatrix2) -> float:
    e22 = M.m22
    if e22 == 0:
        raise ResonanceError("M22 vanished; transmission amplitude undefined")
    return M.scale_log + math.log(abs(M.det_entries())) - math.log(abs(e22))


def tc_first_order(M: ComplexMatrix2, grid: StepGrid, kind: BoundaryKind) -> TcResult:
    """``|A_{N+1}|^2`` with the plane-wave flux ratio ``k_{N+1}/k_0`` for PW boundaries.

    The ``1/sqrt(hbar k)`` normalisation of the WKB boundary waves already
    makes the flux proportional to ``|A|^2``.
    """
    if kind not in ("pw", "wkb1"):
        raise ConfigError(f"tc_first_order handles pw/wkb1, got {kind!r}")
    log_t = 2.0 * _log_abs_transmitted(M)
    if kind == "pw":
        log_t += math.log(grid.k_end.real / grid.k0.real)
    return TcResult(grid.energy, math.exp(log_t), f"tm-{kind}", grid.n_steps)


def tc_third_order(M: ComplexMatrix2, phase0: WkbPhase, phaseN: WkbPhase, *, energy: float = float("nan"), n_steps: int = 0) -> TcResult:
    """Flux ratio of the third-order boundary waves::

        TC = |A_{N+1}|^2 Re Si'(xN) / Re Si'(x0) exp(2/hbar (Im Si(x0) - Im Si(xN)))
    """
    ratio = phaseN.Si1.real / phase0.Si1.real
    if not ratio > 0:
        raise TurningPointError("non-positive boundary momentum in the third-order flux")
    log_t = (
        2.0 * _log_abs_transmitted(M)
        + math.log(ratio)
        + 2.0 / HBAR * (phase0.Si.imag - phaseN.Si.imag)
    )
    return TcResult(energy, math.exp(log_t), "tm-wkb3", n_steps)


def boundary_phases(
    potential: Potential, energy: float, *, reference: Literal["auto", "left", "local"] = "auto"
) -> tuple[WkbPhase, WkbPhase]:
    """WKB phases at both domain edges, with S_n(x0) = 0.

    ``left`` integrates S_n' from x0 to xN, which needs E > V across the
    whole domain. ``local`` restarts the integration at xN instead; that
    only shifts the right-hand waves by a constant factor, which cancels in
    the transmission. ``auto`` tries ``left`` and falls back to ``local``.
    """
    x0, xN = potential.domain
    phase0 = integrate_phase(potential, energy, x0, x0)
    if reference == "local":
        return phase0, integrate_phase(potential, energy, xN, xN)
    try:
        return phase0, integrate_phase(potential, energy, x0, xN)
    except (TurningPointError, QuadratureError):
        if reference == "left":
            raise
        return phase0, integrate_phase(potential, energy, xN, xN)


def compute_tc_tm(
    potential: Potential,
    energy: float,
    n_steps: int,
    kind: BoundaryKind,
    *,
    first_order_phase: bool = False,
    phase_reference: Literal["auto", "left", "local"] = "auto",
) -> TcResult:
    """Transmission coefficient by the step transfer-matrix method.

    ``first_order_phase`` drops S2 and S3 from the third-order boundary,
    which must reproduce the ``wkb1`` result.
    """
    _check_kind(kind)
    grid = discretize(potential, energy, n_steps)
    interior = step_matrices(grid)
    if kind == "wkb3":
        phase0, phaseN = boundary_phases(potential, energy, reference=phase_reference)
        if first_order_phase:
            phase0, phaseN = phase0.first_order(), phaseN.first_order()
        M = _assemble(boundary_left(grid, kind, phase0), interior, boundary_right(grid, kind, phaseN))
        return tc_third_order(M, phase0, phaseN, energy=grid.energy, n_steps=n_steps)
    M = _assemble(boundary_left(grid, kind), interior, boundary_right(grid, kind))
    return tc_first_order(M, grid, kind)
