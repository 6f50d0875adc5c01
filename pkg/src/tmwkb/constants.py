"""Physical constants (SI). Frozen so that reference numbers stay reproducible."""

from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.0545718e-34  # J s
    m: float = 9.10938356e-31  # kg, electron
    e: float = 1.602176634e-19  # C


CONSTANTS = PhysicalConstants()

HBAR = CONSTANTS.hbar
M_E = CONSTANTS.m
Q_E = CONSTANTS.e
