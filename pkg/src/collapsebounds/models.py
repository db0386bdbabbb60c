"""Closed-form heating laws and their inversion into lower length bounds.

Both laws give a specific power per unit mass that falls off with the cube of
the model length (R0 for Diósi-Penrose, ``a`` for classical-channel gravity)::

    DP:  P(R0) = G hbar / (4 sqrt(pi) R0^3)
    CCG: P(a)  = G hbar / a^3
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from collapsebounds.errors import DomainError, InputError, ModelMismatchError
from collapsebounds.quantities import (
    AREA,
    CODATA_2018,
    LENGTH,
    MASS,
    POWER,
    SPECIFIC_POWER,
    PhysicalConstants,
    Quantity,
    QuantityLike,
    as_quantity,
)

FOUR_SQRT_PI = 4.0 * math.sqrt(math.pi)


class HeatingKind(enum.Enum):
    DP = "dp"
    CLASSICAL_CHANNEL = "ccg"

    @classmethod
    def parse(cls, text: str) -> HeatingKind:
        key = text.strip().lower()
        aliases = {"dp": cls.DP, "ccg": cls.CLASSICAL_CHANNEL, "classical-channel": cls.CLASSICAL_CHANNEL}
        if key not in aliases:
            raise InputError(f"unknown heating model {text!r}; use 'dp' or 'ccg'")
        return aliases[key]

    @property
    def length_symbol(self) -> str:
        return "R0" if self is HeatingKind.DP else "a"


@dataclass(frozen=True)
class HeatingModel:
    kind: HeatingKind = HeatingKind.DP
    constants: PhysicalConstants = CODATA_2018

    @classmethod
    def dp(cls, constants: PhysicalConstants = CODATA_2018) -> HeatingModel:
        return cls(HeatingKind.DP, constants)

    @classmethod
    def ccg(cls, constants: PhysicalConstants = CODATA_2018) -> HeatingModel:
        return cls(HeatingKind.CLASSICAL_CHANNEL, constants)

    @property
    def coefficient(self) -> Quantity:
        """Specific power times length cubed, in W·m³/kg."""
        gh = self.constants.G * self.constants.hbar
        if self.kind is HeatingKind.DP:
            return gh / FOUR_SQRT_PI
        return gh


@dataclass(frozen=True)
class LengthBound:
    """Lower bound on a model length. Only bounds of the same model compare."""

    value: Quantity
    model: HeatingKind
    source: str = ""
    kind: str = field(default="lower")

    def __post_init__(self):
        self.value.require(LENGTH, "length bound")
        if not self.value.value > 0:
            raise DomainError("length bound must be positive")
        if self.kind != "lower":
            raise DomainError("only lower bounds are produced by heating limits")

    @property
    def meters(self) -> float:
        return self.value.value

    def _check(self, other: LengthBound) -> None:
        if not isinstance(other, LengthBound):
            return NotImplemented
        if other.model is not self.model:
            raise ModelMismatchError(
                f"cannot compare a {self.model.value} bound with a {other.model.value} bound"
            )

    def __lt__(self, other):
        self._check(other)
        return self.meters < other.meters

    def __le__(self, other):
        self._check(other)
        return self.meters <= other.meters

    def __gt__(self, other):
        self._check(other)
        return self.meters > other.meters

    def __ge__(self, other):
        self._check(other)
        return self.meters >= other.meters


def _positive_length(length: QuantityLike) -> Quantity:
    L = as_quantity(length, LENGTH, "length")
    if not L.value > 0:
        raise DomainError(f"length must be positive, got {L}")
    return L


def specific_power(model: HeatingModel, length: QuantityLike) -> Quantity:
    L = _positive_length(length)
    return (model.coefficient / L**3).require(SPECIFIC_POWER)


def total_power(model: HeatingModel, length: QuantityLike, mass: QuantityLike) -> Quantity:
    m = as_quantity(mass, MASS, "mass")
    if m.value < 0:
        raise DomainError(f"mass must be non-negative, got {m}")
    return (m * specific_power(model, length)).require(POWER)


def invert_bound(model: HeatingModel, power_limit: QuantityLike, source: str = "") -> LengthBound:
    """Length at which the model's specific power equals ``power_limit``.

    Lengths below it would heat faster than the limit allows, so the result is
    a lower bound.
    """
    P = as_quantity(power_limit, SPECIFIC_POWER, "power limit")
    if not P.value > 0:
        raise DomainError(f"power limit must be positive, got {P}")
    length = float(np.cbrt(model.coefficient.value / P.value))
    return LengthBound(Quantity(length, LENGTH), model.kind, source)


def urms_from_debye_waller(B: QuantityLike) -> Quantity:
    """RMS nuclear displacement sqrt(B / 8 pi^2) from a Debye-Waller factor."""
    b = as_quantity(B, AREA, "Debye-Waller factor")
    if b.value < 0:
        raise DomainError(f"Debye-Waller factor must be non-negative, got {b}")
    return Quantity(math.sqrt(b.value / (8.0 * math.pi**2)), LENGTH)
