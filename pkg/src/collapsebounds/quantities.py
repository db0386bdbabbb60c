"""Dimensional quantities, physical constants and materials.

Values are stored in SI base units. Unit strings follow a closed grammar::

    quantity := number ws? unit
    unit     := term (('/' | '*') term)*
    term     := symbol ('^' int)?

with ``symbol`` drawn from :data:`UNITS`. Everything after the first ``/`` is
in the denominator, so ``W/kg/s`` means W·kg⁻¹·s⁻¹.
"""

from __future__ import annotations

import dataclasses
import math
import re
from dataclasses import dataclass
from typing import Optional, Union

from collapsebounds.errors import DimensionError, DomainError, InputError, ParseError

BASE_NAMES = ("mass", "length", "time", "temperature", "amount")
_BASE_SYMBOLS = ("kg", "m", "s", "K", "mol")


@dataclass(frozen=True)
class Dimension:
    """Integer exponents over the SI base dimensions in use."""

    mass: int = 0
    length: int = 0
    time: int = 0
    temperature: int = 0
    amount: int = 0

    def exponents(self) -> tuple[int, ...]:
        return dataclasses.astuple(self)

    def __mul__(self, other: Dimension) -> Dimension:
        return Dimension(*(a + b for a, b in zip(self.exponents(), other.exponents())))

    def __truediv__(self, other: Dimension) -> Dimension:
        return Dimension(*(a - b for a, b in zip(self.exponents(), other.exponents())))

    def __pow__(self, n: int) -> Dimension:
        if not isinstance(n, int):
            raise TypeError("dimension exponents must stay integral")
        return Dimension(*(a * n for a in self.exponents()))

    @property
    def is_dimensionless(self) -> bool:
        return not any(self.exponents())

    def si_unit(self) -> str:
        num, den = [], []
        for sym, e in zip(_BASE_SYMBOLS, self.exponents()):
            if e == 0:
                continue
            term = sym if abs(e) == 1 else f"{sym}^{abs(e)}"
            (num if e > 0 else den).append(term)
        text = "*".join(num) if num else "1"
        for term in den:
            text += "/" + term
        return text

    def __str__(self) -> str:
        return self.si_unit()


DIMENSIONLESS = Dimension()
MASS = Dimension(mass=1)
LENGTH = Dimension(length=1)
TIME = Dimension(time=1)
TEMPERATURE = Dimension(temperature=1)
AMOUNT = Dimension(amount=1)
AREA = LENGTH**2
ENERGY = MASS * LENGTH**2 / TIME**2
POWER = ENERGY / TIME
SPECIFIC_POWER = POWER / MASS
MOLAR_POWER = POWER / AMOUNT
MOLAR_MASS = MASS / AMOUNT

# symbol -> (SI scale, dimension)
UNITS: dict[str, tuple[float, Dimension]] = {
    "1": (1.0, DIMENSIONLESS),
    "W": (1.0, POWER),
    "nW": (1e-9, POWER),
    "pW": (1e-12, POWER),
    "fW": (1e-15, POWER),
    "J": (1.0, ENERGY),
    "kg": (1.0, MASS),
    "g": (1e-3, MASS),
    "m": (1.0, LENGTH),
    "nm": (1e-9, LENGTH),
    "pm": (1e-12, LENGTH),
    "s": (1.0, TIME),
    "K": (1.0, TEMPERATURE),
    "mK": (1e-3, TEMPERATURE),
    "mol": (1.0, AMOUNT),
}

_NUMBER = re.compile(r"\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*")
_TERM = re.compile(r"^([A-Za-z1]+)(?:\^([+-]?\d+))?$")


def parse_unit(text: str) -> tuple[float, Dimension]:
    """Resolve a unit expression to its SI scale factor and dimension."""
    text = text.strip()
    if not text:
        raise ParseError("empty unit", token=text)
    scale, dim = 1.0, DIMENSIONLESS
    parts = re.split(r"([*/])", text)
    denominator = False
    for i, part in enumerate(parts):
        if i % 2 == 1:
            if part == "/":
                denominator = True
            continue
        part = part.strip()
        m = _TERM.match(part)
        if not m or m.group(1) not in UNITS:
            raise ParseError(f"unknown unit token {part!r}", token=part)
        s, d = UNITS[m.group(1)]
        power = int(m.group(2)) if m.group(2) else 1
        if denominator:
            power = -power
        scale *= s**power
        dim = dim * d**power
    return scale, dim


@dataclass(frozen=True)
class Quantity:
    value: float
    dim: Dimension = DIMENSIONLESS

    def __post_init__(self):
        v = float(self.value)
        if not math.isfinite(v):
            raise DomainError(f"quantity value must be finite, got {self.value!r}")
        object.__setattr__(self, "value", v)

    @classmethod
    def of(cls, value: float, unit: str) -> Quantity:
        scale, dim = parse_unit(unit)
        return cls(value * scale, dim)

    def to(self, unit: str) -> float:
        """Numeric value expressed in ``unit``."""
        scale, dim = parse_unit(unit)
        self._require(dim, f"convert to {unit!r}")
        return self.value / scale

    def require(self, dim: Dimension, what: str = "quantity") -> Quantity:
        self._require(dim, what)
        return self

    def _require(self, dim: Dimension, what: str) -> None:
        if self.dim != dim:
            raise DimensionError(f"{what}: expected dimension {dim}, got {self.dim}")

    def _same(self, other, op: str) -> Quantity:
        if not isinstance(other, Quantity):
            if self.dim.is_dimensionless:
                return Quantity(other)
            raise DimensionError(f"cannot {op} a bare number and a {self.dim} quantity")
        if other.dim != self.dim:
            raise DimensionError(f"cannot {op} {self.dim} and {other.dim}")
        return other

    def __add__(self, other):
        other = self._same(other, "add")
        return Quantity(self.value + other.value, self.dim)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._same(other, "subtract")
        return Quantity(self.value - other.value, self.dim)

    def __rsub__(self, other):
        other = self._same(other, "subtract")
        return Quantity(other.value - self.value, self.dim)

    def __neg__(self):
        return Quantity(-self.value, self.dim)

    def __abs__(self):
        return Quantity(abs(self.value), self.dim)

    def __mul__(self, other):
        if isinstance(other, Quantity):
            return Quantity(self.value * other.value, self.dim * other.dim)
        return Quantity(self.value * other, self.dim)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Quantity):
            return Quantity(self.value / other.value, self.dim / other.dim)
        return Quantity(self.value / other, self.dim)

    def __rtruediv__(self, other):
        return Quantity(other / self.value, DIMENSIONLESS / self.dim)

    def __pow__(self, n: int):
        return Quantity(self.value**n, self.dim**n)

    def __lt__(self, other):
        return self.value < self._same(other, "compare").value

    def __le__(self, other):
        return self.value <= self._same(other, "compare").value

    def __gt__(self, other):
        return self.value > self._same(other, "compare").value

    def __ge__(self, other):
        return self.value >= self._same(other, "compare").value

    def __float__(self):
        if not self.dim.is_dimensionless:
            raise DimensionError(f"{self.dim} quantity is not a plain number")
        return self.value

    def __str__(self) -> str:
        # repr() of a float is the shortest string that round-trips exactly
        return f"{self.value!r} {self.dim.si_unit()}"


def parse_quantity(text: str) -> Quantity:
    """Parse ``"<number> <unit>"`` into an SI-normalised :class:`Quantity`.

    >>> parse_quantity("10 pW/kg").value
    1e-11
    """
    if text is None or not str(text).strip():
        raise ParseError("empty quantity string", token="")
    text = str(text)
    m = _NUMBER.match(text)
    if not m:
        token = text.strip().split()[0]
        raise ParseError(f"malformed number {token!r}", token=token)
    number = float(m.group(1))
    unit = text[m.end():]
    if not unit.strip():
        raise ParseError(f"missing unit in {text.strip()!r}", token=text.strip())
    scale, dim = parse_unit(unit)
    return Quantity(number * scale, dim)


def format_quantity(q: Quantity, target_unit: str, digits: int = 4) -> str:
    """Render ``q`` in ``target_unit`` with ``digits`` significant figures.

    Trailing zeros are kept (``10.00 pW/kg``); an exact zero renders as ``0``.
    The output always re-parses with :func:`parse_quantity`.
    """
    if digits < 1:
        raise InputError("digits must be >= 1")
    v = q.to(target_unit)
    unit = target_unit.strip()
    if v == 0:
        return f"0 {unit}"
    return f"{v:#.{digits}g} {unit}"


_DISPLAY_UNITS = {
    LENGTH: ("pm", "nm", "m"),
    POWER: ("fW", "pW", "nW", "W"),
    SPECIFIC_POWER: ("pW/kg", "nW/kg", "W/kg"),
    MOLAR_POWER: ("pW/mol", "W/mol"),
    AREA: ("m^2",),
    MASS: ("g", "kg"),
}


def display_unit(q: Quantity) -> str:
    """Pick the whitelisted unit putting ``|q|`` in [1, 1000).

    Values below that window use the smallest unit, values above it the
    largest, and an exact zero the SI unit.
    """
    options = _DISPLAY_UNITS.get(q.dim)
    if options is None or q.value == 0:
        return options[-1] if options else q.dim.si_unit()
    if abs(q.to(options[0])) < 1:
        return options[0]
    for unit in options:
        if abs(q.to(unit)) < 1000:
            return unit
    return options[-1]


def pretty(q: Quantity, digits: int = 4) -> str:
    return format_quantity(q, display_unit(q), digits)


@dataclass(frozen=True)
class PhysicalConstants:
    """Gravitational constant and reduced Planck constant.

    Use :data:`CODATA_2018` unless running a sensitivity study, in which case
    build an alternative set with :meth:`override`.
    """

    G: Quantity
    hbar: Quantity

    def __post_init__(self):
        self.G.require(LENGTH**3 / MASS / TIME**2, "G")
        self.hbar.require(ENERGY * TIME, "hbar")
        if self.G.value <= 0 or self.hbar.value <= 0:
            raise DomainError("constants must be positive")

    def override(self, G: Optional[float] = None, hbar: Optional[float] = None) -> PhysicalConstants:
        """Copy with G and/or hbar replaced (SI values)."""
        return PhysicalConstants(
            G=self.G if G is None else Quantity(G, self.G.dim),
            hbar=self.hbar if hbar is None else Quantity(hbar, self.hbar.dim),
        )


CODATA_2018 = PhysicalConstants(
    G=Quantity(6.67430e-11, LENGTH**3 / MASS / TIME**2),
    hbar=Quantity(1.054571817e-34, ENERGY * TIME),
)


@dataclass(frozen=True)
class Material:
    name: str
    molar_mass: Quantity
    debye_waller_B: Optional[Quantity] = None

    def __post_init__(self):
        self.molar_mass.require(MOLAR_MASS, "molar_mass")
        if self.molar_mass.value <= 0:
            raise DomainError(f"{self.name}: molar mass must be positive")
        if self.debye_waller_B is not None:
            self.debye_waller_B.require(AREA, "debye_waller_B")
            if self.debye_waller_B.value < 0:
                raise DomainError(f"{self.name}: Debye-Waller factor must be >= 0")

    def moles(self, mass: Quantity) -> Quantity:
        return mass.require(MASS, "mass") / self.molar_mass


COPPER = Material(
    name="copper",
    molar_mass=Quantity(0.063546, MOLAR_MASS),
    debye_waller_B=Quantity(1.46e-21, AREA),  # low temperature
)

MATERIALS: dict[str, Material] = {COPPER.name: COPPER}


def get_material(name: str) -> Material:
    try:
        return MATERIALS[name.strip().lower()]
    except KeyError:
        raise InputError(f"unknown material {name!r}; known: {', '.join(sorted(MATERIALS))}") from None


def molar_to_specific(p: Quantity, material: Material) -> Quantity:
    """Convert a power per mole of ``material`` into a power per kilogram."""
    p.require(MOLAR_POWER, "molar power")
    return (p / material.molar_mass).require(SPECIFIC_POWER)


QuantityLike = Union[Quantity, str]


def as_quantity(x: QuantityLike, dim: Optional[Dimension] = None, what: str = "quantity") -> Quantity:
    q = parse_quantity(x) if isinstance(x, str) else x
    if dim is not None:
        q.require(dim, what)
    return q
