import math

import pytest
from hypothesis import given
from hypothesis import strategies as st
from pytest import approx

from collapsebounds.errors import DimensionError, DomainError, InputError, ParseError
from collapsebounds.quantities import (
    AREA,
    CODATA_2018,
    COPPER,
    LENGTH,
    MASS,
    MOLAR_POWER,
    SPECIFIC_POWER,
    UNITS,
    Dimension,
    Material,
    Quantity,
    display_unit,
    format_quantity,
    get_material,
    molar_to_specific,
    parse_quantity,
)


def test_parse_pico():
    q = parse_quantity("10 pW/kg")
    assert q.dim == SPECIFIC_POWER
    assert q.value == approx(1.0e-11, rel=1e-15)


def test_parse_neutron_star_limit():
    q = parse_quantity("100 nW/kg")
    assert q.dim == SPECIFIC_POWER
    assert q.value == approx(1.0e-7, rel=1e-15)


def test_parse_debye_waller_copper():
    q = parse_quantity("0.146e-20 m^2")
    assert q.dim == AREA
    assert q.value == approx(1.46e-21, rel=1e-15)


@pytest.mark.parametrize(
    "text, value, dim",
    [
        ("1pm", 1e-12, LENGTH),
        ("17 kg", 17.0, MASS),
        ("500 g", 0.5, MASS),
        ("1 pW/mol", 1e-12, MOLAR_POWER),
        ("6.6743e-11 m^3/kg/s^2", 6.6743e-11, LENGTH**3 / MASS / Dimension(time=2)),
        ("2 s^-1", 2.0, Dimension(time=-1)),
        ("3 kg*m^2", 3.0, MASS * LENGTH**2),
        ("1 mK", 1e-3, Dimension(temperature=1)),
    ],
)
def test_parse_table(text, value, dim):
    q = parse_quantity(text)
    assert q.value == approx(value, rel=1e-15)
    assert q.dim == dim


@pytest.mark.parametrize(
    "text, token",
    [("", ""), ("   ", ""), ("abc pm", "abc"), ("10 furlong", "furlong"), ("10", "10"), ("1 pW/parsec", "parsec"), ("1 m^x", "m^x")],
)
def test_parse_errors_name_token(text, token):
    with pytest.raises(ParseError) as info:
        parse_quantity(text)
    assert info.value.token == token
    if token:
        assert token in str(info.value)


def test_quantity_must_be_finite():
    with pytest.raises(DomainError):
        Quantity(math.nan, LENGTH)
    with pytest.raises(DomainError):
        Quantity(math.inf, LENGTH)


def test_dimension_mismatch_is_an_error():
    with pytest.raises(DimensionError):
        parse_quantity("1 m") + parse_quantity("1 kg")
    with pytest.raises(DimensionError):
        parse_quantity("1 m") < parse_quantity("1 s")
    with pytest.raises(DimensionError):
        parse_quantity("1 m") + 1.0


def test_molar_to_specific_copper():
    p = molar_to_specific(parse_quantity("1 pW/mol"), COPPER)
    assert p.dim == SPECIFIC_POWER
    # 1e-12 / 0.063546 by hand
    assert p.value == approx(1.5737e-11, rel=1e-4)
    assert p.value == approx(1.57366317313e-11, rel=1e-10)


def test_molar_to_specific_zero_and_linear():
    assert molar_to_specific(parse_quantity("0 pW/mol"), COPPER).value == 0.0
    one = molar_to_specific(parse_quantity("1 pW/mol"), COPPER).value
    two = molar_to_specific(parse_quantity("2 pW/mol"), COPPER).value
    assert two == 2 * one


def test_molar_to_specific_rejects_wrong_dimension():
    with pytest.raises(DimensionError):
        molar_to_specific(parse_quantity("1 pW/kg"), COPPER)


@pytest.mark.parametrize(
    "q, unit, text",
    [
        (Quantity(1.0e-11, SPECIFIC_POWER), "pW/kg", "10.00 pW/kg"),
        (Quantity(4.6e-12, LENGTH), "pm", "4.600 pm"),
        (Quantity(0.0, LENGTH), "m", "0 m"),
    ],
)
def test_format_examples(q, unit, text):
    assert format_quantity(q, unit) == text


def test_format_incompatible_unit():
    with pytest.raises(DimensionError):
        format_quantity(Quantity(1.0, LENGTH), "kg")


def test_format_digits():
    q = Quantity(4.630369537211864e-12, LENGTH)
    assert format_quantity(q, "pm", 3) == "4.63 pm"
    assert format_quantity(q, "pm", 6) == "4.63037 pm"


def test_display_unit_choice():
    assert display_unit(parse_quantity("4.3 pm")) == "pm"
    assert display_unit(parse_quantity("212 pW")) == "pW"
    assert display_unit(parse_quantity("0 m")) == "m"
    assert display_unit(parse_quantity("100 nW/kg")) == "nW/kg"


def test_codata_defaults_and_override():
    assert CODATA_2018.G.value == 6.67430e-11
    assert CODATA_2018.hbar.value == 1.054571817e-34
    alt = CODATA_2018.override(G=6.7e-11)
    assert alt.G.value == 6.7e-11 and alt.hbar == CODATA_2018.hbar
    assert CODATA_2018.G.value == 6.67430e-11
    with pytest.raises(Exception):
        CODATA_2018.G = None


def test_copper_entry():
    cu = get_material("Copper")
    assert cu.molar_mass.value == 0.063546
    assert cu.debye_waller_B.value == 1.46e-21
    with pytest.raises(InputError):
        get_material("unobtainium")


def test_material_invariants():
    with pytest.raises(DomainError):
        Material("x", Quantity.of(0.0, "kg/mol"))
    with pytest.raises(DomainError):
        Material("x", Quantity.of(1.0, "kg/mol"), Quantity.of(-1.0, "m^2"))


# --- properties ----------------------------------------------------------------

_units = st.sampled_from([u for u in UNITS if u != "1"])
_compound = st.one_of(
    _units,
    st.tuples(_units, _units).map(lambda p: f"{p[0]}/{p[1]}"),
    st.tuples(_units, st.integers(-3, 3).filter(bool)).map(lambda p: f"{p[0]}^{p[1]}"),
)
_numbers = st.floats(min_value=1e-30, max_value=1e30, allow_nan=False) | st.just(0.0)
_strings = st.builds(lambda x, sp, u: f"{x!r}{sp}{u}", _numbers, st.sampled_from(["", " ", "  "]), _compound)


@given(_strings, st.integers(1, 17))
def test_parse_format_parse_idempotent(text, digits):
    q1 = parse_quantity(text)
    unit = display_unit(q1)
    q2 = parse_quantity(format_quantity(q1, unit, digits))
    q3 = parse_quantity(format_quantity(q2, unit, digits))
    assert q3.dim == q2.dim == q1.dim
    assert q3.value == approx(q2.value, rel=1e-12, abs=0)


@given(_strings)
def test_full_precision_round_trip(text):
    q = parse_quantity(text)
    assert parse_quantity(str(q)).value == approx(q.value, rel=1e-12, abs=0)
    assert parse_quantity(str(q)).dim == q.dim


_dims = st.builds(Dimension, *[st.integers(-4, 4)] * 5)


@given(_dims, _dims)
def test_dimension_algebra(a, b):
    assert (a * b) / b == a
    assert a * b == b * a
    assert (a**2) / a == a


@given(st.floats(-1e-6, 1e-6, allow_nan=False), st.floats(-10, 10, allow_nan=False), st.floats(1e-3, 1.0))
def test_molar_to_specific_linear(p, k, molar_mass):
    m = Material("m", Quantity.of(molar_mass, "kg/mol"))
    base = molar_to_specific(Quantity(p, MOLAR_POWER), m).value
    scaled = molar_to_specific(Quantity(k * p, MOLAR_POWER), m).value
    assert scaled == approx(k * base, rel=1e-12, abs=1e-300)
