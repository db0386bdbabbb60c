"""Heating bounds on gravity-related collapse models (Diósi-Penrose and classical-channel gravity)."""

from collapsebounds.errors import (
    CollapseBoundsError,
    DimensionError,
    DomainError,
    InputError,
    ModelMismatchError,
    NoFiniteBoundError,
    NumericalError,
    ParseError,
    SingularFitError,
)
from collapsebounds.quantities import (
    CODATA_2018,
    COPPER,
    Dimension,
    Material,
    PhysicalConstants,
    Quantity,
    format_quantity,
    get_material,
    molar_to_specific,
    parse_quantity,
)
from collapsebounds.models import (
    HeatingKind,
    HeatingModel,
    LengthBound,
    invert_bound,
    specific_power,
    total_power,
    urms_from_debye_waller,
)

__version__ = "0.1.0"

__all__ = [
    "CollapseBoundsError", "DimensionError", "DomainError", "InputError", "ModelMismatchError",
    "NoFiniteBoundError", "NumericalError", "ParseError", "SingularFitError",
    "CODATA_2018", "COPPER", "Dimension", "Material", "PhysicalConstants", "Quantity",
    "format_quantity", "get_material", "molar_to_specific", "parse_quantity",
    "HeatingKind", "HeatingModel", "LengthBound", "invert_bound", "specific_power", "total_power",
    "urms_from_debye_waller",
]
