"""Registry of experimental heating constraints and exclusion-plot datasets.

The built-in catalog lives in ``data/catalog.json``. Set ``COLLAPSEBOUNDS_CATALOG``
to load a different file in the same format instead.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional, Sequence, Union

import numpy as np

from collapsebounds.errors import InputError, ModelMismatchError
from collapsebounds.models import HeatingKind, HeatingModel, LengthBound, invert_bound
from collapsebounds.quantities import LENGTH, SPECIFIC_POWER, Material, Quantity, get_material, parse_quantity

CATALOG_ENV = "COLLAPSEBOUNDS_CATALOG"
SCHEMA = "collapsebounds-catalog"
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class SpecificPowerLimit:
    power: Quantity

    def __post_init__(self):
        self.power.require(SPECIFIC_POWER, "specific power limit")


@dataclass(frozen=True)
class DirectLengthBound:
    length: Quantity
    model: HeatingKind

    def __post_init__(self):
        self.length.require(LENGTH, "direct length bound")


Constraint = Union[SpecificPowerLimit, DirectLengthBound]


@dataclass(frozen=True)
class ExperimentRecord:
    name: str
    constraint: Constraint
    material: Optional[Material] = None
    temperature_note: str = ""
    provenance: str = ""
    # the rounded figure as published, kept next to the computed value
    published_value: str = ""

    def __post_init__(self):
        if not isinstance(self.constraint, (SpecificPowerLimit, DirectLengthBound)):
            raise InputError(f"{self.name}: constraint must be a power limit or a direct length bound")


@dataclass(frozen=True)
class Annotation:
    name: str
    text: str
    provenance: str = ""


@dataclass(frozen=True)
class Catalog:
    records: tuple[ExperimentRecord, ...]
    annotations: tuple[Annotation, ...] = ()
    version: int = SCHEMA_VERSION

    def __post_init__(self):
        names = [r.name for r in self.records]
        if len(set(names)) != len(names):
            raise InputError("duplicate record names in catalog")

    @property
    def names(self) -> list[str]:
        return [r.name for r in self.records]

    def get(self, name: str) -> ExperimentRecord:
        for r in self.records:
            if r.name == name:
                return r
        raise InputError(f"unknown record {name!r}; known: {', '.join(self.names)}")

    def select(self, names: Sequence[str]) -> list[ExperimentRecord]:
        return [self.get(n) for n in names]


def _record_to_dict(r: ExperimentRecord) -> dict:
    c = r.constraint
    if isinstance(c, SpecificPowerLimit):
        constraint = {"type": "specific_power_limit", "power": f"{c.power.to('W/kg')!r} W/kg"}
    else:
        constraint = {"type": "direct_length_bound", "length": f"{c.length.to('m')!r} m", "model": c.model.value}
    return {
        "name": r.name,
        "constraint": constraint,
        "material": r.material.name if r.material else None,
        "temperature_note": r.temperature_note,
        "provenance": r.provenance,
        "published_value": r.published_value,
    }


def _record_from_dict(d: dict) -> ExperimentRecord:
    try:
        c = d["constraint"]
        kind = c["type"]
        if kind == "specific_power_limit":
            constraint = SpecificPowerLimit(parse_quantity(c["power"]))
        elif kind == "direct_length_bound":
            constraint = DirectLengthBound(parse_quantity(c["length"]), HeatingKind.parse(c["model"]))
        else:
            raise InputError(f"record {d.get('name')!r}: unknown constraint type {kind!r}")
        return ExperimentRecord(
            name=d["name"],
            constraint=constraint,
            material=get_material(d["material"]) if d.get("material") else None,
            temperature_note=d.get("temperature_note", ""),
            provenance=d.get("provenance", ""),
            published_value=d.get("published_value", ""),
        )
    except KeyError as exc:
        raise InputError(f"catalog record missing field {exc}") from None


def catalog_to_dict(cat: Catalog) -> dict:
    return {
        "schema": SCHEMA,
        "version": cat.version,
        "annotations": [{"name": a.name, "text": a.text, "provenance": a.provenance} for a in cat.annotations],
        "records": [_record_to_dict(r) for r in cat.records],
    }


def dumps_catalog(cat: Catalog) -> str:
    return json.dumps(catalog_to_dict(cat), indent=2, ensure_ascii=False) + "\n"


def loads_catalog(text: str) -> Catalog:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"catalog is not valid JSON: {exc}") from None
    if d.get("schema") != SCHEMA:
        raise InputError(f"not a catalog file (schema {d.get('schema')!r})")
    if d.get("version") != SCHEMA_VERSION:
        raise InputError(f"unsupported catalog version {d.get('version')!r}")
    return Catalog(
        records=tuple(_record_from_dict(r) for r in d.get("records", [])),
        annotations=tuple(Annotation(a["name"], a["text"], a.get("provenance", "")) for a in d.get("annotations", [])),
        version=d["version"],
    )


def builtin_catalog_text() -> str:
    return resources.files("collapsebounds").joinpath("data/catalog.json").read_text(encoding="utf-8")


def load_catalog(path=None) -> Catalog:
    """Load ``path``, else the file named by ``$COLLAPSEBOUNDS_CATALOG``, else the built-in one."""
    path = path or os.environ.get(CATALOG_ENV)
    if path is None:
        return loads_catalog(builtin_catalog_text())
    try:
        with open(path, encoding="utf-8") as fh:
            return loads_catalog(fh.read())
    except OSError as exc:
        raise InputError(f"cannot read catalog {path}: {exc.strerror}") from None


def save_catalog(cat: Catalog, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_catalog(cat))


def derive_bound(record: ExperimentRecord, model: HeatingModel) -> LengthBound:
    c = record.constraint
    if isinstance(c, SpecificPowerLimit):
        return invert_bound(model, c.power, f"{record.name}: {record.provenance}")
    if c.model is not model.kind:
        raise ModelMismatchError(
            f"{record.name} bounds {c.model.length_symbol} of the {c.model.value} model, not {model.kind.value}"
        )
    return LengthBound(c.length, c.model, f"{record.name}: {record.provenance}")


def applicable(record: ExperimentRecord, model: HeatingModel) -> bool:
    c = record.constraint
    return isinstance(c, SpecificPowerLimit) or c.model is model.kind


def rank_bounds(records: Sequence[ExperimentRecord], model: HeatingModel) -> list[tuple[str, LengthBound]]:
    """Strongest exclusion (largest lower bound) first; ties by name."""
    if not records:
        raise InputError("nothing to rank")
    derived = [(r.name, derive_bound(r, model)) for r in records]
    return sorted(derived, key=lambda nb: (-nb[1].meters, nb[0]))


@dataclass(frozen=True)
class ExclusionDataset:
    model: HeatingKind
    lengths: np.ndarray
    powers: np.ndarray
    limit_lines: tuple[tuple[str, Quantity], ...] = ()
    marker_lines: tuple[tuple[str, Quantity], ...] = ()
    length_range: tuple[float, float] = field(default=(0.0, 0.0))

    @property
    def model_curve(self) -> list[tuple[float, float]]:
        return list(zip(self.lengths.tolist(), self.powers.tolist()))


def exclusion_dataset(
    model: HeatingModel,
    records: Sequence[ExperimentRecord],
    markers: Sequence[tuple[str, Quantity]],
    length_range: tuple[Quantity, Quantity],
    n_points: int = 200,
) -> ExclusionDataset:
    """Predicted specific power against length, with limit and marker lines."""
    lo, hi = (q.require(LENGTH, "length range").value for q in length_range)
    if not (0 < lo < hi) or not math.isfinite(hi):
        raise InputError(f"invalid length range ({lo!r}, {hi!r})")
    if n_points < 2:
        raise InputError("n_points must be >= 2")
    lengths = np.geomspace(lo, hi, n_points)
    lengths[0], lengths[-1] = lo, hi
    powers = model.coefficient.value / lengths**3
    limits = tuple(
        (r.name, r.constraint.power) for r in records if isinstance(r.constraint, SpecificPowerLimit)
    )
    marks = []
    for label, q in markers:
        q.require(LENGTH, f"marker {label}")
        if not lo <= q.value <= hi:
            raise InputError(f"marker {label} at {q.value:g} m lies outside the plotted range")
        marks.append((label, q))
    return ExclusionDataset(model.kind, lengths, powers, limits, tuple(marks), (lo, hi))


def crossing_length(ds: ExclusionDataset, power: Quantity) -> Optional[float]:
    """Length where the sampled curve meets ``power`` (log-log interpolation)."""
    p = power.require(SPECIFIC_POWER).value
    lp = np.log(ds.powers)
    target = math.log(p)
    for i in range(len(lp) - 1):
        if lp[i] >= target >= lp[i + 1]:
            if lp[i] == lp[i + 1]:
                return float(ds.lengths[i])
            f = (lp[i] - target) / (lp[i] - lp[i + 1])
            ll = math.log(ds.lengths[i]) + f * (math.log(ds.lengths[i + 1]) - math.log(ds.lengths[i]))
            return math.exp(ll)
    return None


def dataset_to_csv(ds: ExclusionDataset) -> str:
    """Sections separated by ``# section = <kind>:<label>`` lines, SI units throughout."""
    out = [
        "# collapsebounds exclusion dataset",
        f"# model = {ds.model.value}",
        f"# length_range_m = {ds.length_range[0]!r},{ds.length_range[1]!r}",
        "# section = curve:model",
        "length_m,specific_power_w_per_kg",
    ]
    out += [f"{L!r},{P!r}" for L, P in ds.model_curve]
    for label, q in ds.limit_lines:
        out += [f"# section = limit:{label}", "specific_power_w_per_kg", repr(q.value)]
    for label, q in ds.marker_lines:
        out += [f"# section = marker:{label}", "length_m", repr(q.value)]
    return "\n".join(out) + "\n"


def parse_dataset_csv(text: str) -> dict[str, list[list[float]]]:
    """Read :func:`dataset_to_csv` output back as ``{"kind:label": rows}``."""
    sections: dict[str, list[list[float]]] = {}
    current = None
    for line in text.splitlines():
        if line.startswith("# section ="):
            current = line.split("=", 1)[1].strip()
            sections[current] = []
        elif line.startswith("#") or not line.strip() or current is None:
            continue
        else:
            try:
                sections[current].append([float(x) for x in line.split(",")])
            except ValueError:
                pass  # column header
    return sections


def plot_dataset(ds: ExclusionDataset, path=None, title: Optional[str] = None):
    """Log-log figure: model curve in red, limits in blue, markers dashed black.

    Returns the matplotlib figure; writes it to ``path`` when given (format
    taken from the suffix).
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    symbol = ds.model.length_symbol
    fig, ax = plt.subplots(figsize=(5.5, 4.2))
    ax.loglog(ds.lengths, ds.powers, color="red", label=f"{ds.model.value.upper()} prediction")
    for label, q in ds.limit_lines:
        ax.axhline(q.value, color="blue", label=label)
    for label, q in ds.marker_lines:
        ax.axvline(q.value, color="black", linestyle="--", label=label)
    ax.set_xlim(*ds.length_range)
    ax.set_xlabel(f"{symbol} (m)")
    ax.set_ylabel("specific power (W/kg)")
    if title:
        ax.set_title(title)
    ax.legend(fontsize="small")
    fig.tight_layout()
    if path is not None:
        with matplotlib.rc_context({"svg.hashsalt": "collapsebounds"}):
            fig.savefig(path, metadata={"Date": None} if str(path).endswith(".svg") else None)
    return fig
