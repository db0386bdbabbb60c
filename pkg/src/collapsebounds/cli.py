"""``collapsebounds`` command line.

Exit codes: 0 success, 1 input/parse error, 2 domain error, 3 numerical failure.
Pass ``--json`` to any subcommand for a single machine-readable JSON document.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from collapsebounds import catalog as cat
from collapsebounds import heatleak as hl
from collapsebounds.errors import CollapseBoundsError, InputError
from collapsebounds.models import (
    HeatingKind,
    HeatingModel,
    LengthBound,
    invert_bound,
    specific_power,
    total_power,
    urms_from_debye_waller,
)
from collapsebounds.quantities import (
    AREA,
    LENGTH,
    MASS,
    MOLAR_POWER,
    POWER,
    SPECIFIC_POWER,
    Quantity,
    display_unit,
    format_quantity,
    get_material,
    molar_to_specific,
    parse_quantity,
)

BOUND_DIGITS = 3

_SI_UNIT = {
    LENGTH: "m",
    SPECIFIC_POWER: "W/kg",
    POWER: "W",
    MASS: "kg",
    AREA: "m^2",
    MOLAR_POWER: "W/mol",
}


def qdoc(q: Quantity, digits: int = 4) -> dict:
    """JSON form of a quantity: exact SI value plus the human display string."""
    unit = _SI_UNIT.get(q.dim, q.dim.si_unit())
    return {"value": q.to(unit), "unit": unit, "display": format_quantity(q, display_unit(q), digits)}


def bound_doc(b: LengthBound) -> dict:
    return {
        "model": b.model.value,
        "symbol": b.model.length_symbol,
        "kind": b.kind,
        "length": qdoc(b.value, BOUND_DIGITS),
        "source": b.source,
    }


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(f"{self.prog}: {message}")


def _model(args) -> HeatingModel:
    return HeatingModel(HeatingKind.parse(args.model))


def cmd_predict(args):
    model = _model(args)
    length = parse_quantity(args.length).require(LENGTH, "--length")
    p = specific_power(model, length)
    doc = {"command": "predict", "model": model.kind.value, "length": qdoc(length), "specific_power": qdoc(p)}
    lines = [f"{model.kind.value} specific power at {doc['length']['display']}: {doc['specific_power']['display']}"]
    if args.mass is not None:
        mass = parse_quantity(args.mass).require(MASS, "--mass")
        total = total_power(model, length, mass)
        doc["mass"] = qdoc(mass)
        doc["total_power"] = qdoc(total)
        lines.append(f"total power for {doc['mass']['display']}: {doc['total_power']['display']}")
    return doc, lines


def cmd_invert(args):
    model = _model(args)
    power = parse_quantity(args.power)
    doc = {"command": "invert", "model": model.kind.value, "power_input": qdoc(power)}
    if power.dim == MOLAR_POWER:
        if not args.material:
            raise InputError("a per-mole power needs --material")
        power = molar_to_specific(power, get_material(args.material))
        doc["material"] = args.material
    power.require(SPECIFIC_POWER, "--power")
    bound = invert_bound(model, power, f"specific power limit {format_quantity(power, 'pW/kg')}")
    doc["specific_power"] = qdoc(power)
    doc["bound"] = bound_doc(bound)
    line = (
        f"{model.kind.value}: {bound.model.length_symbol} > {doc['bound']['length']['display']}"
        f"  (limit {doc['specific_power']['display']})"
    )
    return doc, [line]


def cmd_urms(args):
    if args.material:
        material = get_material(args.material)
        if material.debye_waller_B is None:
            raise InputError(f"{material.name} has no Debye-Waller factor")
        B = material.debye_waller_B
    elif args.B:
        B = parse_quantity(args.B).require(AREA, "--B")
    else:
        raise InputError("give --material or --B")
    u = urms_from_debye_waller(B)
    doc = {"command": "urms", "material": args.material, "debye_waller_B": qdoc(B), "u_rms": qdoc(u)}
    return doc, [f"u_rms = {doc['u_rms']['display']}"]


def _spec(args) -> hl.RelaxationSpec:
    try:
        terms = tuple(float(x) for x in args.exponents.split(","))
    except ValueError:
        raise InputError(f"bad --exponents {args.exponents!r}") from None
    return hl.RelaxationSpec(terms, include_constant=not args.no_constant, free_exponent=args.free_exponent)


def _selftest(spec: hl.RelaxationSpec):
    s = hl.GLOOS_SCENARIO
    amps = [s["amplitude_w_s34"] * (i + 1) for i in range(len(spec.terms))]
    constant = 2.675e-10 if spec.include_constant else 0.0
    series = hl.generate_synthetic(spec, amps, constant, 0.0, s["n"], s["t_range"], 0, label="selftest")
    fit = hl.fit_relaxation(series, spec)
    errors = [abs(a - b) / abs(b) for a, b in zip(fit.amplitudes, amps)]
    if spec.include_constant:
        errors.append(abs(fit.constant - constant) / constant)
    worst = max(errors)
    ok = worst < 1e-9
    doc = {
        "command": "fit",
        "selftest": True,
        "spec": hl.describe_spec(spec),
        "max_relative_error": worst,
        "passed": ok,
    }
    lines = [f"noiseless self-test [{doc['spec']}]: max relative error {worst:.3g} -> {'PASS' if ok else 'FAIL'}"]
    return doc, lines, 0 if ok else 3


def cmd_fit(args):
    spec = _spec(args)
    if args.synthetic_selftest:
        return _selftest(spec)
    if not args.input:
        raise InputError("fit needs an input file (or --synthetic-selftest)")
    series = hl.read_series(args.input)
    material = get_material(args.material) if args.material else None
    background = hl.BackgroundBudget(parse_quantity(args.background), args.background_fraction)
    model = _model(args)

    fit = hl.fit_relaxation(series, spec)
    limit = hl.residual_specific_power(fit, series, background, material, args.confidence)
    source = (
        f"heat-leak fit of {series.label or args.input} [{hl.describe_spec(spec)}]; "
        f"background {format_quantity(background.molar_power, 'pW/mol')} (+-{background.uncertainty_fraction:g}); "
        f"one-sided CL {args.confidence:g}"
    )
    bound = hl.bound_from_limit(limit, model, source)

    doc = {
        "command": "fit",
        "label": series.label,
        "n_samples": len(series),
        "seed": args.seed,
        "spec": {
            "exponents": list(spec.terms),
            "include_constant": spec.include_constant,
            "free_exponent": spec.free_exponent,
        },
        "fit": {
            "exponents": list(fit.exponents),
            "fitted_exponent": fit.fitted_exponent,
            "amplitudes": list(fit.amplitudes),
            "amplitude_sigmas": list(fit.amplitude_sigmas),
            "constant": qdoc(Quantity(fit.constant, POWER)),
            "constant_sigma": qdoc(Quantity(fit.constant_sigma, POWER)),
            "chi2": fit.chi2,
            "dof": fit.dof,
        },
        "background": {
            "molar_power": qdoc(background.molar_power),
            "uncertainty_fraction": background.uncertainty_fraction,
        },
        "residual": {
            "central": qdoc(limit.central),
            "sigma": qdoc(limit.sigma),
            "upper_limit": qdoc(limit.upper_limit),
            "confidence": limit.confidence,
        },
        "bound": bound_doc(bound),
        "bootstrap": None,
    }
    f = doc["fit"]
    r = doc["residual"]
    lines = [
        f"series {series.label or args.input}: {len(series)} samples",
        f"fit [{hl.describe_spec(spec)}]: constant {f['constant']['display']} +- {f['constant_sigma']['display']}, "
        f"chi2 {fit.chi2:.4g} / dof {fit.dof}",
    ]
    for a, A, sA in zip(fit.exponents, fit.amplitudes, fit.amplitude_sigmas):
        lines.append(f"  amplitude t^-{a:.6g}: {A:.4g} +- {sA:.2g} W*s^{a:.6g}")
    lines += [
        f"residual specific power: {r['central']['display']} +- {r['sigma']['display']}",
        f"upper limit ({args.confidence:g} one-sided): {r['upper_limit']['display']}",
        f"{model.kind.value}: {bound.model.length_symbol} > {doc['bound']['length']['display']}",
    ]
    if args.bootstrap:
        b = hl.bootstrap_uncertainty(series, spec, args.bootstrap, args.seed)
        doc["bootstrap"] = {
            "n_replicates": b.n_replicates,
            "n_dropped": b.n_dropped,
            "warning": b.warning,
            "constant_mean": b.mean,
            "constant_sd": b.sd,
            "constant_percentiles": b.percentiles,
        }
        lines.append(
            f"bootstrap ({b.n_replicates} replicates, seed {args.seed}): constant sd "
            f"{format_quantity(Quantity(b.sd, POWER), 'pW')}"
            + ("  WARNING: >10% replicates dropped" if b.warning else "")
        )
    return doc, lines


def _range(text: str, what: str):
    parts = text.split(":")
    if len(parts) != 2:
        raise InputError(f"{what} must look like LOW:HIGH, got {text!r}")
    return tuple(parse_quantity(p) for p in parts)


def cmd_generate(args):
    if args.scenario == "gloos":
        series = hl.gloos_synthetic()
    else:
        spec = _spec(args)
        try:
            amps = [float(x) for x in args.amplitudes.split(",")]
        except ValueError:
            raise InputError(f"bad --amplitudes {args.amplitudes!r}") from None
        constant = parse_quantity(args.constant).require(POWER, "--constant")
        t0, t1 = (q.to("s") for q in _range(args.t_range, "--t-range"))
        series = hl.generate_synthetic(
            spec, amps, constant.value, args.noise, args.n, (t0, t1), args.seed,
            stage_mass=parse_quantity(args.mass).require(MASS, "--mass"), label=args.label,
        )
    text = hl.format_series(series)
    doc = {"command": "generate", "label": series.label, "n_samples": len(series), "seed": args.seed}
    if args.out:
        _write(args.out, text)
        doc["out"] = args.out
        return doc, [f"wrote {len(series)} samples to {args.out}"]
    doc["series"] = text
    return doc, [text.rstrip("\n")]


def _write(path, text):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}") from None


def _records(catalog: cat.Catalog, names: Optional[str]):
    if not names:
        return list(catalog.records)
    return catalog.select([n.strip() for n in names.split(",") if n.strip()])


def cmd_catalog(args):
    catalog = cat.load_catalog(args.catalog)
    records = _records(catalog, args.records)
    model = _model(args)
    if args.action == "list":
        rows, lines = [], []
        for r in records:
            c = r.constraint
            if isinstance(c, cat.SpecificPowerLimit):
                constraint = {"type": "specific_power_limit", "power": qdoc(c.power)}
                what = f"P < {constraint['power']['display']}"
            else:
                constraint = {"type": "direct_length_bound", "model": c.model.value, "length": qdoc(c.length, BOUND_DIGITS)}
                what = f"{c.model.length_symbol} > {constraint['length']['display']} ({c.model.value})"
            rows.append({
                "name": r.name,
                "constraint": constraint,
                "material": r.material.name if r.material else None,
                "temperature_note": r.temperature_note,
                "provenance": r.provenance,
                "published_value": r.published_value,
            })
            lines.append(f"{r.name:<20} {what}")
        doc = {
            "command": "catalog list",
            "records": rows,
            "annotations": [{"name": a.name, "text": a.text} for a in catalog.annotations],
        }
        lines += [f"note [{a.name}]: {a.text}" for a in catalog.annotations]
        return doc, lines

    usable = [r for r in records if cat.applicable(r, model)]
    skipped = [r.name for r in records if not cat.applicable(r, model)]
    if args.action == "derive":
        derived = [(r.name, cat.derive_bound(r, model)) for r in usable]
    else:
        if not usable:
            raise InputError(f"no records apply to model {model.kind.value}")
        derived = cat.rank_bounds(usable, model)
    doc = {
        "command": f"catalog {args.action}",
        "model": model.kind.value,
        "bounds": [dict(name=n, published_value=catalog.get(n).published_value, **bound_doc(b)) for n, b in derived],
        "skipped": skipped,
    }
    lines = []
    for i, (n, b) in enumerate(derived, 1):
        prefix = f"{i}. " if args.action == "rank" else ""
        lines.append(
            f"{prefix}{n:<20} {b.model.length_symbol} > {format_quantity(b.value, display_unit(b.value), BOUND_DIGITS)}"
            f"   [published: {catalog.get(n).published_value}]"
        )
    if skipped:
        lines.append(f"skipped (bound on another model): {', '.join(skipped)}")
    return doc, lines


def _marker(text: str):
    label, sep, value = text.partition(":")
    if not sep:
        raise InputError(f"marker must look like LABEL:VALUE or urms:MATERIAL, got {text!r}")
    if label == "urms":
        material = get_material(value)
        if material.debye_waller_B is None:
            raise InputError(f"{material.name} has no Debye-Waller factor")
        return (f"u_rms ({material.name})", urms_from_debye_waller(material.debye_waller_B))
    return (label, parse_quantity(value).require(LENGTH, f"marker {label}"))


def cmd_plot(args):
    catalog = cat.load_catalog(args.catalog)
    records = _records(catalog, args.records) if args.records else []
    markers = [_marker(m) for m in (args.markers.split(",") if args.markers else [])]
    lo, hi = _range(args.range, "--range")
    model = _model(args)
    ds = cat.exclusion_dataset(model, records, markers, (lo, hi), args.n_points)
    fmt = args.format or ("svg" if args.out.lower().endswith(".svg") else "csv")
    if fmt == "csv":
        _write(args.out, cat.dataset_to_csv(ds))
    else:
        try:
            cat.plot_dataset(ds, args.out)
        except OSError as exc:
            raise InputError(f"cannot write {args.out}: {exc.strerror}") from None
    crossings = []
    for label, q in ds.limit_lines:
        x = cat.crossing_length(ds, q)
        crossings.append({"limit": label, "length": None if x is None else qdoc(Quantity(x, LENGTH), BOUND_DIGITS)})
    doc = {
        "command": "plot",
        "model": model.kind.value,
        "format": fmt,
        "out": args.out,
        "n_points": len(ds.lengths),
        "limits": [{"label": l, "power": qdoc(q)} for l, q in ds.limit_lines],
        "markers": [{"label": l, "length": qdoc(q)} for l, q in ds.marker_lines],
        "crossings": crossings,
    }
    lines = [f"wrote {fmt} exclusion plot to {args.out}"]
    for c in crossings:
        where = c["length"]["display"] if c["length"] else "outside range"
        lines.append(f"  curve meets {c['limit']} at {where}")
    return doc, lines


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit one JSON document")

    p = _Parser(prog="collapsebounds", description="Heating bounds on gravity-related collapse models.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def model_opt(sp, required=True):
        sp.add_argument("--model", choices=["dp", "ccg"], required=required, default="dp")

    sp = sub.add_parser("predict", parents=[common], help="specific (and total) heating power")
    model_opt(sp)
    sp.add_argument("--length", required=True)
    sp.add_argument("--mass")
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("invert", parents=[common], help="lower length bound from a power limit")
    model_opt(sp)
    sp.add_argument("--power", required=True)
    sp.add_argument("--material", help="needed for per-mole powers")
    sp.set_defaults(func=cmd_invert)

    sp = sub.add_parser("urms", parents=[common], help="nuclear wave-function spread")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--material")
    g.add_argument("--B", help="Debye-Waller factor, e.g. '0.146e-20 m^2'")
    sp.set_defaults(func=cmd_urms)

    def spec_opts(sp):
        sp.add_argument("--exponents", default="0.75", help="comma-separated relaxation exponents")
        sp.add_argument("--free-exponent", action="store_true")
        sp.add_argument("--no-constant", action="store_true")

    sp = sub.add_parser("fit", parents=[common], help="fit a heat-leak series and derive a bound")
    sp.add_argument("input", nargs="?")
    model_opt(sp, required=False)
    spec_opts(sp)
    sp.add_argument("--background", default="1 pW/mol")
    sp.add_argument("--background-fraction", type=float, default=0.5)
    sp.add_argument("--material", default="copper")
    sp.add_argument("--confidence", type=float, default=0.95)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--bootstrap", type=int, default=0, metavar="N")
    sp.add_argument("--synthetic-selftest", action="store_true")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("generate", parents=[common], help="write a synthetic heat-leak series")
    sp.add_argument("--scenario", choices=["gloos"])
    spec_opts(sp)
    sp.add_argument("--amplitudes", default="1e-5")
    sp.add_argument("--constant", default="170 pW")
    sp.add_argument("--noise", type=float, default=0.05)
    sp.add_argument("--n", type=int, default=200)
    sp.add_argument("--t-range", default="86400 s:8.64e6 s")
    sp.add_argument("--mass", default="17 kg")
    sp.add_argument("--label", default="synthetic")
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("catalog", parents=[common], help="list, derive or rank catalog bounds")
    sp.add_argument("action", choices=["list", "derive", "rank"])
    model_opt(sp, required=False)
    sp.add_argument("--records", help="comma-separated record names (default: all)")
    sp.add_argument("--catalog", help=f"catalog file (default: ${cat.CATALOG_ENV} or built-in)")
    sp.set_defaults(func=cmd_catalog)

    sp = sub.add_parser("plot", parents=[common], help="exclusion-plot data (csv) or figure (svg)")
    model_opt(sp, required=False)
    sp.add_argument("--records", default="cryostat-heatleak")
    sp.add_argument("--markers", default="", help="e.g. urms:copper,nuclear:0.01 pm")
    sp.add_argument("--range", default="1pm:10pm")
    sp.add_argument("--n-points", type=int, default=200)
    sp.add_argument("--out", required=True)
    sp.add_argument("--format", choices=["csv", "svg"])
    sp.add_argument("--catalog")
    sp.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        result = args.func(args)
    except CollapseBoundsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    doc, lines = result[0], result[1]
    code = result[2] if len(result) > 2 else 0
    if args.json:
        print(json.dumps(doc, sort_keys=True, indent=2, allow_nan=False))
    else:
        print("\n".join(lines))
    return code


if __name__ == "__main__":
    sys.exit(main())
