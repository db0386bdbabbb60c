"""Heat-leak time series: relaxation fits, background subtraction, limits.

The measured heat leak on a cryostat stage is modelled as

    q(t) = sum_k A_k t^(-alpha_k) + Q0

with fixed exponents (default alpha = 3/4) and a time-independent term Q0.
The fit is weighted linear least squares; with ``free_exponent`` a single
exponent is found by golden-section search over chi-square.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Optional, Sequence

import numpy as np

from collapsebounds.errors import InputError, NoFiniteBoundError, SingularFitError
from collapsebounds.models import HeatingModel, LengthBound, invert_bound
from collapsebounds.quantities import (
    AMOUNT,
    MASS,
    MOLAR_POWER,
    SPECIFIC_POWER,
    COPPER,
    Material,
    Quantity,
    parse_quantity,
)

# reject fits whose column-equilibrated normal matrix is worse conditioned than this
MAX_CONDITION = 1e12
EXPONENT_SCAN = (0.1, 2.0)
# sigma used by the generator when noise_fraction == 0, relative to |q|
NOISELESS_SIGMA_FRACTION = 1e-3


@dataclass(frozen=True)
class HeatLeakSeries:
    """Heat leak samples: t in s since cooldown, q and sigma in W."""

    t: np.ndarray
    q: np.ndarray
    sigma: np.ndarray
    stage_mass: Quantity
    stage_moles: Optional[Quantity] = None
    label: str = ""

    def __post_init__(self):
        arrays = []
        for name in ("t", "q", "sigma"):
            a = np.array(getattr(self, name), dtype=float)
            if a.ndim != 1:
                raise InputError(f"{name} must be one-dimensional")
            a.setflags(write=False)
            object.__setattr__(self, name, a)
            arrays.append(a)
        t, q, sigma = arrays
        if not (len(t) == len(q) == len(sigma)):
            raise InputError("t, q and sigma must have equal length")
        if len(t) < 4:
            raise InputError(f"need at least 4 samples, got {len(t)}")
        if not np.all(np.isfinite(t)) or not np.all(np.isfinite(q)) or not np.all(np.isfinite(sigma)):
            raise InputError("non-finite sample values")
        if np.any(t <= 0):
            raise InputError("sample times must be positive")
        if np.any(np.diff(t) <= 0):
            raise InputError("sample times must be strictly increasing")
        if np.any(sigma <= 0):
            raise InputError("sigma must be positive for every sample")
        self.stage_mass.require(MASS, "stage mass")
        if self.stage_moles is not None:
            self.stage_moles.require(AMOUNT, "stage moles")

    def __len__(self):
        return len(self.t)

    def with_q(self, q: np.ndarray) -> HeatLeakSeries:
        return HeatLeakSeries(self.t, q, self.sigma, self.stage_mass, self.stage_moles, self.label)


@dataclass(frozen=True)
class RelaxationSpec:
    terms: tuple[float, ...] = (0.75,)
    include_constant: bool = True
    free_exponent: bool = False

    def __post_init__(self):
        terms = tuple(float(a) for a in self.terms)
        object.__setattr__(self, "terms", terms)
        if any(not a > 0 for a in terms):
            raise InputError("relaxation exponents must be positive")
        if len(set(terms)) != len(terms):
            raise InputError("relaxation exponents must be distinct")
        if not terms and not self.include_constant:
            raise InputError("model has no parameters")
        if self.free_exponent and len(terms) != 1:
            raise InputError("free-exponent mode supports exactly one relaxation term")

    @property
    def n_parameters(self) -> int:
        return len(self.terms) + int(self.include_constant) + int(self.free_exponent)

    def design(self, t: np.ndarray, terms: Optional[Sequence[float]] = None) -> np.ndarray:
        cols = [t ** (-a) for a in (self.terms if terms is None else terms)]
        if self.include_constant:
            cols.append(np.ones_like(t))
        return np.column_stack(cols)


@dataclass(frozen=True)
class FitResult:
    """Fitted parameters in SI units.

    ``amplitudes`` are in W·s^alpha (one per exponent), ``constant`` in W.
    ``covariance`` is ordered as amplitudes then constant.
    """

    amplitudes: tuple[float, ...]
    constant: float
    covariance: np.ndarray
    chi2: float
    dof: int
    exponents: tuple[float, ...] = (0.75,)
    fitted_exponent: Optional[float] = None

    @property
    def constant_sigma(self) -> float:
        if self.covariance.shape[0] == len(self.amplitudes):
            return 0.0
        return math.sqrt(max(self.covariance[-1, -1], 0.0))

    @property
    def amplitude_sigmas(self) -> tuple[float, ...]:
        d = np.diag(self.covariance)
        return tuple(math.sqrt(max(v, 0.0)) for v in d[: len(self.amplitudes)])

    def predict(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.full_like(t, self.constant)
        for A, a in zip(self.amplitudes, self.exponents):
            out = out + A * t ** (-a)
        return out


def _solve_linear(series: HeatLeakSeries, spec: RelaxationSpec, terms: Sequence[float]):
    X = spec.design(series.t, terms) / series.sigma[:, None]
    y = series.q / series.sigma
    scale = np.linalg.norm(X, axis=0)
    if not np.all(np.isfinite(scale)) or np.any(scale == 0):
        raise SingularFitError("degenerate design matrix")
    Xs = X / scale
    normal = Xs.T @ Xs
    cond = np.linalg.cond(normal)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularFitError(f"normal matrix is ill-conditioned (condition {cond:.3g})")
    # the solve goes through lstsq on the whitened design for accuracy; the
    # normal matrix supplies the covariance
    beta_s = np.linalg.lstsq(Xs, y, rcond=None)[0]
    beta = beta_s / scale
    cov = np.linalg.inv(normal) / np.outer(scale, scale)
    cov = 0.5 * (cov + cov.T)
    resid = y - X @ beta
    return beta, cov, float(resid @ resid)


def golden_section_min(f, lo: float, hi: float, tol: float = 1e-10, max_iter: int = 200):
    """Minimise a unimodal ``f`` on [lo, hi]. Returns (x, f(x))."""
    invphi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x, fx = (c, fc) if fc <= fd else (d, fd)
    # the minimum may sit on the boundary
    for edge in (lo, hi):
        fe = f(edge)
        if fe < fx:
            x, fx = edge, fe
    return x, fx


def fit_relaxation(series: HeatLeakSeries, spec: RelaxationSpec = RelaxationSpec()) -> FitResult:
    n = len(series)
    if n < spec.n_parameters + 2:
        raise InputError(f"{n} samples is too few for {spec.n_parameters} parameters (need n >= p + 2)")

    terms = spec.terms
    fitted = None
    if spec.free_exponent:

        def chi2_at(alpha):
            try:
                return _solve_linear(series, spec, (alpha,))[2]
            except SingularFitError:
                return math.inf

        fitted, best = golden_section_min(chi2_at, *EXPONENT_SCAN)
        if not math.isfinite(best):
            raise SingularFitError("no exponent in the scan range gives a solvable fit")
        terms = (fitted,)

    beta, cov, chi2 = _solve_linear(series, spec, terms)
    k = len(terms)
    return FitResult(
        amplitudes=tuple(float(b) for b in beta[:k]),
        constant=float(beta[k]) if spec.include_constant else 0.0,
        covariance=cov,
        chi2=chi2,
        dof=n - spec.n_parameters,
        exponents=tuple(terms),
        fitted_exponent=fitted,
    )


def generate_synthetic(
    spec: RelaxationSpec,
    amplitudes: Sequence[float],
    constant: float,
    noise_fraction: float,
    n: int,
    t_range: tuple[float, float],
    seed: int,
    stage_mass: Quantity = Quantity.of(17.0, "kg"),
    stage_moles: Optional[Quantity] = None,
    label: str = "synthetic",
) -> HeatLeakSeries:
    """Log-spaced synthetic heat leak with Gaussian noise of sd ``noise_fraction * q``.

    With ``noise_fraction == 0`` the samples equal the model exactly and each
    sigma is ``NOISELESS_SIGMA_FRACTION * |q|`` (or, for q == 0, that fraction
    of max|q|, or 1e-30 W when the whole series is zero).
    """
    if n < 4:
        raise InputError("need n >= 4")
    t0, t1 = (float(x) for x in t_range)
    if not (0 < t0 < t1) or not math.isfinite(t1):
        raise InputError(f"invalid time range {t_range!r}")
    if not noise_fraction >= 0:
        raise InputError("noise_fraction must be >= 0")
    if len(amplitudes) != len(spec.terms):
        raise InputError("one amplitude per relaxation term is required")

    t = np.geomspace(t0, t1, n)
    model = np.full(n, float(constant))
    for A, a in zip(amplitudes, spec.terms):
        model += A * t ** (-a)
    rng = np.random.default_rng(seed)
    sd = noise_fraction * np.abs(model)
    if noise_fraction > 0:
        q = model + sd * rng.standard_normal(n)
    else:
        q = model.copy()
    floor = NOISELESS_SIGMA_FRACTION * max(np.max(np.abs(model)), 1e-27)
    sigma = np.where(sd > 0, sd, NOISELESS_SIGMA_FRACTION * np.abs(model))
    sigma = np.where(sigma > 0, sigma, floor)
    return HeatLeakSeries(t, q, sigma, stage_mass, stage_moles, label)


@dataclass(frozen=True)
class BackgroundBudget:
    """Known time-independent heating per mole (cosmic muons, radioactivity).

    ``uncertainty_fraction`` is a convention, not a measured error bar.
    """

    molar_power: Quantity = Quantity.of(1.0, "pW/mol")
    uncertainty_fraction: float = 0.5

    def __post_init__(self):
        self.molar_power.require(MOLAR_POWER, "background molar power")
        if self.molar_power.value < 0:
            raise InputError("background power must be >= 0")
        if not self.uncertainty_fraction >= 0:
            raise InputError("uncertainty fraction must be >= 0")


NO_BACKGROUND = BackgroundBudget(Quantity.of(0.0, "W/mol"), 0.0)


@dataclass(frozen=True)
class ResidualLimit:
    central: Quantity
    sigma: Quantity
    upper_limit: Quantity
    confidence: float


def stage_moles(series: HeatLeakSeries, material: Optional[Material]) -> Quantity:
    if series.stage_moles is not None:
        return series.stage_moles
    if material is None:
        raise InputError("stage moles unknown: give moles in the series or a material")
    return material.moles(series.stage_mass)


def one_sided_z(confidence: float) -> float:
    if not 0 < confidence < 1:
        raise InputError(f"confidence must lie in (0, 1), got {confidence}")
    return NormalDist().inv_cdf(confidence)


def residual_specific_power(
    fit: FitResult,
    series: HeatLeakSeries,
    background: BackgroundBudget = BackgroundBudget(),
    material: Optional[Material] = COPPER,
    confidence: float = 0.95,
) -> ResidualLimit:
    """Unexplained constant heat leak per kg and its one-sided upper limit."""
    z = one_sided_z(confidence)
    mass = series.stage_mass.value
    if not mass > 0:
        raise InputError("stage mass must be positive")
    if background.molar_power.value > 0:
        bg_total = background.molar_power.value * stage_moles(series, material).value
    else:
        bg_total = 0.0
    bg_sigma = background.uncertainty_fraction * bg_total
    central = (fit.constant - bg_total) / mass
    sigma = math.hypot(fit.constant_sigma, bg_sigma) / mass
    upper = max(central, 0.0) + z * sigma
    return ResidualLimit(
        central=Quantity(central, SPECIFIC_POWER),
        sigma=Quantity(sigma, SPECIFIC_POWER),
        upper_limit=Quantity(upper, SPECIFIC_POWER),
        confidence=confidence,
    )


def describe_spec(spec: RelaxationSpec) -> str:
    terms = ",".join(f"{a:g}" for a in spec.terms)
    return f"exponents={terms}{' (free)' if spec.free_exponent else ''} constant={'on' if spec.include_constant else 'off'}"


def bound_from_limit(limit: ResidualLimit, model: HeatingModel, source: str = "") -> LengthBound:
    if limit.upper_limit.value <= 0:
        raise NoFiniteBoundError("no finite bound: upper limit on the residual heating is zero")
    return invert_bound(model, limit.upper_limit, source)


def bound_from_series(
    series: HeatLeakSeries,
    spec: RelaxationSpec = RelaxationSpec(),
    background: BackgroundBudget = BackgroundBudget(),
    material: Optional[Material] = COPPER,
    model: HeatingModel = HeatingModel(),
    confidence: float = 0.95,
) -> LengthBound:
    fit = fit_relaxation(series, spec)
    limit = residual_specific_power(fit, series, background, material, confidence)
    source = (
        f"heat-leak fit of {series.label or 'series'} [{describe_spec(spec)}]; "
        f"background {background.molar_power.to('pW/mol'):g} pW/mol "
        f"(+-{background.uncertainty_fraction:g}); one-sided CL {confidence:g}"
    )
    return bound_from_limit(limit, model, source)


@dataclass(frozen=True)
class BootstrapSummary:
    """Statistics of the constant term (W) over bootstrap replicates."""

    mean: float
    sd: float
    percentiles: dict = field(default_factory=dict)
    n_replicates: int = 0
    n_dropped: int = 0

    @property
    def warning(self) -> bool:
        return self.n_dropped > 0.1 * self.n_replicates


BOOTSTRAP_PERCENTILES = (2.5, 16.0, 50.0, 84.0, 97.5)


def bootstrap_uncertainty(
    series: HeatLeakSeries,
    spec: RelaxationSpec,
    n_replicates: int,
    seed: int,
    workers: int = 1,
) -> BootstrapSummary:
    """Residual-resampling bootstrap of the constant term.

    Replicate ``i`` draws from ``default_rng((seed, i))``, so the summary does
    not depend on ``workers`` or on scheduling order.
    """
    if n_replicates < 100:
        raise InputError("n_replicates must be >= 100")
    if not spec.include_constant:
        raise InputError("bootstrap summarises the constant term; enable it in the spec")
    fit = fit_relaxation(series, spec)
    fitted = fit.predict(series.t)
    n = len(series)
    inflate = math.sqrt(n / (n - spec.n_parameters))
    std_resid = (series.q - fitted) / series.sigma * inflate

    def replicate(i: int) -> Optional[float]:
        rng = np.random.default_rng((seed, i))
        draw = std_resid[rng.integers(0, n, size=n)]
        try:
            return fit_relaxation(series.with_q(fitted + series.sigma * draw), spec).constant
        except SingularFitError:
            return None

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(replicate, range(n_replicates)))
    else:
        results = [replicate(i) for i in range(n_replicates)]

    values = np.array([r for r in results if r is not None])
    dropped = n_replicates - len(values)
    if len(values) == 0:
        raise SingularFitError("every bootstrap replicate was singular")
    pct = np.percentile(values, BOOTSTRAP_PERCENTILES)
    return BootstrapSummary(
        mean=float(np.mean(values)),
        sd=float(np.std(values, ddof=1)) if len(values) > 1 else 0.0,
        percentiles={f"{p:g}": float(v) for p, v in zip(BOOTSTRAP_PERCENTILES, pct)},
        n_replicates=n_replicates,
        n_dropped=dropped,
    )


# --- series file format -----------------------------------------------------

HEADER_KEYS = ("label", "mass_kg", "moles")


def format_series(series: HeatLeakSeries) -> str:
    lines = []
    if series.label:
        lines.append(f"# label = {series.label}")
    lines.append(f"# mass_kg = {series.stage_mass.value!r}")
    if series.stage_moles is not None:
        lines.append(f"# moles = {series.stage_moles.value!r}")
    lines.append("# t_seconds,q_watts,sigma_watts")
    for t, q, s in zip(series.t, series.q, series.sigma):
        lines.append(f"{float(t)!r},{float(q)!r},{float(s)!r}")
    return "\n".join(lines) + "\n"


def write_series(series: HeatLeakSeries, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_series(series))


def parse_series(text: str, source: str = "<string>") -> HeatLeakSeries:
    meta: dict[str, str] = {}
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                meta[key.strip()] = value.strip()
            continue
        fields = [f for f in line.replace(",", " ").split()]
        if len(fields) != 3:
            raise InputError(f"{source}:{lineno}: expected 3 columns t_seconds,q_watts,sigma_watts, got {len(fields)}")
        try:
            rows.append([float(f) for f in fields])
        except ValueError as exc:
            raise InputError(f"{source}:{lineno}: {exc}") from None
    if not rows:
        raise InputError(f"{source}: no data rows")
    if "mass_kg" not in meta:
        raise InputError(f"{source}: missing '# mass_kg = ...' header")
    try:
        mass = Quantity.of(float(meta["mass_kg"]), "kg")
        moles = Quantity.of(float(meta["moles"]), "mol") if "moles" in meta else None
    except ValueError as exc:
        raise InputError(f"{source}: bad header value: {exc}") from None
    data = np.array(rows)
    return HeatLeakSeries(data[:, 0], data[:, 1], data[:, 2], mass, moles, meta.get("label", ""))


def read_series(path) -> HeatLeakSeries:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    return parse_series(text, os.fspath(path))


# --- shipped cryostat scenario ----------------------------------------------

# Copper nuclear stage of 17 kg whose constant heat leak is 1 pW/mol, all of it
# matched by the 1 pW/mol muon/radioactivity budget, sampled 1..100 days after
# cooldown. The relaxation term is ~10x the constant after one day.
GLOOS_SCENARIO = dict(
    amplitude_w_s34=1.0e-5,
    molar_constant=parse_quantity("1 pW/mol"),
    noise_fraction=0.05,
    n=200,
    t_range=(86400.0, 8.64e6),
    seed=20210,
    confidence=0.90,
)


def gloos_synthetic() -> HeatLeakSeries:
    s = GLOOS_SCENARIO
    mass = Quantity.of(17.0, "kg")
    moles = COPPER.moles(mass)
    constant = (s["molar_constant"] * moles).value
    return generate_synthetic(
        RelaxationSpec(),
        [s["amplitude_w_s34"]],
        constant,
        s["noise_fraction"],
        s["n"],
        s["t_range"],
        s["seed"],
        stage_mass=mass,
        stage_moles=moles,
        label="gloos-synthetic",
    )
