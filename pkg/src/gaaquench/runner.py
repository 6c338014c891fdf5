"""Configuration-driven experiment orchestration and CSV emission.

Configs are flat "key = value" text (# comments). Scalar keys take one value;
sweepable keys (lambda, a, L, sizes, times) also take comma lists or inclusive
start:stop:step grids. Unknown keys are fatal: silent typos in physics
parameters are the costliest failure mode.

Each experiment writes fixed-schema CSV files plus a manifest.json run record.
Sweep points are pure functions of (config, point index); per-point RNG seeds
derive from (seed, point index), so serial and parallel runs emit identical
bytes. Floats are written with 12 significant digits and LF line endings.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from fractions import Fraction
from itertools import product
from pathlib import Path

import numpy as np

from . import observables, oracle, spectral
from .gaussian import INITIAL_STATES, QuenchSetup, _embed_reference, mutual_information, quench_evolution, subsystem_entropy
from .model import GOLDEN_INVERSE, LatticeSpec, build_hamiltonian
from .observables import SamplingProtocol

EXPERIMENTS = (
    "spectrum",
    "ee",
    "velocity",
    "saturation",
    "scaling",
    "sic_profile",
    "sic_jump",
    "fractions",
    "verify",
)

# experiments whose half-filling quench has no reference mode: L must be even
_EVEN_L_EXPERIMENTS = ("ee", "velocity", "saturation", "scaling", "verify")

_ORACLE_TOLERANCE = 1e-8

_SCHEMAS = {
    "spectrum.csv": ("index", "energy", "ipr", "label"),
    "ee_timeseries.csv": ("time", "entropy_nats"),
    "velocity.csv": ("a", "lambda", "v_s"),
    "saturation.csv": ("a", "lambda", "L", "s_sat"),
    "scaling.csv": ("a", "lambda", "alpha", "stderr"),
    "sic_profile.csv": ("coupling", "boundary", "a", "lambda", "size_A", "mi_bits"),
    "fractions.csv": ("a", "lambda", "n_e", "n_l"),
    "correlation.csv": ("figure", "pearson_r"),
    "verify.csv": ("check", "time", "size_A", "gaussian", "oracle", "abs_diff"),
}


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully-resolved run description; sweepable fields hold sorted value tuples."""

    experiment: str
    L: tuple[int, ...]
    lam: tuple[float, ...]
    a: tuple[float, ...]
    t: float = 1.0
    b: float | Fraction | None = None
    phi: float = 0.0
    boundary: str = "open"
    initial: str = "neel"
    occupations: tuple[int, ...] | None = None
    initial_seed: int | None = None
    n_random: int = 20
    coupling: str = "center"
    sizes: tuple[int, ...] | None = None
    times: tuple[float, ...] | None = None
    fit_window: tuple[float, float] = (0.0, 20.0)
    fit_dt: float = 0.5
    burn_in: float = 10000.0
    n_samples: int = 1000
    mean_interval: float = 10.0
    jitter: float = 5.0
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        for name, values in (("L", self.L), ("lambda", self.lam), ("a", self.a)):
            if not values:
                raise ConfigError(f"sweep range for '{name}' is empty")
        object.__setattr__(self, "L", tuple(sorted(int(v) for v in self.L)))
        object.__setattr__(self, "lam", tuple(sorted(float(v) for v in self.lam)))
        object.__setattr__(self, "a", tuple(sorted(float(v) for v in self.a)))
        if any(L < 2 for L in self.L):
            raise ConfigError("all L must be >= 2")
        if self.experiment in _EVEN_L_EXPERIMENTS and any(L % 2 for L in self.L):
            raise ConfigError(f"odd L invalid for experiment '{self.experiment}' (half filling)")
        if self.experiment in ("spectrum", "ee", "verify") and (
            len(self.L) > 1 or len(self.lam) > 1 or len(self.a) > 1
        ):
            raise ConfigError(f"experiment '{self.experiment}' takes a single (L, lambda, a) point")
        if self.experiment in ("velocity", "fractions", "sic_profile", "sic_jump") and len(self.L) > 1:
            raise ConfigError(f"experiment '{self.experiment}' takes a single L")
        if self.experiment == "scaling" and len(self.L) < 3:
            raise ConfigError("scaling needs at least 3 chain lengths")
        if self.experiment == "verify" and self.L[0] > oracle.MAX_MODES:
            raise ConfigError(f"verify is limited to L <= {oracle.MAX_MODES}")
        if self.experiment == "sic_jump" and self.sizes is not None:
            raise ConfigError("sizes are fixed to {0, 5, L} for sic_jump")
        if self.sizes is not None:
            sizes = tuple(sorted(int(s) for s in self.sizes))
            if not sizes:
                raise ConfigError("sizes is empty")
            if sizes[0] < 0 or sizes[-1] > self.L[-1]:
                raise ConfigError(f"sizes must lie in 0..L, got {sizes}")
            object.__setattr__(self, "sizes", sizes)
        if self.times is not None and not self.times:
            raise ConfigError("times is empty")
        if self.initial not in INITIAL_STATES:
            raise ConfigError(f"initial must be one of {INITIAL_STATES}, got {self.initial!r}")
        if self.coupling not in observables.COUPLINGS:
            raise ConfigError(f"coupling must be one of {observables.COUPLINGS}, got {self.coupling!r}")
        if self.initial == "random_product" and self.initial_seed is None:
            object.__setattr__(self, "initial_seed", 0)
        if self.n_random < 1:
            raise ConfigError("n_random must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.boundary == "periodic" and not isinstance(self.b, Fraction):
            raise ConfigError("periodic boundary requires b as a rational p/q (e.g. b = 144/233)")
        self.protocol(self.seed)  # surfaces invalid sampling parameters early
        self.spec_at(self.a[0], self.lam[0], self.L[0])  # surfaces invalid lattice parameters

    def spec_at(self, a: float, lam: float, L: int) -> LatticeSpec:
        b = self.b
        if b is None:
            b = GOLDEN_INVERSE
        try:
            return LatticeSpec(L=L, lam=lam, a=a, t=self.t, b=b, phi=self.phi, boundary=self.boundary)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def setup_at(self, a: float, lam: float, L: int, reference_site: int | None = None,
                 initial_seed: int | None = None) -> QuenchSetup:
        return QuenchSetup(
            self.spec_at(a, lam, L),
            initial=self.initial,
            occupations=self.occupations,
            initial_seed=self.initial_seed if initial_seed is None else initial_seed,
            reference_site=reference_site,
        )

    def protocol(self, seed: int) -> SamplingProtocol:
        try:
            return SamplingProtocol(
                fit_window=self.fit_window,
                fit_dt=self.fit_dt,
                burn_in=self.burn_in,
                n_samples=self.n_samples,
                mean_interval=self.mean_interval,
                jitter=self.jitter,
                seed=seed,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "L": list(self.L),
            "lambda": list(self.lam),
            "a": list(self.a),
            "t": self.t,
            "b": str(self.b) if isinstance(self.b, Fraction) else self.b,
            "phi": self.phi,
            "boundary": self.boundary,
            "initial": self.initial,
            "occupations": list(self.occupations) if self.occupations is not None else None,
            "initial_seed": self.initial_seed,
            "n_random": self.n_random,
            "coupling": self.coupling,
            "sizes": list(self.sizes) if self.sizes is not None else None,
            "times": list(self.times) if self.times is not None else None,
            "fit_window": list(self.fit_window),
            "fit_dt": self.fit_dt,
            "burn_in": self.burn_in,
            "n_samples": self.n_samples,
            "mean_interval": self.mean_interval,
            "jitter": self.jitter,
            "seed": self.seed,
            "workers": self.workers,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        d = dict(data)
        d["lam"] = tuple(d.pop("lambda"))
        d["L"] = tuple(d["L"])
        d["a"] = tuple(d["a"])
        if isinstance(d.get("b"), str):
            d["b"] = Fraction(d["b"])
        for key in ("occupations", "sizes", "times"):
            if d.get(key) is not None:
                d[key] = tuple(d[key])
        d["fit_window"] = tuple(d["fit_window"])
        return cls(**d)


def _parse_float_list(value: str) -> tuple[float, ...]:
    value = value.strip()
    if ":" in value:
        parts = value.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid syntax is start:stop:step, got {value!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ValueError(f"invalid grid {value!r}")
        n = int(round((stop - start) / step)) + 1
        return tuple(start + step * k for k in range(n))
    return tuple(float(p) for p in value.split(","))


def _parse_int_list(value: str) -> tuple[int, ...]:
    return tuple(int(round(v)) for v in _parse_float_list(value))


def _parse_b(value: str):
    if "/" in value:
        return Fraction(value)
    return float(value)


def _parse_window(value: str) -> tuple[float, float]:
    parts = value.split(":")
    if len(parts) != 2:
        raise ValueError(f"window syntax is start:stop, got {value!r}")
    return float(parts[0]), float(parts[1])


def _parse_initial(value: str):
    if value.startswith("custom:"):
        bits = value[len("custom:"):].strip()
        if not bits or set(bits) - {"0", "1"}:
            raise ValueError("custom pattern must be a 0/1 string, e.g. custom:1010")
        return "custom", tuple(int(ch) for ch in bits)
    return value, None


_KEY_PARSERS = {
    "experiment": str,
    "L": _parse_int_list,
    "lambda": _parse_float_list,
    "a": _parse_float_list,
    "t": float,
    "b": _parse_b,
    "phi": float,
    "boundary": str,
    "initial": _parse_initial,
    "initial_seed": int,
    "n_random": int,
    "coupling": str,
    "sizes": _parse_int_list,
    "times": _parse_float_list,
    "fit_window": _parse_window,
    "fit_dt": float,
    "burn_in": float,
    "n_samples": int,
    "mean_interval": float,
    "jitter": float,
    "seed": int,
    "workers": int,
}


def parse_config(text: str) -> ExperimentConfig:
    """Parse a key = value document into a fully-resolved config (strict mode)."""
    raw: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _KEY_PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"line {lineno}: key {key!r} has no value")
        try:
            raw[key] = _KEY_PARSERS[key](value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"line {lineno}: key {key!r}: {exc}") from exc
    for required in ("experiment", "L", "lambda", "a"):
        if required not in raw:
            raise ConfigError(f"missing required key {required!r}")
    kwargs = dict(raw)
    kwargs["lam"] = kwargs.pop("lambda")
    if "initial" in kwargs:
        kwargs["initial"], kwargs["occupations"] = kwargs["initial"]
    return ExperimentConfig(**kwargs)


def derived_seed(base: int, index: int) -> int:
    """Stable per-task RNG seed; identical for serial and parallel execution."""
    return int(np.random.SeedSequence([base, index]).generate_state(1)[0])


def _realization_setups(config: ExperimentConfig, a: float, lam: float, L: int,
                        reference_site: int | None = None) -> list[QuenchSetup]:
    """The initial states a point averages over (n_random for random products, else one)."""
    if config.initial != "random_product":
        return [config.setup_at(a, lam, L, reference_site)]
    return [
        config.setup_at(a, lam, L, reference_site, initial_seed=derived_seed(config.initial_seed, k))
        for k in range(config.n_random)
    ]


def _default_sizes(L: int) -> tuple[int, ...]:
    return tuple(sorted(set(range(0, L + 1, 5)) | {L}))


def _point_velocity(config: ExperimentConfig, index: int, a: float, lam: float) -> list[tuple]:
    protocol = config.protocol(derived_seed(config.seed, index))
    values = [observables.quench_velocity(s, protocol) for s in _realization_setups(config, a, lam, config.L[0])]
    return [(a, lam, float(np.mean(values)))]


def _point_saturation(config: ExperimentConfig, index: int, a: float, lam: float, L: int) -> list[tuple]:
    protocol = config.protocol(derived_seed(config.seed, index))
    values = [observables.saturation_value(s, protocol) for s in _realization_setups(config, a, lam, L)]
    return [(a, lam, L, float(np.mean(values)))]


def _point_scaling(config: ExperimentConfig, index: int, a: float, lam: float) -> list[tuple]:
    protocol = config.protocol(derived_seed(config.seed, index))
    means = []
    for L in config.L:
        values = [observables.saturation_value(s, protocol) for s in _realization_setups(config, a, lam, L)]
        means.append(float(np.mean(values)))
    alpha, stderr = observables.fit_power_law(config.L, means)
    return [(a, lam, alpha, stderr)]


def _point_fractions(config: ExperimentConfig, index: int, a: float, lam: float) -> list[tuple]:
    data = spectral.analyze(config.spec_at(a, lam, config.L[0]))
    return [(a, lam, data.n_e, data.n_l)]


def _point_sic(config: ExperimentConfig, index: int, a: float, lam: float) -> list[tuple]:
    L = config.L[0]
    if config.experiment == "sic_jump":
        sizes = tuple(sorted({0, observables.JUMP_SIZE, L}))
    else:
        sizes = config.sizes if config.sizes is not None else _default_sizes(L)
    protocol = config.protocol(derived_seed(config.seed, index))
    reference = observables.reference_site_for(L, config.coupling)
    profiles = [
        observables.sic_profile(s, sizes, config.coupling, protocol)
        for s in _realization_setups(config, a, lam, L, reference)
    ]
    mi = np.mean([p.mi for p in profiles], axis=0)
    return [
        (config.coupling, config.boundary, a, lam, int(size), float(value))
        for size, value in zip(sizes, mi)
    ]


_POINT_FUNCTIONS = {
    "velocity": _point_velocity,
    "saturation": _point_saturation,
    "scaling": _point_scaling,
    "fractions": _point_fractions,
    "sic_profile": _point_sic,
    "sic_jump": _point_sic,
}

_OUTPUT_FILES = {
    "velocity": "velocity.csv",
    "saturation": "saturation.csv",
    "scaling": "scaling.csv",
    "fractions": "fractions.csv",
    "sic_profile": "sic_profile.csv",
    "sic_jump": "sic_profile.csv",
}


def _sweep_points(config: ExperimentConfig) -> list[tuple]:
    if config.experiment == "saturation":
        return [(a, lam, L) for a, lam, L in product(config.a, config.lam, config.L)]
    return [(a, lam) for a, lam in product(config.a, config.lam)]


def _run_point(payload) -> tuple[int, list[tuple] | None, str | None]:
    config, index, point = payload
    try:
        rows = _POINT_FUNCTIONS[config.experiment](config, index, *point)
        return index, rows, None
    except Exception as exc:  # recorded in the manifest; the sweep continues
        return index, None, f"{type(exc).__name__}: {exc}"


def _format_cell(value) -> str:
    if isinstance(value, (bool, str)):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.12g}"


def _write_csv(path: Path, name: str, rows: list[tuple]) -> dict:
    header = _SCHEMAS[name]
    with open(path / name, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell(cell) for cell in row])
    digest = hashlib.sha256((path / name).read_bytes()).hexdigest()
    return {"file": name, "rows": len(rows), "sha256": digest}


def _correlation_rows(config: ExperimentConfig, keyed: dict[float, float]):
    """Pearson row tying a lambda sweep to the spectral fractions (single a, single L)."""
    if len(config.a) != 1 or len(config.L) != 1 or len(config.lam) < 3:
        return None
    fractions = [
        spectral.analyze(config.spec_at(config.a[0], lam, config.L[0])) for lam in config.lam
    ]
    values = [keyed[lam] for lam in config.lam]
    try:
        if config.experiment == "saturation":
            corr = [("s_sat_vs_n_e", observables.pearson(values, [d.n_e for d in fractions]))]
        else:
            corr = [("sic_jump_vs_n_l", observables.pearson(values, [d.n_l for d in fractions]))]
    except ValueError:
        return None  # degenerate sweep; nothing meaningful to report
    fraction_rows = [(config.a[0], lam, d.n_e, d.n_l) for lam, d in zip(config.lam, fractions)]
    return corr, fraction_rows


def _run_sweep(config: ExperimentConfig, out: Path) -> dict:
    points = _sweep_points(config)
    payloads = [(config, index, point) for index, point in enumerate(points)]
    if config.workers == 1 or len(points) == 1:
        results = [_run_point(p) for p in payloads]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run_point, payloads))
    results.sort(key=lambda r: r[0])

    rows: list[tuple] = []
    failures = []
    for index, point_rows, error in results:
        if error is not None:
            failures.append({"point_index": index, "params": list(points[index]), "error": error})
        else:
            rows.extend(point_rows)
    outputs = [_write_csv(out, _OUTPUT_FILES[config.experiment], rows)]

    if config.experiment in ("saturation", "sic_jump") and not failures:
        if config.experiment == "saturation":
            keyed = {row[1]: row[3] for row in rows}
        else:
            keyed = {row[3]: row[5] for row in rows if row[4] == observables.JUMP_SIZE}
        extra = _correlation_rows(config, keyed)
        if extra is not None:
            corr_rows, fraction_rows = extra
            outputs.append(_write_csv(out, "fractions.csv", fraction_rows))
            outputs.append(_write_csv(out, "correlation.csv", corr_rows))
    return {"outputs": outputs, "failures": failures}


def _run_spectrum(config: ExperimentConfig, out: Path) -> dict:
    data = spectral.analyze(config.spec_at(config.a[0], config.lam[0], config.L[0]))
    rows = [
        (n + 1, data.energies[n], data.ipr[n], data.labels[n])
        for n in range(data.energies.size)
    ]
    return {"outputs": [_write_csv(out, "spectrum.csv", rows)], "failures": []}


def _run_ee(config: ExperimentConfig, out: Path) -> dict:
    times = config.times if config.times is not None else tuple(np.arange(0.0, 100.5, 0.5))
    setups = _realization_setups(config, config.a[0], config.lam[0], config.L[0])
    series = [observables.ee_timeseries(s, times) for s in setups]
    entropies = np.mean([s.entropies for s in series], axis=0)
    rows = list(zip(times, entropies))
    return {"outputs": [_write_csv(out, "ee_timeseries.csv", rows)], "failures": []}


def _run_verify(config: ExperimentConfig, out: Path) -> dict:
    a, lam, L = config.a[0], config.lam[0], config.L[0]
    rows = []

    setup = config.setup_at(a, lam, L)
    h = build_hamiltonian(setup.spec)
    ev = quench_evolution(setup)
    basis, psi0 = oracle.initial_state(setup)
    hamiltonian = oracle.many_body_hamiltonian(h, basis)
    half = observables.half_chain_sites(L)
    times = config.times if config.times is not None else (0.5, 1.0, 2.0, 5.0, 10.0)
    for t in times:
        s_gauss = subsystem_entropy(ev.correlation_at(t), half)
        s_exact = oracle.exact_entropy(oracle.exact_evolve(psi0, hamiltonian, t), basis, half)
        rows.append(("ee", t, len(half), s_gauss, s_exact, abs(s_gauss - s_exact)))

    if L + 1 <= oracle.MAX_MODES:
        reference = observables.reference_site_for(L, "center")
        setup_r = config.setup_at(a, lam, L, reference_site=reference)
        ev_r = quench_evolution(setup_r)
        basis_r, psi0_r = oracle.initial_state(setup_r)
        hamiltonian_r = oracle.many_body_hamiltonian(_embed_reference(h, L + 1), basis_r)
        for t in (1.0, 3.0, 7.0):
            c = ev_r.correlation_at(t)
            psi_t = oracle.exact_evolve(psi0_r, hamiltonian_r, t)
            for size in range(L + 1):
                window = observables.subsystem_window(L, "center", size)
                i_gauss = mutual_information(c, window)
                i_exact = oracle.exact_mutual_information(psi_t, basis_r, window, L + 1)
                rows.append(("sic", t, size, i_gauss, i_exact, abs(i_gauss - i_exact)))

    max_delta = max(row[5] for row in rows)
    passed = bool(max_delta <= _ORACLE_TOLERANCE)
    return {
        "outputs": [_write_csv(out, "verify.csv", rows)],
        "failures": [],
        "max_abs_delta": max_delta,
        "verify_passed": passed,
    }


def run(config: ExperimentConfig, out_dir) -> dict:
    """Execute the configured experiment; returns (and writes) the run manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()
    if config.experiment == "spectrum":
        result = _run_spectrum(config, out)
    elif config.experiment == "ee":
        result = _run_ee(config, out)
    elif config.experiment == "verify":
        result = _run_verify(config, out)
    else:
        result = _run_sweep(config, out)
    manifest = {
        "experiment": config.experiment,
        "config": config.to_dict(),
        "seed": config.seed,
        "version": _package_version(),
        "started": started,
        "wall_time_s": time.perf_counter() - t0,
        **result,
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def _package_version() -> str:
    from . import __version__

    return __version__
