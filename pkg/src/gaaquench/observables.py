"""Measurement protocols built on the Gaussian quench machinery.

Covers the half-chain entanglement-entropy time series, the early-time growth
velocity (least-squares slope over a fit window), the late-time saturation
value (mean over jittered sample times after a long burn-in), finite-size
scaling of the saturation entropy, steady-state information-capacity profiles
I(A:R) versus subsystem size for center- or edge-coupled references, and the
small-subsystem jump value.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from .gaussian import (
    QuenchEvolution,
    QuenchSetup,
    binary_entropy,
    entropy_of_block,
    quench_evolution,
)

COUPLINGS = ("center", "edge")

JUMP_SIZE = 5  # subsystem size probing information trapped by localized modes


@dataclass(frozen=True)
class SamplingProtocol:
    """Numeric extraction parameters for velocity fits and steady-state averages.

    The saturation stage is sampled at n_samples times starting from burn_in,
    with consecutive spacings drawn from Uniform[mean_interval - jitter,
    mean_interval + jitter] using the given seed.
    """

    fit_window: tuple[float, float] = (0.0, 20.0)
    fit_dt: float = 0.5
    burn_in: float = 10000.0
    n_samples: int = 1000
    mean_interval: float = 10.0
    jitter: float = 5.0
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.fit_window
        if lo < 0 or hi <= lo:
            raise ValueError(f"fit window must satisfy 0 <= start < stop, got {self.fit_window}")
        if self.fit_dt <= 0:
            raise ValueError("fit_dt must be positive")
        if self.n_samples < 2:
            raise ValueError("n_samples must be at least 2")
        if not self.mean_interval > self.jitter >= 0:
            raise ValueError("need mean_interval > jitter >= 0")


def sample_times(protocol: SamplingProtocol) -> np.ndarray:
    """Steady-state sample times: burn_in plus cumulative jittered spacings."""
    rng = np.random.default_rng(protocol.seed)
    spacings = rng.uniform(
        protocol.mean_interval - protocol.jitter,
        protocol.mean_interval + protocol.jitter,
        protocol.n_samples,
    )
    return protocol.burn_in + np.cumsum(spacings)


def fit_window_times(protocol: SamplingProtocol) -> np.ndarray:
    lo, hi = protocol.fit_window
    return np.arange(lo, hi + 0.5 * protocol.fit_dt, protocol.fit_dt)


@dataclass
class EETimeSeries:
    """Half-chain entanglement entropy S(t) in natural-log units."""

    times: np.ndarray
    entropies: np.ndarray


@dataclass
class SicProfile:
    """Steady-state I(A:R) in bits versus subsystem size |A|."""

    coupling: str
    sizes: np.ndarray
    mi: np.ndarray
    boundary: str

    def __post_init__(self):
        self.sizes = np.asarray(self.sizes, dtype=int)
        self.mi = np.asarray(self.mi, dtype=float)
        if self.sizes.shape != self.mi.shape:
            raise ValueError("sizes and mi must have matching lengths")
        if np.any(self.mi < -1e-9) or np.any(self.mi > 2.0 + 1e-9):
            raise ValueError("mutual information must lie in [0, 2] bits")


def half_chain_sites(L: int) -> list[int]:
    return list(range(1, L // 2 + 1))


def ee_timeseries(setup: QuenchSetup, times) -> EETimeSeries:
    """Half-chain entropy (sites 1..L/2, natural log) at each requested time."""
    if setup.reference_site is not None:
        raise ValueError("entropy time series expects a plain chain without a reference mode")
    ev = quench_evolution(setup)
    sites = half_chain_sites(setup.spec.L)
    times = np.asarray(times, dtype=float)
    entropies = np.array([entropy_of_block(ev.block_at(t, sites)) for t in times])
    return EETimeSeries(times, entropies)


def early_velocity(series: EETimeSeries, protocol: SamplingProtocol) -> float:
    """Least-squares slope of S versus t restricted to the protocol's fit window."""
    lo, hi = protocol.fit_window
    mask = (series.times >= lo - 1e-12) & (series.times <= hi + 1e-12)
    if np.count_nonzero(mask) < 2:
        raise ValueError("fewer than 2 samples inside the fit window")
    return float(np.polyfit(series.times[mask], series.entropies[mask], 1)[0])


def quench_velocity(setup: QuenchSetup, protocol: SamplingProtocol) -> float:
    """Early-time growth velocity from a fresh time series on the fit-window grid."""
    return early_velocity(ee_timeseries(setup, fit_window_times(protocol)), protocol)


def steady_entropy_mean(
    ev: QuenchEvolution,
    sites,
    protocol: SamplingProtocol,
    log_base: str = "natural",
) -> float:
    """Mean subsystem entropy over the protocol's steady-state sample times."""
    sites = list(sites)
    values = [entropy_of_block(ev.block_at(t, sites), log_base) for t in sample_times(protocol)]
    return float(np.mean(values))


def saturation_value(setup: QuenchSetup, protocol: SamplingProtocol) -> float:
    """Saturation entropy: steady-state mean of the half-chain entropy in nats."""
    return steady_entropy_mean(quench_evolution(setup), half_chain_sites(setup.spec.L), protocol)


def fit_power_law(sizes, values) -> tuple[float, float]:
    """Exponent alpha and its standard error from an ln-ln least-squares fit."""
    sizes = np.asarray(sizes, dtype=float)
    values = np.asarray(values, dtype=float)
    if sizes.size < 3:
        raise ValueError("power-law fit needs at least 3 sizes")
    if np.any(values <= 0):
        raise ValueError("non-positive saturation values are unfittable (localized freeze-out)")
    fit = stats.linregress(np.log(sizes), np.log(values))
    return float(fit.slope), float(fit.stderr)


def scaling_exponent(setup: QuenchSetup, sizes, protocol: SamplingProtocol) -> tuple[float, float]:
    """Finite-size scaling exponent of the saturation entropy over the given chain lengths."""
    values = []
    for L in sizes:
        resized = replace(setup, spec=replace(setup.spec, L=int(L)))
        values.append(saturation_value(resized, protocol))
    return fit_power_law(sizes, values)


def reference_site_for(L: int, coupling: str) -> int:
    """Chain site the reference couples to: the center L/2 or the edge 1."""
    if coupling not in COUPLINGS:
        raise ValueError(f"coupling must be one of {COUPLINGS}, got {coupling!r}")
    return L // 2 if coupling == "center" else 1


def subsystem_window(L: int, coupling: str, size: int) -> list[int]:
    """The |A| sites probed at this size: centered on L/2 (left-biased, shifted
    to fit the chain at the |A| = L endpoint) or anchored at the edge."""
    if not 0 <= size <= L:
        raise ValueError(f"subsystem size {size} outside 0..{L}")
    if size == 0:
        return []
    if coupling == "edge":
        return list(range(1, size + 1))
    e = reference_site_for(L, coupling)
    start = e - size // 2
    end = e + (size - 1) // 2
    if start < 1:
        start, end = 1, size
    elif end > L:
        start, end = L - size + 1, L
    return list(range(start, end + 1))


def sic_profile(
    setup: QuenchSetup,
    sizes,
    coupling: str,
    protocol: SamplingProtocol,
) -> SicProfile:
    """Steady-state I(A:R) for each |A|, averaged over the protocol's sample times."""
    L = setup.spec.L
    expected = reference_site_for(L, coupling)
    if setup.reference_site != expected:
        raise ValueError(
            f"{coupling} coupling expects the reference at site {expected}, "
            f"got {setup.reference_site}"
        )
    sizes = sorted(int(s) for s in sizes)
    if sizes and sizes[-1] > L:
        raise ValueError(f"subsystem size {sizes[-1]} exceeds L={L}")
    windows = [np.asarray(subsystem_window(L, coupling, s), dtype=int) - 1 for s in sizes]
    r = L  # 0-based row of the reference mode
    ev = quench_evolution(setup)
    totals = np.zeros(len(sizes))
    ts = sample_times(protocol)
    for t in ts:
        c = ev.correlation_at(t).matrix
        s_r = binary_entropy(np.real(c[r, r]).reshape(1), "two")
        for k, idx in enumerate(windows):
            s_a = entropy_of_block(c[np.ix_(idx, idx)], "two")
            idx_ar = np.append(idx, r)
            s_ar = entropy_of_block(c[np.ix_(idx_ar, idx_ar)], "two")
            totals[k] += s_a + s_r - s_ar
    return SicProfile(coupling, np.asarray(sizes), totals / len(ts), setup.spec.boundary)


def sic_jump(profile: SicProfile) -> float:
    """The profile value at the small probe size |A| = 5."""
    hits = np.flatnonzero(profile.sizes == JUMP_SIZE)
    if hits.size == 0:
        raise ValueError(f"profile does not contain |A| = {JUMP_SIZE}")
    return float(profile.mi[hits[0]])


def pearson(x, y) -> float:
    """Pearson correlation coefficient of two equal-length samples."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size or x.size < 3:
        raise ValueError("pearson needs two equal-length samples of size >= 3")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise ValueError("degenerate variance")
    return float(stats.pearsonr(x, y).statistic)
