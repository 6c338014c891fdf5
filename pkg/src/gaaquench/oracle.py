"""Brute-force many-body reference for small chains.

Validates the Gaussian fast path on the full Fock space: second-quantized
Hamiltonian matrices, exact state-vector evolution, and reduced-density-matrix
entropies with fermionic (Jordan-Wigner) sign bookkeeping. Mode ordering is
chain sites 1..L with the reference mode last; a canonical basis ket is

    |n> = (c_1^dag)^{n_1} (c_2^dag)^{n_2} ... (c_M^dag)^{n_M} |vac>,

stored as the bitmask sum_m n_m 2^{m-1}. Hard size guard: M <= 12 modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .gaussian import QuenchSetup, occupation_pattern

MAX_MODES = 12


def _check_modes(modes: int):
    if modes > MAX_MODES:
        raise ValueError(f"oracle limited to {MAX_MODES} modes, got {modes}")


@dataclass(frozen=True)
class FockBasis:
    """Occupation-number basis over `modes` modes, optionally at fixed particle number."""

    modes: int
    particles: int | None
    states: tuple[int, ...]
    index: dict[int, int]

    def __len__(self) -> int:
        return len(self.states)


def full_basis(modes: int) -> FockBasis:
    _check_modes(modes)
    states = tuple(range(2**modes))
    return FockBasis(modes, None, states, {n: n for n in states})


def fixed_number_basis(modes: int, particles: int) -> FockBasis:
    _check_modes(modes)
    if not 0 <= particles <= modes:
        raise ValueError(f"particle number {particles} outside 0..{modes}")
    states = tuple(sorted(sum(1 << b for b in occ) for occ in combinations(range(modes), particles)))
    return FockBasis(modes, particles, states, {n: i for i, n in enumerate(states)})


def _parity(bits: int) -> int:
    return -1 if bin(bits).count("1") % 2 else 1


def many_body_hamiltonian(h: np.ndarray, basis: FockBasis) -> np.ndarray:
    """Matrix of sum_ij h_ij c_i^dag c_j in the given basis (real symmetric for real h)."""
    h = np.asarray(h, dtype=float)
    if h.shape != (basis.modes, basis.modes):
        raise ValueError(f"single-particle matrix {h.shape} does not match {basis.modes} modes")
    nonzero = [(i, j, h[i, j]) for i in range(basis.modes) for j in range(basis.modes) if h[i, j] != 0.0]
    dim = len(basis)
    out = np.zeros((dim, dim))
    for col, n in enumerate(basis.states):
        for i, j, v in nonzero:
            bj = 1 << j
            if not n & bj:
                continue
            m1 = n ^ bj
            bi = 1 << i
            if m1 & bi:
                continue
            sign = _parity(n & (bj - 1)) * _parity(m1 & (bi - 1))
            out[basis.index[m1 | bi], col] += sign * v
    return out


def exact_evolve(state: np.ndarray, hamiltonian: np.ndarray, time: float) -> np.ndarray:
    """exp(-i H t) |state> via full Hermitian eigendecomposition."""
    state = np.asarray(state, dtype=complex)
    if hamiltonian.shape[0] > 2**MAX_MODES:
        raise ValueError("many-body dimension exceeds the oracle guard")
    if hamiltonian.shape[0] != state.size:
        raise ValueError("state and Hamiltonian dimensions disagree")
    energies, vectors = np.linalg.eigh(hamiltonian)
    return vectors @ (np.exp(-1j * energies * time) * (vectors.conj().T @ state))


def _split_indices(basis: FockBasis, subset: list[int]) -> tuple[list[int], list[int]]:
    bits_a = [m - 1 for m in subset]
    in_a = set(bits_a)
    bits_b = [b for b in range(basis.modes) if b not in in_a]
    return bits_a, bits_b


def reduced_density_matrix(state: np.ndarray, basis: FockBasis, subset) -> np.ndarray:
    """Partial trace over the complement of `subset` (1-based mode labels).

    Amplitudes are reorganized into a (subset x complement) matrix with the
    fermionic reordering sign: each occupied subset mode i contributes a swap
    for every occupied complement mode j < i.
    """
    subset = sorted(int(m) for m in subset)
    if subset and (subset[0] < 1 or subset[-1] > basis.modes):
        raise ValueError(f"mode labels must lie in 1..{basis.modes}")
    if len(set(subset)) != len(subset):
        raise ValueError("duplicate mode labels")
    bits_a, bits_b = _split_indices(basis, subset)
    psi = np.zeros((2 ** len(bits_a), 2 ** len(bits_b)), dtype=complex)
    for amp, n in zip(np.asarray(state, dtype=complex), basis.states):
        if amp == 0:
            continue
        a_idx = sum(((n >> b) & 1) << r for r, b in enumerate(bits_a))
        b_idx = sum(((n >> b) & 1) << r for r, b in enumerate(bits_b))
        swaps = sum(
            bin(n & sum(1 << bb for bb in bits_b if bb < ba)).count("1")
            for ba in bits_a
            if (n >> ba) & 1
        )
        psi[a_idx, b_idx] += amp if swaps % 2 == 0 else -amp
    return psi @ psi.conj().T


def exact_entropy(state: np.ndarray, basis: FockBasis, subset, log_base: str = "natural") -> float:
    """Von Neumann entropy of the reduced density matrix on `subset` (1-based modes)."""
    if log_base not in ("natural", "two"):
        raise ValueError("log_base must be 'natural' or 'two'")
    if not list(subset):
        return 0.0
    rho = reduced_density_matrix(state, basis, subset)
    p = np.linalg.eigvalsh(rho)
    p = p[p > 1e-14]
    s = float(-(p * np.log(p)).sum())
    return s / math.log(2.0) if log_base == "two" else s


def exact_mutual_information(state: np.ndarray, basis: FockBasis, a_modes, r_mode: int) -> float:
    """I(A:R) in bits from exact reduced density matrices."""
    a = sorted(int(m) for m in a_modes)
    if r_mode in a:
        raise ValueError("subsystem A must not contain the reference mode")
    s_a = exact_entropy(state, basis, a, "two")
    s_r = exact_entropy(state, basis, [r_mode], "two")
    s_ar = exact_entropy(state, basis, a + [r_mode], "two")
    return s_a + s_r - s_ar


def mode_occupation(state: np.ndarray, basis: FockBasis, mode: int) -> float:
    """<n_mode> for a 1-based mode label."""
    bit = 1 << (mode - 1)
    amps = np.abs(np.asarray(state, dtype=complex)) ** 2
    return float(sum(a for a, n in zip(amps, basis.states) if n & bit))


def initial_state(setup: QuenchSetup) -> tuple[FockBasis, np.ndarray]:
    """Many-body state vector matching gaussian.initial_correlation.

    Without a reference the fixed-N basis is used (one Fock ket). With a
    reference the full space over L+1 modes carries the two-branch Bell
    superposition (c_E^dag + c_R^dag)/sqrt(2) applied to the product pattern,
    with each branch reordered into the canonical ket (signs included).
    """
    occ = occupation_pattern(setup)
    L = setup.spec.L
    if setup.reference_site is None:
        basis = fixed_number_basis(L, L // 2)
        state = np.zeros(len(basis), dtype=complex)
        state[basis.index[int(sum(1 << i for i in np.flatnonzero(occ)))]] = 1.0
        return basis, state
    basis = full_basis(L + 1)
    e_bit = setup.reference_site - 1
    r_bit = L
    rest = int(sum(1 << i for i in np.flatnonzero(occ) if i != e_bit))
    sign_e = _parity(rest & ((1 << e_bit) - 1))
    sign_r = _parity(rest)  # r is the last mode; swaps past every occupied site
    state = np.zeros(len(basis), dtype=complex)
    state[basis.index[rest | (1 << e_bit)]] += sign_e / math.sqrt(2.0)
    state[basis.index[rest | (1 << r_bit)]] += sign_r / math.sqrt(2.0)
    return basis, state
