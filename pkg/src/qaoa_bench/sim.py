"""Statevector simulation of the QAOA ansatz for Max-Cut.

Conventions (fixed, since stored parameters depend on them):

* qubit ``i`` is bit ``i`` of the basis index (little-endian);
* the cost observable is diagonal with entry ``C(z)`` = number of cut edges;
* one layer applies ``exp(-i*gamma*C)`` then ``exp(-i*beta*sum_i X_i)``;
* parameter vectors are laid out ``[beta_1..beta_p, gamma_1..gamma_p]``.

The hot loop is :func:`qaoa_expectation_vec`, which builds the state and
contracts it with the cut table in one compiled call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, InputError
from .graphs import Graph

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

SIM_CAPACITY = 24
BETA_PERIOD = math.pi
GAMMA_PERIOD = 2.0 * math.pi


# ---------------------------------------------------------------------------
# Kernels. Each has a numpy reference version; the numba build is used when
# available.


def _phase_numpy(psi, values, gamma):
    psi *= np.exp(-1j * gamma * values)


def _mixer_numpy(psi, n, beta):
    c, s = math.cos(beta), math.sin(beta)
    for q in range(n):
        v = psi.reshape(-1, 2, 1 << q)
        a0 = v[:, 0, :].copy()
        a1 = v[:, 1, :]
        v[:, 0, :] = c * a0 - 1j * s * a1
        v[:, 1, :] = c * a1 - 1j * s * a0


def _expectation_numpy(values, betas, gammas, n):
    psi = np.full(1 << n, 2.0 ** (-n / 2), dtype=np.complex128)
    for b, g in zip(betas, gammas):
        _phase_numpy(psi, values, g)
        _mixer_numpy(psi, n, b)
    return float(np.dot(psi.real ** 2 + psi.imag ** 2, values))


if numba is not None:

    @numba.njit(cache=True)
    def _phase_kernel(psi, values, gamma):
        # Cut values are small integers: tabulate the phases once.
        top = 0
        for z in range(values.shape[0]):
            if values[z] > top:
                top = values[z]
        tbl = np.empty(top + 1, dtype=np.complex128)
        for k in range(top + 1):
            tbl[k] = complex(math.cos(gamma * k), -math.sin(gamma * k))
        for z in range(psi.shape[0]):
            psi[z] *= tbl[values[z]]

    @numba.njit(cache=True)
    def _mixer_kernel(psi, n, beta):
        # (a, b) <- (c*a - i*s*b, c*b - i*s*a), written on the interleaved
        # float view; about 2x faster than complex arithmetic here.
        c = math.cos(beta)
        s = math.sin(beta)
        dim = psi.shape[0]
        v = psi.view(np.float64)
        for q in range(n):
            stride = 1 << q
            for base in range(0, dim, 2 * stride):
                for j in range(base, base + stride):
                    k = j + stride
                    ar = v[2 * j]
                    ai = v[2 * j + 1]
                    br = v[2 * k]
                    bi = v[2 * k + 1]
                    v[2 * j] = c * ar + s * bi
                    v[2 * j + 1] = c * ai - s * br
                    v[2 * k] = c * br + s * ai
                    v[2 * k + 1] = c * bi - s * ar

    @numba.njit(cache=True)
    def _expectation_kernel(values, betas, gammas, n):
        dim = 1 << n
        psi = np.empty(dim, dtype=np.complex128)
        amp = 2.0 ** (-n / 2.0)
        for z in range(dim):
            psi[z] = amp
        for k in range(betas.shape[0]):
            _phase_kernel(psi, values, gammas[k])
            _mixer_kernel(psi, n, betas[k])
        acc = 0.0
        for z in range(dim):
            a = psi[z]
            acc += (a.real * a.real + a.imag * a.imag) * values[z]
        return acc

else:  # pragma: no cover
    _phase_kernel = _phase_numpy
    _mixer_kernel = _mixer_numpy
    _expectation_kernel = _expectation_numpy


# ---------------------------------------------------------------------------
# Types


@dataclass(frozen=True, eq=False)
class CutTable:
    """Diagonal of the cost observable: ``values[z]`` = cut value of ``z``."""

    n: int
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (1 << self.n,):
            raise InputError(f"cut table for n={self.n} needs {1 << self.n} entries")
        self.values.setflags(write=False)

    @property
    def max_value(self):
        return int(self.values.max())


def _wrap(x, period):
    x = float(x)
    if 0.0 <= x <= period:
        return x
    return math.fmod(math.fmod(x, period) + period, period)


@dataclass(frozen=True)
class QaoaParams:
    """Depth-``p`` angles, wrapped into ``[0, pi]`` and ``[0, 2*pi]``.

    Values already inside the closed box are kept as given; others are
    reduced by the period. Wrapping a beta changes the state by a global
    sign only, so ``f`` is unaffected.
    """

    betas: tuple
    gammas: tuple

    def __post_init__(self):
        if len(self.betas) != len(self.gammas) or len(self.betas) == 0:
            raise InputError("betas and gammas must be non-empty and of equal length")
        object.__setattr__(self, "betas", tuple(_wrap(b, BETA_PERIOD) for b in self.betas))
        object.__setattr__(self, "gammas", tuple(_wrap(g, GAMMA_PERIOD) for g in self.gammas))

    @property
    def p(self):
        return len(self.betas)

    @classmethod
    def from_vector(cls, x):
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.size % 2:
            raise InputError("parameter vector must have even length 2p")
        p = x.size // 2
        return cls(tuple(x[:p]), tuple(x[p:]))

    def to_vector(self):
        return np.array(self.betas + self.gammas)


@dataclass
class Statevector:
    n: int
    amplitudes: np.ndarray

    def norm_sq(self):
        a = self.amplitudes
        return float(np.dot(a.real, a.real) + np.dot(a.imag, a.imag))

    def probabilities(self):
        return np.abs(self.amplitudes) ** 2


# ---------------------------------------------------------------------------
# Operations


def build_cut_table(g: Graph, capacity: int = SIM_CAPACITY) -> CutTable:
    """Cut values of all ``2**n`` basis states.

    Built by vertex doubling. Placing vertex ``k`` adds its edges to the
    smaller-index neighbours ``N_<k``: with ``k`` on side 0 the cut gains
    ``popcount(z & N_<k)``, on side 1 it gains ``|N_<k| - popcount(z & N_<k)``.
    """
    n = g.n
    if n > capacity:
        raise CapacityError(f"simulator capacity is {capacity} qubits, graph has n={n}")
    lower_nbrs = [0] * n
    for u, v in g.edges:
        lower_nbrs[v] |= 1 << u  # u < v
    values = np.zeros(1 << n, dtype=np.int64)
    for k in range(n):
        half = 1 << k
        mask = lower_nbrs[k]
        idx = np.arange(half, dtype=np.uint64)
        shared = np.bitwise_count(idx & np.uint64(mask)).astype(np.int64)
        values[half:2 * half] = values[:half] + mask.bit_count() - shared
        values[:half] += shared
    return CutTable(n, values)


def prepare_plus_state(n: int) -> Statevector:
    if n < 1:
        raise InputError("n must be >= 1")
    return Statevector(n, np.full(1 << n, 2.0 ** (-n / 2), dtype=np.complex128))


def apply_phase(state: Statevector, table: CutTable, gamma: float) -> Statevector:
    """In place: ``amp[z] *= exp(-i*gamma*C(z))``."""
    if state.n != table.n:
        raise InputError(f"state has {state.n} qubits, cut table has {table.n}")
    _phase_kernel(state.amplitudes, table.values, float(gamma))
    return state


def apply_mixer(state: Statevector, beta: float) -> Statevector:
    """In place: ``exp(-i*beta*X)`` on every qubit."""
    _mixer_kernel(state.amplitudes, state.n, float(beta))
    return state


def qaoa_state(table: CutTable, params: QaoaParams) -> Statevector:
    state = prepare_plus_state(table.n)
    for beta, gamma in zip(params.betas, params.gammas):
        apply_phase(state, table, gamma)
        apply_mixer(state, beta)
    return state


def expectation(table: CutTable, params: QaoaParams) -> float:
    """``f(beta, gamma) = <psi|C|psi>``."""
    return qaoa_expectation_vec(table, params.to_vector())


def qaoa_expectation_vec(table: CutTable, x) -> float:
    """``f`` at a flat vector ``[betas..., gammas...]`` (no wrapping needed:
    the kernel is exact for any real angles)."""
    x = np.asarray(x, dtype=np.float64)
    p = x.size // 2
    if x.size != 2 * p or p == 0:
        raise InputError("parameter vector must have even length 2p > 0")
    return float(_expectation_kernel(table.values, x[:p], x[p:], table.n))


def make_objective(table: CutTable):
    """``x -> -f(x)`` for the minimising optimizer."""
    values, n = table.values, table.n

    def objective(x):
        x = np.asarray(x, dtype=np.float64)
        p = x.size // 2
        return -_expectation_kernel(values, x[:p], x[p:], n)

    return objective
