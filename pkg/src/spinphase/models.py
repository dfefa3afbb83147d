"""Cyclic spin-1/2 chain Hamiltonians, symmetries and ground-state selection.

Implemented families (periodic boundary, sigma_{N+1} = sigma_1):
  ti   H = -sum_i [lambda sx_i sx_{i+1} + h sz_i]
  xy   H = -sum_i {lambda/2 [(1+gamma) sx_i sx_{i+1} + (1-gamma) sy_i sy_{i+1}] + h sz_i}
  xxz  H = (J/4) sum_i [sx_i sx_{i+1} + sy_i sy_{i+1} + delta sz_i sz_{i+1}]

The xy family reduces to ti at gamma = 1; the xxz spectrum depends only on
the relative sign of J and delta (staggered-flip similarity).
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import quad

from .errors import ConfigError, NumericalError, PolicyError
from .qcore import (SIGMA_X, SIGMA_Y, SIGMA_Z, all_up_vector, embed, herm_eig, kron_all,
                    pure_density)

FAMILIES = ("ti", "xy", "xxz")
POLICIES = ("symmetric", "mixture", "aligned_up")

DEGENERACY_TOL_FACTOR = 1e-9
QUAD_ABS_TOL = 1e-10
QUAD_LIMIT = 200
_PARITY_DEFINITE_ATOL = 1e-6
_ALIGNED_OVERLAP_ATOL = 1e-8


@dataclass(frozen=True)
class ModelSpec:
    """One chain at fixed parameters. `lam` drives ti/xy, `delta` drives xxz."""

    family: str
    n: int = 6
    lam: float = 0.0
    h: float = 1.0
    gamma: float = 1.0
    j: float = 1.0
    delta: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown model family {self.family!r}, expected one of {FAMILIES}")
        if self.n < 2:
            raise ConfigError("chain length n must be at least 2")
        for name in ("lam", "h", "gamma", "j", "delta"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"parameter {name} must be finite")
        if self.family == "xy" and not -1.0 <= self.gamma <= 1.0:
            raise ConfigError("xy anisotropy gamma must lie in [-1, 1]")

    def with_param(self, value):
        """Copy with the family's sweep parameter (lam or delta) replaced."""
        if self.family == "xxz":
            return replace(self, delta=float(value))
        return replace(self, lam=float(value))

    @property
    def sweep_param(self):
        return "delta" if self.family == "xxz" else "lambda"


def _bond_pairs(n):
    return [(i, i % n + 1) for i in range(1, n + 1)]


def build_hamiltonian(spec):
    """Dense Hamiltonian of the chain described by `spec`."""
    n = spec.n
    dim = 2**n
    H = np.zeros((dim, dim), dtype=complex)
    sx = [embed(SIGMA_X, i, n) for i in range(1, n + 1)]
    sy = [embed(SIGMA_Y, i, n) for i in range(1, n + 1)]
    sz = [embed(SIGMA_Z, i, n) for i in range(1, n + 1)]
    if spec.family == "ti":
        for i, j in _bond_pairs(n):
            H -= spec.lam * sx[i - 1] @ sx[j - 1]
        for i in range(n):
            H -= spec.h * sz[i]
    elif spec.family == "xy":
        for i, j in _bond_pairs(n):
            H -= spec.lam / 2 * (1 + spec.gamma) * sx[i - 1] @ sx[j - 1]
            H -= spec.lam / 2 * (1 - spec.gamma) * sy[i - 1] @ sy[j - 1]
        for i in range(n):
            H -= spec.h * sz[i]
    else:
        for i, j in _bond_pairs(n):
            H += spec.j / 4 * (sx[i - 1] @ sx[j - 1] + sy[i - 1] @ sy[j - 1]
                               + spec.delta * sz[i - 1] @ sz[j - 1])
    return H


def spin_parity_operator(n):
    """Product of sigma_z over all sites (diagonal, involutory)."""
    return kron_all([SIGMA_Z] * n)


def spin_parity_diagonal(n):
    """Diagonal of the spin parity operator: (-1)^(number of down spins)."""
    d = np.ones(1)
    for _ in range(n):
        d = np.kron(d, np.array([1.0, -1.0]))
    return d


def staggered_flip_operator(n):
    """Product of sigma_z over the even sites; requires even n."""
    if n % 2:
        raise ValueError("staggered flip operator needs an even number of sites")
    return kron_all([SIGMA_Z if i % 2 == 0 else np.eye(2, dtype=complex)
                     for i in range(1, n + 1)])


def total_sz(n):
    """z component of the total spin, (1/2) sum_l sigma_z_l."""
    out = np.zeros((2**n, 2**n), dtype=complex)
    for i in range(1, n + 1):
        out += embed(SIGMA_Z, i, n)
    return out / 2


def total_sz_diagonal(n):
    d = np.zeros(1)
    for _ in range(n):
        d = np.add.outer(d, np.array([0.5, -0.5])).ravel()
    return d


def rotation_z(phi, n):
    """Global spin rotation exp(i phi S_T^z) about the z axis (diagonal, unitary)."""
    return np.diag(np.exp(1j * phi * total_sz_diagonal(n)))


def symmetry_diagonal(spec):
    """Diagonal of the symmetry operator used for ground-state selection."""
    if spec.family == "xxz":
        return total_sz_diagonal(spec.n)
    return spin_parity_diagonal(spec.n)


@dataclass
class GroundStateResult:
    energy: float
    degeneracy: int
    state: np.ndarray
    parity: int | None
    gap: float


def _state_parity(state, n):
    expect = float(np.real(np.sum(np.diagonal(state) * spin_parity_diagonal(n))))
    if abs(abs(expect) - 1.0) < _PARITY_DEFINITE_ATOL:
        return 1 if expect > 0 else -1
    return None


def ground_state(spec, policy="symmetric", degeneracy_tol=None):
    """Ground state of the chain with a symmetry-respecting degeneracy policy.

    Eigenvalues within `degeneracy_tol` (default 1e-9 x spectral range) of the
    lowest form the ground space. A unique ground state is returned as-is.
    Inside a degenerate space:
      symmetric  -- diagonalize the model's symmetry operator and return the
                    lowest definite-symmetry state; on energy ties the most
                    positive symmetry sector wins,
      mixture    -- maximally mixed state on the ground space,
      aligned_up -- the all-up product state, which must lie in the space.
    """
    if policy not in POLICIES:
        raise ConfigError(f"unknown ground-state policy {policy!r}, expected one of {POLICIES}")
    H = build_hamiltonian(spec)
    w, v = herm_eig(H, check=False)
    spread = float(w[-1] - w[0])
    if degeneracy_tol is None:
        degeneracy_tol = DEGENERACY_TOL_FACTOR * max(spread, 1.0)
    elif degeneracy_tol <= 0:
        raise ConfigError("degeneracy_tol must be positive")
    g = int(np.sum(w - w[0] <= degeneracy_tol))
    gap = float(w[1] - w[0])
    n = spec.n

    if g == 1:
        state = pure_density(v[:, 0])
        return GroundStateResult(float(w[0]), 1, state, _state_parity(state, n), gap)

    V = v[:, :g]
    if policy == "mixture":
        state = (V @ V.conj().T) / g
        return GroundStateResult(float(w[0]), g, state, _state_parity(state, n), gap)

    if policy == "aligned_up":
        up = all_up_vector(n)
        overlap = float(np.linalg.norm(V.conj().T @ up))
        if overlap < 1.0 - _ALIGNED_OVERLAP_ATOL:
            raise PolicyError(
                f"aligned_up policy: all-up state not in the ground space "
                f"(projection norm {overlap:.6f})")
        state = pure_density(up)
        return GroundStateResult(float(w[0]), g, state, _state_parity(state, n), gap)

    # symmetric: resolve the ground space into symmetry sectors
    sym = symmetry_diagonal(spec)
    block = V.conj().T @ (sym[:, None] * V)
    _, rot = herm_eig(0.5 * (block + block.conj().T), check=False)
    tie_tol = 1e-12 * max(spread, 1.0)
    best = None
    for k in range(g):
        vec = V @ rot[:, k]
        energy = float(np.real(np.vdot(vec, H @ vec)))
        sector = float(np.real(np.vdot(vec, sym * vec)))
        if best is None or energy < best[0] - tie_tol or (
                abs(energy - best[0]) <= tie_tol and sector > best[1]):
            best = (energy, sector, vec)
    state = pure_density(best[2])
    return GroundStateResult(float(w[0]), g, state, _state_parity(state, n), gap)


# ---------------------------------------------------------------------------
# transverse-Ising analytic references (classical and thermodynamic limit)


def ti_classical_energy(lam):
    """Classical ground-state energy per spin; breakpoint at lam = 1/2."""
    if lam >= 0.5:
        return -(1 + 4 * lam**2) / (4 * lam)
    return -1.0


def ti_classical_mx(lam):
    if lam >= 0.5:
        return 0.5 * math.sqrt(1 - 1 / (4 * lam**2))
    return 0.0


def ti_classical_mz(lam):
    if lam >= 0.5:
        return 1 / (4 * lam)
    return 0.5


def _quad(f, lo, hi, what):
    value, err = quad(f, lo, hi, epsabs=QUAD_ABS_TOL, epsrel=0.0, limit=QUAD_LIMIT)
    if err > 10 * QUAD_ABS_TOL:
        raise NumericalError(f"{what}: quadrature error estimate {err:.3e} exceeds tolerance")
    return value, err


def ti_thermo_energy(lam):
    """Infinite-chain ground-state energy per spin (adaptive quadrature)."""
    if lam < 0:
        raise ValueError("lam must be non-negative")
    value, _ = _quad(lambda k: math.sqrt(1 + 2 * lam * math.cos(k) + lam**2),
                     0.0, math.pi, "ti_thermo_energy")
    return -value / math.pi


def ti_thermo_mx(lam):
    """Infinite-chain magnetization along the coupling axis (closed form)."""
    if lam < 0:
        raise ValueError("lam must be non-negative")
    if lam < 1.0:
        return 0.0
    return 0.5 * (1 - 1 / lam**2) ** 0.125


def ti_thermo_mz(lam):
    """Infinite-chain magnetization along the field axis (adaptive quadrature)."""
    if lam < 0:
        raise ValueError("lam must be non-negative")
    value, _ = _quad(
        lambda k: (1 + lam * math.cos(k)) / math.sqrt(1 + 2 * lam * math.cos(k) + lam**2),
        0.0, math.pi, "ti_thermo_mz")
    return value / (2 * math.pi)


# ---------------------------------------------------------------------------
# xy ground-state factorization


def xy_factorization_point(gamma):
    """Coupling at which the xy chain ground space factorizes: 1/sqrt(1-gamma^2).

    Returns math.inf at gamma = 1 (the Ising limit has no finite factorization
    point); callers must branch on isinf instead of doing arithmetic with it.
    """
    if not 0.0 < gamma <= 1.0:
        raise ValueError("gamma must lie in (0, 1]")
    if gamma == 1.0:
        return math.inf
    return 1.0 / math.sqrt(1.0 - gamma**2)


def xy_factorization_angle(gamma):
    """Tilt of the factorized product state from the z axis, arccos sqrt((1-g)/(1+g))."""
    if not 0.0 < gamma <= 1.0:
        raise ValueError("gamma must lie in (0, 1]")
    return math.acos(math.sqrt((1.0 - gamma) / (1.0 + gamma)))


__all__ = [
    "FAMILIES", "POLICIES", "ModelSpec", "GroundStateResult", "build_hamiltonian",
    "spin_parity_operator", "spin_parity_diagonal", "staggered_flip_operator", "total_sz",
    "total_sz_diagonal", "rotation_z", "symmetry_diagonal", "ground_state",
    "ti_classical_energy", "ti_classical_mx", "ti_classical_mz", "ti_thermo_energy",
    "ti_thermo_mx", "ti_thermo_mz", "xy_factorization_point", "xy_factorization_angle",
    "DEGENERACY_TOL_FACTOR",
]
