"""Displaced-parity Wigner kernel, equal-angle evaluation and sphere sampling.

The single-qubit kernel is the rotated parity-like operator
R(theta, phi) * (1 + sqrt(3) sigma_z)/2 * R(theta, phi)^dagger with
R = exp(-i sigma_z phi/2) exp(-i sigma_y theta/2); the third Euler angle
commutes with the parity operator and is dropped. Multi-qubit kernels are
plain tensor products, and the Wigner value of a state is Tr[rho * kernel].
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError
from .qcore import (IDENTITY_2, SIGMA_X, SIGMA_Y, SIGMA_Z, all_down_vector, all_up_vector,
                    basis_vector, kron_all, n_sites, partial_trace, pure_density,
                    validate_label)

SQRT3 = np.sqrt(3.0)
PARITY_POINT_OP = 0.5 * (IDENTITY_2 + SQRT3 * SIGMA_Z)

# eigenvalues of the single-qubit kernel at every phase point
KERNEL_EIG_HI = 0.5 * (1.0 + SQRT3)
KERNEL_EIG_LO = 0.5 * (1.0 - SQRT3)

IMAG_RESIDUE_ATOL = 1e-12
_ANGLE_SLACK = 1e-9


def _check_point(theta, phi):
    if not (np.isfinite(theta) and np.isfinite(phi)):
        raise ValueError("phase point angles must be finite")
    if theta < -_ANGLE_SLACK or theta > np.pi + _ANGLE_SLACK:
        raise ValueError(f"theta={theta} outside [0, pi]")
    if phi < -_ANGLE_SLACK or phi >= 2 * np.pi + _ANGLE_SLACK:
        raise ValueError(f"phi={phi} outside [0, 2*pi)")


def rotation_single(theta, phi, third_euler=0.0):
    """SU(2) rotation exp(-i sz phi/2) exp(-i sy theta/2) exp(-i sz Phi/2)."""
    rz = np.array([[np.exp(-0.5j * phi), 0.0], [0.0, np.exp(0.5j * phi)]])
    ry = np.array([[np.cos(theta / 2), -np.sin(theta / 2)],
                   [np.sin(theta / 2), np.cos(theta / 2)]], dtype=complex)
    rz2 = np.array([[np.exp(-0.5j * third_euler), 0.0], [0.0, np.exp(0.5j * third_euler)]])
    return rz @ ry @ rz2


def kernel_single(theta, phi):
    """Single-qubit displaced parity kernel at phase point (theta, phi)."""
    _check_point(theta, phi)
    r = rotation_single(theta, phi)
    return r @ PARITY_POINT_OP @ r.conj().T


def kernel_multi(points, n=None):
    """Tensor-product kernel for one phase point per qubit."""
    points = list(points)
    if n is not None and len(points) != n:
        raise ValueError(f"expected {n} phase points, got {len(points)}")
    return kron_all([kernel_single(t, p) for (t, p) in points])


def _kernel_batch(thetas, phis):
    """Kernels for many points at once, shape (npoints, 2, 2).

    Uses the closed form (1 + sqrt(3) n.sigma)/2 with n the Bloch direction,
    which equals the rotated-parity construction (tested property).
    """
    st, ct = np.sin(thetas), np.cos(thetas)
    sp, cp = np.sin(phis), np.cos(phis)
    k = np.empty((len(thetas), 2, 2), dtype=complex)
    k[:, 0, 0] = 0.5 * (1.0 + SQRT3 * ct)
    k[:, 1, 1] = 0.5 * (1.0 - SQRT3 * ct)
    k[:, 0, 1] = 0.5 * SQRT3 * st * (cp - 1j * sp)
    k[:, 1, 0] = 0.5 * SQRT3 * st * (cp + 1j * sp)
    return k


def _real_trace(value):
    if abs(value.imag) > IMAG_RESIDUE_ATOL:
        raise NumericalError(f"Wigner value has imaginary residue {value.imag:.3e}")
    return float(value.real)


def wigner_value(rho, points):
    """Wigner function Tr[rho * kernel(points)] of an n-qubit state.

    `points` is a sequence of (theta, phi), one entry per qubit.
    """
    rho = np.asarray(rho, dtype=complex)
    n = n_sites(rho.shape[0])
    kernel = kernel_multi(points, n)
    return _real_trace(np.trace(rho @ kernel))


def equal_angle_point(rho, sites, theta, phi, n=None):
    """Equal-angle slice of the reduced Wigner function for a site subset.

    Reduces the state by partial trace over the non-selected sites, then
    evaluates the Wigner value with every retained sphere at (theta, phi).
    """
    rho = np.asarray(rho, dtype=complex)
    if n is None:
        n = n_sites(rho.shape[0])
    sites = validate_label(sites, n)
    reduced = partial_trace(rho, sites, n)
    return wigner_value(reduced, [(theta, phi)] * len(sites))


def _equal_angle_row(rho_reduced, k, thetas, phis):
    """Vectorized equal-angle values of a k-qubit state over a batch of points."""
    kernels = _kernel_batch(thetas, phis)
    # interleave row/column axes per site: (r1, c1, r2, c2, ...)
    t = rho_reduced.reshape((2,) * (2 * k))
    order = [ax for i in range(k) for ax in (i, i + k)]
    t = np.transpose(t, order)
    # contract the trailing (r_i, c_i) pair with each kernel in turn
    out = np.einsum("...ab,gba->g...", t, kernels)
    for _ in range(k - 1):
        out = np.einsum("g...ab,gba->g...", out, kernels)
    if np.max(np.abs(out.imag)) > IMAG_RESIDUE_ATOL:
        raise NumericalError("equal-angle field has non-negligible imaginary residue")
    return out.real


@dataclass(frozen=True)
class SphereGrid:
    """Rectangular sphere sampling: theta in [0, pi] inclusive, phi in [0, 2*pi) exclusive."""

    n_theta: int = 181
    n_phi: int = 360

    def __post_init__(self):
        if self.n_theta < 2 or self.n_phi < 2:
            raise ValueError("SphereGrid needs at least 2 samples per axis")

    @property
    def thetas(self):
        return np.linspace(0.0, np.pi, self.n_theta)

    @property
    def phis(self):
        return np.arange(self.n_phi) * (2 * np.pi / self.n_phi)


@dataclass
class SphereField:
    """Equal-angle Wigner values of one correlation label on a sphere grid."""

    sites: tuple
    grid: SphereGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.values.shape != (self.grid.n_theta, self.grid.n_phi):
            raise ValueError("field values shape does not match grid")


def sphere_field(rho, sites, grid=None, n=None):
    """Sample the equal-angle reduced Wigner function on a sphere grid.

    values[i, j] corresponds to (thetas[i], phis[j]); rows are evaluated
    theta-major so the output layout is independent of evaluation order.
    """
    if grid is None:
        grid = SphereGrid()
    rho = np.asarray(rho, dtype=complex)
    if n is None:
        n = n_sites(rho.shape[0])
    sites = validate_label(sites, n)
    reduced = partial_trace(rho, sites, n)
    k = len(sites)
    phis = grid.phis
    values = np.empty((grid.n_theta, grid.n_phi))
    for i, theta in enumerate(grid.thetas):
        values[i] = _equal_angle_row(reduced, k, np.full(grid.n_phi, theta), phis)
    return SphereField(sites=sites, grid=grid, values=values)


# ---------------------------------------------------------------------------
# reference states

REFERENCE_KINDS = (
    "up", "up_up", "up_down", "bell_psi_plus", "singlet", "psi_plus_4",
    "ghz_plus", "ghz_minus", "neel_minus_4", "neel_minus_6", "mixed_single",
    "ghz_mixture",
)

_PARAMETRIC_KINDS = {"ghz_plus", "ghz_minus", "ghz_mixture"}


def _ghz_vector(n, sign):
    return (all_up_vector(n) + sign * all_down_vector(n)) / np.sqrt(2.0)


def reference_state(kind, n=None):
    """Density matrix of a named reference state.

    ghz_plus / ghz_minus / ghz_mixture take the qubit count `n`; every other
    kind has a fixed size.
    """
    if kind in _PARAMETRIC_KINDS:
        if n is None or n < 2:
            raise ValueError(f"reference state {kind!r} needs n >= 2")
    elif n is not None:
        raise ValueError(f"reference state {kind!r} does not take n")

    if kind == "up":
        return pure_density(basis_vector([0]))
    if kind == "up_up":
        return pure_density(basis_vector([0, 0]))
    if kind == "up_down":
        return pure_density(basis_vector([0, 1]))
    if kind == "bell_psi_plus":
        return pure_density((basis_vector([0, 1]) + basis_vector([1, 0])) / np.sqrt(2.0))
    if kind == "singlet":
        return pure_density((basis_vector([0, 1]) - basis_vector([1, 0])) / np.sqrt(2.0))
    if kind == "psi_plus_4":
        return pure_density((basis_vector([0, 0, 1, 1]) + basis_vector([1, 1, 0, 0])) / np.sqrt(2.0))
    if kind == "ghz_plus":
        return pure_density(_ghz_vector(n, +1.0))
    if kind == "ghz_minus":
        return pure_density(_ghz_vector(n, -1.0))
    if kind == "neel_minus_4":
        return pure_density((basis_vector([0, 1, 0, 1]) - basis_vector([1, 0, 1, 0])) / np.sqrt(2.0))
    if kind == "neel_minus_6":
        return pure_density(
            (basis_vector([0, 1, 0, 1, 0, 1]) - basis_vector([1, 0, 1, 0, 1, 0])) / np.sqrt(2.0))
    if kind == "mixed_single":
        return IDENTITY_2.copy() / 2.0
    if kind == "ghz_mixture":
        return 0.5 * (pure_density(all_up_vector(n)) + pure_density(all_down_vector(n)))
    raise ValueError(f"unknown reference state kind {kind!r}")


# ---------------------------------------------------------------------------
# informational-completeness reconstruction

_PAULI_BASIS_1 = (IDENTITY_2, SIGMA_X, SIGMA_Y, SIGMA_Z)


def _kernel_pauli_factors(theta, phi):
    """Tr[b * kernel] for b in (I, sx, sy, sz): (1, sqrt3*nx, sqrt3*ny, sqrt3*nz)."""
    st = np.sin(theta)
    return np.array([1.0, SQRT3 * st * np.cos(phi), SQRT3 * st * np.sin(phi),
                     SQRT3 * np.cos(theta)])


def reconstruct_density(samples, n):
    """Least-squares state reconstruction from Wigner samples.

    `samples` is a sequence of (points, value) pairs where `points` lists one
    (theta, phi) per qubit. The state is parametrized in the Hermitian Pauli
    product basis with the unit-trace coefficient fixed, so the solution is
    Hermitian with trace 1 by construction. Returns (rho, residual) where
    residual is the root-sum-square misfit of the sampled values.

    Raises NumericalError when fewer than 4^n samples are supplied or the
    induced linear system is rank deficient.
    """
    samples = list(samples)
    dim = 2**n
    n_params = 4**n
    if len(samples) < n_params:
        raise NumericalError(
            f"reconstruction for n={n} needs at least {n_params} samples, got {len(samples)}")

    combos = list(itertools.product(range(4), repeat=n))
    design = np.empty((len(samples), n_params))
    values = np.empty(len(samples))
    for s, (points, value) in enumerate(samples):
        points = list(points)
        if len(points) != n:
            raise ValueError(f"sample {s} has {len(points)} points, expected {n}")
        factors = [_kernel_pauli_factors(t, p) for (t, p) in points]
        for k, combo in enumerate(combos):
            prod = 1.0
            for i, c in enumerate(combo):
                prod *= factors[i][c]
            design[s, k] = prod / dim
        values[s] = value

    rank = np.linalg.matrix_rank(design)
    if rank < n_params:
        raise NumericalError(
            f"sample set induces a rank-{rank} system; {n_params} independent rows needed")

    # unit trace fixes the identity coefficient to 1
    rhs = values - design[:, 0]
    coeffs, _, _, _ = np.linalg.lstsq(design[:, 1:], rhs, rcond=None)

    rho = np.eye(dim, dtype=complex) / dim
    for k, combo in enumerate(combos[1:]):
        op = kron_all([_PAULI_BASIS_1[c] for c in combo])
        rho += coeffs[k] * op / dim
    residual = float(np.linalg.norm(design[:, 1:] @ coeffs - rhs))
    return rho, residual
