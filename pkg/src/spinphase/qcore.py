"""Dense complex operator algebra for small qubit registers.

Conventions used throughout the package:
  * site indices are 1-based; site 1 is the leftmost tensor factor,
  * |up> = (1, 0) is the +1 eigenvector of sigma_z,
  * all operators are dense complex numpy arrays of dimension 2^n.
"""

import numpy as np

from .errors import NumericalError

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

_PAULI = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}

HERMITICITY_ATOL = 1e-12
TRACE_ATOL = 1e-12
PSD_ATOL = 1e-10


def pauli(axis):
    """Return a copy of the Pauli matrix for axis 'x', 'y' or 'z'."""
    try:
        return _PAULI[axis].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}, expected 'x', 'y' or 'z'") from None


def kron_all(ops):
    """Kronecker product of a sequence of operators, left to right."""
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


def n_sites(dim):
    """Number of qubits for a Hilbert-space dimension; rejects non powers of 2."""
    n = int(dim).bit_length() - 1
    if dim <= 0 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of 2")
    return n


def embed(op, site, n):
    """Place a 2x2 operator at `site` (1-based) of an n-qubit register.

    Acts as the identity on every other site; site 1 is the leftmost factor.
    """
    op = np.asarray(op, dtype=complex)
    if op.shape != (2, 2):
        raise ValueError(f"embed expects a 2x2 operator, got shape {op.shape}")
    if not 1 <= site <= n:
        raise ValueError(f"site {site} out of range [1, {n}]")
    return kron_all([op if i == site else IDENTITY_2 for i in range(1, n + 1)])


def is_hermitian(a, atol=HERMITICITY_ATOL):
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and np.max(np.abs(a - a.conj().T)) < atol


def assert_hermitian(a, atol=HERMITICITY_ATOL, name="operator"):
    if not is_hermitian(a, atol):
        raise NumericalError(f"{name} is not Hermitian within {atol:g}")


def herm_eig(a, check=True):
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues, eigenvectors) with eigenvalues ascending and the
    eigenvector columns orthonormal. Each column's phase is fixed by making
    its largest-magnitude component real and positive, so results are
    deterministic across runs.
    """
    a = np.asarray(a, dtype=complex)
    if check:
        assert_hermitian(a)
    w, v = np.linalg.eigh(a)
    for k in range(v.shape[1]):
        col = v[:, k]
        idx = int(np.argmax(np.abs(col)))
        ph = col[idx]
        if abs(ph) > 0:
            v[:, k] = col * (ph.conjugate() / abs(ph))
    return w, v


def check_density_matrix(rho, atol_trace=TRACE_ATOL, atol_psd=PSD_ATOL, name="state"):
    """Validate Hermiticity, unit trace and positivity of a density matrix."""
    rho = np.asarray(rho)
    assert_hermitian(rho, name=name)
    tr = np.trace(rho)
    if abs(tr - 1.0) > atol_trace:
        raise NumericalError(f"{name} trace {tr} deviates from 1 by more than {atol_trace:g}")
    wmin = np.linalg.eigvalsh(rho)[0]
    if wmin < -atol_psd:
        raise NumericalError(f"{name} has negative eigenvalue {wmin:.3e}")


def clip_negative_eigenvalues(rho):
    """Project tiny negative eigenvalues to 0 and renormalize.

    Only meant for export boundaries; in-library numerics keep the raw matrix.
    """
    w, v = herm_eig(np.asarray(rho, dtype=complex))
    w = np.clip(w, 0.0, None)
    out = (v * w) @ v.conj().T
    return out / np.trace(out).real


def pure_density(vec):
    """Density matrix |vec><vec| of a normalized state vector."""
    vec = np.asarray(vec, dtype=complex)
    return np.outer(vec, vec.conj())


def basis_vector(bits):
    """Product basis vector from iterable of 0 (up) / 1 (down), site 1 first."""
    idx = 0
    for b in bits:
        idx = 2 * idx + int(b)
    vec = np.zeros(2 ** len(bits), dtype=complex)
    vec[idx] = 1.0
    return vec


def all_up_vector(n):
    return basis_vector([0] * n)


def all_down_vector(n):
    return basis_vector([1] * n)


def validate_label(sites, n):
    """Validate an ordered site subset (1-based, strictly increasing)."""
    sites = tuple(int(s) for s in sites)
    if not 1 <= len(sites) <= n:
        raise ValueError(f"label {sites} must select between 1 and {n} sites")
    if any(s < 1 or s > n for s in sites):
        raise ValueError(f"label {sites} has indices outside [1, {n}]")
    if any(b <= a for a, b in zip(sites, sites[1:])):
        raise ValueError(f"label {sites} must be strictly increasing")
    return sites


def label_name(sites, n):
    """Compact name for a site subset: 'tot' for all sites, else the indices."""
    sites = tuple(sites)
    if len(sites) == n:
        return "tot"
    if all(s <= 9 for s in sites):
        return "".join(str(s) for s in sites)
    return ".".join(str(s) for s in sites)


def parse_label(text, n):
    """Inverse of label_name: 'tot', '135', or dot-separated '1.3.10'."""
    text = text.strip()
    if text == "tot":
        return tuple(range(1, n + 1))
    if "." in text:
        sites = [int(p) for p in text.split(".")]
    else:
        if not text.isdigit():
            raise ValueError(f"cannot parse correlation label {text!r}")
        sites = [int(c) for c in text]
    return validate_label(sites, n)


def partial_trace(rho, keep, n=None):
    """Reduced density matrix on the sites in `keep` (1-based, increasing).

    Traces out every other site; the result keeps the relative order of the
    retained sites.
    """
    rho = np.asarray(rho, dtype=complex)
    if n is None:
        n = n_sites(rho.shape[0])
    elif rho.shape[0] != 2**n:
        raise ValueError(f"state dimension {rho.shape[0]} does not match n={n}")
    keep = validate_label(keep, n)
    drop = [i for i in range(n) if (i + 1) not in keep]
    t = rho.reshape((2,) * (2 * n))
    for d in sorted(drop, reverse=True):
        t = np.trace(t, axis1=d, axis2=d + t.ndim // 2)
    k = len(keep)
    return t.reshape(2**k, 2**k)
