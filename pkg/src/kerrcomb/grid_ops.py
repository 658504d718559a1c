"""Periodic Fourier collocation grid and dense operator assembly."""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import SolvabilityError, ValidationError

J_SYMPLECTIC = np.array([[0.0, 1.0], [-1.0, 0.0]])

SCALAR_KINDS = ("Lplus", "Lminus", "Ltilde", "general")
COEFFICIENT = {"Lplus": 6.0, "Lminus": 2.0, "Ltilde": 2.0, "general": 1.0}


@dataclass(frozen=True, eq=False)
class PeriodicGrid:
    """Uniform grid on [-T, T) with Fourier spectral differentiation.

    Parameters
    ----------
    n : int
        Number of nodes, even.
    half_period : float
        Half-length T of the periodic cell.
    """

    n: int
    half_period: float

    def __post_init__(self):
        if self.n <= 0 or self.n % 2:
            raise ValidationError(f"grid size must be a positive even integer, got {self.n}")
        if not self.half_period > 0:
            raise ValidationError(f"half period must be positive, got {self.half_period}")

    @cached_property
    def nodes(self):
        T = self.half_period
        x = -T + 2.0 * T * np.arange(self.n) / self.n
        x.flags.writeable = False
        return x

    @cached_property
    def wavenumbers(self):
        k = np.fft.fftfreq(self.n, d=2.0 * self.half_period / self.n) * 2.0 * np.pi
        k.flags.writeable = False
        return k

    @property
    def dx(self):
        return 2.0 * self.half_period / self.n

    @cached_property
    def d2(self):
        """Dense spectral second-derivative matrix, symmetrized."""
        k2 = self.wavenumbers ** 2
        m = np.real(np.fft.ifft(-k2[:, None] * np.fft.fft(np.eye(self.n), axis=0), axis=0))
        m = 0.5 * (m + m.T)
        m.flags.writeable = False
        return m

    def derivative(self, f, order=1):
        """Spectral derivative of a periodic sample; Nyquist mode dropped for odd orders."""
        k = self.wavenumbers.copy()
        if order % 2 == 1:
            k[self.n // 2] = 0.0
        return np.real(np.fft.ifft((1j * k) ** order * np.fft.fft(f)))

    def inner(self, f, g):
        """Trapezoid inner product over [-T, T)."""
        return float(self.dx * np.dot(f, g))

    def norm(self, f):
        return float(np.sqrt(self.dx * np.dot(f, f)))

    def integrate(self, f):
        return float(self.dx * np.sum(f))

    # parity on the grid: x_j -> -x_j is the index map j -> (n - j) mod n
    @cached_property
    def reflection_index(self):
        return (-np.arange(self.n)) % self.n

    def reflect(self, f):
        return np.asarray(f)[..., self.reflection_index]

    def even_part(self, f):
        return 0.5 * (f + self.reflect(f))

    def odd_part(self, f):
        return 0.5 * (f - self.reflect(f))

    @cached_property
    def even_basis(self):
        """Orthonormal basis (columns) of grid functions with f(-x) = f(x)."""
        n = self.n
        cols = [np.eye(n)[:, 0], np.eye(n)[:, n // 2]]
        for j in range(1, n // 2):
            v = np.zeros(n)
            v[j] = v[n - j] = np.sqrt(0.5)
            cols.append(v)
        b = np.column_stack(cols)
        b.flags.writeable = False
        return b

    @cached_property
    def odd_basis(self):
        """Orthonormal basis (columns) of grid functions with f(-x) = -f(x)."""
        n = self.n
        cols = []
        for j in range(1, n // 2):
            v = np.zeros(n)
            v[j] = np.sqrt(0.5)
            v[n - j] = -np.sqrt(0.5)
            cols.append(v)
        b = np.column_stack(cols)
        b.flags.writeable = False
        return b

    def block_basis(self, parity):
        """Basis of the two-component space with both components of one parity."""
        if parity not in ("even", "odd"):
            raise ValidationError(f"parity must be 'even' or 'odd', got {parity!r}")
        b = self.even_basis if parity == "even" else self.odd_basis
        z = np.zeros_like(b)
        return np.block([[b, z], [z, b]])


@dataclass(frozen=True, eq=False)
class LinearOperatorMatrix:
    """Dense matrix realization of an operator on the grid.

    Attributes
    ----------
    entries : ndarray
        ``n x n`` or ``2n x 2n`` real matrix, read-only.
    kind : str
        One of Lplus, Lminus, Ltilde, general, Lh_block, M_h, JLh.
    params : dict
        Parameters the operator was built from, such as ``h`` and ``alpha``.
    """

    entries: np.ndarray
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.entries.flags.writeable = False

    @property
    def size(self):
        return self.entries.shape[0]

    def __matmul__(self, v):
        return self.entries @ v


def _readonly(m):
    m = np.array(m, dtype=np.float64)
    m.flags.writeable = False
    return m


def assemble_scalar_operator(grid, potential, kind, params=None):
    """Dense ``-d^2/dx^2 + 1 - c * diag(q)`` on the grid.

    For ``Lplus`` and ``Lminus`` the potential is the real wave ``phi`` and
    ``q = phi**2`` with ``c = 6`` or ``2``. For ``Ltilde`` the potential is the
    intensity ``phi1**2 + phi2**2`` with ``c = 2``. For ``general`` the
    potential is used as given with ``c = 1``.
    """
    if kind not in SCALAR_KINDS:
        raise ValidationError(f"unknown operator kind {kind!r}")
    q = np.asarray(potential, dtype=np.float64)
    if q.shape != (grid.n,):
        raise ValidationError(f"potential has shape {q.shape}, grid has {grid.n} nodes")
    if kind in ("Lplus", "Lminus"):
        q = q * q
    m = -grid.d2 + np.eye(grid.n) - COEFFICIENT[kind] * np.diag(q)
    return LinearOperatorMatrix(_readonly(m), kind, dict(params or {}))


def _block(grid, phi1, phi2):
    eye = np.eye(grid.n)
    base = -grid.d2 + eye
    top = base - np.diag(6.0 * phi1 ** 2 + 2.0 * phi2 ** 2)
    bot = base - np.diag(2.0 * phi1 ** 2 + 6.0 * phi2 ** 2)
    off = -np.diag(4.0 * phi1 * phi2)
    return np.block([[top, off], [off, bot]])


def apply_symplectic(matrix):
    """Left-multiply a 2n x 2n block matrix by J = [[0, 1], [-1, 0]]."""
    n = matrix.shape[0] // 2
    return np.vstack([matrix[n:], -matrix[:n]])


def assemble_full_linearization(grid, profile, alpha=None):
    """Symmetric block operator L_h and the Hamiltonian matrix J L_h.

    Stability eigenvalues are ``lambda = mu - alpha`` for ``mu`` in the
    spectrum of ``J L_h``. The profile's max-norm residual is kept in
    ``params["residual"]``; it bounds how far the matrices sit from the
    exact linearization.
    """
    if profile.grid.n != grid.n or abs(profile.grid.half_period - grid.half_period) > 1e-12:
        raise ValidationError("profile was sampled on a different grid")
    alpha = profile.alpha if alpha is None else float(alpha)
    params = {"h": profile.h, "alpha": alpha, "residual": profile.residual_norm()}
    lh = _readonly(_block(grid, profile.phi1, profile.phi2))
    jlh = _readonly(apply_symplectic(lh))
    return LinearOperatorMatrix(lh, "Lh_block", params), LinearOperatorMatrix(jlh, "JLh", params)


def rotation_matrix(a0, b0):
    """The 2x2 rotation S = [[a0, -b0], [b0, a0]] that diagonalizes the leading wave."""
    return np.array([[a0, -b0], [b0, a0]])


def similarity_transform(lh, a0, b0):
    """Exact ``M_h = S^{-1} L_h S``; symmetric because S is orthogonal."""
    n = lh.size // 2
    s = np.kron(rotation_matrix(a0, b0), np.eye(n))
    m = s.T @ lh.entries @ s
    return LinearOperatorMatrix(_readonly(0.5 * (m + m.T)), "M_h", dict(lh.params, a0=a0, b0=b0))


def first_order_m_h(grid, phi0, psi1, psi2, a0, b0, d2, h):
    """First-order expansion of M_h in h about the decoupled (L+, L-) pair."""
    lp = assemble_scalar_operator(grid, phi0, "Lplus").entries
    lm = assemble_scalar_operator(grid, phi0, "Lminus").entries
    c1 = np.array([[6 * a0, -2 * b0], [-2 * b0, 2 * a0]])
    c2 = np.array([[6 * b0, 2 * a0], [2 * a0, 2 * b0]])
    cd = np.array([[0.0, 1.0], [1.0, 0.0]])
    corr = (np.kron(c1, np.diag(phi0 * psi1)) + np.kron(c2, np.diag(phi0 * psi2))
            - d2 * np.kron(cd, np.diag(phi0)))
    z = np.zeros_like(lp)
    m = np.block([[lp, z], [z, lm]]) - 2.0 * h * corr
    return LinearOperatorMatrix(_readonly(m), "M_h", {"h": h, "a0": a0, "b0": b0, "order": 1})


def numerical_kernel(op, rel_tol=1e-6):
    """Eigenvectors of a symmetric operator with |eigenvalue| < rel_tol * ||L||."""
    w, v = np.linalg.eigh(op.entries)
    scale = np.max(np.abs(w))
    mask = np.abs(w) < rel_tol * scale
    return [v[:, i] for i in np.flatnonzero(mask)]


def solve_on_complement(op, rhs, kernel_vecs, tol=1e-8):
    """Solve ``L x = rhs`` on the orthogonal complement of ``kernel_vecs``.

    Parameters
    ----------
    op : LinearOperatorMatrix
        Symmetric operator.
    rhs : ndarray
        Right-hand side, orthogonal to every kernel vector.
    kernel_vecs : sequence of ndarray
        Vectors spanning the numerical kernel.

    Returns
    -------
    ndarray
        The unique solution orthogonal to ``kernel_vecs``.

    Raises
    ------
    SolvabilityError
        If ``rhs`` has a component along the kernel above ``tol * ||rhs||``.
    """
    a = op.entries
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-12 * max(1.0, np.max(np.abs(a)))):
        raise ValidationError(f"operator {op.kind} is not symmetric")
    rhs = np.asarray(rhs, dtype=np.float64)
    q, _ = np.linalg.qr(np.column_stack(kernel_vecs)) if kernel_vecs else (np.zeros((rhs.size, 0)), None)
    rn = np.linalg.norm(rhs)
    for i, k in enumerate(kernel_vecs):
        c = float(np.dot(rhs, k) / np.linalg.norm(k))
        if abs(c) > tol * max(rn, 1e-300):
            raise SolvabilityError(
                f"right-hand side not orthogonal to kernel vector {i}: inner product {c:.3e}"
            )

    def project(v):
        return v - q @ (q.T @ v)

    b = project(rhs)
    # bordered system: the kernel directions are pinned to zero
    k = q.shape[1]
    big = np.block([[a, q], [q.T, np.zeros((k, k))]])
    sol = np.linalg.solve(big, np.concatenate([b, np.zeros(k)]))
    return project(sol[: rhs.size])
