"""Dense eigenanalysis of the linearization about a steady state."""

from dataclasses import dataclass, field

import numpy as np

from .errors import MultiplicityError, SpectrumError, ValidationError

NEGATIVE_TOL = 1e-8
CLUSTER_TOL = 1e-6
SPECIAL_TOL = 1e-5


def _cluster_tol(mu, floor=0.0):
    return max(CLUSTER_TOL * (1.0 + abs(mu)), floor)


def roundoff_floor(matrix, data_error=0.0):
    """How far a 2x2 Jordan block of ``A`` can be split by errors in ``A``.

    The zero eigenvalue of J L_h is defective at h = 0, and the translational
    one stays defective at alpha = 0 for every h. A perturbation of size
    ``eta`` splits such a pair by about ``sqrt(2 eta)``, so eigenvalues near
    zero are resolved only to ``max(2 sqrt(eps ||A||), sqrt(32 eta))``.

    Parameters
    ----------
    matrix : ndarray
    data_error : float
        Size of the error in the entries, e.g. the profile residual.
    """
    rounding = 2.0 * float(np.sqrt(np.finfo(float).eps * np.max(np.abs(matrix))))
    return max(rounding, float(np.sqrt(32.0 * max(data_error, 0.0))))


@dataclass(eq=False)
class SpectrumReport:
    """Spectrum of J L_h with its classification.

    Attributes
    ----------
    eigenvalues_mu : ndarray (complex)
        Eigenvalues of J L_h.
    eigenvalues_lambda : ndarray (complex)
        Stability eigenvalues ``mu - alpha``.
    n_Lh, n_even, n_odd : int or None
        Negative-eigenvalue counts of L_h, filled when L_h is supplied.
    unstable_real : list of float
        Real stability eigenvalues with positive real part.
    line_deviation : float
        Max ``|Re lambda + alpha|`` excluding the two special eigenvalues.
    special : dict
        ``zero`` and ``minus_two_alpha`` flags with the matched values.
    krein : list of (complex, int)
        Krein sign of each simple imaginary ``mu`` with positive imaginary part.
    classes : list of str
        Class label per eigenvalue, aligned with ``eigenvalues_mu``.
    roundoff_floor : float
        Resolution limit near zero; real parts below it are not called
        unstable, and special values are matched to within it.
    """

    eigenvalues_mu: np.ndarray
    eigenvalues_lambda: np.ndarray
    alpha: float
    n_Lh: int = None
    n_even: int = None
    n_odd: int = None
    unstable_real: list = field(default_factory=list)
    line_deviation: float = 0.0
    special: dict = field(default_factory=dict)
    krein: list = field(default_factory=list)
    classes: list = field(default_factory=list)
    pairing_error: float = 0.0
    roundoff_floor: float = 0.0

    @property
    def max_real_lambda(self):
        return float(np.max(self.eigenvalues_lambda.real))


def _eig(matrix, vectors=False):
    try:
        if vectors:
            return np.linalg.eig(matrix)
        return np.linalg.eigvals(matrix), None
    except np.linalg.LinAlgError as exc:
        cond = np.linalg.cond(matrix)
        raise SpectrumError(f"eigensolver failed ({exc}); condition number {cond:.3e}") from exc


def pairing_error(mu):
    """Max distance from each of -mu and conj(mu) to the nearest spectrum point."""
    mu = np.asarray(mu)
    worst = 0.0
    for target in (-mu, np.conj(mu)):
        d = np.min(np.abs(target[:, None] - mu[None, :]), axis=1) / (1.0 + np.abs(target))
        worst = max(worst, float(np.max(d)))
    return worst


def index_counts(lh, grid):
    """Negative eigenvalues of L_h on the full space and the even and odd subspaces."""
    a = lh.entries
    full = int(np.sum(np.linalg.eigvalsh(a) < -NEGATIVE_TOL))
    counts = []
    for parity in ("even", "odd"):
        b = grid.block_basis(parity) if a.shape[0] == 2 * grid.n else (
            grid.even_basis if parity == "even" else grid.odd_basis)
        counts.append(int(np.sum(np.linalg.eigvalsh(b.T @ a @ b) < -NEGATIVE_TOL)))
    return full, counts[0], counts[1]


def parity_eigenvalues(op, grid, parity):
    """Eigenvalues of a symmetric operator restricted to one parity subspace."""
    a = op.entries
    if a.shape[0] == 2 * grid.n:
        b = grid.block_basis(parity)
    else:
        b = grid.even_basis if parity == "even" else grid.odd_basis
    return np.linalg.eigvalsh(b.T @ a @ b)


def _krein_value(z, lh):
    # phase that maximizes ||Re z||
    zz = np.dot(z, z)
    theta = -0.5 * np.angle(zz)
    x = np.real(np.exp(1j * theta) * z)
    x = x / np.linalg.norm(x)
    return float(x @ lh @ x)


def krein_signature(jlh, lh, mu, parity=None, grid=None):
    """Krein sign of a simple imaginary eigenvalue ``mu`` of J L_h.

    Parameters
    ----------
    jlh, lh : LinearOperatorMatrix
    mu : complex
        Approximate eigenvalue; the nearest computed one is used.
    parity : {"even", "odd"}, optional
        Restrict to a parity subspace, where eigenvalues are generically simple.
    grid : PeriodicGrid
        Required with ``parity``.

    Returns
    -------
    int
        Sign of ``<Re z, L_h Re z>``.

    Raises
    ------
    MultiplicityError
        If another eigenvalue lies within the clustering tolerance.
    """
    a, l = jlh.entries, lh.entries
    if parity is not None:
        if grid is None:
            raise ValidationError("parity restriction needs the grid")
        b = grid.block_basis(parity)
        a, l = b.T @ a @ b, b.T @ l @ b
    w, v = _eig(a, vectors=True)
    floor = roundoff_floor(a, jlh.params.get("residual", 0.0))
    i = int(np.argmin(np.abs(w - mu)))
    near = np.abs(w - w[i]) < _cluster_tol(w[i], floor)
    if np.sum(near) > 1:
        raise MultiplicityError(f"eigenvalue {w[i]} is not simple ({int(np.sum(near))} within tolerance)")
    if abs(w[i].real) > _cluster_tol(w[i]):
        raise ValidationError(f"eigenvalue {w[i]} nearest to {mu} is not purely imaginary")
    return 1 if _krein_value(v[:, i], l) > 0 else -1


def full_spectrum(jlh, alpha=None, lh=None, grid=None, krein_limit=None):
    """Eigenvalues of J L_h, classified.

    Parameters
    ----------
    jlh : LinearOperatorMatrix
    alpha : float, optional
        Detuning; defaults to the value recorded on ``jlh``.
    lh : LinearOperatorMatrix, optional
        Needed for Krein signatures and index counts.
    grid : PeriodicGrid, optional
        Needed for the even/odd index counts.
    krein_limit : float, optional
        Only imaginary eigenvalues with ``|mu| <= krein_limit`` get a Krein sign.

    Returns
    -------
    SpectrumReport
    """
    alpha = jlh.params.get("alpha", 0.0) if alpha is None else float(alpha)
    mu, vecs = _eig(jlh.entries, vectors=lh is not None)
    lam = mu - alpha
    report = SpectrumReport(mu, lam, alpha, pairing_error=pairing_error(mu))
    floor = roundoff_floor(jlh.entries, jlh.params.get("residual", 0.0))
    report.roundoff_floor = floor

    classes = ["line"] * len(mu)
    special = {"zero": False, "minus_two_alpha": False}
    taken = set()
    for key, target in (("zero", 0.0), ("minus_two_alpha", -2.0 * alpha)):
        order = [int(j) for j in np.argsort(np.abs(lam - target)) if int(j) not in taken]
        j = order[0]
        if abs(lam[j] - target) < max(SPECIAL_TOL, floor):
            special[key] = True
            special[key + "_value"] = complex(lam[j])
            classes[j] = key
            taken.add(j)
    report.special = special

    for j in range(len(mu)):
        if j in taken:
            continue
        tol = _cluster_tol(lam[j], floor)
        if lam[j].real > tol and abs(lam[j].imag) < tol:
            classes[j] = "unstable_real"
            report.unstable_real.append(float(lam[j].real))
        elif lam[j].real > tol:
            classes[j] = "unstable_complex"
    rest = [j for j in range(len(mu)) if j not in taken]
    report.line_deviation = float(np.max(np.abs(lam[rest].real + alpha))) if rest else 0.0
    report.unstable_real.sort(reverse=True)
    report.classes = classes

    if lh is not None:
        l = lh.entries
        for j in range(len(mu)):
            tol = _cluster_tol(mu[j])
            if mu[j].imag <= tol or abs(mu[j].real) > tol:
                continue
            if krein_limit is not None and abs(mu[j]) > krein_limit:
                continue
            near = np.abs(mu - mu[j]) < _cluster_tol(mu[j], floor)
            if np.sum(near) > 1:
                continue
            report.krein.append((complex(mu[j]), 1 if _krein_value(vecs[:, j], l) > 0 else -1))
        if grid is not None:
            report.n_Lh, report.n_even, report.n_odd = index_counts(lh, grid)
    return report


def translational_eigenvalue(lh, grid):
    """Eigenvalue of L_h on the odd subspace closest to zero."""
    w = parity_eigenvalues(lh, grid, "odd")
    return float(w[np.argmin(np.abs(w))])


def modulational_eigenvalue(lh, grid):
    """Eigenvalue of L_h on the even subspace closest to zero."""
    w = parity_eigenvalues(lh, grid, "even")
    return float(w[np.argmin(np.abs(w))])


def pencil_residual(grid, lplus_h, lminus_h, lam, v, kernel_tol=1e-10):
    """Residual of ``L-,h v = -lam^2 L+,h^{-1} v``, relative to ``||L-,h v||``.

    ``L+,h`` keeps the translation mode in its kernel when ``alpha = 0``, so
    the inverse is taken on the complement of eigenvalues below
    ``kernel_tol * ||L+,h||``.
    """
    w, q = np.linalg.eigh(lplus_h.entries)
    keep = np.abs(w) > kernel_tol * np.max(np.abs(w))
    inv_v = q[:, keep] @ ((q[:, keep].T @ v) / w[keep])
    lhs = lminus_h.entries @ v
    rhs = -lam * lam * inv_v
    return float(np.linalg.norm(lhs - rhs) / max(np.linalg.norm(lhs), 1e-300))
