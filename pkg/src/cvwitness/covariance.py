"""Covariance-matrix types and matrix-analysis primitives for multimode
continuous-variable states.

Conventions: hbar = 1 with quadratures q = (a + a^dag)/sqrt(2) and
p = (a - a^dag)/(i sqrt(2)), so the vacuum variance is 1/2, a physical
covariance matrix V satisfies V + (i/2) J >= 0, and det V >= 2**(-2n).
Matrices are stored mode-interleaved (q1, p1, q2, p2, ...); the block
ordering (q1..qn, p1..pn) is accepted on input and available as a view.

In bipartite use, Alice holds the first ``n_alice`` modes and Bob holds
exactly the last mode.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "DEFAULT_TOL",
    "CovarianceMatrix",
    "StandardForm",
    "Partition",
    "TwoModeStandardParams",
    "ValidationReport",
    "NotStandardFormError",
    "symplectic_form",
    "one_mode_rotation",
    "one_mode_squeeze",
    "local_direct_sum",
    "validate_bona_fide",
    "symplectic_eigenvalues",
    "partial_transpose_bob",
    "split_standard",
    "partition",
    "schur_complement",
    "aitken_factorize",
    "standard_form_reduce_two_mode",
    "two_mode_symplectic_pair",
    "two_mode_symplectic_pair_pt",
    "gaussian_purity",
]

DEFAULT_TOL = 1e-9

# relative tolerance for the symmetry check at construction
_SYMMETRY_RTOL = 1e-12

ORDERINGS = ("interleaved", "block")


class NotStandardFormError(ValueError):
    """Raised when a CM expected in standard form has q-p cross covariances.

    The offending magnitude is stored in ``max_qp_entry``.
    """

    def __init__(self, max_qp_entry: float, tol: float):
        self.max_qp_entry = float(max_qp_entry)
        self.tol = float(tol)
        super().__init__(
            f"matrix is not in standard form: largest |sigma(q, p)| entry is "
            f"{self.max_qp_entry:.3e} (tolerance {self.tol:.1e})"
        )


def symplectic_form(n_modes: int) -> np.ndarray:
    """Standard symplectic form J = diag([[0, 1], [-1, 0]], ...) in
    mode-interleaved ordering."""
    j1 = np.array([[0.0, 1.0], [-1.0, 0.0]])
    out = np.zeros((2 * n_modes, 2 * n_modes))
    for k in range(n_modes):
        out[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = j1
    return out


def one_mode_rotation(theta: float) -> np.ndarray:
    """2x2 symplectic phase rotation of a single mode."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [-s, c]])


def one_mode_squeeze(z: float) -> np.ndarray:
    """2x2 symplectic squeeze diag(e^z, e^-z) of a single mode."""
    return np.diag([np.exp(z), np.exp(-z)])


def local_direct_sum(blocks) -> np.ndarray:
    """Assemble per-mode 2x2 symplectic blocks into a 2n x 2n local
    symplectic in interleaved ordering."""
    n = len(blocks)
    out = np.zeros((2 * n, 2 * n))
    for k, blk in enumerate(blocks):
        out[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = blk
    return out


def _block_to_interleaved_perm(n_modes: int) -> np.ndarray:
    """Permutation p with p[i_interleaved] = i_block."""
    perm = np.empty(2 * n_modes, dtype=int)
    for k in range(n_modes):
        perm[2 * k] = k
        perm[2 * k + 1] = n_modes + k
    return perm


class CovarianceMatrix:
    """Real symmetric 2n x 2n matrix of quadrature second moments.

    The matrix is canonicalized to mode-interleaved ordering at
    construction; pass ``ordering="block"`` to supply (q1..qn, p1..pn)
    data instead.
    """

    def __init__(self, matrix, n_alice: int | None = None, ordering: str = "interleaved"):
        m = np.array(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"covariance matrix must be square, got shape {m.shape}")
        if m.shape[0] % 2 != 0 or m.shape[0] < 2:
            raise ValueError(f"covariance matrix must be 2n x 2n, got size {m.shape[0]}")
        if not np.all(np.isfinite(m)):
            raise ValueError("covariance matrix has non-finite entries")
        scale = max(np.abs(m).max(), 1.0)
        if np.abs(m - m.T).max() > _SYMMETRY_RTOL * scale:
            raise ValueError("covariance matrix is not symmetric")
        if ordering not in ORDERINGS:
            raise ValueError(f"ordering must be one of {ORDERINGS}, got {ordering!r}")
        n = m.shape[0] // 2
        if ordering == "block":
            perm = _block_to_interleaved_perm(n)
            m = m[np.ix_(perm, perm)]
        self.matrix = 0.5 * (m + m.T)
        self.n_modes = n
        if n_alice is None:
            n_alice = n - 1 if n >= 2 else 0
        n_alice = int(n_alice)
        if n >= 2 and not 1 <= n_alice <= n - 1:
            raise ValueError(f"n_alice must lie in [1, {n - 1}], got {n_alice}")
        self.n_alice = n_alice

    @property
    def block_matrix(self) -> np.ndarray:
        """The matrix reordered to (q1..qn, p1..pn)."""
        perm = np.argsort(_block_to_interleaved_perm(self.n_modes))
        return self.matrix[np.ix_(perm, perm)]

    def require_bipartite(self) -> None:
        if self.n_modes < 2 or self.n_alice != self.n_modes - 1:
            raise ValueError(
                "operation needs a bipartite CM with Bob holding exactly the last mode"
            )

    def to_dict(self) -> dict:
        return {
            "n_modes": self.n_modes,
            "n_alice": self.n_alice,
            "ordering": "interleaved",
            "matrix": [[float(x) for x in row] for row in self.matrix],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CovarianceMatrix":
        try:
            matrix = data["matrix"]
            n_modes = int(data["n_modes"])
            ordering = data.get("ordering", "interleaved")
            n_alice = data.get("n_alice")
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed covariance-matrix record: {exc}") from exc
        m = np.asarray(matrix, dtype=float)
        if m.shape != (2 * n_modes, 2 * n_modes):
            raise ValueError(
                f"matrix shape {m.shape} inconsistent with n_modes={n_modes}"
            )
        if n_alice in (None, 0):
            n_alice = None
        return cls(m, n_alice=n_alice, ordering=ordering)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "CovarianceMatrix":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def __repr__(self) -> str:
        return (
            f"CovarianceMatrix(n_modes={self.n_modes}, n_alice={self.n_alice}, "
            f"matrix={self.matrix!r})"
        )


@dataclass(frozen=True)
class StandardForm:
    """Standard-form CM stored as the pair of (N+1) x (N+1) blocks in
    position and momentum space; all sigma(q, p) covariances vanish."""

    vq: np.ndarray
    vp: np.ndarray
    n_alice: int

    def __post_init__(self):
        vq = np.asarray(self.vq, dtype=float)
        vp = np.asarray(self.vp, dtype=float)
        object.__setattr__(self, "vq", vq)
        object.__setattr__(self, "vp", vp)
        if vq.shape != vp.shape or vq.ndim != 2 or vq.shape[0] != vq.shape[1]:
            raise ValueError("vq and vp must be square matrices of equal size")
        for name, blk in (("vq", vq), ("vp", vp)):
            scale = max(np.abs(blk).max(), 1.0)
            if np.abs(blk - blk.T).max() > _SYMMETRY_RTOL * scale:
                raise ValueError(f"{name} block is not symmetric")
            if np.linalg.eigvalsh(blk).min() <= 0:
                raise np.linalg.LinAlgError(f"{name} block is not positive definite")

    @property
    def n_modes(self) -> int:
        return self.vq.shape[0]

    def to_covariance_matrix(self) -> CovarianceMatrix:
        n = self.n_modes
        full = np.zeros((2 * n, 2 * n))
        full[:n, :n] = self.vq
        full[n:, n:] = self.vp
        n_alice = self.n_alice if n >= 2 else None
        return CovarianceMatrix(full, n_alice=n_alice, ordering="block")


class Partition(NamedTuple):
    """Bipartite split of a CM: Alice block, Bob block and cross block."""

    alice: np.ndarray
    bob: np.ndarray
    cross: np.ndarray


@dataclass(frozen=True)
class TwoModeStandardParams:
    """The quadruple (b1, b2, c, d) of a two-mode standard-form CM with
    local blocks b1*I, b2*I and cross block diag(c, d), normalized so
    b1 >= b2 >= 1/2 and c >= |d|."""

    b1: float
    b2: float
    c: float
    d: float

    def __post_init__(self):
        slack = 1e-9
        if not self.b1 >= self.b2 - slack:
            raise ValueError(f"need b1 >= b2, got b1={self.b1}, b2={self.b2}")
        if not self.b2 >= 0.5 - slack:
            raise ValueError(f"need b2 >= 1/2, got b2={self.b2}")
        if not self.c >= abs(self.d) - slack:
            raise ValueError(f"need c >= |d|, got c={self.c}, d={self.d}")

    def to_covariance_matrix(self, n_alice: int = 1) -> CovarianceMatrix:
        b1, b2, c, d = self.b1, self.b2, self.c, self.d
        m = np.array(
            [
                [b1, 0.0, c, 0.0],
                [0.0, b1, 0.0, d],
                [c, 0.0, b2, 0.0],
                [0.0, d, 0.0, b2],
            ]
        )
        return CovarianceMatrix(m, n_alice=n_alice)

    def to_standard_form(self) -> StandardForm:
        b1, b2, c, d = self.b1, self.b2, self.c, self.d
        return StandardForm(
            vq=np.array([[b1, c], [c, b2]]),
            vp=np.array([[b1, d], [d, b2]]),
            n_alice=1,
        )


@dataclass(frozen=True)
class ValidationReport:
    """Physicality flags for a candidate CM.

    ``min_rs_eigenvalue`` is the smallest eigenvalue of the Hermitian
    matrix V + (i/2) J and witnesses how close the matrix uncertainty
    relation is to being violated.
    """

    symmetric: bool
    positive_definite: bool
    rs_ur_satisfied: bool
    min_eigenvalue: float
    min_rs_eigenvalue: float
    tol: float

    @property
    def bona_fide(self) -> bool:
        return self.symmetric and self.positive_definite and self.rs_ur_satisfied


def _as_matrix(V) -> np.ndarray:
    if isinstance(V, CovarianceMatrix):
        return V.matrix
    return np.asarray(V, dtype=float)


def validate_bona_fide(V, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Check symmetry, positive definiteness and the matrix uncertainty
    relation V + (i/2) J >= 0 for a candidate covariance matrix.

    Accepts a CovarianceMatrix or a raw 2n x 2n array in interleaved
    ordering. The RS check uses eigenvalues of the Hermitian matrix
    V + (i/2) J, which is meaningful even for singular V; boundary
    states (pure Gaussians) sit exactly at zero, hence the tolerance.
    """
    m = _as_matrix(V)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2 != 0:
        raise ValueError(f"expected a 2n x 2n matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    n = m.shape[0] // 2
    scale = max(np.abs(m).max(), 1.0)
    symmetric = bool(np.abs(m - m.T).max() <= _SYMMETRY_RTOL * scale)
    sym = 0.5 * (m + m.T)
    min_eig = float(np.linalg.eigvalsh(sym).min())
    positive_definite = bool(min_eig > tol)
    herm = sym + 0.5j * symplectic_form(n)
    min_rs = float(np.linalg.eigvalsh(herm).min())
    rs_ok = bool(min_rs >= -tol)
    return ValidationReport(
        symmetric=symmetric,
        positive_definite=positive_definite,
        rs_ur_satisfied=rs_ok,
        min_eigenvalue=min_eig,
        min_rs_eigenvalue=min_rs,
        tol=float(tol),
    )


def symplectic_eigenvalues(V) -> np.ndarray:
    """Symplectic spectrum of a positive-definite CM, descending.

    The n values are the moduli of the (purely imaginary, paired)
    eigenvalues of i J V. A bona fide CM has all values >= 1/2.
    """
    m = _as_matrix(V)
    n = m.shape[0] // 2
    if np.linalg.eigvalsh(0.5 * (m + m.T)).min() <= 0:
        raise np.linalg.LinAlgError("matrix is not positive definite")
    w = np.linalg.eigvals(symplectic_form(n) @ m)
    scale = np.abs(w).max()
    # eigenvalues of JV come in pairs +-i*nu; their real parts must vanish
    if np.abs(w.real).max() > 1e-9 * max(scale, 1.0):
        raise np.linalg.LinAlgError(
            "eigenvalues of J V are not purely imaginary; matrix is too far "
            "from a valid covariance matrix"
        )
    mods = np.sort(np.abs(w))[::-1]
    pairs = mods[::2]
    if np.abs(mods[::2] - mods[1::2]).max() > 1e-9 * max(scale, 1.0):
        raise np.linalg.LinAlgError("symplectic spectrum does not pair up")
    return pairs


def partial_transpose_bob(V: CovarianceMatrix) -> CovarianceMatrix:
    """Flip the sign of Bob's momentum row/column (the CM-level partial
    transpose with respect to the last mode). Involutive."""
    if not isinstance(V, CovarianceMatrix):
        V = CovarianceMatrix(V)
    if V.n_modes < 2:
        raise ValueError("partial transposition needs a bipartite CM")
    signs = np.ones(2 * V.n_modes)
    signs[-1] = -1.0
    flipped = V.matrix * np.outer(signs, signs)
    return CovarianceMatrix(flipped, n_alice=V.n_alice)


def split_standard(V, tol: float = DEFAULT_TOL) -> StandardForm:
    """Split a standard-form CM into its position and momentum blocks.

    Raises NotStandardFormError when any sigma(q, p) entry exceeds tol.
    The determinant factorizes: det V = det(vq) * det(vp).
    """
    if not isinstance(V, CovarianceMatrix):
        V = CovarianceMatrix(V)
    n = V.n_modes
    qi = np.arange(0, 2 * n, 2)
    pi = np.arange(1, 2 * n, 2)
    qp = V.matrix[np.ix_(qi, pi)]
    worst = np.abs(qp).max()
    if worst > tol:
        raise NotStandardFormError(worst, tol)
    n_alice = V.n_alice if n >= 2 else 0
    return StandardForm(
        vq=V.matrix[np.ix_(qi, qi)],
        vp=V.matrix[np.ix_(pi, pi)],
        n_alice=n_alice,
    )


def partition(V: CovarianceMatrix) -> Partition:
    """Split a bipartite CM into Alice / Bob / cross blocks
    (2N x 2N, 2 x 2 and 2N x 2)."""
    if not isinstance(V, CovarianceMatrix):
        V = CovarianceMatrix(V)
    V.require_bipartite()
    k = 2 * V.n_alice
    m = V.matrix
    return Partition(alice=m[:k, :k], bob=m[k:, k:], cross=m[:k, k:])


def _require_pd_block(blk: np.ndarray, name: str) -> None:
    if np.linalg.eigvalsh(blk).min() <= 0:
        raise np.linalg.LinAlgError(f"{name} block is not positive definite")


def schur_complement(V: CovarianceMatrix, over: str = "B") -> np.ndarray:
    """Schur complement of a bipartite CM.

    over="B" eliminates Bob and returns V_A - C V_B^-1 C^T (2N x 2N);
    over="A" eliminates Alice and returns V_B - C^T V_A^-1 C (2 x 2).
    The determinant identity det(V / V_X) = det V / det V_X holds.
    """
    part = partition(V)
    if over == "B":
        _require_pd_block(part.bob, "Bob")
        return part.alice - part.cross @ np.linalg.solve(part.bob, part.cross.T)
    if over == "A":
        _require_pd_block(part.alice, "Alice")
        return part.bob - part.cross.T @ np.linalg.solve(part.alice, part.cross)
    raise ValueError(f"over must be 'A' or 'B', got {over!r}")


def aitken_factorize(V: CovarianceMatrix) -> tuple[np.ndarray, np.ndarray]:
    """LDU-style congruence V = T D T^T with unimodular upper-triangular
    T = [[I, C V_B^-1], [0, I]] and D = (V/V_B) direct-sum V_B."""
    part = partition(V)
    _require_pd_block(part.bob, "Bob")
    k = part.alice.shape[0]
    n = k + 2
    schur = part.alice - part.cross @ np.linalg.solve(part.bob, part.cross.T)
    T = np.eye(n)
    T[:k, k:] = np.linalg.solve(part.bob, part.cross.T).T
    D = np.zeros((n, n))
    D[:k, :k] = schur
    D[k:, k:] = part.bob
    return T, D


def two_mode_symplectic_pair(params: TwoModeStandardParams) -> tuple[float, float]:
    """Symplectic eigenvalues (nu_minus, nu_plus) of a two-mode
    standard-form CM, from the closed-form discriminant."""
    b1, b2, c, d = params.b1, params.b2, params.c, params.d
    det_v = (b1 * b2 - c * c) * (b1 * b2 - d * d)
    s = b1 * b1 + b2 * b2 + 2 * c * d
    disc = s * s - 4 * det_v
    if disc < -1e-12:
        raise ValueError(f"negative discriminant {disc:.3e}: non-physical parameters")
    root = np.sqrt(max(disc, 0.0))
    lo = (s - root) / 2
    hi = (s + root) / 2
    if lo < -1e-12:
        raise ValueError("non-physical parameters: negative squared eigenvalue")
    return float(np.sqrt(max(lo, 0.0))), float(np.sqrt(hi))


def two_mode_symplectic_pair_pt(params: TwoModeStandardParams) -> tuple[float, float]:
    """Symplectic eigenvalues of the partial transpose of a two-mode
    standard-form CM (the sign of d is flipped)."""
    flipped = TwoModeStandardParams(params.b1, params.b2, params.c, -params.d)
    return two_mode_symplectic_pair(flipped)


def _sqrtm_2x2_spd(m: np.ndarray) -> np.ndarray:
    w, u = np.linalg.eigh(m)
    if w.min() <= 0:
        raise np.linalg.LinAlgError("2x2 block is not positive definite")
    return (u * np.sqrt(w)) @ u.T


def standard_form_reduce_two_mode(
    V: CovarianceMatrix, tol: float = DEFAULT_TOL
) -> tuple[TwoModeStandardParams, np.ndarray]:
    """Reduce a two-mode bona fide CM to standard form by local symplectics.

    Returns (params, S) where S = S_A (+) S_B is local symplectic,
    S V S^T has scalar diagonal blocks and diagonal cross block with
    c >= |d|, and params is the (b1, b2, c, d) tuple ordered so that
    b1 >= b2 (the tuple convention; S V S^T itself keeps the true
    Alice/Bob order, which may have b_A < b_B).

    Procedure: (1) a one-mode symplectic per party brings each local
    2x2 block to sqrt(det) * I, (2) local rotations diagonalize the
    cross block via its SVD, (3) a pi/2 rotation pair and/or a pi
    rotation normalize the cross signs to c >= |d|. Local symplectics
    preserve the symplectic spectrum.
    """
    if not isinstance(V, CovarianceMatrix):
        V = CovarianceMatrix(V)
    if V.n_modes != 2:
        raise ValueError(f"expected a two-mode CM, got {V.n_modes} modes")
    report = validate_bona_fide(V, tol=max(tol, DEFAULT_TOL))
    if not report.bona_fide:
        raise ValueError(
            f"input CM is not bona fide (min RS eigenvalue {report.min_rs_eigenvalue:.3e})"
        )

    m = V.matrix
    locals_ = []
    for k in (0, 1):
        blk = m[2 * k : 2 * k + 2, 2 * k : 2 * k + 2]
        det_blk = np.linalg.det(blk)
        if det_blk <= 0:
            raise ValueError("local block with non-positive determinant")
        # symmetric unit-determinant (hence symplectic) Williamson reducer
        locals_.append(np.linalg.inv(_sqrtm_2x2_spd(blk / np.sqrt(det_blk))))
    S = local_direct_sum(locals_)
    w = S @ m @ S.T

    # local rotations diagonalize the cross block; scalar blocks are untouched
    cross = w[0:2, 2:4]
    u, _, vt = np.linalg.svd(cross)
    if np.linalg.det(u) < 0:
        u[:, 1] *= -1.0
    if np.linalg.det(vt) < 0:
        vt[1, :] *= -1.0
    R = local_direct_sum([u.T, vt])
    S = R @ S
    w = R @ w @ R.T

    c, d = w[0, 2], w[1, 3]
    if abs(c) < abs(d):
        # pi/2 rotations on both modes swap the roles of c and d
        R = local_direct_sum([one_mode_rotation(np.pi / 2)] * 2)
        S = R @ S
        w = R @ w @ R.T
        c, d = w[0, 2], w[1, 3]
    if c < 0:
        # pi rotation on Bob's mode flips the sign of the whole cross block
        R = local_direct_sum([np.eye(2), -np.eye(2)])
        S = R @ S
        w = R @ w @ R.T
        c, d = w[0, 2], w[1, 3]

    ba, bb = w[0, 0], w[2, 2]
    params = TwoModeStandardParams(b1=max(ba, bb), b2=min(ba, bb), c=c, d=d)
    return params, S


def gaussian_purity(V) -> float:
    """Purity of the Gaussian state with this CM: 1 / (2^n sqrt(det V))."""
    m = _as_matrix(V)
    n = m.shape[0] // 2
    det_v = np.linalg.det(m)
    if det_v <= 0:
        raise ValueError(f"non-positive determinant {det_v:.3e}")
    return float(1.0 / (2**n * np.sqrt(det_v)))
