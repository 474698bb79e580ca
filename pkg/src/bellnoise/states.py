"""Two-qubit density matrices, parametric families and the Bloch decomposition.

Basis order is ``|00>, |01>, |10>, |11>`` with Alice as the left tensor factor.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from . import linalg
from .errors import (
    InvalidArgumentError,
    NotChiFormError,
    NotHermitianError,
    NotPositiveError,
    TraceNotOneError,
)
from .linalg import IDENTITY2, PAULIS

STATE_TOL = 1e-9

# sigma_i (x) I, I (x) sigma_j and sigma_i (x) sigma_j, precomputed once.
_ALICE_OPS = np.array([np.kron(p, IDENTITY2) for p in PAULIS])
_BOB_OPS = np.array([np.kron(IDENTITY2, p) for p in PAULIS])
_CORR_OPS = np.array([[np.kron(pi, pj) for pj in PAULIS] for pi in PAULIS])

KET_00 = np.array([1, 0, 0, 0], dtype=complex)
KET_11 = np.array([0, 0, 0, 1], dtype=complex)
PHI_PLUS = (KET_00 + KET_11) / np.sqrt(2)
PSI_MINUS = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
CLASSICAL_00_11 = 0.5 * np.diag([1, 0, 0, 1]).astype(complex)


def _projector(ket: np.ndarray) -> np.ndarray:
    return np.outer(ket, ket.conj())


def _check_unit(name: str, value: float) -> float:
    value = float(value)
    if not (0.0 <= value <= 1.0):
        raise InvalidArgumentError(f"{name} must lie in [0, 1], got {value}")
    return value


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated 4x4 two-qubit state. Build through :func:`validate`."""

    mat: np.ndarray

    def __post_init__(self):
        self.mat.setflags(write=False)

    @property
    def eigenvalues(self) -> np.ndarray:
        return linalg.hermitian_eigenvalues(self.mat)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.mat, dtype=dtype)


@dataclass(frozen=True)
class BlochForm:
    """Local Bloch vectors ``r`` (Alice), ``s`` (Bob) and correlation matrix ``t``."""

    r: np.ndarray
    s: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        for name, shape in (("r", (3,)), ("s", (3,)), ("t", (3, 3))):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise InvalidArgumentError(f"{name} must have shape {shape}, got {arr.shape}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class ChiForm:
    """States with Bob's marginal maximally mixed and a diagonal correlation matrix."""

    a: np.ndarray
    t_diag: np.ndarray

    def __post_init__(self):
        for name in ("a", "t_diag"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (3,):
                raise InvalidArgumentError(f"{name} must be a 3-vector, got shape {arr.shape}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def t(self) -> np.ndarray:
        return np.diag(self.t_diag)

    def to_state(self, tol: float = STATE_TOL) -> DensityMatrix:
        return bloch_compose(BlochForm(self.a, np.zeros(3), self.t), tol=tol)


def validate(m, tol: float = STATE_TOL) -> DensityMatrix:
    """Check that ``m`` is a two-qubit density matrix and wrap it.

    The Hermitian part is kept, so rounding residue below ``tol`` is removed.

    Raises
    ------
    NotHermitianError, TraceNotOneError, NotPositiveError
        Each message names the violated property and its residual.
    """
    arr = linalg.as_matrix(m, 4, 4)
    herm_residual = float(np.max(np.abs(arr - linalg.dagger(arr))))
    if herm_residual > tol:
        raise NotHermitianError(f"not hermitian: max |rho - rho^dagger| = {herm_residual:.3e}")
    arr = linalg.hermitian_part(arr)
    tr = float(np.real(np.trace(arr)))
    if abs(tr - 1.0) > tol:
        raise TraceNotOneError(f"trace-not-one: trace = {tr:.12g} (residual {abs(tr - 1.0):.3e})")
    lowest = float(linalg.hermitian_eigenvalues(arr, tol)[-1])
    if lowest < -tol:
        raise NotPositiveError(f"not-positive: minimum eigenvalue {lowest:.6g}")
    return DensityMatrix(arr.copy())


def gisin_matrices(lams, thetas) -> np.ndarray:
    """Raw (unvalidated) family matrices for broadcastable arrays of ``lambda`` and ``theta``."""
    lams, thetas = np.broadcast_arrays(np.asarray(lams, dtype=float), np.asarray(thetas, dtype=float))
    m = np.zeros(lams.shape + (4, 4), dtype=complex)
    m[..., 0, 0] = m[..., 3, 3] = (1 - lams) / 2
    m[..., 1, 1] = lams * np.sin(thetas) ** 2
    m[..., 2, 2] = lams * np.cos(thetas) ** 2
    m[..., 1, 2] = m[..., 2, 1] = 0.5 * lams * np.sin(2 * thetas)
    return m


def gisin_state(lam: float, theta: float) -> DensityMatrix:
    """Two-parameter family with a rotated ``|01>, |10>`` block and classical ``|00>, |11>`` weight."""
    lam = _check_unit("lambda", lam)
    return validate(gisin_matrices(lam, float(theta)))


def mixture_state(q: float, s: float) -> DensityMatrix:
    """``q (s |phi+><phi+| + (1-s) I/4) + (1-q) (|00><00| + |11><11|)/2``."""
    q = _check_unit("q", q)
    s = _check_unit("s", s)
    iso = s * _projector(PHI_PLUS) + (1 - s) * np.eye(4) / 4
    return validate(q * iso + (1 - q) * CLASSICAL_00_11)


def isotropic_state(alpha: float) -> DensityMatrix:
    alpha = _check_unit("alpha", alpha)
    return validate(alpha * _projector(PHI_PLUS) + (1 - alpha) * np.eye(4) / 4)


def werner_state(w: float) -> DensityMatrix:
    w = _check_unit("w", w)
    return validate(w * _projector(PSI_MINUS) + (1 - w) * np.eye(4) / 4)


def rho_f() -> DensityMatrix:
    """Equal mixture of the alpha = 1/2 isotropic state and the classical ``|00>, |11>`` state."""
    return validate(0.5 * isotropic_state(0.5).mat + 0.5 * CLASSICAL_00_11)


def named_state(kind: str, **params: float) -> DensityMatrix:
    """Constructors by name: ``phi_plus``, ``psi_minus``, ``isotropic``, ``werner``."""
    if kind == "phi_plus":
        return validate(_projector(PHI_PLUS))
    if kind == "psi_minus":
        return validate(_projector(PSI_MINUS))
    if kind == "isotropic":
        return isotropic_state(params["alpha"])
    if kind == "werner":
        return werner_state(params["w"])
    raise InvalidArgumentError(f"unknown state kind {kind!r}")


def _bloch_arrays(mats: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Batched ``r, s, t`` for a stack ``(..., 4, 4)``; imaginary residues are returned too."""
    r = np.einsum("kab,...ba->...k", _ALICE_OPS, mats)
    s = np.einsum("kab,...ba->...k", _BOB_OPS, mats)
    t = np.einsum("ijab,...ba->...ij", _CORR_OPS, mats)
    return r, s, t


def correlation_matrices(mats: np.ndarray) -> np.ndarray:
    """Real correlation matrices ``t_ij = Tr(rho sigma_i (x) sigma_j)`` for a stack of states."""
    return np.real(np.einsum("ijab,...ba->...ij", _CORR_OPS, mats))


def bloch_decompose(rho: DensityMatrix) -> BlochForm:
    r, s, t = _bloch_arrays(rho.mat)
    residue = max(np.abs(r.imag).max(), np.abs(s.imag).max(), np.abs(t.imag).max())
    if residue > 1e-10:
        raise InvalidArgumentError(f"Pauli expectations carry imaginary residue {residue:.3e}")
    return BlochForm(r.real, s.real, t.real)


def bloch_matrix(b: BlochForm) -> np.ndarray:
    """The raw 4x4 operator for Bloch data, without any validation."""
    m = np.eye(4, dtype=complex)
    m = m + np.einsum("k,kab->ab", b.r, _ALICE_OPS)
    m = m + np.einsum("k,kab->ab", b.s, _BOB_OPS)
    m = m + np.einsum("ij,ijab->ab", b.t, _CORR_OPS)
    return m / 4


def bloch_compose(b: BlochForm, tol: float = STATE_TOL) -> DensityMatrix:
    """Inverse of :func:`bloch_decompose`. Raises ``NotPositiveError`` for unphysical data."""
    return validate(bloch_matrix(b), tol)


def purity(rho: DensityMatrix) -> float:
    return float(np.real(np.trace(rho.mat @ rho.mat)))


def chi_form(rho: DensityMatrix, tol: float = 1e-9) -> ChiForm:
    """Extract ``(a, t_diag)`` when Bob's Bloch vector and the off-diagonal correlations vanish."""
    b = bloch_decompose(rho)
    offdiag = b.t - np.diag(np.diag(b.t))
    candidates = [(abs(b.s[i]), f"s[{i}]") for i in range(3)]
    candidates += [(abs(offdiag[i, j]), f"t[{i}][{j}]") for i in range(3) for j in range(3) if i != j]
    worst, where = max(candidates)
    if worst > tol:
        raise NotChiFormError(f"not-chi-form: |{where}| = {worst:.3e} exceeds {tol:g}")
    return ChiForm(b.r, np.diag(b.t))


# -- JSON state specifications -------------------------------------------------

_SPEC_KEYS = {
    "matrix": {"re", "im"},
    "gisin": {"lambda", "theta"},
    "mixture": {"q", "s"},
    "werner": {"w"},
    "isotropic": {"alpha"},
    "rho_f": set(),
    "phi_plus": set(),
    "psi_minus": set(),
}
_OPTIONAL_KEYS = {"matrix": {"im"}}


def _number(spec: Mapping[str, Any], key: str) -> float:
    value = spec[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidArgumentError(f"field {key!r} must be a number, got {value!r}")
    return float(value)


def _grid(spec: Mapping[str, Any], key: str) -> np.ndarray:
    try:
        arr = np.array(spec[key], dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidArgumentError(f"field {key!r} must be a 4x4 array of numbers") from exc
    if arr.shape != (4, 4):
        raise InvalidArgumentError(f"field {key!r} must be 4x4, got shape {arr.shape}")
    return arr


def state_from_spec(spec: Mapping[str, Any] | str, tol: float = STATE_TOL) -> DensityMatrix:
    """Build a state from its JSON description (a mapping or a JSON string)."""
    if isinstance(spec, str):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise InvalidArgumentError(f"state: malformed JSON ({exc.msg})") from exc
    if not isinstance(spec, Mapping):
        raise InvalidArgumentError("state: expected a JSON object")
    if "kind" not in spec:
        raise InvalidArgumentError(f"field 'kind': missing (one of {', '.join(sorted(_SPEC_KEYS))})")
    kind = spec["kind"]
    if kind not in _SPEC_KEYS:
        raise InvalidArgumentError(f"field 'kind': unknown state kind {kind!r}")
    allowed = _SPEC_KEYS[kind]
    given = set(spec) - {"kind"}
    unknown = given - allowed
    if unknown:
        raise InvalidArgumentError(f"field {sorted(unknown)[0]!r}: not allowed for kind {kind!r}")
    missing = allowed - given - _OPTIONAL_KEYS.get(kind, set())
    if missing:
        raise InvalidArgumentError(f"field {sorted(missing)[0]!r}: required for kind {kind!r}")

    if kind == "matrix":
        re = _grid(spec, "re")
        im = _grid(spec, "im") if "im" in spec else np.zeros((4, 4))
        return validate(re + 1j * im, tol)
    if kind == "gisin":
        return gisin_state(_number(spec, "lambda"), _number(spec, "theta"))
    if kind == "mixture":
        return mixture_state(_number(spec, "q"), _number(spec, "s"))
    if kind == "werner":
        return werner_state(_number(spec, "w"))
    if kind == "isotropic":
        return isotropic_state(_number(spec, "alpha"))
    if kind == "rho_f":
        return rho_f()
    return named_state(kind)


def state_to_spec(rho: DensityMatrix) -> dict:
    """Matrix form of a state, readable back by :func:`state_from_spec`."""
    return {
        "kind": "matrix",
        "re": np.real(rho.mat).tolist(),
        "im": np.imag(rho.mat).tolist(),
    }
