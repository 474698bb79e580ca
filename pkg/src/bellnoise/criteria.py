"""Locality and steerability criteria for two-qubit states.

* ``M``: sum of the two largest eigenvalues of ``T^T T`` (CHSH violated iff M > 1).
* ``A``: spectral test for CHSH locality under every global unitary.
* ``B``: spectral test for 3-setting unsteerability under every global unitary.
* ``F3``: the 3-setting linear steering functional and its numerical maximum.
* A sufficient unsteerability test for states in :class:`~bellnoise.states.ChiForm`.

The ``*_values`` functions take stacks of raw matrices ``(..., 4, 4)`` and are
used by the parameter sweeps; the scalar functions take validated states.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np
from scipy.optimize import minimize

from . import linalg
from .errors import InvalidArgumentError, InvariantError
from .states import ChiForm, DensityMatrix, chi_form, correlation_matrices

VERDICT_DECIMALS = 12
FRAME_TOL = 1e-10
EULER_GRID = 24
ICOSPHERE_LEVEL = 5
REFINE_TOL = 1e-8
REFINE_STARTS = 3


def is_at_most_one(value: float) -> bool:
    """Verdict test ``value <= 1`` after rounding away sub-1e-12 noise."""
    return round(float(value), VERDICT_DECIMALS) <= 1.0


# -- batched value functions ----------------------------------------------------


def m_values(mats) -> np.ndarray:
    t = correlation_matrices(np.asarray(mats, dtype=complex))
    v = np.swapaxes(t, -1, -2) @ t
    u = linalg.hermitian_eigenvalues(v)
    return u[..., 0] + u[..., 1]


def a_from_spectrum(x: np.ndarray) -> np.ndarray:
    a1, a2, a3 = x[..., 0], x[..., 1], x[..., 2]
    return (2 * a1 + 2 * a2 - 1) ** 2 + (2 * a1 + 2 * a3 - 1) ** 2


def b_from_spectrum(x: np.ndarray) -> np.ndarray:
    pairs = sum(x[..., i] * x[..., j] for i, j in combinations(range(4), 2))
    return 3 * np.sum(x**2, axis=-1) - 2 * pairs


def a_values(mats) -> np.ndarray:
    return a_from_spectrum(linalg.hermitian_eigenvalues(mats))


def b_values(mats) -> np.ndarray:
    return b_from_spectrum(linalg.hermitian_eigenvalues(mats))


CRITERIA = {"M": m_values, "A": a_values, "B": b_values}


# -- scalar criteria --------------------------------------------------------------


def chsh_M(rho: DensityMatrix) -> float:
    return float(m_values(rho.mat))


def absolute_chsh_A(rho: DensityMatrix) -> float:
    return float(a_from_spectrum(rho.eigenvalues))


def absolute_unsteer_B(rho: DensityMatrix) -> float:
    """``3 Tr(rho^2) - 2 sum_{i<j} x_i x_j`` over the spectrum; equals ``4 Tr(rho^2) - 1``."""
    return float(b_from_spectrum(rho.eigenvalues))


@dataclass(frozen=True)
class CriteriaReport:
    m_value: float
    a_value: float
    b_value: float
    chsh_local: bool
    absolutely_chsh_local: bool
    absolutely_3settings_unsteerable: bool

    def as_dict(self) -> dict:
        return {
            "m": self.m_value,
            "a": self.a_value,
            "b": self.b_value,
            "chsh_local": self.chsh_local,
            "absolutely_chsh_local": self.absolutely_chsh_local,
            "absolutely_3settings_unsteerable": self.absolutely_3settings_unsteerable,
        }


def evaluate_all(rho: DensityMatrix) -> CriteriaReport:
    spectrum = rho.eigenvalues
    m = chsh_M(rho)
    a = float(a_from_spectrum(spectrum))
    b = float(b_from_spectrum(spectrum))
    report = CriteriaReport(m, a, b, is_at_most_one(m), is_at_most_one(a), is_at_most_one(b))
    if report.absolutely_chsh_local and not report.chsh_local:
        raise InvariantError(f"A = {a} <= 1 but M = {m} > 1")
    return report


# -- 3-setting steering functional ---------------------------------------------------


@dataclass(frozen=True)
class MeasurementFrame:
    """Alice directions ``u`` (unit rows) and Bob directions ``v`` (orthonormal rows)."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = np.array(self.u, dtype=float)
        v = np.array(self.v, dtype=float)
        if u.shape != (3, 3) or v.shape != (3, 3):
            raise InvalidArgumentError("a frame holds three 3-vectors per party")
        norms = np.linalg.norm(u, axis=1)
        if np.max(np.abs(norms - 1)) > FRAME_TOL:
            raise InvalidArgumentError(f"Alice directions must be unit vectors, norms {norms}")
        gram = v @ v.T
        if np.max(np.abs(gram - np.eye(3))) > FRAME_TOL:
            raise InvalidArgumentError("Bob directions must be orthonormal")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)


def f3_value(rho: DensityMatrix, frame: MeasurementFrame) -> float:
    if not isinstance(frame, MeasurementFrame):
        frame = MeasurementFrame(*frame)
    t = correlation_matrices(rho.mat)
    total = np.einsum("ia,ab,ib->", frame.u, t, frame.v)
    return float(abs(total) / np.sqrt(3))


def _euler_zyz(angles: np.ndarray) -> np.ndarray:
    """Rotation matrices ``Rz(a) Ry(b) Rz(c)`` for angles ``(..., 3)``."""
    a, b, c = np.moveaxis(np.asarray(angles, dtype=float), -1, 0)
    ca, sa, cb, sb, cc, sc = np.cos(a), np.sin(a), np.cos(b), np.sin(b), np.cos(c), np.sin(c)
    r = np.empty(np.shape(a) + (3, 3))
    r[..., 0, 0] = ca * cb * cc - sa * sc
    r[..., 0, 1] = -ca * cb * sc - sa * cc
    r[..., 0, 2] = ca * sb
    r[..., 1, 0] = sa * cb * cc + ca * sc
    r[..., 1, 1] = -sa * cb * sc + ca * cc
    r[..., 1, 2] = sa * sb
    r[..., 2, 0] = -sb * cc
    r[..., 2, 1] = sb * sc
    r[..., 2, 2] = cb
    return r


def _frame_objective(t: np.ndarray, rot: np.ndarray) -> np.ndarray:
    # Bob directions are the columns of rot; Alice picks u_i along T v_i.
    return np.sum(np.linalg.norm(t @ rot, axis=-2), axis=-1)


@lru_cache(maxsize=None)
def _euler_grid(n: int) -> np.ndarray:
    full = 2 * np.pi * np.arange(n) / n
    half = np.pi * (np.arange(n) + 0.5) / n
    return np.stack(np.meshgrid(full, half, full, indexing="ij"), axis=-1).reshape(-1, 3)


def _refine_max(fun, grid: np.ndarray, values: np.ndarray, starts: int) -> float:
    best = float(values.max())
    for idx in np.argsort(values)[::-1][:starts]:
        res = minimize(
            lambda x: -fun(x),
            grid[idx],
            method="Nelder-Mead",
            options={"xatol": REFINE_TOL, "fatol": REFINE_TOL, "maxiter": 4000},
        )
        best = max(best, float(-res.fun))
    return best


def f3_max(rho: DensityMatrix) -> float:
    """Largest F3 over measurement frames.

    Bob's orthonormal frames are scanned on a 24^3 Euler-angle grid, with
    each Alice direction aligned to ``T v_i``; the best grid points are then
    polished with Nelder-Mead.
    """
    t = correlation_matrices(rho.mat)
    grid = _euler_grid(EULER_GRID)
    values = _frame_objective(t, _euler_zyz(grid))
    best = _refine_max(lambda x: float(_frame_objective(t, _euler_zyz(x))), grid, values, REFINE_STARTS)
    return best / np.sqrt(3)


# -- sufficient unsteerability test ---------------------------------------------------


@lru_cache(maxsize=None)
def icosphere(level: int) -> np.ndarray:
    """Unit vectors from ``level`` midpoint subdivisions of the icosahedron."""
    phi = (1 + 5**0.5) / 2
    verts = [
        (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
        (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
        (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
    ]
    verts = [tuple(np.array(v) / np.linalg.norm(v)) for v in verts]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    for _ in range(level):
        cache: dict[tuple[int, int], int] = {}

        def midpoint(i: int, j: int) -> int:
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = np.add(verts[i], verts[j])
                verts.append(tuple(m / np.linalg.norm(m)))
                cache[key] = len(verts) - 1
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    out = np.array(verts)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class UnsteerabilityResult:
    exact_lhs_max: float
    relaxed_bound: float
    verdict_exact: bool
    verdict_relaxed: bool


def _sphere_point(angles) -> np.ndarray:
    theta, phi = angles[..., 0], angles[..., 1]
    return np.stack(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=-1
    )


def unsteerable_sufficient(chi: ChiForm | DensityMatrix) -> UnsteerabilityResult:
    """Evaluate ``max_x (a.x)^2 + 2 |T x|`` and its relaxation ``|a|^2 + 2 sqrt(lambda_max(T^T T))``."""
    if isinstance(chi, DensityMatrix):
        chi = chi_form(chi)
    a = np.asarray(chi.a)
    t = chi.t

    def lhs(x: np.ndarray) -> np.ndarray:
        return (x @ a) ** 2 + 2 * np.linalg.norm(x @ t.T, axis=-1)

    pts = icosphere(ICOSPHERE_LEVEL)
    values = lhs(pts)
    angles = np.stack([np.arccos(np.clip(pts[:, 2], -1, 1)), np.arctan2(pts[:, 1], pts[:, 0])], axis=-1)
    exact = _refine_max(lambda y: float(lhs(_sphere_point(np.asarray(y)))), angles, values, REFINE_STARTS)

    lam_max = max(float(linalg.hermitian_eigenvalues(t.T @ t)[0]), 0.0)
    relaxed = float(a @ a) + 2 * float(np.sqrt(lam_max))
    if exact > relaxed + REFINE_TOL:
        raise InvariantError(f"exact maximum {exact} exceeds its relaxation {relaxed}")
    return UnsteerabilityResult(exact, relaxed, is_at_most_one(exact), is_at_most_one(relaxed))
