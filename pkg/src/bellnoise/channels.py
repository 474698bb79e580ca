"""Single-qubit noise channels in operator-sum form and their action on two-qubit states."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import linalg
from .errors import InvalidArgumentError, InvariantError
from .linalg import IDENTITY2, SIGMA_X, SIGMA_Y, SIGMA_Z
from .states import DensityMatrix, validate

CPTP_TOL = 1e-10


class Side(enum.Enum):
    ALICE = "alice"
    BOB = "bob"


class InteractionMode(enum.Enum):
    SINGLE_BOB = "single-bob"
    SINGLE_ALICE = "single-alice"
    DOUBLE = "double"

    @classmethod
    def parse(cls, text: str) -> "InteractionMode":
        if text == "single":
            return cls.SINGLE_BOB
        try:
            return cls(text)
        except ValueError:
            raise InvalidArgumentError(f"field 'mode': unknown interaction mode {text!r}") from None


@dataclass(frozen=True, eq=False)
class QubitChannel:
    label: str
    strength: float
    kraus: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(linalg.as_matrix(k, 2, 2).copy() for k in self.kraus)
        if not 1 <= len(ops) <= 4:
            raise InvalidArgumentError(f"a qubit channel needs 1 to 4 Kraus operators, got {len(ops)}")
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "kraus", ops)


def _strength(p: float, name: str = "p") -> float:
    p = float(p)
    if not (0.0 <= p <= 1.0):
        raise InvalidArgumentError(f"channel strength {name} must lie in [0, 1], got {p}")
    return p


def phase_flip(p: float) -> QubitChannel:
    p = _strength(p)
    return QubitChannel("phase-flip", p, (np.sqrt(1 - p) * IDENTITY2, np.sqrt(p) * SIGMA_Z))


def bit_flip(p: float) -> QubitChannel:
    p = _strength(p)
    return QubitChannel("bit-flip", p, (np.sqrt(1 - p) * IDENTITY2, np.sqrt(p) * SIGMA_X))


def depolarizing(p: float) -> QubitChannel:
    p = _strength(p)
    w = np.sqrt(p / 3)
    return QubitChannel(
        "depolarizing", p, (np.sqrt(1 - p) * IDENTITY2, w * SIGMA_X, w * SIGMA_Y, w * SIGMA_Z)
    )


def phase_damping(p: float) -> QubitChannel:
    """Phase damping with ``K0 = diag(1, sqrt(1-p))``, ``K1 = diag(0, sqrt(p))``; coherence scales by ``sqrt(1-p)``."""
    p = _strength(p)
    k0 = np.diag([1.0, np.sqrt(1 - p)]).astype(complex)
    k1 = np.diag([0.0, np.sqrt(p)]).astype(complex)
    return QubitChannel("phase-damping", p, (k0, k1))


def dephasing_effective(p: float) -> QubitChannel:
    """Dephasing whose coherence factor is ``1 - p`` (populations untouched).

    Same family as :func:`phase_damping`, reparametrized: strength ``p`` here
    acts like ``phase_damping(1 - (1 - p)**2)``.
    """
    p = _strength(p)
    return QubitChannel(
        "dephasing-effective",
        p,
        (
            np.sqrt(1 - p) * IDENTITY2,
            np.sqrt(p) * np.diag([1.0, 0.0]).astype(complex),
            np.sqrt(p) * np.diag([0.0, 1.0]).astype(complex),
        ),
    )


def depolarizing_shrink(epsilon: float) -> QubitChannel:
    """``A -> eps A + (1 - eps) Tr(A) I/2``: shrinks the Bloch vector by exactly ``eps``."""
    eps = _strength(epsilon, "epsilon")
    ch = depolarizing(0.75 * (1 - eps))
    return QubitChannel("depolarizing-shrink", eps, ch.kraus)


CHANNELS: dict[str, Callable[[float], QubitChannel]] = {
    "phase-flip": phase_flip,
    "bit-flip": bit_flip,
    "depolarizing": depolarizing,
    "phase-damping": phase_damping,
    "dephasing-effective": dephasing_effective,
    "depolarizing-shrink": depolarizing_shrink,
}


def channel_builder(kind: str, convention: str = "stated") -> Callable[[float], QubitChannel]:
    """Look up a channel constructor by its CLI name.

    ``convention`` only matters for ``phase-damping``: ``"effective"`` swaps
    in :func:`dephasing_effective`.
    """
    if convention not in ("stated", "effective"):
        raise InvalidArgumentError(f"field 'convention': unknown convention {convention!r}")
    if kind == "phase-damping" and convention == "effective":
        kind = "dephasing-effective"
    try:
        return CHANNELS[kind]
    except KeyError:
        raise InvalidArgumentError(f"field 'channel': unknown channel {kind!r}") from None


def validate_cptp(ch: QubitChannel) -> float:
    """Largest entry of ``|sum K^dagger K - I|``."""
    total = sum(linalg.dagger(k) @ k for k in ch.kraus)
    return linalg.max_abs_diff(total, IDENTITY2)


def _lift(ops: np.ndarray, side: Side) -> np.ndarray:
    """Embed 2x2 operators ``(..., 2, 2)`` into the two-qubit space on one side."""
    eye = IDENTITY2
    if side is Side.ALICE:
        return np.einsum("...ab,cd->...acbd", ops, eye).reshape(ops.shape[:-2] + (4, 4))
    return np.einsum("ab,...cd->...acbd", eye, ops).reshape(ops.shape[:-2] + (4, 4))


def apply_kraus(mats: np.ndarray, kraus: np.ndarray, side: Side) -> np.ndarray:
    """Unvalidated batched channel action.

    ``mats`` has shape ``(..., 4, 4)`` and ``kraus`` shape ``(..., k, 2, 2)``
    with matching leading dimensions (or broadcastable ones).
    """
    lifted = _lift(np.asarray(kraus, dtype=complex), side)
    out = np.einsum("...kab,...bc,...kdc->...ad", lifted, mats, lifted.conj())
    return linalg.hermitian_part(out)


def apply(ch: QubitChannel, rho: DensityMatrix, side: Side = Side.BOB) -> DensityMatrix:
    """Act with ``ch`` on one qubit of ``rho``; the output is re-validated."""
    out = apply_kraus(rho.mat, np.array(ch.kraus), side)
    try:
        return validate(out)
    except InvalidArgumentError as exc:
        raise InvariantError(f"channel {ch.label}({ch.strength}) produced an invalid state: {exc}") from exc


def interact(
    rho: DensityMatrix,
    ch_builder: Callable[[float], QubitChannel],
    p: float,
    mode: InteractionMode = InteractionMode.SINGLE_BOB,
) -> DensityMatrix:
    """Single interaction (one side) or double interaction (both sides, same strength)."""
    ch = ch_builder(p)
    if mode is InteractionMode.SINGLE_BOB:
        return apply(ch, rho, Side.BOB)
    if mode is InteractionMode.SINGLE_ALICE:
        return apply(ch, rho, Side.ALICE)
    return apply(ch, apply(ch, rho, Side.BOB), Side.ALICE)


def interact_batch(
    rho: DensityMatrix,
    ch_builder: Callable[[float], QubitChannel],
    ps: Sequence[float] | np.ndarray,
    mode: InteractionMode,
) -> np.ndarray:
    """Raw output matrices ``(len(ps), 4, 4)`` for a sweep over channel strength.

    No validation is done here; callers that need guarantees on a specific
    point should use :func:`interact`.
    """
    ps = np.atleast_1d(np.asarray(ps, dtype=float))
    kraus = np.array([ch_builder(p).kraus for p in ps])
    mats = np.broadcast_to(rho.mat, (len(ps), 4, 4))
    if mode in (InteractionMode.SINGLE_BOB, InteractionMode.DOUBLE):
        mats = apply_kraus(mats, kraus, Side.BOB)
    if mode in (InteractionMode.SINGLE_ALICE, InteractionMode.DOUBLE):
        mats = apply_kraus(mats, kraus, Side.ALICE)
    return mats
