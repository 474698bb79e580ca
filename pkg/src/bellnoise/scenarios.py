"""Channel-strength sweeps: locality ranges, region maps, LHS scenarios and breaking bounds."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import reference
from .channels import InteractionMode, QubitChannel, channel_builder, interact, interact_batch
from .criteria import CRITERIA, CriteriaReport, evaluate_all, m_values
from .errors import InvalidArgumentError
from .states import ChiForm, DensityMatrix, chi_form, gisin_matrices, gisin_state, mixture_state, rho_f

log = logging.getLogger(__name__)

DEFAULT_GRID = 2001
DEFAULT_TOL = 1e-9
DISCREPANCY_THRESHOLD = 0.01
RESCAN_FACTOR = 4


@dataclass(frozen=True)
class IntervalSet:
    """Sorted, disjoint closed subintervals of [0, 1]."""

    intervals: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        ivs = tuple((float(lo), float(hi)) for lo, hi in self.intervals)
        for lo, hi in ivs:
            if not (0.0 <= lo <= hi <= 1.0):
                raise InvalidArgumentError(f"bad interval [{lo}, {hi}]")
        for (_, hi), (lo, _) in zip(ivs, ivs[1:]):
            if lo <= hi:
                raise InvalidArgumentError("intervals must be sorted and disjoint")
        object.__setattr__(self, "intervals", ivs)

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[float, float]], merge_gap: float = 0.0) -> "IntervalSet":
        """Sort and merge; intervals closer than ``merge_gap`` are joined."""
        merged: list[list[float]] = []
        for lo, hi in sorted(pairs):
            if merged and lo - merged[-1][1] <= merge_gap:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        return cls(tuple((lo, hi) for lo, hi in merged))

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    def __contains__(self, p: float) -> bool:
        return any(lo <= p <= hi for lo, hi in self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def issubset(self, other: "IntervalSet", tol: float = 0.0) -> bool:
        return all(
            any(olo - tol <= lo and hi <= ohi + tol for olo, ohi in other.intervals)
            for lo, hi in self.intervals
        )

    def deviation(self, other: "IntervalSet") -> float:
        """Largest endpoint difference; infinite when the interval counts differ."""
        if len(self) != len(other):
            return math.inf
        diffs = [abs(a - b) for x, y in zip(self.intervals, other.intervals) for a, b in zip(x, y)]
        return max(diffs, default=0.0)

    def as_list(self) -> list[list[float]]:
        return [[lo, hi] for lo, hi in self.intervals]

    def __str__(self) -> str:
        if self.is_empty:
            return "--"
        return " U ".join(f"[{lo:.4f}, {hi:.4f}]" for lo, hi in self.intervals)


def _inside(values: np.ndarray) -> np.ndarray:
    return np.round(values, 12) <= 1.0


def _resolve_builder(channel, convention: str) -> Callable[[float], QubitChannel]:
    if callable(channel):
        return channel
    return channel_builder(channel, convention)


def criterion_curve(
    initial: DensityMatrix,
    channel,
    mode: InteractionMode,
    criterion: str,
    convention: str = "stated",
) -> Callable[[np.ndarray], np.ndarray]:
    """``g(p)`` for a stack of strengths: the criterion value of the noisy state."""
    if criterion not in CRITERIA:
        raise InvalidArgumentError(f"field 'criterion': unknown criterion {criterion!r}")
    builder = _resolve_builder(channel, convention)
    value = CRITERIA[criterion]

    def g(ps: np.ndarray) -> np.ndarray:
        return value(interact_batch(initial, builder, ps, mode))

    return g


def _bisect_crossings(g, lo: np.ndarray, hi: np.ndarray, lo_inside: np.ndarray, tol: float) -> np.ndarray:
    """Refine every bracket at once; return the end of each bracket that satisfies the predicate."""
    lo, hi = lo.copy(), hi.copy()
    while np.any(hi - lo > tol):
        mid = 0.5 * (lo + hi)
        same = _inside(g(mid)) == lo_inside
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    return np.where(lo_inside, lo, hi)


def _scan_once(g, grid_n: int, tol: float) -> tuple[IntervalSet, float]:
    ps = np.linspace(0.0, 1.0, grid_n)
    inside = _inside(g(ps))
    change = np.nonzero(inside[:-1] != inside[1:])[0]
    bounds = _bisect_crossings(g, ps[change], ps[change + 1], inside[change], tol) if change.size else []
    pairs = []
    start = 0.0 if inside[0] else None
    for idx, b in zip(change, bounds):
        if inside[idx]:
            pairs.append((start, float(b)))
            start = None
        else:
            start = float(b)
    if start is not None:
        pairs.append((start, 1.0))
    return IntervalSet.from_pairs(pairs, merge_gap=2 * tol), ps[1] - ps[0]


def predicate_scan(
    initial: DensityMatrix,
    channel,
    mode: InteractionMode,
    criterion: str,
    grid_n: int = DEFAULT_GRID,
    tol: float = DEFAULT_TOL,
    convention: str = "stated",
) -> IntervalSet:
    """Strengths ``p`` in [0, 1] for which the criterion value of the noisy state is at most 1.

    The criterion is sampled on a uniform grid; each change of verdict between
    neighbouring grid points is refined by bisection down to ``tol``. When a
    resulting interval spans fewer than two grid steps the scan is repeated on
    a grid four times denser.
    """
    if int(grid_n) != grid_n or grid_n < 3:
        raise InvalidArgumentError(f"field 'grid': need an integer >= 3, got {grid_n}")
    if not tol > 0:
        raise InvalidArgumentError(f"field 'tol': must be positive, got {tol}")
    g = criterion_curve(initial, channel, mode, criterion, convention)
    result, step = _scan_once(g, int(grid_n), tol)
    if any(hi - lo < 2 * step for lo, hi in result.intervals):
        result, _ = _scan_once(g, RESCAN_FACTOR * (int(grid_n) - 1) + 1, tol)
    return result


# -- table reproduction ------------------------------------------------------------------

CRITERIA_ORDER = ("M", "A", "B")
_MODE_OF = {"single": InteractionMode.SINGLE_BOB, "double": InteractionMode.DOUBLE}


def _published(pair) -> IntervalSet:
    return IntervalSet() if pair is None else IntervalSet((pair,))


@dataclass(frozen=True)
class TableRow:
    channel: str
    lam: float
    theta: float
    mode: str
    ranges: tuple[IntervalSet, IntervalSet, IntervalSet]
    published: tuple[IntervalSet, IntervalSet, IntervalSet]
    flags: tuple[bool, bool, bool]
    convention: str = "stated"
    stated_ranges: tuple[IntervalSet, IntervalSet, IntervalSet] | None = None

    @property
    def r1(self) -> IntervalSet:
        return self.ranges[0]

    @property
    def r2(self) -> IntervalSet:
        return self.ranges[1]

    @property
    def r3(self) -> IntervalSet:
        return self.ranges[2]


@dataclass(frozen=True)
class Discrepancy:
    mode: str
    channel: str
    lam: float
    criterion: str
    computed: IntervalSet
    published: IntervalSet
    deviation: float


@dataclass
class DiscrepancyReport:
    threshold: float
    entries: list[Discrepancy] = field(default_factory=list)

    def flagged(self, mode: str, channel: str, lam: float, criterion: str | None = None) -> bool:
        return any(
            e.mode == mode and e.channel == channel and e.lam == lam
            and (criterion is None or e.criterion == criterion)
            for e in self.entries
        )


def reproduce_tables(
    grid_n: int = DEFAULT_GRID,
    tol: float = DEFAULT_TOL,
    threshold: float = DISCREPANCY_THRESHOLD,
) -> tuple[list[TableRow], DiscrepancyReport]:
    """Recompute both published tables and compare every cell.

    Phase damping is computed with the effective (coherence ``1 - p``)
    convention; the stated-Kraus ranges are attached to those rows as
    ``stated_ranges``.
    """
    rows: list[TableRow] = []
    report = DiscrepancyReport(threshold)
    for mode in reference.MODES:
        for channel in reference.TABLE_CHANNELS:
            for lam in reference.LAMBDAS:
                initial = gisin_state(lam, reference.THETA)
                convention = "effective" if channel == "phase-damping" else "stated"

                def scan_all(conv):
                    return tuple(
                        predicate_scan(initial, channel, _MODE_OF[mode], c, grid_n, tol, conv)
                        for c in CRITERIA_ORDER
                    )

                ranges = scan_all(convention)
                stated = scan_all("stated") if channel == "phase-damping" else None
                published = tuple(
                    _published(pair) for pair in reference.PUBLISHED_RANGES[(mode, channel, lam)]
                )
                flags = []
                for crit, got, want in zip(CRITERIA_ORDER, ranges, published):
                    dev = got.deviation(want)
                    flagged = dev > threshold
                    flags.append(flagged)
                    if flagged:
                        report.entries.append(Discrepancy(mode, channel, lam, crit, got, want, dev))
                        log.info("discrepancy %s %s lambda=%s %s: %s vs %s", mode, channel, lam, crit, got, want)
                rows.append(
                    TableRow(channel, lam, reference.THETA, mode, ranges, published, tuple(flags), convention, stated)
                )
    return rows, report


# -- region map -----------------------------------------------------------------------------


@dataclass(frozen=True)
class RegionPoint:
    lam: float
    theta: float
    m_value: float
    nonlocal_: bool


def nonlocal_region(lambda_grid: Sequence[float], theta_grid: Sequence[float]) -> list[RegionPoint]:
    """CHSH value of the family state at every ``(lambda, theta)`` pair; nonlocal means M > 1."""
    lams = np.asarray(lambda_grid, dtype=float)
    thetas = np.asarray(theta_grid, dtype=float)
    if lams.size and (lams.min() < 0 or lams.max() > 1):
        raise InvalidArgumentError("field 'lambda': grid must lie in [0, 1]")
    if thetas.size and (thetas.min() < 0 or thetas.max() > np.pi / 2 + 1e-12):
        raise InvalidArgumentError("field 'theta': grid must lie in [0, pi/2]")
    L, T = np.meshgrid(lams, thetas, indexing="ij")
    m = m_values(gisin_matrices(L, T))
    return [
        RegionPoint(float(l), float(t), float(v), not bool(_inside(v)))
        for l, t, v in zip(L.ravel(), T.ravel(), m.ravel())
    ]


# -- LHS scenarios ---------------------------------------------------------------------------

GOLDEN = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class LhsResult:
    p_star: float
    distance: float
    report: CriteriaReport
    state: DensityMatrix


def _golden_min(f, a: float, b: float, tol: float) -> float:
    c, d = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def lhs_scenario(
    q: float,
    s: float,
    channel,
    mode: InteractionMode = InteractionMode.SINGLE_BOB,
    convention: str = "stated",
    grid_n: int = 201,
    tol: float = 1e-6,
) -> LhsResult:
    """Strength at which the noisy mixture state comes closest to ``rho_f``.

    Distance is the largest entrywise deviation. A coarse grid locates the
    basin; golden-section search refines it.
    """
    initial = mixture_state(q, s)
    target = rho_f().mat
    builder = _resolve_builder(channel, convention)

    def distance(ps) -> np.ndarray:
        mats = interact_batch(initial, builder, ps, mode)
        return np.max(np.abs(mats - target), axis=(-2, -1))

    ps = np.linspace(0.0, 1.0, grid_n)
    i = int(np.argmin(distance(ps)))
    lo, hi = ps[max(i - 1, 0)], ps[min(i + 1, grid_n - 1)]
    p_star = _golden_min(lambda p: float(distance([p])[0]), lo, hi, tol)
    if distance([ps[i]])[0] < distance([p_star])[0]:
        p_star = float(ps[i])
    state = interact(initial, builder, p_star, mode)
    return LhsResult(p_star, float(distance([p_star])[0]), evaluate_all(state), state)


# -- steerability breaking -----------------------------------------------------------------------


def breaking_epsilon(chi: ChiForm | DensityMatrix) -> float:
    """Largest shrink factor ``eps`` in [0, 1] with ``eps^2 |a|^2 + 2 eps max|t_ii| <= 1``."""
    if isinstance(chi, DensityMatrix):
        chi = chi_form(chi)
    a2 = float(np.dot(chi.a, chi.a))
    m = math.sqrt(float(np.max(np.square(chi.t_diag))))
    if a2 > 0:
        return min(1.0, (-m + math.sqrt(m * m + a2)) / a2)
    if m > 0:
        return min(1.0, 1 / (2 * m))
    return 1.0


def breaking_lhs(chi: ChiForm, epsilon: float) -> float:
    """Left side of the shrunk-state unsteerability condition at ``epsilon``."""
    a2 = float(np.dot(chi.a, chi.a))
    m = math.sqrt(float(np.max(np.square(chi.t_diag))))
    return epsilon**2 * a2 + 2 * epsilon * m


def epsilon_to_p(epsilon: float) -> float:
    epsilon = float(epsilon)
    if not 0.0 <= epsilon <= 1.0:
        raise InvalidArgumentError(f"epsilon must lie in [0, 1], got {epsilon}")
    return 0.75 * (1 - epsilon)


def p_to_epsilon(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 0.75:
        raise InvalidArgumentError(f"p must lie in [0, 3/4], got {p}")
    return 1 - 4 * p / 3
