"""
Connecting relevant critical points into a change-set estimate.

Per slice, the relevant points x_1 < ... < x_p (p >= 2) induce the span x_1+1 .. x_p:
the first critical point sits just outside the set, the later ones on or inside it.
The combined mode runs both orientations on the same data and unions the results.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

from .cusum import GammaLike
from .errors import DomainError
from .lattice import (
    Lattice,
    PointSet,
    column_chord,
    domain_boundary,
    is_connected,
    label_components,
    row_chord,
    set_distance,
)
from .scan import OverlapRule, ScanField, pool, scan, select_relevant
from .slicing import FrameSequence, Orientation, grid_point, slice_count

logger = logging.getLogger(__name__)


class ScanMode(str, Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"
    BOTH = "both"

    @classmethod
    def parse(cls, text: str) -> "ScanMode":
        aliases = {
            "h": cls.HORIZONTAL,
            "horizontal": cls.HORIZONTAL,
            "v": cls.VERTICAL,
            "vertical": cls.VERTICAL,
            "both": cls.BOTH,
            "hv": cls.BOTH,
            "h+v": cls.BOTH,
            "combined": cls.BOTH,
        }
        try:
            return aliases[text.strip().lower()]
        except KeyError:
            raise DomainError(f"Unknown scan mode {text!r}. Valid: h, v, both") from None

    @property
    def orientations(self) -> Tuple[Orientation, ...]:
        if self is ScanMode.HORIZONTAL:
            return (Orientation.HORIZONTAL,)
        if self is ScanMode.VERTICAL:
            return (Orientation.VERTICAL,)
        return (Orientation.HORIZONTAL, Orientation.VERTICAL)


def _connect(sets: Sequence[PointSet], lat: Lattice, orientation: Orientation) -> PointSet:
    members = set()
    for index, relevant in enumerate(sets, start=1):
        along = []
        for p in relevant.members:
            horizontal = orientation is Orientation.HORIZONTAL
            fixed, position = (p.row, p.col) if horizontal else (p.col, p.row)
            if fixed != index:
                raise DomainError(
                    f"Relevant point {tuple(p)} is not on {orientation.value} slice {index}"
                )
            along.append(position)
        if len(along) < 2:
            continue
        along.sort()
        for position in range(along[0] + 1, along[-1] + 1):
            members.add(grid_point(orientation, index, position))
    return PointSet(frozenset(members), lat)


def connect_horizontal(h_sets: Sequence[PointSet], lat: Lattice) -> PointSet:
    """Union over rows of the spans (i, x_1+1) .. (i, x_p)."""
    return _connect(h_sets, lat, Orientation.HORIZONTAL)


def connect_vertical(v_sets: Sequence[PointSet], lat: Lattice) -> PointSet:
    """Union over columns of the spans (x_1+1, j) .. (x_p, j)."""
    return _connect(v_sets, lat, Orientation.VERTICAL)


@dataclass(frozen=True, eq=False)
class ChangeSetEstimate:
    """Estimate together with the intermediate results that produced it."""

    estimate: PointSet
    relevant: PointSet
    h_sets: List[PointSet]
    v_sets: List[PointSet]
    fields: Dict[Orientation, ScanField] = field(default_factory=dict)


def estimate_from_fields(
    fields: Dict[Orientation, ScanField],
    rule: OverlapRule,
    lat: Lattice,
) -> ChangeSetEstimate:
    """Steps 3-4 on already scanned fields; slices flagged degenerate contribute nothing."""
    empty = PointSet.empty(lat)
    chosen = {o: [empty] * slice_count(lat, o) for o in Orientation}
    for orientation, scan_field in fields.items():
        relevant = select_relevant(scan_field, rule)
        chosen[orientation] = [
            empty if scan_field.degenerate[s] else relevant[s] for s in range(len(relevant))
        ]
    h_sets = chosen[Orientation.HORIZONTAL]
    v_sets = chosen[Orientation.VERTICAL]
    estimate = connect_horizontal(h_sets, lat) | connect_vertical(v_sets, lat)
    return ChangeSetEstimate(estimate, pool(h_sets, v_sets, lat), h_sets, v_sets, dict(fields))


def estimate_change_set_detailed(
    seq: FrameSequence,
    mode: ScanMode,
    rule: OverlapRule,
    gamma: GammaLike,
    workers: int = 1,
) -> ChangeSetEstimate:
    """Slicing, scanning, selection and connecting for the requested orientation(s)."""
    fields = {
        orientation: scan(seq, orientation, rule.window, gamma, workers)
        for orientation in mode.orientations
    }
    result = estimate_from_fields(fields, rule, seq.lattice)
    logger.debug(
        f"Estimated {len(result.estimate)} points ({mode.value}, rule {rule}, "
        f"{len(result.relevant)} relevant)"
    )
    return result


def estimate_change_set(
    seq: FrameSequence,
    mode: ScanMode,
    rule: OverlapRule,
    gamma: GammaLike,
    workers: int = 1,
) -> PointSet:
    """Change-set estimate S_hat."""
    return estimate_change_set_detailed(seq, mode, rule, gamma, workers).estimate


def split_components(s: PointSet) -> List[PointSet]:
    """4-connected components of ``s``, ordered by their smallest member (row-major)."""
    if not s:
        return []
    labeled, count = label_components(s)
    parts = [PointSet.from_mask(labeled == label, s.lattice) for label in range(1, count + 1)]
    return sorted(parts, key=lambda part: part.sorted()[0])


@dataclass(frozen=True)
class ClauseResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class TheoremReport:
    """Pass/fail per condition of the consistency theorem."""

    xi: int
    mode: ScanMode
    clauses: Tuple[ClauseResult, ...]
    multi_set: bool = False

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.clauses)

    def failures(self) -> List[ClauseResult]:
        return [c for c in self.clauses if not c.passed]

    def to_dict(self) -> Dict[str, object]:
        return {
            "xi": self.xi,
            "mode": self.mode.value,
            "passed": self.passed,
            "multi_set": self.multi_set,
            "clauses": [
                {"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.clauses
            ],
        }


def _chord_clauses(
    part: PointSet, lat: Lattice, xi: int, mode: ScanMode, prefix: str
) -> List[ClauseResult]:
    rows = {i: row_chord(part, i) for i in range(1, lat.rows + 1)}
    cols = {j: column_chord(part, j) for j in range(1, lat.cols + 1)}

    broken = [f"H_{i}" for i, h in rows.items() if not is_connected(h)]
    broken += [f"V_{j}" for j, v in cols.items() if not is_connected(v)]
    clauses = [
        ClauseResult(
            f"{prefix}chords_connected",
            not broken,
            "all H_i, V_j empty or connected" if not broken
            else "disconnected: " + ", ".join(broken),
        )
    ]

    if mode is ScanMode.HORIZONTAL:
        short = [f"H_{i} ({len(h)})" for i, h in rows.items() if h and len(h) < xi]
    elif mode is ScanMode.VERTICAL:
        short = [f"V_{j} ({len(v)})" for j, v in cols.items() if v and len(v) < xi]
    else:
        short = [
            f"({p.row},{p.col})"
            for p in part.sorted()
            if max(len(rows[p.row]), len(cols[p.col])) < xi
        ]
    clauses.append(
        ClauseResult(
            f"{prefix}chord_length",
            not short,
            f"every chord reaches xi={xi}" if not short else "too short: " + ", ".join(short),
        )
    )
    return clauses


def validate_theorem_conditions(
    truth: PointSet,
    lat: Lattice,
    xi: int,
    mode: ScanMode,
    window: Optional[int] = None,
) -> TheoremReport:
    """
    Check the conditions under which P(S_hat = S) -> 1.

    ``window`` is the N of the intended rule (4 <= N <= xi, even); it defaults to the largest
    even N <= xi, the strictest choice for the admissible-region clause. Multi-component
    truths fail the ``connected`` clause; they are still checked per component with an extra
    pairwise ``separation`` clause so the report shows which single-set conditions hold.
    """
    if truth.lattice != lat:
        raise DomainError("Truth set lives on a different lattice")
    if xi < 4 or xi > min(lat.rows, lat.cols):
        raise DomainError(f"xi={xi} must satisfy 4 <= xi <= min(m, n)={min(lat.rows, lat.cols)}")
    N = xi - xi % 2 if window is None else window
    if N % 2 != 0:
        raise DomainError(f"Window N={N} must be even")
    if not (4 <= N <= xi):
        raise DomainError(f"Window N={N} must satisfy 4 <= N <= xi={xi}")

    clauses: List[ClauseResult] = []
    if not truth:
        clauses.append(ClauseResult("nonempty", False, "the change set is empty"))
        return TheoremReport(xi, mode, tuple(clauses))

    parts = [truth] if is_connected(truth) else split_components(truth)
    multi = len(parts) > 1
    clauses.append(
        ClauseResult(
            "connected",
            not multi,
            "single connected set" if not multi
            else f"{len(parts)} components, each checked separately",
        )
    )

    full = lat.full()
    edge = domain_boundary(lat)
    for c, part in enumerate(parts, start=1):
        prefix = f"component {c}: " if multi else ""
        dist = set_distance(part, edge, full)
        clauses.append(
            ClauseResult(
                f"{prefix}boundary_distance",
                dist >= xi - 1,
                f"d(S,B)={dist}, need >= {xi - 1}",
            )
        )
        clauses.extend(_chord_clauses(part, lat, xi, mode, prefix))

    mask = truth.to_mask()
    col_limit = lat.cols - N + 1
    row_limit = lat.rows - N + 1
    outside = int(mask[:, col_limit:].sum() + mask[row_limit:, :].sum())
    clauses.append(
        ClauseResult(
            "admissible_region",
            outside == 0,
            f"no points with j > {col_limit} or i > {row_limit}" if outside == 0
            else f"{outside} points beyond j > {col_limit} or i > {row_limit}",
        )
    )

    if multi:
        close = []
        for a in range(len(parts)):
            for b in range(a + 1, len(parts)):
                dist = set_distance(parts[a], parts[b], full)
                if dist < xi:
                    close.append(f"{a + 1}-{b + 1} ({dist})")
        clauses.append(
            ClauseResult(
                "separation",
                not close,
                f"components at least {xi} apart" if not close
                else "too close: " + ", ".join(close),
            )
        )
    report = TheoremReport(xi, mode, tuple(clauses), multi_set=multi)
    verdict = "pass" if report.passed else "fail"
    logger.info(f"Theorem conditions for xi={xi}, {mode.value}: {verdict}")
    return report
