"""Machine geometry, slot conductor layouts and conductor-to-strand maps.

Index conventions: conductors and strands are 0-based positions in the
Python API (rows/columns of the arrays); slot ids are labels chosen by the
caller.  File formats use 1-based conductor and strand numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidGeometryError

# relative slack on the no-overlap test so touching strands are not flagged
_OVERLAP_RTOL = 1e-9


def _frozen(array, dtype):
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


class AlphaW(float):
    """Ratio of half the coil length to the active length (always >= 1)."""

    def __new__(cls, value):
        v = float(value)
        if not (v >= 1.0 and math.isfinite(v)):
            raise InvalidGeometryError(f"alpha_w must be a finite value >= 1, got {value!r}")
        return super().__new__(cls, v)

    def __repr__(self):
        return f"AlphaW({float(self)!r})"


@dataclass(frozen=True)
class MachineGeometry:
    """Axial lengths [m] and slot/pole counts of the machine.

    ``p`` is the number of rotor poles (not pole pairs).
    """

    l_active: float
    l_EW: float
    N_slots: int
    p: int
    N_c: int
    SPP: Optional[int] = None

    def with_alpha(self, alpha) -> "MachineGeometry":
        """Same active part, end winding stretched to give ``alpha``."""
        alpha = AlphaW(alpha)
        return replace(self, l_EW=(float(alpha) - 1.0) * self.l_active)

    @property
    def coil_length(self) -> float:
        return 2.0 * (self.l_active + self.l_EW)


def alpha_w(geometry: MachineGeometry) -> AlphaW:
    """Return ``(l_active + l_EW) / l_active`` for ``geometry``."""
    if not geometry.l_active > 0:
        raise InvalidGeometryError(f"l_active must be > 0, got {geometry.l_active!r}")
    if geometry.l_EW < 0:
        raise InvalidGeometryError(f"l_EW must be >= 0, got {geometry.l_EW!r}")
    return AlphaW((geometry.l_active + geometry.l_EW) / geometry.l_active)


@dataclass(frozen=True)
class SlotLayout:
    """Cross-section coordinates [m] of the ``N_c`` conductors of one slot."""

    slot_id: int
    positions: np.ndarray
    r_strd: float

    def __post_init__(self):
        pos = _frozen(self.positions, np.float64)
        if pos.ndim != 2 or pos.shape[1] != 2:
            raise InvalidGeometryError(
                f"slot {self.slot_id}: positions must have shape (N_c, 2), got {pos.shape}"
            )
        object.__setattr__(self, "positions", pos)

    @property
    def N_c(self) -> int:
        return self.positions.shape[0]

    def distances(self) -> np.ndarray:
        diff = self.positions[:, None, :] - self.positions[None, :, :]
        return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))

    def with_slot_id(self, slot_id) -> "SlotLayout":
        return replace(self, slot_id=slot_id)


def conductor_distance(layout: SlotLayout, i: int, j: int) -> float:
    """Euclidean distance between conductors ``i`` and ``j`` (0-based, i != j)."""
    n = layout.N_c
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"conductor index out of range [0, {n}): {i}, {j}")
    if i == j:
        raise ValueError("distance of a conductor to itself is not defined")
    dx, dy = layout.positions[i] - layout.positions[j]
    return math.hypot(dx, dy)


@dataclass(frozen=True)
class WindingMap:
    """Signed incidence between the conductors of one slot and the strands.

    ``entries[c, s]`` is +1 when conductor ``c`` belongs to strand ``s`` on
    the + coil side, -1 on the - coil side, 0 when unconnected.
    """

    slot_id: int
    entries: np.ndarray

    def __post_init__(self):
        m = _frozen(self.entries, np.int8)
        if m.ndim != 2:
            raise InvalidGeometryError(f"slot {self.slot_id}: map must be 2-D, got {m.shape}")
        object.__setattr__(self, "entries", m)

    @classmethod
    def from_triplets(cls, slot_id, triplets, N_c, Nsh):
        """Build from ``(conductor, strand, sign)`` triplets, 0-based indices."""
        m = np.zeros((N_c, Nsh), dtype=np.int8)
        for c, s, sign in triplets:
            m[c, s] = sign
        return cls(slot_id, m)

    @property
    def shape(self):
        return self.entries.shape

    def row_form(self):
        """``(strand_of, sign)`` per conductor; ``strand_of`` is -1 if unconnected.

        Assumes at most one nonzero per row (checked by ``validate_winding``).
        """
        nz = self.entries != 0
        strand_of = np.where(nz.any(axis=1), np.argmax(nz, axis=1), -1).astype(np.int64)
        rows = np.arange(self.entries.shape[0])
        sign = np.where(strand_of >= 0, self.entries[rows, np.maximum(strand_of, 0)], 0)
        return strand_of, sign.astype(np.float64)


@dataclass(frozen=True)
class WindingDescription:
    """Everything needed to assemble the phase-A strand circuit.

    ``layouts`` holds one layout per slot id referenced by ``maps``.  ``S``
    overrides the strand cross-section; by default it is ``pi * r_strd**2``
    of the slot's layout.  ``N_p_s``, ``Nsh_per_slot`` and
    ``turns_per_slot`` are optional structural declarations: the first two
    are checked against ``Nsh`` when both are given, the last is kept for
    reporting.
    """

    geometry: MachineGeometry
    layouts: tuple
    maps: tuple
    Nsh: int
    sigma: float
    S: Optional[float] = None
    N_p_s: Optional[int] = None
    Nsh_per_slot: Optional[int] = None
    turns_per_slot: Optional[int] = None
    _by_slot: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "layouts", tuple(self.layouts))
        object.__setattr__(self, "maps", tuple(self.maps))
        object.__setattr__(self, "_by_slot", {lay.slot_id: lay for lay in self.layouts})

    def layout_for(self, slot_id) -> SlotLayout:
        try:
            return self._by_slot[slot_id]
        except KeyError:
            raise KeyError(f"no layout for slot {slot_id}") from None

    def strand_area(self, slot_id) -> float:
        if self.S is not None:
            return float(self.S)
        return math.pi * self.layout_for(slot_id).r_strd ** 2

    @property
    def slot_ids(self):
        return tuple(m.slot_id for m in self.maps)

    def with_alpha(self, alpha) -> "WindingDescription":
        return replace(self, geometry=self.geometry.with_alpha(alpha))


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str

    def __str__(self):
        return f"{self.kind}: {self.message}"


def _check_geometry(g: MachineGeometry):
    out = []
    if not g.l_active > 0:
        out.append(Violation("geometry", f"l_active must be > 0, got {g.l_active}"))
    if not g.l_EW >= 0:
        out.append(Violation("geometry", f"l_EW must be >= 0, got {g.l_EW}"))
    if g.SPP is not None and g.N_slots != 3 * g.p * g.SPP:
        out.append(
            Violation(
                "geometry",
                f"N_slots={g.N_slots} != 3 * p * SPP = {3 * g.p * g.SPP} (p={g.p}, SPP={g.SPP})",
            )
        )
    return out


def _check_layout(layout: SlotLayout, N_c: int):
    out = []
    if layout.N_c != N_c:
        out.append(
            Violation("layout-size", f"slot {layout.slot_id}: {layout.N_c} positions, N_c={N_c}")
        )
    if not layout.r_strd > 0:
        out.append(Violation("geometry", f"slot {layout.slot_id}: r_strd must be > 0"))
        return out
    d = layout.distances()
    limit = 2.0 * layout.r_strd * (1.0 - _OVERLAP_RTOL)
    ii, jj = np.nonzero(np.triu(d < limit, k=1))
    for i, j in zip(ii, jj):
        out.append(
            Violation(
                "overlap",
                f"slot {layout.slot_id}: conductors {i + 1} and {j + 1} overlap "
                f"(distance {d[i, j]:.6g} m < 2*r_strd = {2 * layout.r_strd:.6g} m)",
            )
        )
    return out


def validate_winding(desc: WindingDescription) -> list:
    """Return the list of violated invariants; empty means valid."""
    report = _check_geometry(desc.geometry)
    if not desc.sigma > 0:
        report.append(Violation("material", f"sigma must be > 0, got {desc.sigma}"))
    if desc.S is not None and not desc.S > 0:
        report.append(Violation("material", f"S must be > 0, got {desc.S}"))
    if desc.N_p_s is not None and desc.Nsh_per_slot is not None:
        if desc.Nsh != desc.N_p_s * desc.Nsh_per_slot:
            report.append(
                Violation(
                    "strand-count",
                    f"Nsh={desc.Nsh} != N_p_s * Nsh_per_slot = {desc.N_p_s * desc.Nsh_per_slot}",
                )
            )
    for layout in desc.layouts:
        report.extend(_check_layout(layout, desc.geometry.N_c))

    seen_slots = set()
    used = np.zeros(desc.Nsh, dtype=bool)
    for m in desc.maps:
        if m.slot_id in seen_slots:
            report.append(Violation("map-shape", f"slot {m.slot_id}: more than one map"))
        seen_slots.add(m.slot_id)
        try:
            layout = desc.layout_for(m.slot_id)
        except KeyError:
            report.append(Violation("missing-layout", f"slot {m.slot_id}: map has no layout"))
            layout = None
        rows, cols = m.shape
        expected_rows = layout.N_c if layout is not None else desc.geometry.N_c
        if rows != expected_rows or cols != desc.Nsh:
            report.append(
                Violation(
                    "map-shape",
                    f"slot {m.slot_id}: map is {rows}x{cols}, expected {expected_rows}x{desc.Nsh}",
                )
            )
        bad = ~np.isin(m.entries, (-1, 0, 1))
        if bad.any():
            report.append(
                Violation("map-entries", f"slot {m.slot_id}: entries outside {{-1, 0, +1}}")
            )
        counts = np.count_nonzero(m.entries, axis=1)
        for c in np.nonzero(counts > 1)[0]:
            report.append(
                Violation(
                    "row-cardinality",
                    f"slot {m.slot_id}: conductor {c + 1} is linked to {counts[c]} strands",
                )
            )
        if cols == desc.Nsh:
            used |= np.any(m.entries != 0, axis=0)
    for s in np.nonzero(~used)[0]:
        report.append(Violation("orphan-strand", f"strand {s + 1} has no conductor in any slot"))
    return report


def identical_layouts(base: SlotLayout, slot_ids: Sequence) -> tuple:
    """Copy ``base`` to every slot id (all slots share one layout)."""
    return tuple(base.with_slot_id(s) for s in slot_ids)
