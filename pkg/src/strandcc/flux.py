"""External flux driving the strand circuit.

Vector-potential values at the conductor locations come either from a flux
file (e.g. an FEA export) or from a parametric synthetic slot field.  All
harmonic quantities are complex RMS phasors with the time convention
``x(t) = sqrt(2) * Re(X exp(j k w t))``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, IncompleteFieldError
from .tables import fmt, write_rows
from .winding import WindingDescription

FLUX_COLUMNS = ("slot_id", "conductor_id", "harmonic_k", "re_Az", "im_Az")


@dataclass(frozen=True)
class VectorPotentialField:
    """``A_z`` [Wb/m] per (harmonic, slot, conductor); NaN marks a missing entry.

    ``values`` has shape ``(len(harmonics), len(slot_ids), N_c)``.
    """

    harmonics: tuple
    slot_ids: tuple
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "harmonics", tuple(int(k) for k in self.harmonics))
        object.__setattr__(self, "slot_ids", tuple(self.slot_ids))
        v = np.array(self.values, dtype=np.complex128, copy=True)
        if v.ndim != 3 or v.shape[:2] != (len(self.harmonics), len(self.slot_ids)):
            raise ValueError(
                f"values shape {v.shape} does not match {len(self.harmonics)} harmonics "
                f"x {len(self.slot_ids)} slots x N_c"
            )
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def N_c(self) -> int:
        return self.values.shape[2]

    def entry(self, slot_id, k) -> np.ndarray:
        """``A_z`` of every conductor of ``slot_id`` at harmonic ``k``."""
        try:
            h = self.harmonics.index(int(k))
        except ValueError:
            raise IncompleteFieldError(f"field has no data for harmonic {k}") from None
        try:
            s = self.slot_ids.index(slot_id)
        except ValueError:
            raise IncompleteFieldError(f"field has no data for slot {slot_id}") from None
        row = self.values[h, s]
        missing = np.nonzero(np.isnan(row.real) | np.isnan(row.imag))[0]
        if missing.size:
            which = ", ".join(str(c + 1) for c in missing[:10])
            more = "..." if missing.size > 10 else ""
            raise IncompleteFieldError(
                f"field misses slot {slot_id}, harmonic {k}, conductor(s) {which}{more}"
            )
        return row

    def _aligned(self, other):
        if self.harmonics != other.harmonics or self.slot_ids != other.slot_ids:
            raise ValueError("fields cover different harmonics or slots")
        if self.values.shape != other.values.shape:
            raise ValueError("fields have different conductor counts")

    def __add__(self, other):
        self._aligned(other)
        return VectorPotentialField(self.harmonics, self.slot_ids, self.values + other.values)

    def __mul__(self, c):
        return VectorPotentialField(self.harmonics, self.slot_ids, self.values * complex(c))

    __rmul__ = __mul__


def slot_flux(field: VectorPotentialField, slot_id, k, l_active) -> np.ndarray:
    """Flux linked by each conductor of the slot over the active length."""
    return l_active * field.entry(slot_id, k)


def phase_flux(field: VectorPotentialField, desc: WindingDescription, k) -> np.ndarray:
    """Strand flux vector ``sum_i M_i^T phi_i,k``.

    A harmonic absent from ``field`` contributes zero flux.
    """
    out = np.zeros(desc.Nsh, dtype=np.complex128)
    if int(k) not in field.harmonics:
        return out
    for m in desc.maps:
        phi = slot_flux(field, m.slot_id, k, desc.geometry.l_active)
        if phi.shape[0] != m.shape[0]:
            raise IncompleteFieldError(
                f"slot {m.slot_id}: field has {phi.shape[0]} conductors, map has {m.shape[0]}"
            )
        out += m.entries.T.astype(np.float64) @ phi
    return out


@dataclass(frozen=True)
class FluxSpectrum:
    harmonics: np.ndarray
    phi: np.ndarray

    def at(self, k) -> np.ndarray:
        idx = np.nonzero(self.harmonics == k)[0]
        if not idx.size:
            raise KeyError(f"harmonic {k} not in spectrum")
        return self.phi[idx[0]]


def flux_spectrum(field, desc: WindingDescription, orders: Sequence[int]) -> FluxSpectrum:
    orders = np.asarray(orders, dtype=np.int64)
    phi = np.array([phase_flux(field, desc, int(k)) for k in orders]).reshape(
        len(orders), desc.Nsh
    )
    return FluxSpectrum(orders, phi)


@dataclass(frozen=True)
class HarmonicTerm:
    """One harmonic of the synthetic field: ``A_z = A0 + g . (x, y)`` in a slot."""

    k: int
    A0: complex
    gradient: tuple = (0j, 0j)


@dataclass(frozen=True)
class SyntheticFieldParams:
    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        ks = [t.k for t in self.terms]
        if len(set(ks)) != len(ks):
            raise ValueError(f"duplicate harmonic orders in synthetic field: {ks}")

    @property
    def harmonics(self):
        return tuple(t.k for t in self.terms)


def synthetic_field(params: SyntheticFieldParams, desc: WindingDescription):
    """Slot field ``(A0_k + g_k . pos) * exp(j k theta_slot)``.

    ``theta_slot = 2 pi (p / 2) slot_id / N_slots`` is the electrical angle
    of the slot, so ``slot_id`` must be the slot's index around the stator.
    """
    g = desc.geometry
    slot_ids = desc.slot_ids
    values = np.zeros((len(params.terms), len(slot_ids), g.N_c), dtype=np.complex128)
    for s, sid in enumerate(slot_ids):
        pos = desc.layout_for(sid).positions
        theta = 2.0 * math.pi * (g.p / 2.0) * sid / g.N_slots
        for h, term in enumerate(params.terms):
            grad = np.asarray(term.gradient, dtype=np.complex128)
            local = complex(term.A0) + pos @ grad
            values[h, s, : pos.shape[0]] = local * np.exp(1j * term.k * theta)
    return VectorPotentialField(params.harmonics, slot_ids, values)


def read_flux_file(path) -> VectorPotentialField:
    """Parse a flux table; conductor ids are 1-based."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read flux file {path}: {exc.strerror}", key="flux.file")
    with fh:
        reader = csv.reader(line for line in fh if not line.lstrip().startswith("#"))
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ConfigError(f"flux file {path} is empty", key="flux.file") from None
        unknown = [h for h in header if h not in FLUX_COLUMNS]
        missing = [c for c in FLUX_COLUMNS if c not in header]
        if unknown or missing or len(header) != len(FLUX_COLUMNS):
            raise ConfigError(
                f"flux file {path}: header must be exactly {','.join(FLUX_COLUMNS)}"
                + (f"; unknown column(s) {unknown}" if unknown else "")
                + (f"; missing column(s) {missing}" if missing else ""),
                key="flux.file",
            )
        col = {name: header.index(name) for name in FLUX_COLUMNS}
        entries = {}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ConfigError(
                    f"flux file {path} line {lineno}: {len(row)} cells, expected {len(header)}",
                    key="flux.file",
                )
            try:
                sid = int(row[col["slot_id"]])
                cid = int(row[col["conductor_id"]])
                k = int(row[col["harmonic_k"]])
                val = complex(float(row[col["re_Az"]]), float(row[col["im_Az"]]))
            except ValueError as exc:
                raise ConfigError(
                    f"flux file {path} line {lineno}: {exc}", key="flux.file"
                ) from None
            if cid < 1 or k < 1:
                raise ConfigError(
                    f"flux file {path} line {lineno}: conductor_id and harmonic_k must be >= 1",
                    key="flux.file",
                )
            if (sid, cid, k) in entries:
                raise ConfigError(
                    f"flux file {path} line {lineno}: duplicate entry "
                    f"slot {sid} conductor {cid} harmonic {k}",
                    key="flux.file",
                )
            entries[(sid, cid, k)] = val
    if not entries:
        raise ConfigError(f"flux file {path} has no data rows", key="flux.file")
    harmonics = sorted({k for _, _, k in entries})
    slot_ids = sorted({s for s, _, _ in entries})
    n_c = max(c for _, c, _ in entries)
    values = np.full((len(harmonics), len(slot_ids), n_c), np.nan + 1j * np.nan)
    h_idx = {k: i for i, k in enumerate(harmonics)}
    s_idx = {s: i for i, s in enumerate(slot_ids)}
    for (s, c, k), v in entries.items():
        values[h_idx[k], s_idx[s], c - 1] = v
    return VectorPotentialField(harmonics, slot_ids, values)


def write_flux_file(path, field: VectorPotentialField):
    rows = []
    for h, k in enumerate(field.harmonics):
        for s, sid in enumerate(field.slot_ids):
            for c in range(field.N_c):
                v = field.values[h, s, c]
                if np.isnan(v.real) or np.isnan(v.imag):
                    continue
                rows.append((sid, c + 1, k, fmt(v.real), fmt(v.imag)))
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    write_rows(path, FLUX_COLUMNS, rows)
