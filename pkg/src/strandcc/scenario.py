"""Scenario files: one YAML document fixes geometry, layout, flux and supply.

Lengths are in metres except slot coordinates and strand radius, which are
given in millimetres (``positions_mm``, ``r_strd_mm``).  Map triplets are
``[slot_id, conductor, strand, sign]`` with 1-based conductor and strand
numbers; ``slot_id`` is the slot's index around the stator.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import yaml

from .assembly import REGIMES
from .errors import ConfigError
from .flux import (
    HarmonicTerm,
    SyntheticFieldParams,
    VectorPotentialField,
    read_flux_file,
    synthetic_field,
    write_flux_file,
)
from .winding import MachineGeometry, SlotLayout, WindingDescription, WindingMap


@dataclass(frozen=True)
class Scenario:
    """A fully specified operating case.

    ``supply`` maps harmonic order to the bundle's RMS current phasor [A].
    Every order in ``1..n_harmonics`` is solved; orders absent from both
    ``supply`` and the field carry no current.
    """

    winding: WindingDescription
    field: VectorPotentialField
    supply: dict
    omega: float
    n_harmonics: int
    regime: str = "full"
    no_load: bool = False
    synthetic: Optional[SyntheticFieldParams] = None
    flux_file: Optional[str] = None
    source: Optional[str] = field(default=None, compare=False)

    @property
    def orders(self) -> np.ndarray:
        return np.arange(1, self.n_harmonics + 1)

    @property
    def bundle(self) -> np.ndarray:
        return np.array([complex(self.supply.get(int(k), 0j)) for k in self.orders])

    def with_regime(self, regime) -> "Scenario":
        if regime not in REGIMES:
            raise ConfigError(f"regime must be one of {REGIMES}, got {regime!r}", key="regime")
        return replace(self, regime=regime)


# --- parsing helpers -------------------------------------------------------


def _section(doc, key):
    if key not in doc:
        raise ConfigError(f"missing section '{key}'", key=key)
    val = doc[key]
    if not isinstance(val, dict):
        raise ConfigError(f"section '{key}' must be a mapping", key=key)
    return val


def _num(d, key, path, default=..., kind=float):
    if key not in d or d[key] is None:
        if default is ...:
            raise ConfigError(f"missing key '{path}.{key}'", key=f"{path}.{key}")
        return default
    v = d[key]
    try:
        if kind is int:
            if isinstance(v, bool) or float(v) != int(float(v)):
                raise ValueError
            return int(float(v))
        if isinstance(v, bool):
            raise ValueError
        return float(v)
    except (TypeError, ValueError):
        raise ConfigError(
            f"key '{path}.{key}' must be {'an integer' if kind is int else 'a number'}, got {v!r}",
            key=f"{path}.{key}",
        ) from None


def _complex_pair(v, path):
    try:
        re, im = v
        return complex(float(re), float(im))
    except (TypeError, ValueError):
        raise ConfigError(f"key '{path}' must be a [re, im] pair, got {v!r}", key=path) from None


def _positions(v, path):
    try:
        arr = np.array(v, dtype=np.float64)
    except (TypeError, ValueError):
        raise ConfigError(f"key '{path}' must be a list of [x, y] pairs", key=path) from None
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ConfigError(f"key '{path}' must be a list of [x, y] pairs", key=path)
    return arr * 1e-3


def _check_keys(d, allowed, path):
    extra = sorted(set(d) - set(allowed))
    if extra:
        raise ConfigError(f"unknown key '{path}.{extra[0]}'", key=f"{path}.{extra[0]}")


def _parse_synthetic(items):
    if not isinstance(items, list) or not items:
        raise ConfigError("'flux.synthetic' must be a non-empty list", key="flux.synthetic")
    terms = []
    for i, item in enumerate(items):
        path = f"flux.synthetic[{i}]"
        if not isinstance(item, dict):
            raise ConfigError(f"'{path}' must be a mapping", key=path)
        _check_keys(item, ("k", "A0", "gradient"), path)
        k = _num(item, "k", path, kind=int)
        if k < 1:
            raise ConfigError(f"'{path}.k' must be >= 1", key=f"{path}.k")
        A0 = _complex_pair(item.get("A0", [0, 0]), f"{path}.A0")
        grad = item.get("gradient", [[0, 0], [0, 0]])
        if not isinstance(grad, list) or len(grad) != 2:
            raise ConfigError(f"'{path}.gradient' must be [[gx_re, gx_im], [gy_re, gy_im]]",
                              key=f"{path}.gradient")
        g = (_complex_pair(grad[0], f"{path}.gradient"), _complex_pair(grad[1], f"{path}.gradient"))
        terms.append(HarmonicTerm(k, A0, g))
    try:
        return SyntheticFieldParams(tuple(terms))
    except ValueError as exc:
        raise ConfigError(str(exc), key="flux.synthetic") from None


def parse_scenario(doc, base_dir=".", source=None) -> Scenario:
    if not isinstance(doc, dict):
        raise ConfigError("scenario must be a mapping at top level", key="<root>")
    _check_keys(
        doc, ("geometry", "material", "layout", "slots", "winding", "maps", "flux", "supply",
              "solver"), "<root>"
    )
    g = _section(doc, "geometry")
    _check_keys(g, ("l_active", "l_EW", "N_slots", "p", "N_c", "SPP"), "geometry")
    geometry = MachineGeometry(
        l_active=_num(g, "l_active", "geometry"),
        l_EW=_num(g, "l_EW", "geometry"),
        N_slots=_num(g, "N_slots", "geometry", kind=int),
        p=_num(g, "p", "geometry", kind=int),
        N_c=_num(g, "N_c", "geometry", kind=int),
        SPP=_num(g, "SPP", "geometry", default=None, kind=int),
    )
    mat = _section(doc, "material")
    _check_keys(mat, ("sigma", "r_strd_mm", "S"), "material")
    sigma = _num(mat, "sigma", "material")
    r_strd = _num(mat, "r_strd_mm", "material") * 1e-3
    S = _num(mat, "S", "material", default=None)

    w = _section(doc, "winding")
    _check_keys(w, ("Nsh", "N_p_s", "Nsh_per_slot", "turns_per_slot"), "winding")
    Nsh = _num(w, "Nsh", "winding", kind=int)
    if Nsh < 1:
        raise ConfigError("'winding.Nsh' must be >= 1", key="winding.Nsh")

    triplets = doc.get("maps")
    if not isinstance(triplets, list) or not triplets:
        raise ConfigError("'maps' must be a non-empty list of [slot, conductor, strand, sign]",
                          key="maps")
    per_slot = {}
    for i, t in enumerate(triplets):
        try:
            sid, c, s, sign = (int(x) for x in t)
        except (TypeError, ValueError):
            raise ConfigError(f"'maps[{i}]' must be [slot, conductor, strand, sign], got {t!r}",
                              key=f"maps[{i}]") from None
        if not (1 <= c <= geometry.N_c) or not (1 <= s <= Nsh) or sign not in (-1, 1):
            raise ConfigError(
                f"'maps[{i}]' = {t!r} out of range (conductor 1..{geometry.N_c}, "
                f"strand 1..{Nsh}, sign +-1)",
                key=f"maps[{i}]",
            )
        per_slot.setdefault(sid, []).append((c - 1, s - 1, sign))
    maps = []
    for sid in sorted(per_slot):
        m = np.zeros((geometry.N_c, Nsh), dtype=np.int8)
        for c, s, sign in per_slot[sid]:
            if m[c, s] != 0:
                raise ConfigError(f"'maps': duplicate triplet for slot {sid}, conductor {c + 1}, "
                                  f"strand {s + 1}", key="maps")
            m[c, s] = sign
        maps.append(WindingMap(sid, m))

    overrides = {}
    for i, item in enumerate(doc.get("slots") or []):
        path = f"slots[{i}]"
        if not isinstance(item, dict):
            raise ConfigError(f"'{path}' must be a mapping", key=path)
        _check_keys(item, ("slot_id", "positions_mm", "r_strd_mm"), path)
        sid = _num(item, "slot_id", path, kind=int)
        if "positions_mm" not in item:
            raise ConfigError(f"missing key '{path}.positions_mm'", key=f"{path}.positions_mm")
        r = _num(item, "r_strd_mm", path, default=r_strd * 1e3) * 1e-3
        overrides[sid] = SlotLayout(sid, _positions(item["positions_mm"], f"{path}.positions_mm"), r)
    default_pos = None
    if "layout" in doc:
        lay = _section(doc, "layout")
        _check_keys(lay, ("positions_mm",), "layout")
        if "positions_mm" not in lay:
            raise ConfigError("missing key 'layout.positions_mm'", key="layout.positions_mm")
        default_pos = _positions(lay["positions_mm"], "layout.positions_mm")
    layouts = []
    for m in maps:
        if m.slot_id in overrides:
            layouts.append(overrides[m.slot_id])
        elif default_pos is not None:
            layouts.append(SlotLayout(m.slot_id, default_pos, r_strd))
        else:
            raise ConfigError(f"slot {m.slot_id} has no layout (add 'layout' or a 'slots' entry)",
                              key="layout")

    winding = WindingDescription(
        geometry=geometry,
        layouts=tuple(layouts),
        maps=tuple(maps),
        Nsh=Nsh,
        sigma=sigma,
        S=S,
        N_p_s=_num(w, "N_p_s", "winding", default=None, kind=int),
        Nsh_per_slot=_num(w, "Nsh_per_slot", "winding", default=None, kind=int),
        turns_per_slot=_num(w, "turns_per_slot", "winding", default=None, kind=int),
    )

    fx = _section(doc, "flux")
    _check_keys(fx, ("file", "synthetic"), "flux")
    if ("file" in fx) == ("synthetic" in fx):
        raise ConfigError("'flux' needs exactly one of 'file' or 'synthetic'", key="flux")
    synthetic = None
    flux_file = None
    if "file" in fx:
        flux_file = str(fx["file"])
        path = flux_file if os.path.isabs(flux_file) else os.path.join(base_dir, flux_file)
        if not os.path.isfile(path):
            raise ConfigError(f"flux file not found: {path}", key="flux.file")
        field_ = read_flux_file(path)
    else:
        synthetic = _parse_synthetic(fx["synthetic"])
        field_ = synthetic_field(synthetic, winding)

    sup = _section(doc, "supply")
    _check_keys(sup, ("omega", "frequency", "no_load", "harmonics", "n_harmonics"), "supply")
    if ("omega" in sup) == ("frequency" in sup):
        raise ConfigError("'supply' needs exactly one of 'omega' or 'frequency'", key="supply.omega")
    omega = (_num(sup, "omega", "supply") if "omega" in sup
             else 2.0 * math.pi * _num(sup, "frequency", "supply"))
    if not omega > 0:
        raise ConfigError("'supply.omega' must be > 0", key="supply.omega")
    no_load = bool(sup.get("no_load", False))
    supply = {}
    for i, item in enumerate(sup.get("harmonics") or []):
        path = f"supply.harmonics[{i}]"
        if not isinstance(item, dict):
            raise ConfigError(f"'{path}' must be a mapping", key=path)
        _check_keys(item, ("k", "re", "im"), path)
        k = _num(item, "k", path, kind=int)
        if k < 1 or k in supply:
            raise ConfigError(f"'{path}.k' must be >= 1 and unique", key=f"{path}.k")
        supply[k] = complex(_num(item, "re", path, default=0.0), _num(item, "im", path, default=0.0))
    if not supply and not no_load:
        raise ConfigError("'supply.harmonics' is empty; set 'supply.no_load: true' for no-load runs",
                          key="supply.harmonics")
    top = max([*supply, *field_.harmonics, 1])
    n_h = _num(sup, "n_harmonics", "supply", default=top, kind=int)
    if n_h < top:
        raise ConfigError(f"'supply.n_harmonics'={n_h} is below the highest harmonic {top}",
                          key="supply.n_harmonics")

    solver = doc.get("solver") or {}
    _check_keys(solver, ("regime",), "solver")
    regime = solver.get("regime", "full")
    if regime not in REGIMES:
        raise ConfigError(f"'solver.regime' must be one of {REGIMES}, got {regime!r}",
                          key="solver.regime")
    return Scenario(
        winding=winding,
        field=field_,
        supply=supply,
        omega=omega,
        n_harmonics=n_h,
        regime=regime,
        no_load=no_load,
        synthetic=synthetic,
        flux_file=flux_file,
        source=source,
    )


def load_scenario(path) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc.strerror}", key="--scenario") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"scenario {path} is not valid YAML: {exc}".replace("\n", " "),
                          key="<root>") from None
    return parse_scenario(doc, base_dir=os.path.dirname(os.path.abspath(path)), source=str(path))


# --- writing ---------------------------------------------------------------


def _pair(z):
    return [float(complex(z).real), float(complex(z).imag)]


def scenario_document(sc: Scenario, flux_file=None) -> dict:
    """Nested mapping that :func:`parse_scenario` turns back into ``sc``."""
    w = sc.winding
    g = w.geometry
    base = w.layouts[0]
    doc = {
        "geometry": {"l_active": g.l_active, "l_EW": g.l_EW, "N_slots": g.N_slots, "p": g.p,
                     "N_c": g.N_c},
        "material": {"sigma": float(w.sigma), "r_strd_mm": float(base.r_strd * 1e3)},
        "layout": {"positions_mm": (base.positions * 1e3).round(12).tolist()},
        "winding": {"Nsh": w.Nsh},
    }
    if g.SPP is not None:
        doc["geometry"]["SPP"] = g.SPP
    if w.S is not None:
        doc["material"]["S"] = float(w.S)
    for key in ("N_p_s", "Nsh_per_slot", "turns_per_slot"):
        if getattr(w, key) is not None:
            doc["winding"][key] = getattr(w, key)
    slots = [
        {"slot_id": lay.slot_id, "positions_mm": (lay.positions * 1e3).round(12).tolist(),
         "r_strd_mm": float(lay.r_strd * 1e3)}
        for lay in w.layouts
        if not (np.array_equal(lay.positions, base.positions) and lay.r_strd == base.r_strd)
    ]
    if slots:
        doc["slots"] = slots
    triplets = []
    for m in w.maps:
        cs, ss = np.nonzero(m.entries)
        triplets.extend([int(m.slot_id), int(c) + 1, int(s) + 1, int(m.entries[c, s])]
                        for c, s in zip(cs, ss))
    doc["maps"] = triplets
    if flux_file is not None:
        doc["flux"] = {"file": flux_file}
    elif sc.synthetic is not None:
        doc["flux"] = {"synthetic": [
            {"k": t.k, "A0": _pair(t.A0), "gradient": [_pair(t.gradient[0]), _pair(t.gradient[1])]}
            for t in sc.synthetic.terms
        ]}
    else:
        raise ValueError("scenario has no synthetic parameters; pass flux_file")
    doc["supply"] = {
        "omega": float(sc.omega),
        "no_load": bool(sc.no_load),
        "n_harmonics": int(sc.n_harmonics),
        "harmonics": [{"k": k, "re": float(v.real), "im": float(v.imag)}
                      for k, v in sorted(sc.supply.items())],
    }
    doc["solver"] = {"regime": sc.regime}
    return doc


class _FlowDumper(yaml.SafeDumper):
    pass


def _represent_list(dumper, data):
    flow = all(not isinstance(x, (list, dict)) for x in data)
    return dumper.represent_sequence("tag:yaml.org,2002:seq", data, flow_style=flow)


_FlowDumper.add_representer(list, _represent_list)


def dump_scenario(sc: Scenario, path, flux_file=None):
    """Write ``sc`` as YAML; with ``flux_file`` the field goes to that CSV."""
    if flux_file is not None:
        target = flux_file if os.path.isabs(flux_file) else os.path.join(
            os.path.dirname(os.path.abspath(path)), flux_file)
        write_flux_file(target, sc.field)
    doc = scenario_document(sc, flux_file)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        yaml.dump(doc, fh, Dumper=_FlowDumper, sort_keys=False, width=100)


# --- reference machine -----------------------------------------------------


def case_study_layout(n_strands=30, turns=3, columns=6, pitch_mm=1.0):
    """Conductor grid of one slot: turn ``t`` fills a block of rows, strands row-major.

    Returns positions [m] of shape ``(turns * n_strands, 2)`` and the strand
    index (0-based) of each conductor.
    """
    rows_per_turn = math.ceil(n_strands / columns)
    pos = []
    owner = []
    for t in range(turns):
        for s in range(n_strands):
            row = t * rows_per_turn + s // columns
            pos.append(((s % columns) * pitch_mm * 1e-3, row * pitch_mm * 1e-3))
            owner.append(s)
    return np.array(pos), np.array(owner)


def phase_a_slots(N_slots=36, p=6, SPP=2):
    """Slot indices and coil-side signs of phase A in a full-pitch distributed winding."""
    pitch = N_slots // p  # slots per pole
    slots, signs = [], []
    for pole in range(p):
        for q in range(SPP):
            slots.append(pole * pitch + q)
            signs.append(1 if pole % 2 == 0 else -1)
    return slots, signs


DEFAULT_FIELD = SyntheticFieldParams((
    HarmonicTerm(1, 2.0e-2 + 0j, (0.012 + 0.004j, 0.04 + 0.01j)),
    HarmonicTerm(5, 1.0e-3 + 0j, (0.004 - 0.002j, 0.012 + 0.003j)),
    HarmonicTerm(7, 5.0e-4 + 0j, (0.002 + 0.001j, 0.008 - 0.002j)),
))


def case_study(
    alpha=2.0,
    regime="full",
    I_bundle=100.0,
    frequency=400.0,
    field_params: SyntheticFieldParams = DEFAULT_FIELD,
    l_active=0.1,
    r_strd_mm=0.4,
    sigma=5.8e7,
    no_load=False,
) -> Scenario:
    """36-slot, 6-pole distributed winding with 30 strands in hand and 3 turns per slot.

    Every phase-A slot shares one 90-conductor layout; the field is the
    synthetic gradient model.  ``I_bundle`` is the fundamental RMS bundle
    current [A].
    """
    N_slots, p, SPP, nsh, turns = 36, 6, 2, 30, 3
    pos, owner = case_study_layout(nsh, turns)
    geometry = MachineGeometry(
        l_active=l_active, l_EW=(alpha - 1.0) * l_active, N_slots=N_slots, p=p,
        N_c=pos.shape[0], SPP=SPP,
    )
    slots, signs = phase_a_slots(N_slots, p, SPP)
    maps = []
    for sid, sign in zip(slots, signs):
        m = np.zeros((pos.shape[0], nsh), dtype=np.int8)
        m[np.arange(pos.shape[0]), owner] = sign
        maps.append(WindingMap(sid, m))
    winding = WindingDescription(
        geometry=geometry,
        layouts=tuple(SlotLayout(s, pos, r_strd_mm * 1e-3) for s in slots),
        maps=tuple(maps),
        Nsh=nsh,
        sigma=sigma,
        N_p_s=1,
        Nsh_per_slot=nsh,
        turns_per_slot=turns,
    )
    supply = {} if no_load else {1: complex(I_bundle)}
    return Scenario(
        winding=winding,
        field=synthetic_field(field_params, winding),
        supply=supply,
        omega=2.0 * math.pi * frequency,
        n_harmonics=max([*field_params.harmonics, 1]),
        regime=regime,
        no_load=no_load,
        synthetic=field_params,
    )
