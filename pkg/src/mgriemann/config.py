"""Problem configuration files and the bundled preset catalog.

Grammar (line oriented; ``#`` starts a comment; blank lines ignored)::

    file     := section*
    section  := "[" header "]" NEWLINE entry*
    header   := "problem" | "material" SP name | "region" SP name
    entry    := key "=" value NEWLINE

``[problem]`` keys: name, geometry (planar|spherical), x_lo, x_hi, cells,
cfl, t_end, snapshots (comma-separated times, default t_end), tol,
max_iter, theta, boundary (one value or "left, right"; outflow|wall).

``[material NAME]`` keys: eos (ideal|stiffened|murnaghan|polynomial|jwl),
the parameters of that EOS, and optionally mu_e, mu_p, y_e, y_p, beta_e,
beta_p (``inf`` accepted for yield limits).  ``elastic = true`` turns an
unbounded elastic solid on (y_e = y_p = inf, mu_p = mu_e, beta_p = beta_e).

``[region NAME]`` keys: material, x_lo, x_hi, rho, u, p, S (default 0).
Regions must tile [x_lo, x_hi] of the problem in file order.

Unknown sections or keys, duplicates and malformed values are errors that
carry the offending line number; validation errors name the field path.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Dict, List, Optional

from .eos import FIELDS, VARIANT_NAMES, EosParams
from .errors import ConfigError, MgRiemannError
from .plasticity import DeviatoricModel, SideState
from .sim1d import GEOMETRIES, BOUNDARIES, Grid1D, Material, Region, SimConfig

PROBLEM_KEYS = {"name", "geometry", "x_lo", "x_hi", "cells", "cfl", "t_end", "snapshots",
                "tol", "max_iter", "theta", "boundary"}
MODEL_KEYS = {"mu_e", "mu_p", "y_e", "y_p", "beta_e", "beta_p", "elastic"}
REGION_KEYS = {"material", "x_lo", "x_hi", "rho", "u", "p", "S"}
EOS_KEYS = set().union(*FIELDS.values())


@dataclass
class _Entry:
    value: str
    line: int


@dataclass
class _Section:
    kind: str
    name: str
    line: int
    entries: Dict[str, _Entry] = field(default_factory=dict)


def _tokenize(text, source):
    sections: List[_Section] = []
    cur = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"{source}: malformed section header {raw.strip()!r}",
                                  line=lineno)
            parts = line[1:-1].split()
            if not parts:
                raise ConfigError(f"{source}: empty section header", line=lineno)
            kind = parts[0]
            if kind == "problem" and len(parts) == 1:
                cur = _Section("problem", "", lineno)
            elif kind in ("material", "region") and len(parts) == 2:
                cur = _Section(kind, parts[1], lineno)
            else:
                raise ConfigError(f"{source}: unknown section {line!r}; expected [problem], "
                                  "[material NAME] or [region NAME]", line=lineno)
            sections.append(cur)
            continue
        if "=" not in line:
            raise ConfigError(f"{source}: expected 'key = value', got {raw.strip()!r}",
                              line=lineno)
        if cur is None:
            raise ConfigError(f"{source}: entry outside of any section", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}: missing key", line=lineno)
        if key in cur.entries:
            raise ConfigError(f"{source}: duplicate key {key!r}", line=lineno,
                              field=_path(cur, key))
        cur.entries[key] = _Entry(value, lineno)
    return sections


def _path(sec, key):
    return f"{sec.kind}.{sec.name}.{key}" if sec.name else f"{sec.kind}.{key}"


def _float(sec, key, default=None, required=True):
    e = sec.entries.get(key)
    if e is None:
        if default is not None or not required:
            return default
        raise ConfigError(f"missing required field {key!r}", line=sec.line, field=_path(sec, key))
    try:
        v = float(e.value)
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {e.value!r}", line=e.line,
                          field=_path(sec, key)) from None
    if math.isnan(v):
        raise ConfigError(f"{key} must not be nan", line=e.line, field=_path(sec, key))
    return v


def _int(sec, key, default=None):
    e = sec.entries.get(key)
    if e is None:
        if default is not None:
            return default
        raise ConfigError(f"missing required field {key!r}", line=sec.line, field=_path(sec, key))
    try:
        return int(e.value)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {e.value!r}", line=e.line,
                          field=_path(sec, key)) from None


def _check_keys(sec, allowed):
    for key, e in sec.entries.items():
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in [{sec.kind}{' ' + sec.name if sec.name else ''}]",
                              line=e.line, field=_path(sec, key))


def _validation(exc, sec, key=None):
    line = sec.entries[key].line if key and key in sec.entries else sec.line
    return ConfigError(str(exc), line=line, field=_path(sec, key) if key else
                       (f"{sec.kind}.{sec.name}" if sec.name else sec.kind))


def _material(sec):
    eos_e = sec.entries.get("eos")
    if eos_e is None:
        raise ConfigError("missing required field 'eos'", line=sec.line, field=_path(sec, "eos"))
    variant = eos_e.value
    if variant not in VARIANT_NAMES:
        raise ConfigError(f"unknown EOS {variant!r}; expected one of {sorted(VARIANT_NAMES)}",
                          line=eos_e.line, field=_path(sec, "eos"))
    names = FIELDS[VARIANT_NAMES[variant]]
    _check_keys(sec, {"eos"} | set(names) | MODEL_KEYS)
    prm = {n: _float(sec, n) for n in names}
    try:
        eos = EosParams.from_mapping(variant, prm, label=sec.name)
    except MgRiemannError as exc:
        raise _validation(exc, sec, "eos") from None
    elastic = sec.entries.get("elastic")
    try:
        if elastic is not None:
            if elastic.value.lower() not in ("true", "yes", "1", "false", "no", "0"):
                raise ConfigError(f"elastic must be true/false, got {elastic.value!r}",
                                  line=elastic.line, field=_path(sec, "elastic"))
            is_el = elastic.value.lower() in ("true", "yes", "1")
        else:
            is_el = False
        mu_e = _float(sec, "mu_e", 0.0)
        beta_e = _float(sec, "beta_e", required=False)
        if is_el:
            extra = [k for k in ("mu_p", "y_e", "y_p", "beta_p") if k in sec.entries]
            if extra:
                raise ConfigError(f"elastic = true fixes {extra}", line=sec.entries[extra[0]].line,
                                  field=_path(sec, extra[0]))
            model = DeviatoricModel.elastic(mu_e, beta_e)
        else:
            model = DeviatoricModel(mu_e, _float(sec, "mu_p", 0.0), _float(sec, "y_e", 0.0),
                                    _float(sec, "y_p", 0.0), beta_e,
                                    _float(sec, "beta_p", required=False))
    except ConfigError:
        raise
    except MgRiemannError as exc:
        raise _validation(exc, sec) from None
    return Material(sec.name, eos, model)


@dataclass
class ProblemConfig:
    """A parsed problem: simulator configuration plus provenance."""

    sim: SimConfig
    source: str
    text: str
    out_dir: Optional[str] = None

    @property
    def name(self):
        return self.sim.name

    @property
    def regions(self):
        return self.sim.regions

    @property
    def interfaces(self):
        return [r.x_hi for r in self.sim.regions[:-1]]

    def with_overrides(self, cells=None, cfl=None, t_end=None, tol=None, geometry=None,
                       snapshots=None):
        s = self.sim
        grid = s.grid
        if cells is not None or geometry is not None:
            grid = Grid1D(grid.x0, grid.x1, int(cells) if cells is not None else grid.cells,
                          geometry if geometry is not None else grid.geometry)
        t_new = t_end if t_end is not None else s.t_end
        snaps = snapshots
        if snaps is None:
            snaps = [t for t in s.snapshot_times if t < t_new] + [t_new] \
                if t_end is not None else s.snapshot_times
        sim = SimConfig(grid, s.regions, t_new, cfl if cfl is not None else s.cfl, list(snaps),
                        tol if tol is not None else s.eps0, s.max_iter, s.theta, s.boundary,
                        s.name)
        return replace(self, sim=sim)


def parse_text(text, source="<config>") -> ProblemConfig:
    sections = _tokenize(text, source)
    problems = [s for s in sections if s.kind == "problem"]
    if len(problems) != 1:
        raise ConfigError(f"{source}: exactly one [problem] section required, found {len(problems)}",
                          line=problems[1].line if len(problems) > 1 else None)
    prob = problems[0]
    _check_keys(prob, PROBLEM_KEYS)
    materials = {}
    for s in sections:
        if s.kind == "material":
            if s.name in materials:
                raise ConfigError(f"duplicate material {s.name!r}", line=s.line,
                                  field=f"material.{s.name}")
            materials[s.name] = _material(s)

    geometry = prob.entries.get("geometry", _Entry("planar", prob.line))
    if geometry.value not in GEOMETRIES:
        raise ConfigError(f"geometry must be one of {sorted(GEOMETRIES)}, got {geometry.value!r}",
                          line=geometry.line, field="problem.geometry")
    cells = _int(prob, "cells")
    if cells < 1:
        raise ConfigError(f"cells must be >= 1, got {cells}", line=prob.entries["cells"].line,
                          field="problem.cells")
    x_lo, x_hi = _float(prob, "x_lo"), _float(prob, "x_hi")
    try:
        grid = Grid1D(x_lo, x_hi, cells, geometry.value)
    except MgRiemannError as exc:
        raise _validation(exc, prob, "x_lo") from None
    bnd = prob.entries.get("boundary")
    if bnd is None:
        boundary = ("outflow", "outflow")
    else:
        parts = [b.strip() for b in bnd.value.split(",")]
        if len(parts) == 1:
            parts = parts * 2
        if len(parts) != 2 or any(p not in BOUNDARIES for p in parts):
            raise ConfigError(f"boundary must be one or two of {sorted(BOUNDARIES)}, "
                              f"got {bnd.value!r}", line=bnd.line, field="problem.boundary")
        boundary = tuple(parts)

    regions = []
    for s in sections:
        if s.kind != "region":
            continue
        _check_keys(s, REGION_KEYS)
        me = s.entries.get("material")
        if me is None:
            raise ConfigError("missing required field 'material'", line=s.line,
                              field=_path(s, "material"))
        if me.value not in materials:
            raise ConfigError(f"unknown material {me.value!r}", line=me.line,
                              field=_path(s, "material"))
        try:
            st = SideState(_float(s, "rho"), _float(s, "u"), _float(s, "p"), _float(s, "S", 0.0))
        except ConfigError:
            raise
        except MgRiemannError as exc:
            raise _validation(exc, s) from None
        mat = materials[me.value]
        if mat.model.is_fluid and st.S != 0.0:
            raise ConfigError("a fluid region cannot carry a deviator S", line=s.entries["S"].line,
                              field=_path(s, "S"))
        regions.append((s, Region(_float(s, "x_lo"), _float(s, "x_hi"), mat, st)))
    if not regions:
        raise ConfigError(f"{source}: at least one [region] section is required")
    tol = 1e-12 * (x_hi - x_lo)
    for k, (s, r) in enumerate(regions):
        if not r.x_hi > r.x_lo:
            raise ConfigError(f"region is empty: [{r.x_lo}, {r.x_hi}]", line=s.line,
                              field=_path(s, "x_hi"))
        lo_expected = x_lo if k == 0 else regions[k - 1][1].x_hi
        if abs(r.x_lo - lo_expected) > tol:
            what = "overlaps" if r.x_lo < lo_expected else "leaves a gap after"
            raise ConfigError(f"region {what} the previous one (x_lo={r.x_lo}, "
                              f"expected {lo_expected})", line=s.entries["x_lo"].line,
                              field=_path(s, "x_lo"))
    last_s, last = regions[-1]
    if abs(last.x_hi - x_hi) > tol:
        raise ConfigError(f"regions must end at x_hi={x_hi}, last ends at {last.x_hi}",
                          line=last_s.entries["x_hi"].line, field=_path(last_s, "x_hi"))
    from . import _eoskern as _ek
    for s, r in regions:
        eos = r.material.eos
        c2 = float(_ek.sound_speed_sq(eos.kind, eos.vector, r.state.rho, r.state.p))
        if not c2 > 0.0:
            raise ConfigError(f"initial state is not hyperbolic (c^2 = {c2})", line=s.line,
                              field=f"region.{s.name}")
        if eos.is_barotropic:
            p_eos = float(_ek.pressure(eos.kind, eos.vector, r.state.rho, 0.0))
            if abs(p_eos - r.state.p) > 1e-9 * max(abs(p_eos), abs(r.state.p), 1.0):
                raise ConfigError(f"barotropic EOS gives p = {p_eos} at rho = {r.state.rho}, "
                                  f"but p = {r.state.p} was given", line=s.entries["p"].line,
                                  field=_path(s, "p"))
        m = r.material.model
        if 1.5 * abs(r.state.S) > m.y_p * (1.0 + 1e-12):
            raise ConfigError("initial deviator exceeds the plastic yield limit",
                              line=s.entries["S"].line, field=_path(s, "S"))

    snaps = prob.entries.get("snapshots")
    t_end = _float(prob, "t_end")
    times = None
    if snaps is not None:
        try:
            times = [float(t) for t in snaps.value.split(",") if t.strip()]
        except ValueError:
            raise ConfigError(f"snapshots must be comma-separated numbers, got {snaps.value!r}",
                              line=snaps.line, field="problem.snapshots") from None
    name = prob.entries.get("name", _Entry(os.path.splitext(os.path.basename(source))[0], 0)).value
    try:
        sim = SimConfig(grid, [r for _, r in regions], t_end, _float(prob, "cfl", 0.4), times,
                        _float(prob, "tol", 1e-10), _int(prob, "max_iter", 50),
                        _float(prob, "theta", 0.5), boundary, name)
    except MgRiemannError as exc:
        raise _validation(exc, prob) from None
    return ProblemConfig(sim, source, text)


def parse_config(path) -> ProblemConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from None
    return parse_text(text, str(path))


# ---------------------------------------------------------------- presets

def preset_names():
    files = resources.files("mgriemann").joinpath("presets")
    return sorted(p.name[:-4] for p in files.iterdir() if p.name.endswith(".cfg"))


def preset_text(name):
    if name not in preset_names():
        raise KeyError(name)
    return resources.files("mgriemann").joinpath("presets", f"{name}.cfg").read_text()


def load_preset(name) -> ProblemConfig:
    return parse_text(preset_text(name), f"preset:{name}")
