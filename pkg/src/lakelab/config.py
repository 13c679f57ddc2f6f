"""Run configuration: INI-style files with strict key validation.

Grammar: sections ``[domain] [depth] [grid] [evolve] [study] [output]``,
``key = value`` pairs, ``#`` comments, numbers in decimal or scientific
notation, lists comma-separated. Unknown sections or keys are rejected; the
physical parameters are validated when the lake objects are built.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .geometry import (Annulus, Disk, Flat, Flooded, LakeSpec, MaskedJordan,
                       PowerRadial, Raised, Tabulated, Volcano)
from .grid import Grid, grid_for
from .limits import StudySpec
from .transport import TimeStepper

__all__ = ["RunConfig", "parse_config", "parse_config_text"]

_SECTIONS = {
    "domain": {"kind", "radius", "r_in", "r_out", "mask_csv"},
    "depth": {"law", "alpha", "const", "eps", "eta_radius", "a0", "c_floor",
              "table_csv"},
    "grid": {"n_r", "n_theta", "grading"},
    "evolve": {"T", "t_final", "cfl", "scheme", "snapshot_every", "omega0", "gamma",
               "seed", "tol", "bc_outer", "bc_island"},
    "study": {"mode", "eps_start", "eps_count", "eps_list", "probes", "band",
              "depth_variant", "volcano_eta", "radii", "t_final"},
    "output": {"dir", "prefix"},
}

# [sequence] is an accepted alias for [study]; "T" for evolve.t_final
_SECTION_ALIASES = {"sequence": "study"}
_KEY_ALIASES = {("evolve", "T"): ("evolve", "t_final")}

_DEFAULTS = {
    "domain": {"kind": "disk", "radius": "1.0"},
    "depth": {"law": "flat", "const": "1.0", "a0": "0.0", "c_floor": "1.0"},
    "grid": {"n_r": "128", "n_theta": "64", "grading": "uniform"},
    "evolve": {"t_final": "0.0", "cfl": "0.45", "scheme": "ssprk2",
               "snapshot_every": "10", "omega0": "zero", "gamma": "0.0",
               "seed": "0", "tol": "1e-10"},
    "study": {"mode": "evanescent", "eps_start": "0.2", "eps_count": "4",
              "probes": "0.3,0.5,0.7", "depth_variant": "restrict",
              "volcano_eta": "0.3", "t_final": "0.0"},
    "output": {"dir": "out", "prefix": "run"},
}


@dataclass
class RunConfig:
    sections: dict
    path: str = "<text>"

    # -- raw access --------------------------------------------------------
    def get(self, section, key, default=None):
        return self.sections.get(section, {}).get(key, default)

    def _num(self, section, key, cast=float):
        raw = self.get(section, key)
        if raw is None:
            raise ConfigError(f"missing {section}.{key}")
        try:
            return cast(raw)
        except ValueError as e:
            raise ConfigError(f"bad number for {section}.{key}: {raw!r}") from e

    def _list(self, section, key):
        raw = self.get(section, key)
        if raw is None or not str(raw).strip():
            return []
        try:
            return [float(tok) for tok in str(raw).split(",") if tok.strip()]
        except ValueError as e:
            raise ConfigError(f"bad list for {section}.{key}: {raw!r}") from e

    def override(self, dotted_key, value):
        try:
            section, key = dotted_key.split(".", 1)
        except ValueError as e:
            raise ConfigError(f"override must look like section.key=value: {dotted_key!r}") from e
        if section not in _SECTIONS or key not in _SECTIONS[section]:
            raise ConfigError(f"unknown config key {section}.{key}")
        self.sections.setdefault(section, {})[key] = value

    # -- built objects ------------------------------------------------------
    def domain(self):
        kind = self.get("domain", "kind")
        if kind == "disk":
            return Disk(self._num("domain", "radius"))
        if kind == "annulus":
            return Annulus(self._num("domain", "r_in"), self._num("domain", "r_out"))
        if kind == "masked":
            path = self.get("domain", "mask_csv")
            if not path or not os.path.exists(path):
                raise ConfigError(f"mask_csv not found: {path!r}")
            data = np.loadtxt(path, delimiter=",")
            h = self._num("domain", "radius") * 2.0 / data.shape[0]
            r = self._num("domain", "radius")
            return MaskedJordan(mask=data.astype(bool), h=h, origin=(-r, -r))
        raise ConfigError(f"unknown domain kind {kind!r}")

    def depth_law(self):
        law = self.get("depth", "law")
        if law == "flat":
            return Flat(self._num("depth", "const"))
        if law == "power":
            return PowerRadial(self._num("depth", "alpha"))
        if law == "flooded":
            return Flooded(PowerRadial(self._num("depth", "alpha")),
                           self._num("depth", "eps"))
        if law == "raised":
            return Raised(PowerRadial(self._num("depth", "alpha")),
                          self._num("depth", "eps"))
        if law == "volcano":
            return Volcano(self._num("depth", "alpha"), self._num("depth", "eps"),
                           self._num("depth", "eta_radius"))
        if law == "tabulated":
            path = self.get("depth", "table_csv")
            if not path or not os.path.exists(path):
                raise ConfigError(f"table_csv not found: {path!r}")
            return _tabulated_from_csv(path)
        raise ConfigError(f"unknown depth law {law!r}")

    def lake(self) -> LakeSpec:
        try:
            return LakeSpec(domain=self.domain(), depth_law=self.depth_law(),
                            a0=self._num("depth", "a0"),
                            c_floor=self._num("depth", "c_floor"))
        except ConfigError:
            raise
        except Exception as e:
            raise ConfigError(str(e)) from e

    def grid(self, spec: LakeSpec) -> Grid:
        return grid_for(spec, n_r=self._num("grid", "n_r", int),
                        n_theta=self._num("grid", "n_theta", int),
                        grading=self.get("grid", "grading"))

    def stepper(self) -> TimeStepper:
        cfl = self._num("evolve", "cfl")
        if not 0.0 < cfl < 1.0:
            raise ConfigError(f"cfl must be in (0, 1), got {cfl}")
        scheme = self.get("evolve", "scheme")
        if scheme not in ("euler", "ssprk2"):
            raise ConfigError(f"unknown scheme {scheme!r}")
        return TimeStepper(cfl=cfl, scheme=scheme)

    def omega0_fn(self):
        """Initial potential vorticity recipe as a callable of (x, y)."""
        raw = str(self.get("evolve", "omega0", "zero")).strip()
        seed = self._num("evolve", "seed", int)
        return omega_recipe(raw, seed)

    def eps_list(self):
        explicit = self._list("study", "eps_list")
        if explicit:
            return explicit
        start = self._num("study", "eps_start")
        count = self._num("study", "eps_count", int)
        return [start / 2 ** k for k in range(count)]

    def study(self, base: LakeSpec) -> StudySpec:
        mode = self.get("study", "mode")
        if mode not in ("evanescent", "emergent"):
            raise ConfigError(f"unknown study mode {mode!r}")
        variant = self.get("study", "depth_variant")
        band = self._list("study", "band")
        kwargs = dict(
            base=base, mode=mode, eps_list=self.eps_list(),
            gamma=self._num("evolve", "gamma"),
            omega0=self.omega0_fn(),
            probes=tuple(self._list("study", "probes")),
            band=tuple(band) if band else None,
            n_r=self._num("grid", "n_r", int),
            n_theta=self._num("grid", "n_theta", int),
            t_final=self._num("study", "t_final"),
            cfl=self._num("evolve", "cfl"),
            scheme=self.get("evolve", "scheme"),
            volcano_eta=self._num("study", "volcano_eta"),
            tol=self._num("evolve", "tol"),
        )
        if mode == "evanescent":
            if variant not in ("restrict", "flooded"):
                raise ConfigError(f"unknown depth_variant {variant!r}")
            kwargs["evanescent_depth"] = variant
        else:
            if variant == "restrict":
                variant = "raised"
            if variant not in ("raised", "volcano"):
                raise ConfigError(f"unknown depth_variant {variant!r}")
            kwargs["emergent_law"] = variant
        return StudySpec(**kwargs)

    def out_path(self, suffix, outdir=None):
        d = outdir or self.get("output", "dir")
        prefix = self.get("output", "prefix")
        return os.path.join(d, f"{prefix}_{suffix}")


def omega_recipe(raw: str, seed: int = 0):
    """Parse an initial-vorticity recipe.

    ``zero`` | ``const:c`` | ``gaussian:x0,y0,sigma,amp`` |
    ``ring:r0,sigma,amp`` | ``random:n,amp`` (seeded sum of bumps).
    """
    if raw == "zero":
        return None
    kind, _, args = raw.partition(":")
    try:
        vals = [float(tok) for tok in args.split(",")] if args else []
    except ValueError as e:
        raise ConfigError(f"bad omega0 recipe {raw!r}") from e
    if kind == "const" and len(vals) == 1:
        c = vals[0]
        return lambda x, y: np.full_like(np.asarray(x, dtype=float), c)
    if kind == "gaussian" and len(vals) == 4:
        x0, y0, sig, amp = vals
        return lambda x, y: amp * np.exp(-((np.asarray(x) - x0) ** 2
                                           + (np.asarray(y) - y0) ** 2) / (2 * sig ** 2))
    if kind == "ring" and len(vals) == 3:
        r0, sig, amp = vals
        return lambda x, y: amp * np.exp(-((np.hypot(x, y) - r0) / sig) ** 2)
    if kind == "random" and len(vals) == 2:
        n, amp = int(vals[0]), vals[1]
        rng = np.random.default_rng(seed)
        centers = rng.uniform(-0.6, 0.6, size=(n, 2))
        sigs = rng.uniform(0.08, 0.2, size=n)
        amps = rng.uniform(-amp, amp, size=n)

        def f(x, y):
            x = np.asarray(x, dtype=float)
            y = np.asarray(y, dtype=float)
            out = np.zeros_like(x)
            for (cx, cy), s, a in zip(centers, sigs, amps):
                out += a * np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2 * s ** 2))
            return out

        return f
    raise ConfigError(f"bad omega0 recipe {raw!r}")


def _tabulated_from_csv(path):
    data = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        cols = {name: k for k, name in enumerate(header)}
        for name in ("i", "j", "x", "y", "value"):
            if name not in cols:
                raise ConfigError(f"table_csv needs columns i,j,x,y,value, got {header}")
        for line in fh:
            toks = line.strip().split(",")
            if not toks or toks == [""]:
                continue
            i, j = int(toks[cols["i"]]), int(toks[cols["j"]])
            data[(i, j)] = (float(toks[cols["x"]]), float(toks[cols["y"]]),
                            float(toks[cols["value"]]))
    ni = max(k[0] for k in data) + 1
    nj = max(k[1] for k in data) + 1
    if len(data) != ni * nj:
        raise ConfigError(f"table_csv is not a full {ni}x{nj} lattice: {path}")
    vals = np.zeros((ni, nj))
    xs = np.full(ni, np.nan)
    ys = np.full(nj, np.nan)
    for (i, j), (x, y, v) in data.items():
        vals[i, j] = v
        if np.isfinite(xs[i]) and abs(xs[i] - x) > 1e-9:
            raise ConfigError(f"table_csv x varies along rows (not a regular lattice): {path}")
        if np.isfinite(ys[j]) and abs(ys[j] - y) > 1e-9:
            raise ConfigError(f"table_csv y varies along columns (not a regular lattice): {path}")
        xs[i] = x
        ys[j] = y
    dx = xs[1] - xs[0] if ni > 1 else 1.0
    dy = ys[1] - ys[0] if nj > 1 else 1.0
    return Tabulated(x0=xs[0], y0=ys[0], dx=dx, dy=dy, values=vals)


def parse_config_text(text: str, path="<text>") -> RunConfig:
    cp = configparser.ConfigParser(comment_prefixes=("#",), inline_comment_prefixes=("#",),
                                   delimiters=("=",), strict=True)
    cp.optionxform = str  # keep key case (the final-time key is "T")
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ConfigError(f"cannot parse config: {e}") from e
    sections = {s: dict(v) for s, v in _DEFAULTS.items()}
    for sec in cp.sections():
        canon = _SECTION_ALIASES.get(sec, sec)
        if canon not in _SECTIONS:
            raise ConfigError(f"unknown section [{sec}]")
        for key, val in cp.items(sec):
            if key not in _SECTIONS[canon]:
                raise ConfigError(f"unknown key {canon}.{key}")
            canon_sec, canon_key = _KEY_ALIASES.get((canon, key), (canon, key))
            sections[canon_sec][canon_key] = val
    return RunConfig(sections=sections, path=path)


def parse_config(path) -> RunConfig:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read(), path=path)
