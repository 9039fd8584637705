"""Experiment configuration: an INI-style key=value file with the sections
``[family]``, ``[group]``, ``[xi]``, ``[gamma]`` and ``[params]``.

Unknown sections or keys are rejected; every key is optional.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field

from .engine import EvalParams
from .errors import ConfigError
from .families import FAMILIES, ComposedFamily, CyclicFuchsianGroup
from .holder import bump, product_bump, step_function, table_function
from .projective import GeodesicBox, as_point

SCHEMA = {
    "family": {"kind", "r0", "t", "inner", "outer"},
    "group": {"lambda"},
    "xi": {"kind", "corners", "lam", "table"},
    "gamma": {"m"},
    "params": {"tolerance", "n_max", "n_min", "extrapolate", "guard", "threads",
               "eps", "samples", "radius", "m_points", "per_beta", "n_boxes", "levels"},
}
XI_KINDS = ("bump", "product", "step", "table")


def parse_complex(s):
    return complex(as_point(s).value())


def parse_list(s, conv=float):
    return [conv(v) for v in s.replace(";", ",").split(",") if v.strip()]


@dataclass
class ExperimentSpec:
    family_kind: str = None
    r0: float = 1.0
    inner: str = "power"
    outer: str = "vertical"
    ts: list = None
    group_lambda: float = None
    xi_kind: str = None
    corners: tuple = None
    lam: float = 1.0
    table: list = None
    m: int = 8
    params: EvalParams = field(default_factory=EvalParams)
    eps: float = 0.1
    extra: dict = field(default_factory=dict)

    def family(self, default="identity"):
        kind = self.family_kind or default
        if kind == "composed":
            return ComposedFamily(FAMILIES[self.inner](self.r0), FAMILIES[self.outer](self.r0))
        return FAMILIES[kind](self.r0)

    def group(self, default=None):
        lam = self.group_lambda if self.group_lambda is not None else default
        return None if lam is None else CyclicFuchsianGroup(lam)

    def t_values(self, default):
        return list(self.ts) if self.ts is not None else list(default)

    def xi(self, default_kind="bump", default_corners=(0.0, 1.0, 2.0, 3.0)):
        box = GeodesicBox(*(self.corners or default_corners))
        kind = self.xi_kind or default_kind
        if kind == "bump":
            return bump(box, self.lam)
        if kind == "product":
            return product_bump(box, self.lam)
        if kind == "step":
            return step_function(box)
        if self.table is None:
            raise ConfigError("[xi] kind = table needs a table")
        return table_function(box, self.table, self.lam)

    def get(self, key, default):
        return self.extra.get(key, default)


def _bool(s):
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {s!r}")


def parse_config(text) -> ExperimentSpec:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    for sec in cp.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"unknown section [{sec}]")
        bad = set(cp[sec]) - SCHEMA[sec]
        if bad:
            raise ConfigError(f"unknown key(s) in [{sec}]: {', '.join(sorted(bad))}")
    spec = ExperimentSpec()
    try:
        _fill(spec, cp)
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(str(exc)) from None
    return spec


def _fill(spec, cp):
    if cp.has_section("family"):
        f = cp["family"]
        if "kind" in f:
            spec.family_kind = f["kind"].strip()
            if spec.family_kind not in (*FAMILIES, "composed"):
                raise ConfigError(f"unknown family kind {spec.family_kind!r}")
        for key in ("inner", "outer"):
            if key in f:
                v = f[key].strip()
                if v not in FAMILIES:
                    raise ConfigError(f"unknown family kind {v!r}")
                setattr(spec, key, v)
        if "r0" in f:
            spec.r0 = float(f["r0"])
        if "t" in f:
            spec.ts = parse_list(f["t"], parse_complex)
    if cp.has_section("group") and "lambda" in cp["group"]:
        v = cp["group"]["lambda"].strip().lower()
        spec.group_lambda = None if v in ("none", "") else float(v)
    if cp.has_section("xi"):
        x = cp["xi"]
        if "kind" in x:
            spec.xi_kind = x["kind"].strip()
            if spec.xi_kind not in XI_KINDS:
                raise ConfigError(f"unknown xi kind {spec.xi_kind!r}")
        if "corners" in x:
            c = [as_point(v.strip()) for v in x["corners"].split(",") if v.strip()]
            if len(c) != 4:
                raise ConfigError("[xi] corners needs four points")
            spec.corners = tuple(c)
        if "lam" in x:
            spec.lam = float(x["lam"])
        if "table" in x:
            spec.table = [parse_list(row) for row in x["table"].split("/") if row.strip()]
    if cp.has_section("gamma") and "m" in cp["gamma"]:
        spec.m = int(cp["gamma"]["m"])
    if cp.has_section("params"):
        p = cp["params"]
        kw = {}
        for key, conv in (("tolerance", float), ("n_max", int), ("n_min", int), ("guard", float),
                          ("threads", int), ("extrapolate", _bool)):
            if key in p:
                kw[key] = conv(p[key])
        spec.params = spec.params.with_(**kw)
        if "eps" in p:
            spec.eps = float(p["eps"])
        for key in ("samples", "m_points", "per_beta", "n_boxes", "levels"):
            if key in p:
                spec.extra[key] = int(p[key])
        if "radius" in p:
            spec.extra["radius"] = float(p["radius"])


def load_config(path) -> ExperimentSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(str(exc)) from None
