"""Batch front-end: ``foliamod <command> --config run.json [--out path] [--format json|csv]``.

Exit codes: 0 success, 2 configuration error, 3 numeric or domain error.
"""

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import jsonschema
import numpy as np

from . import capacity, modulus, variation
from .errors import DomainError, FlowDegeneracyError, NumericalError, SingularityError
from .errors import UnsupportedExponentError
from .foliation import (GeneralField, LevelSetFunction, NormalField, ScalarField,
                        radial_foliation, random_fields, random_general_fields,
                        shear_foliation)
from .geometry import GridChart, WarpProfile

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
COMMANDS = ("modulus", "capacity", "variation", "stability", "flow-check", "hardy")

_NUMBER_LIST = {"type": "array", "items": {"type": "number"}}
_MODES = {
    "type": "array",
    "items": {"type": "array", "minItems": 3, "maxItems": 3,
              "prefixItems": [{"type": "integer", "minimum": 0},
                              {"enum": ["cos", "sin"]}, _NUMBER_LIST]},
}
_COMPONENT = {"type": "object", "additionalProperties": False,
              "required": ["modes"], "properties": {"modes": _MODES}}
_FIELD = {"type": "object", "additionalProperties": False, "required": ["id", "modes"],
          "properties": {"id": {"type": "string"}, "modes": _MODES}}
_RANDOM = {"type": "object", "additionalProperties": False, "required": ["count"],
           "properties": {"count": {"type": "integer", "minimum": 0},
                          "seed": {"type": "integer", "minimum": 0},
                          "fourier": {"type": "integer", "minimum": 0},
                          "degree": {"type": "integer", "minimum": 0},
                          "radial_only": {"type": "boolean"}}}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["manifold", "p"],
    "properties": {
        "manifold": {
            "type": "object", "additionalProperties": False, "required": ["family"],
            "properties": {
                "family": {"enum": ["cylinder", "torus", "euclidean", "hyperbolic",
                                    "spherical", "custom"]},
                "parameters": {"type": "object", "additionalProperties": False,
                               "properties": {"c": {"type": "number", "exclusiveMinimum": 0},
                                              "coefficients": _NUMBER_LIST}},
                "base": {"type": "array", "items": {"type": "number"},
                         "minItems": 2, "maxItems": 2},
                "fiber_dim": {"type": "integer", "minimum": 1},
                "fiber_volume": {"type": "number", "exclusiveMinimum": 0},
                "periodic": {"type": "boolean"},
            },
        },
        "grid": {
            "type": "object", "additionalProperties": False,
            "properties": {"n_r": {"type": "integer", "minimum": 8},
                           "n_theta": {"type": "integer", "minimum": 1},
                           "mode": {"enum": ["radial", "surface"]}},
        },
        "p": {"type": "number", "exclusiveMinimum": 1},
        "foliation": {
            "type": "object", "additionalProperties": False, "required": ["type"],
            "properties": {
                "type": {"enum": ["radial", "shear", "level_function"]},
                "eps": {"type": "number"},
                "cos": _NUMBER_LIST,
                "sin": _NUMBER_LIST,
                "kind": {"enum": ["q_harmonic", "polynomial"]},
                "coefficients": _NUMBER_LIST,
            },
        },
        "fields": {
            "type": "object", "additionalProperties": False,
            "properties": {"explicit": {"type": "array", "items": _FIELD},
                           "random": _RANDOM,
                           "fd_step": {"type": "number", "exclusiveMinimum": 0}},
        },
        "flow": {
            "type": "object", "additionalProperties": False,
            "properties": {"h": {"type": "number", "exclusiveMinimum": 0},
                           "steps": {"type": "integer", "minimum": 1},
                           "x_r": _COMPONENT, "x_theta": _COMPONENT,
                           "random": _RANDOM},
        },
    },
}


class ConfigError(Exception):
    """Malformed or schema-violating configuration."""


# -- serialisation --------------------------------------------------------------------

def _number(x):
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def dumps(obj, indent=0):
    """JSON text with every float printed to 17 significant digits."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        obj = list(obj)
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + dumps(v, indent + 1) for v in obj) + "\n" + pad + "]"
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _number(obj)
    return json.dumps(str(obj))


def write_csv(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_number(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


# -- config -> objects ----------------------------------------------------------------

def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(map(str, exc.absolute_path)) or "<root>"
        raise ConfigError(f"config {path}: {where}: {exc.message}") from exc
    return cfg


def build_profile(spec):
    family = spec["family"]
    params = spec.get("parameters", {})
    extra = {k: spec[k] for k in ("fiber_dim", "fiber_volume") if k in spec}
    base = spec.get("base")
    if family == "torus":
        length = base[1] - base[0] if base else 1.0
        extra.pop("fiber_dim", None)
        return WarpProfile.torus(length, params.get("c", 1.0), extra.get("fiber_volume"))
    if family == "custom":
        if "coefficients" not in params or base is None:
            raise ConfigError("custom manifolds need parameters.coefficients and base")
        return WarpProfile.polynomial(params["coefficients"], *base,
                                      periodic=spec.get("periodic", False), **extra)
    args = tuple(base) if base else ()
    if family == "cylinder":
        prof = WarpProfile.cylinder(*(args or (0.0, 1.0)), params.get("c", 1.0), **extra)
        if spec.get("periodic"):
            prof = WarpProfile.torus(prof.length, params.get("c", 1.0), extra.get("fiber_volume"))
        return prof
    return getattr(WarpProfile, family)(*args, **extra)


def build_chart(cfg, profile):
    grid = cfg.get("grid", {})
    return GridChart(profile, grid.get("n_r", 256), grid.get("n_theta", 1),
                     grid.get("mode", "radial"))


def _fourier_shape(cos, sin):
    cos, sin = np.asarray(cos or [0.0], float), np.asarray(sin or [0.0], float)

    def series(th, order):
        out = 0.0 * th
        for k, a in enumerate(cos):
            out = out + a * k ** order * np.cos(k * th + order * np.pi / 2)
        for k, b in enumerate(sin):
            out = out + b * k ** order * np.sin(k * th + order * np.pi / 2)
        return out
    return (lambda th: series(th, 0)), (lambda th: series(th, 1)), (lambda th: series(th, 2))


def build_foliation(cfg, chart):
    spec = cfg.get("foliation", {"type": "radial"})
    kind = spec["type"]
    if kind == "radial":
        return radial_foliation(chart)
    if kind == "shear":
        if chart.mode != "surface":
            raise ConfigError("shear foliations need grid.mode = 'surface'")
        shape = _fourier_shape(spec.get("cos"), spec.get("sin", [0.0, 1.0]))
        return shear_foliation(chart, spec.get("eps", 0.0), *shape)
    return build_level_function(cfg, chart.profile).foliation(chart)


def build_level_function(cfg, profile):
    spec = cfg.get("foliation", {})
    if spec.get("kind", "q_harmonic") == "q_harmonic":
        q = modulus.conjugate_exponent(cfg["p"])
        return capacity.q_harmonic_radial(capacity.Condenser(profile), q)
    poly = np.polynomial.Polynomial(spec.get("coefficients", [0.0, 1.0]))
    return LevelSetFunction(profile, poly, poly.deriv(), d2u_r=poly.deriv(2), radial=True,
                            name="polynomial")


def _mode_field(modes, name, cls=ScalarField):
    """``sum_k P_k(r) cos/sin(k theta)`` with polynomial ``P_k`` and analytic partials."""
    terms = [(int(k), kind, np.polynomial.Polynomial(c)) for k, kind, c in modes]

    def ang(k, kind, th, order):
        shift = order * np.pi / 2
        trig = np.cos(k * th + shift) if kind == "cos" else np.sin(k * th + shift)
        return k ** order * trig

    def value(r, th):
        return sum(P(r) * ang(k, kind, th, 0) for k, kind, P in terms) + 0.0 * (r + th)

    def d_r(r, th):
        return sum(P.deriv()(r) * ang(k, kind, th, 0) for k, kind, P in terms) + 0.0 * (r + th)

    def d_th(r, th):
        return sum(P(r) * ang(k, kind, th, 1) for k, kind, P in terms) + 0.0 * (r + th)
    return cls(value, d_r, d_th, name=name)


def build_fields(cfg, profile):
    spec = cfg.get("fields", {})
    out = [_mode_field(f["modes"], f["id"], NormalField) for f in spec.get("explicit", [])]
    rnd = spec.get("random")
    if rnd:
        out += random_fields(profile, rnd["count"], rnd.get("seed", 0), rnd.get("fourier", 3),
                             rnd.get("degree", 2), rnd.get("radial_only", False))
    if not out:
        raise ConfigError("this command needs at least one test field under 'fields'")
    return out


def build_vector_fields(cfg, profile):
    spec = cfg.get("flow", {})
    out = []
    if "x_r" in spec or "x_theta" in spec:
        zero = {"modes": []}
        out.append(GeneralField(_mode_field(spec.get("x_r", zero)["modes"], "x_r"),
                                _mode_field(spec.get("x_theta", zero)["modes"], "x_theta"),
                                name="configured"))
    rnd = spec.get("random")
    if rnd:
        out += random_general_fields(profile, rnd["count"], rnd.get("seed", 0),
                                     rnd.get("fourier", 2), rnd.get("degree", 2))
    if not out:
        raise ConfigError("flow-check needs flow.x_r/flow.x_theta or flow.random")
    return out


# -- commands -------------------------------------------------------------------------

def _pmap(fn, items, threads):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def cmd_modulus(cfg, fmt, threads=1):
    profile = build_profile(cfg["manifold"])
    fol = build_foliation(cfg, build_chart(cfg, profile))
    rep = modulus.p_modulus(fol, cfg["p"])
    if fmt == "csv":
        f0 = modulus.extremal_function(fol, rep.params).values
        rows = [(i, j, fol.t[i], fol.rho[i, j], f0[i, j], rep.nu[i])
                for i in range(fol.shape[0]) for j in range(fol.shape[1])]
        return write_csv(["t_index", "theta_index", "t", "r", "f0", "nu"], rows)
    return dumps(rep.to_dict())


def cmd_capacity(cfg, fmt, threads=1):
    profile = build_profile(cfg["manifold"])
    n_r = cfg.get("grid", {}).get("n_r", 512)
    rep = capacity.capacity_q(capacity.Condenser(profile), modulus.conjugate_exponent(cfg["p"]),
                              n_r)
    if fmt == "csv":
        return write_csv(["r", "u"], zip(rep.r, rep.u))
    return dumps(rep.to_dict())


def cmd_variation(cfg, fmt, threads=1):
    profile = build_profile(cfg["manifold"])
    fol = build_foliation(cfg, build_chart(cfg, profile))
    params = modulus.ModulusParams(cfg["p"])
    crit = float(np.max(np.abs(variation.critical_residual(fol, params))))
    fields = build_fields(cfg, profile) if cfg.get("fields") else []
    for f in fields:
        f.check_support(fol)
    values = _pmap(lambda f: variation.first_variation(fol, params, f), fields, threads)
    if fmt == "csv":
        return write_csv(["field_id", "first_variation"],
                         [(f.name, v) for f, v in zip(fields, values)])
    return dumps({"p": params.p, "q": params.q, "critical_residual_max": crit,
                  "first_variation": {f.name: v for f, v in zip(fields, values)},
                  "first_variation_max": max((abs(v) for v in values), default=0.0)})


def cmd_stability(cfg, fmt, threads=1):
    profile = build_profile(cfg["manifold"])
    fol = build_foliation(cfg, build_chart(cfg, profile))
    fields = build_fields(cfg, profile)
    fd_step = cfg.get("fields", {}).get("fd_step")
    params = modulus.ModulusParams(cfg["p"])
    records = _pmap(lambda f: variation.second_variation(fol, params, f, fd_step=fd_step),
                    fields, threads)
    rep = variation.summarize_scan(records)
    if fmt == "csv":
        return write_csv(["field_id", "A", "B", "total", "fd_check", "discrepancy"],
                         [(r.field, r.A, r.B, r.total, r.fd_value, r.fd_discrepancy)
                          for r in rep.records])
    return dumps(rep.to_dict())


def cmd_flow_check(cfg, fmt, threads=1):
    profile = build_profile(cfg["manifold"])
    grid = dict(cfg.get("grid", {}))
    chart = GridChart(profile, grid.get("n_r", 16), grid.get("n_theta", 16), "surface")
    flow = cfg.get("flow", {})
    fields = build_vector_fields(cfg, profile)
    checks = _pmap(lambda X: variation.jacobian_flow_check(X, chart, flow.get("h", 1e-3),
                                                          flow.get("steps", 4)),
                   fields, threads)
    if fmt == "csv":
        rows = []
        for X, chk in zip(fields, checks):
            rows += [(X.name,) + row for row in chk.rows()]
        return write_csv(["field_id", "node", "analytic_d2J0", "fd_d2J0", "analytic_d2J",
                          "fd_d2J"], rows)
    return dumps({"max_discrepancy": max(c.discrepancy for c in checks),
                  "discrepancy": [c.discrepancy for c in checks]})


def cmd_hardy(cfg, fmt, threads=1):
    profile = build_profile(cfg["manifold"])
    fol = build_foliation(cfg, build_chart(cfg, profile))
    params = modulus.ModulusParams(cfg["p"])
    fields = build_fields(cfg, profile)
    for f in fields:
        f.check_support(fol)
    sides = _pmap(lambda f: variation.hardy_terms(fol, params, f), fields, threads)
    rows = [(f.name, lhs, rhs, rhs - lhs) for f, (lhs, rhs) in zip(fields, sides)]
    if fmt == "csv":
        return write_csv(["field_id", "lhs", "rhs", "residual"], rows)
    return dumps({"p": params.p, "q": params.q,
                  "min_residual": min(r[3] for r in rows),
                  "fields": [dict(zip(("field_id", "lhs", "rhs", "residual"), r))
                             for r in rows]})


HANDLERS = {"modulus": cmd_modulus, "capacity": cmd_capacity, "variation": cmd_variation,
            "stability": cmd_stability, "flow-check": cmd_flow_check, "hardy": cmd_hardy}


def build_parser():
    parser = argparse.ArgumentParser(prog="foliamod", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--out", help="write the report here instead of stdout")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for scans over test fields")
    return parser


def run(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    if args.threads < 1:
        print("error: --threads must be at least 1", file=stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
        text = HANDLERS[args.command](cfg, args.format, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=stderr)
        return EXIT_CONFIG
    except (DomainError, NumericalError, FlowDegeneracyError, SingularityError,
            UnsupportedExponentError, ArithmeticError) as exc:
        print(f"numeric error: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_NUMERIC
    if not text.endswith("\n"):
        text += "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_OK


def main():
    sys.exit(run())
