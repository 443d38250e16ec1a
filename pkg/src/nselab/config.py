"""Flat key=value run configuration.

One key per line, # comments, blank lines ignored. Unknown keys are
hard errors: a silently ignored typo would corrupt a certificate.
Canonical serialization emits every key in declaration order, so
serialize(parse(text)) is idempotent.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .forcing import KINDS

INTEGRATORS = ("implicit_euler", "exponential")
ALPHA_METHODS = ("lemma7_construction", "sharp_spectral")


class ConfigError(ValueError):
    """Invalid configuration; carries the offending field name."""

    def __init__(self, field: str, message: str):
        super().__init__(f"config field {field!r}: {message}")
        self.field = field


def _parse_float_or_auto(s: str):
    return None if s == "auto" else float(s)


def _render_float_or_auto(v) -> str:
    return "auto" if v is None else repr(float(v))


def _parse_float_list(s: str):
    return tuple(float(tok) for tok in s.split(",") if tok.strip()) if s else ()


def _parse_int_list(s: str):
    return tuple(int(tok) for tok in s.split(",") if tok.strip()) if s else ()


def _render_list(v) -> str:
    return ",".join(repr(x) if isinstance(x, float) else str(x) for x in v)


@dataclass(frozen=True)
class RunConfig:
    grid_n: int = 16
    nu: float = 1.0
    r: float = 0.02
    omega: float | None = None          # None = lambda1 / 2
    spectrum_decay: float = 1.5
    forcing_kind: str = "zero"
    forcing_amplitude: float = 0.0
    forcing_theta: float = 0.5
    forcing_d: float = 1.0
    forcing_seed: int = 77
    forcing_decay: float = 2.0
    alpha_method: str = "lemma7_construction"
    corpus_count: int = 200
    refine_iters: int = 200
    verify_count: int = 200
    search_iters: int = 120
    check_count: int = 100
    continuity_bases: int = 8
    range_count: int = 20
    holder_pairs: int = 64
    dt: float = 0.01
    t_end: float = 1.0
    tol: float = 1e-12
    max_iter: int = 50
    integrator: str = "implicit_euler"
    snapshot_every: int = 0
    initial_scale: float = 0.0          # 0 = auto (mid-annulus)
    initial_snapshot: str = ""
    initial_seed: int = 11
    seed: int = 12345
    out: str = "out"
    const_c: float | None = None        # None = estimated
    const_c1: float | None = None
    const_c2: float | None = None
    const_alpha: float | None = None
    sweep_nu: tuple = ()
    sweep_r: tuple = ()
    sweep_f: tuple = ()
    sweep_n: tuple = ()


_PARSERS = {
    int: int,
    float: float,
    str: str,
}

# field name -> (parse, render); defaults cover int/float/str
_SPECIAL = {
    "omega": (_parse_float_or_auto, _render_float_or_auto),
    "const_c": (_parse_float_or_auto, _render_float_or_auto),
    "const_c1": (_parse_float_or_auto, _render_float_or_auto),
    "const_c2": (_parse_float_or_auto, _render_float_or_auto),
    "const_alpha": (_parse_float_or_auto, _render_float_or_auto),
    "sweep_nu": (_parse_float_list, _render_list),
    "sweep_r": (_parse_float_list, _render_list),
    "sweep_f": (_parse_float_list, _render_list),
    "sweep_n": (_parse_int_list, _render_list),
}

_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_BASE_TYPE = {"int": int, "float": float, "str": str}


def _coerce(name: str, raw: str):
    if name in _SPECIAL:
        return _SPECIAL[name][0](raw)
    base = _BASE_TYPE.get(_FIELD_TYPES[name])
    if base is None:
        raise ConfigError(name, f"unhandled field type {_FIELD_TYPES[name]}")
    return base(raw)


def _render(name: str, value) -> str:
    if name in _SPECIAL:
        return _SPECIAL[name][1](value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    cfg = base or RunConfig()
    updates = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}", f"expected key=value, got {body!r}")
        key, _, raw = body.partition("=")
        key, raw = key.strip(), raw.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(key, "unknown key")
        try:
            updates[key] = _coerce(key, raw)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(key, f"bad value {raw!r} ({exc})") from None
    cfg = replace(cfg, **updates)
    validate_config(cfg)
    return cfg


def load_config(path: str | None, base: RunConfig | None = None) -> RunConfig:
    if path is None:
        cfg = base or RunConfig()
        validate_config(cfg)
        return cfg
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), base=base)


def apply_overrides(cfg: RunConfig, pairs: list[str]) -> RunConfig:
    lines = []
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(pair, "override must look like key=value")
        lines.append(pair)
    return parse_config("\n".join(lines), base=cfg)


def serialize_config(cfg: RunConfig) -> str:
    lines = [f"{f.name} = {_render(f.name, getattr(cfg, f.name))}"
             for f in fields(RunConfig)]
    return "\n".join(lines) + "\n"


def validate_config(cfg: RunConfig) -> None:
    def need(cond: bool, field: str, msg: str):
        if not cond:
            raise ConfigError(field, msg)

    need(cfg.grid_n >= 4 and cfg.grid_n % 2 == 0, "grid_n",
         f"must be an even integer >= 4, got {cfg.grid_n}")
    need(cfg.nu > 0, "nu", f"must be positive, got {cfg.nu}")
    need(cfg.r > 0, "r", f"must be positive, got {cfg.r}")
    if cfg.omega is not None:
        need(0.0 < cfg.omega < 1.0, "omega",
             f"must lie in (0, lambda1) = (0, 1), got {cfg.omega}")
    need(cfg.spectrum_decay >= 0, "spectrum_decay", "must be nonnegative")
    need(cfg.forcing_kind in KINDS, "forcing_kind",
         f"must be one of {KINDS}, got {cfg.forcing_kind!r}")
    need(cfg.forcing_amplitude >= 0, "forcing_amplitude", "must be nonnegative")
    need(0.0 < cfg.forcing_theta < 1.0, "forcing_theta",
         f"must lie in (0, 1), got {cfg.forcing_theta}")
    need(cfg.forcing_d > 0, "forcing_d", "must be positive")
    need(cfg.forcing_decay >= 0, "forcing_decay", "must be nonnegative")
    need(cfg.alpha_method in ALPHA_METHODS, "alpha_method",
         f"must be one of {ALPHA_METHODS}, got {cfg.alpha_method!r}")
    need(cfg.corpus_count >= 1, "corpus_count", "must be at least 1")
    for name in ("refine_iters", "verify_count", "search_iters", "check_count",
                 "continuity_bases", "range_count", "holder_pairs",
                 "snapshot_every"):
        need(getattr(cfg, name) >= 0, name, "must be nonnegative")
    need(cfg.dt > 0, "dt", "must be positive")
    need(cfg.t_end > 0, "t_end", "must be positive")
    need(cfg.tol > 0, "tol", "must be positive")
    need(cfg.max_iter >= 1, "max_iter", "must be at least 1")
    need(cfg.integrator in INTEGRATORS, "integrator",
         f"must be one of {INTEGRATORS}, got {cfg.integrator!r}")
    need(cfg.initial_scale >= 0, "initial_scale", "must be nonnegative")
    need(cfg.seed >= 0, "seed", "must be nonnegative")
    need(cfg.initial_seed >= 0, "initial_seed", "must be nonnegative")
    need(cfg.forcing_seed >= 0, "forcing_seed", "must be nonnegative")
    for name in ("const_c", "const_c1", "const_c2", "const_alpha"):
        val = getattr(cfg, name)
        if val is not None:
            need(val > 0, name, f"must be positive, got {val}")
    for name in ("sweep_nu", "sweep_r", "sweep_f"):
        for x in getattr(cfg, name):
            need(x > 0 if name != "sweep_f" else x >= 0, name,
                 f"entries must be {'nonnegative' if name == 'sweep_f' else 'positive'}, got {x}")
    for n in cfg.sweep_n:
        need(n >= 4 and n % 2 == 0, "sweep_n",
             f"entries must be even integers >= 4, got {n}")


def constant_overrides(cfg: RunConfig) -> dict:
    """The tamper/what-if constants present in the config, if any."""
    out = {}
    for key, name in (("const_c", "c"), ("const_c1", "c1"),
                      ("const_c2", "c2"), ("const_alpha", "alpha")):
        val = getattr(cfg, key)
        if val is not None:
            out[name] = val
    return out
