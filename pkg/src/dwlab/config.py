"""Run configuration: parsing and validation.

The on-disk format is deliberately plain so any language can parse it:
``[section]`` headers over ``key = value`` lines, ``#`` comments. The
sections are ``[model]`` (required), ``[analysis]``, ``[evolve]`` and
``[output]``. Unknown sections or keys are rejected with the offending
line.

Coefficient grammar (``alpha``/``beta`` values)::

    const <c>          constant; <c> is a Python complex literal (1+0.5j)
    linear <a> <b>     a + b x
    sine <a> <b> <k>   a + b sin(k pi x / L)

``beta`` must evaluate real and positive on the mesh; ``alpha`` may be
complex.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError

__all__ = [
    "CoefficientSpec",
    "ModelSpec",
    "AnalysisSpec",
    "EvolveSpec",
    "OutputSpec",
    "RunConfig",
    "parse_config_text",
    "config_from_mapping",
]

KNOWN_SECTIONS = {"model", "analysis", "evolve", "output"}
KNOWN_KEYS = {
    "model": {"model", "n", "l", "alpha", "beta", "rho"},
    "analysis": {
        "angle_count",
        "lambda_min",
        "lambda_max",
        "lambda_count",
        "omega_doublings",
        "alpha_min",
        "slack",
    },
    "evolve": {
        "method",
        "dt",
        "t_final",
        "initial",
        "nonlinearity",
        "bt_rate",
        "at_rate",
    },
    "output": {"directory", "format"},
}

METHODS = {"exact-exponential", "crank-nicolson", "exponential-euler", "implicit-euler"}


def _parse_complex(text: str, where: str, line: int | None = None) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError as exc:
        raise ConfigError(f"{where}: invalid complex literal {text!r}", line=line,
                          key=where) from exc


@dataclass(frozen=True)
class CoefficientSpec:
    """Parsed coefficient expression (const / linear / sine)."""

    kind: str
    params: tuple[complex, ...]

    @classmethod
    def parse(cls, text: str, where: str, line: int | None = None) -> "CoefficientSpec":
        parts = text.split()
        if not parts:
            raise ConfigError(f"{where}: empty coefficient", line=line, key=where)
        kind, args = parts[0], parts[1:]
        arity = {"const": 1, "linear": 2, "sine": 3}
        if kind not in arity:
            raise ConfigError(
                f"{where}: unknown coefficient kind {kind!r} "
                "(expected const, linear or sine)",
                line=line,
                key=where,
            )
        if len(args) != arity[kind]:
            raise ConfigError(
                f"{where}: {kind} takes {arity[kind]} parameter(s), got {len(args)}",
                line=line,
                key=where,
            )
        params = tuple(_parse_complex(a, where, line) for a in args)
        return cls(kind=kind, params=params)

    def as_function(self, length: float):
        if self.kind == "const":
            c = self.params[0]
            return lambda x: np.full_like(np.asarray(x, dtype=float), c, dtype=complex)
        if self.kind == "linear":
            a, b = self.params
            return lambda x: a + b * np.asarray(x, dtype=float)
        a, b, k = self.params
        return lambda x: a + b * np.sin(k.real * np.pi * np.asarray(x, dtype=float) / length)

    @property
    def is_constant(self) -> bool:
        return self.kind == "const"

    @property
    def constant_value(self) -> complex:
        if not self.is_constant:
            raise ValueError("coefficient is not constant")
        return self.params[0]

    def spec_string(self) -> str:
        def one(c: complex) -> str:
            return format(c.real, "g") if c.imag == 0.0 else str(c)

        return " ".join([self.kind, *(one(p) for p in self.params)])


@dataclass(frozen=True)
class ModelSpec:
    model: str = "dirichlet"
    n: int = 32
    length: float = 1.0
    alpha: CoefficientSpec = field(
        default_factory=lambda: CoefficientSpec("const", (1.0 + 0.0j,))
    )
    beta: CoefficientSpec = field(
        default_factory=lambda: CoefficientSpec("const", (1.0 + 0.0j,))
    )
    rho: complex | None = None


@dataclass(frozen=True)
class AnalysisSpec:
    angle_count: int = 256
    lambda_min: float = 1e-2
    lambda_max: float = 1e4
    lambda_count: int = 200
    omega_doublings: int = 10
    alpha_min: float = 1e-8
    slack: float = 1e-8


@dataclass(frozen=True)
class EvolveSpec:
    method: str = "exact-exponential"
    dt: float = 0.01
    t_final: float = 1.0
    initial: tuple = ("mode", 1, 1.0)
    nonlinearity: tuple | None = None    # ("klein-gordon", mass)
    bt_rate: float = 0.0
    at_rate: float = 0.0


@dataclass(frozen=True)
class OutputSpec:
    directory: str = "out"
    format: str = "both"


@dataclass(frozen=True)
class RunConfig:
    model: ModelSpec = field(default_factory=ModelSpec)
    analysis: AnalysisSpec = field(default_factory=AnalysisSpec)
    evolve: EvolveSpec | None = None
    output: OutputSpec = field(default_factory=OutputSpec)
    seed: int = 42
    threads: int = 1

    def with_overrides(self, seed=None, threads=None, out=None, fmt=None) -> "RunConfig":
        cfg = self
        if seed is not None:
            cfg = replace(cfg, seed=int(seed))
        if threads is not None:
            cfg = replace(cfg, threads=int(threads))
        if out is not None:
            cfg = replace(cfg, output=replace(cfg.output, directory=str(out)))
        if fmt is not None:
            cfg = replace(cfg, output=replace(cfg.output, format=str(fmt)))
        return cfg


def _tokenize(text: str):
    """Yield (line_number, section, key, value) from sectioned key=value text."""
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in KNOWN_SECTIONS:
                raise ConfigError(f"unknown section [{section}]", line=lineno)
            yield lineno, section, None, None
            continue
        if "=" not in line:
            raise ConfigError(f"expected key = value, got {raw.strip()!r}", line=lineno)
        if section is None:
            raise ConfigError("key outside of any [section]", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        if key not in KNOWN_KEYS[section]:
            raise ConfigError(
                f"unknown key {key!r} in [{section}]", line=lineno, key=f"{section}.{key}"
            )
        yield lineno, section, key, value


def parse_config_text(text: str) -> RunConfig:
    """Parse and validate a config document; raises :class:`ConfigError`."""
    data: dict[str, dict[str, tuple[str, int]]] = {}
    for lineno, section, key, value in _tokenize(text):
        bucket = data.setdefault(section, {})
        if key is None:
            continue
        if key in bucket:
            raise ConfigError(
                f"duplicate key {key!r} in [{section}]", line=lineno,
                key=f"{section}.{key}",
            )
        bucket[key] = (value, lineno)
    return _build_config(data)


def config_from_mapping(mapping: dict) -> RunConfig:
    """Build a config from nested plain dicts (the service request shape)."""
    data: dict[str, dict[str, tuple[str, int]]] = {}
    for section, values in mapping.items():
        section = str(section).lower()
        if section not in KNOWN_SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
        if values is None:
            continue
        bucket = data.setdefault(section, {})
        for key, value in values.items():
            key = str(key).lower()
            if key not in KNOWN_KEYS[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]",
                                  key=f"{section}.{key}")
            if value is None:
                continue
            bucket[key] = (str(value), None)
    return _build_config(data)


def _get(bucket, key, default=None):
    if key in bucket:
        return bucket[key]
    return default, None


def _positive_int(raw: str, where: str, line, minimum: int = 1) -> int:
    try:
        value = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{where}: expected an integer, got {raw!r}", line=line,
                          key=where) from exc
    if value < minimum:
        raise ConfigError(f"{where}: must be >= {minimum}", line=line, key=where)
    return value


def _positive_float(raw: str, where: str, line) -> float:
    try:
        value = float(raw)
    except ValueError as exc:
        raise ConfigError(f"{where}: expected a number, got {raw!r}", line=line,
                          key=where) from exc
    if not value > 0.0 or not np.isfinite(value):
        raise ConfigError(f"{where}: must be positive and finite", line=line, key=where)
    return value


def _build_config(data) -> RunConfig:
    if "model" not in data:
        raise ConfigError("missing required section [model] (key model.model)")
    m = data["model"]
    raw_model, line = _get(m, "model")
    if raw_model is None:
        raise ConfigError("missing key 'model' in [model]", key="model.model")
    model_kind = raw_model.strip().lower()
    if model_kind not in ("dirichlet", "dynamic-bc"):
        raise ConfigError(
            f"model must be dirichlet or dynamic-bc, got {raw_model!r}",
            line=line, key="model.model",
        )
    raw_n, line_n = _get(m, "n", "32")
    n = _positive_int(raw_n, "model.n", line_n, minimum=2)
    raw_l, line_l = _get(m, "l", "1.0")
    length = _positive_float(raw_l, "model.L", line_l)
    raw_alpha, line_a = _get(m, "alpha", "const 1")
    alpha = CoefficientSpec.parse(raw_alpha, "model.alpha", line_a)
    raw_beta, line_b = _get(m, "beta", "const 1")
    beta = CoefficientSpec.parse(raw_beta, "model.beta", line_b)
    raw_rho, line_r = _get(m, "rho")
    rho = None if raw_rho is None else _parse_complex(raw_rho, "model.rho", line_r)
    if model_kind == "dynamic-bc":
        if not alpha.is_constant:
            raise ConfigError("dynamic-bc requires a constant alpha",
                              line=line_a, key="model.alpha")
        if not (beta.is_constant and beta.constant_value == 1.0):
            raise ConfigError("dynamic-bc requires beta = const 1",
                              line=line_b, key="model.beta")
    model = ModelSpec(model=model_kind, n=n, length=length, alpha=alpha, beta=beta,
                      rho=rho)

    a = data.get("analysis", {})
    raw, line = _get(a, "angle_count", "256")
    angle_count = _positive_int(raw, "analysis.angle_count", line, minimum=8)
    raw, line = _get(a, "lambda_min", "1e-2")
    lambda_min = _positive_float(raw, "analysis.lambda_min", line)
    raw, line = _get(a, "lambda_max", "1e4")
    lambda_max = _positive_float(raw, "analysis.lambda_max", line)
    if lambda_max <= lambda_min:
        raise ConfigError("analysis.lambda_max must exceed lambda_min",
                          key="analysis.lambda_max")
    raw, line = _get(a, "lambda_count", "200")
    lambda_count = _positive_int(raw, "analysis.lambda_count", line)
    raw, line = _get(a, "omega_doublings", "10")
    omega_doublings = _positive_int(raw, "analysis.omega_doublings", line, minimum=0)
    raw, line = _get(a, "alpha_min", "1e-8")
    alpha_min = _positive_float(raw, "analysis.alpha_min", line)
    raw, line = _get(a, "slack", "1e-8")
    slack = _positive_float(raw, "analysis.slack", line)
    analysis = AnalysisSpec(
        angle_count=angle_count,
        lambda_min=lambda_min,
        lambda_max=lambda_max,
        lambda_count=lambda_count,
        omega_doublings=omega_doublings,
        alpha_min=alpha_min,
        slack=slack,
    )

    evolve = None
    if "evolve" in data:
        e = data["evolve"]
        raw, line = _get(e, "method", "exact-exponential")
        method = raw.strip().lower()
        if method not in METHODS:
            raise ConfigError(
                f"evolve.method must be one of {sorted(METHODS)}, got {raw!r}",
                line=line, key="evolve.method",
            )
        raw, line = _get(e, "dt", "0.01")
        dt = _positive_float(raw, "evolve.dt", line)
        raw, line = _get(e, "t_final", "1.0")
        t_final = _positive_float(raw, "evolve.t_final", line)
        raw, line = _get(e, "initial", "mode 1 1.0")
        initial = _parse_initial(raw, line)
        raw, line = _get(e, "nonlinearity", "none")
        nonlinearity = _parse_nonlinearity(raw, line)
        raw, line = _get(e, "bt_rate", "0")
        bt_rate = float(raw)
        raw, line = _get(e, "at_rate", "0")
        at_rate = float(raw)
        if nonlinearity is not None and method != "exponential-euler":
            raise ConfigError(
                "a nonlinearity requires evolve.method = exponential-euler",
                key="evolve.method",
            )
        if (bt_rate != 0.0 or at_rate != 0.0) and method != "implicit-euler":
            raise ConfigError(
                "time-dependent coefficients require evolve.method = implicit-euler",
                key="evolve.method",
            )
        evolve = EvolveSpec(
            method=method, dt=dt, t_final=t_final, initial=initial,
            nonlinearity=nonlinearity, bt_rate=bt_rate, at_rate=at_rate,
        )

    o = data.get("output", {})
    raw, _line = _get(o, "directory", "out")
    directory = raw
    raw, line = _get(o, "format", "both")
    out_fmt = raw.strip().lower()
    if out_fmt not in ("csv", "json", "both"):
        raise ConfigError(f"output.format must be csv, json or both, got {raw!r}",
                          line=line, key="output.format")
    output = OutputSpec(directory=directory, format=out_fmt)

    return RunConfig(model=model, analysis=analysis, evolve=evolve, output=output)


def _parse_initial(raw: str, line) -> tuple:
    parts = raw.split()
    if parts and parts[0] == "zero":
        return ("zero",)
    if parts and parts[0] == "mode":
        if len(parts) != 3:
            raise ConfigError("initial mode takes: mode <index> <amplitude>",
                              line=line, key="evolve.initial")
        k = _positive_int(parts[1], "evolve.initial mode index", line)
        try:
            amp = float(parts[2])
        except ValueError as exc:
            raise ConfigError("initial mode amplitude must be a number",
                              line=line, key="evolve.initial") from exc
        return ("mode", k, amp)
    if parts and parts[0] == "file":
        if len(parts) != 2:
            raise ConfigError("initial file takes: file <path>", line=line,
                              key="evolve.initial")
        return ("file", parts[1])
    raise ConfigError(f"unknown initial data spec {raw!r}", line=line,
                      key="evolve.initial")


def _parse_nonlinearity(raw: str, line) -> tuple | None:
    parts = raw.split()
    if parts and parts[0] == "none":
        return None
    if parts and parts[0] == "klein-gordon":
        if len(parts) != 2:
            raise ConfigError("klein-gordon takes one parameter (the mass)",
                              line=line, key="evolve.nonlinearity")
        try:
            mass = float(parts[1])
        except ValueError as exc:
            raise ConfigError("klein-gordon mass must be a number", line=line,
                              key="evolve.nonlinearity") from exc
        return ("klein-gordon", mass)
    raise ConfigError(f"unknown nonlinearity {raw!r}", line=line,
                      key="evolve.nonlinearity")
