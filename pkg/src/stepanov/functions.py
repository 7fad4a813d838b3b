"""Symbolic descriptions of deterministic functions of time.

A :class:`FunctionSpec` is a small immutable expression tree that can be
evaluated on scalars or numpy arrays, sampled on a :class:`GridWindow`, and
round-tripped through JSON.  Parametric specs ``(t, x) -> value`` describe
drift/diffusion coefficients and Nemytskii compositions.

JSON schema (one object per node, discriminated by ``kind``)::

    {"kind": "trig", "terms": [[amplitude, frequency, phase], ...]}
        sum of amplitude * sin(frequency * t + phase)
    {"kind": "const", "value": c}
    {"kind": "primitive", "name": str, "params": {...}}
    {"kind": "affine", "scale": a, "offset": b, "inner": spec}
    {"kind": "compose", "outer": map_name, "inner": spec}
    {"kind": "sum", "parts": [spec, ...]}
    {"kind": "product", "parts": [spec, ...]}
    {"kind": "parametric", "form": str, "params": [...], "terms": [spec, ...]}
    {"kind": "nemytskii", "outer": parametric spec, "inner": spec}
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Any, Callable

import numpy as np

from .errors import DimensionMismatch, NonFinite, SchemaError, UnknownPrimitive
from .grid import GridWindow, SampledPath

SQRT2 = math.sqrt(2.0)

# exp() overflows past this exponent in float64
EXP_GUARD = 709.0


def _finite(v: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(v)):
        raise NonFinite(f"non-finite value while evaluating {what}")
    return v


# ---------------------------------------------------------------- primitives


def levitan_g(t):
    return 2.0 + np.cos(t) + np.cos(SQRT2 * t)


def levitan_H(t):
    return np.sin(1.0 / levitan_g(t))


def levitan_h(t):
    g = levitan_g(t)
    return np.cos(1.0 / g) * (np.sin(t) + SQRT2 * np.sin(SQRT2 * t)) / g**2


def spike_exponent(t, n_max: int = 8):
    """Sum of the ``4n``-periodic triangular spikes, ``n = 2..n_max``.

    Spike ``n`` has height ``n**3`` and base width ``n**-5`` centred at
    ``n`` (mod ``4n``).
    """
    t = np.asarray(t, dtype=float)
    total = np.zeros_like(t)
    for n in range(2, n_max + 1):
        alpha, beta = float(n) ** -5, float(n) ** 3
        u = np.mod(t + 2 * n, 4 * n) - 2 * n
        total += beta * np.maximum(0.0, 1.0 - (2.0 / alpha) * np.abs(u - n))
    return total


def spike_train(t, n_max: int = 8):
    s = spike_exponent(t, n_max)
    if np.any(s > EXP_GUARD):
        raise NonFinite(
            f"spike train exponent {float(np.max(s)):.1f} exceeds the overflow guard"
        )
    return np.exp(s)


def _zero(t):
    return np.zeros_like(np.asarray(t, dtype=float))


PRIMITIVES: dict[str, Callable[..., Any]] = {
    "levitan_g": levitan_g,
    "levitan_H": levitan_H,
    "levitan_h": levitan_h,
    "spike_train": spike_train,
    "sin": np.sin,
    "cos": np.cos,
    "abs_sin": lambda t: np.abs(np.sin(t)),
    "identity": lambda t: np.asarray(t, dtype=float) * 1.0,
    "zero": _zero,
}

POINTWISE: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "abs": np.abs,
    "neg": np.negative,
    "square": np.square,
    "sqrt": np.sqrt,
    "tanh": np.tanh,
    "reciprocal": lambda v: 1.0 / v,
}


# --------------------------------------------------------------------- specs


class FunctionSpec:
    """Base class of scalar time-function specs."""

    kind: str = ""

    def _eval(self, t: np.ndarray) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            out = np.broadcast_to(self._eval(arr), arr.shape)
        _finite(out, self.kind)
        return float(out) if out.ndim == 0 else np.array(out)

    def to_dict(self) -> dict:  # pragma: no cover
        raise NotImplementedError

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    # a little algebra keeps corpus definitions readable
    def __add__(self, other: "FunctionSpec") -> "Sum":
        return Sum((self, other))

    def __mul__(self, other: "FunctionSpec") -> "Product":
        return Product((self, other))


@dataclass(frozen=True)
class Trig(FunctionSpec):
    terms: tuple[tuple[float, float, float], ...]
    kind = "trig"

    def __post_init__(self):
        object.__setattr__(
            self, "terms", tuple((float(a), float(w), float(p)) for a, w, p in self.terms)
        )

    def _eval(self, t):
        out = np.zeros_like(t)
        for a, w, p in self.terms:
            out = out + a * np.sin(w * t + p)
        return out

    def period(self, max_denominator: int = 10_000) -> float | None:
        """Exact period when all nonzero frequencies are commensurate.

        Returns ``None`` for incommensurate frequencies or a constant
        polynomial (no minimal period).
        """
        freqs = [abs(w) for a, w, _ in self.terms if w != 0.0 and a != 0.0]
        if not freqs:
            return None
        base = freqs[0]
        ratios = []
        for w in freqs:
            fr = Fraction(w / base).limit_denominator(max_denominator)
            if abs(float(fr) - w / base) > 1e-12 * max(1.0, w / base):
                return None
            ratios.append(fr)
        den = reduce(math.lcm, (r.denominator for r in ratios))
        num = reduce(math.gcd, (r.numerator * (den // r.denominator) for r in ratios))
        fundamental = base * num / den
        return 2 * math.pi / fundamental

    def to_dict(self):
        return {"kind": self.kind, "terms": [list(t) for t in self.terms]}


@dataclass(frozen=True)
class Const(FunctionSpec):
    value: float
    kind = "const"

    def _eval(self, t):
        return np.full_like(t, float(self.value))

    def to_dict(self):
        return {"kind": self.kind, "value": float(self.value)}


@dataclass(frozen=True)
class Primitive(FunctionSpec):
    name: str
    params: tuple[tuple[str, Any], ...] = ()
    kind = "primitive"

    def __post_init__(self):
        if self.name not in PRIMITIVES:
            raise UnknownPrimitive(f"unknown corpus primitive {self.name!r}")
        if isinstance(self.params, dict):
            object.__setattr__(self, "params", tuple(sorted(self.params.items())))

    def _eval(self, t):
        return PRIMITIVES[self.name](t, **dict(self.params))

    def to_dict(self):
        d = {"kind": self.kind, "name": self.name}
        if self.params:
            d["params"] = dict(self.params)
        return d


@dataclass(frozen=True)
class Affine(FunctionSpec):
    scale: float
    offset: float
    inner: FunctionSpec
    kind = "affine"

    def _eval(self, t):
        return self.scale * self.inner._eval(t) + self.offset

    def to_dict(self):
        return {
            "kind": self.kind,
            "scale": float(self.scale),
            "offset": float(self.offset),
            "inner": self.inner.to_dict(),
        }


@dataclass(frozen=True)
class Compose(FunctionSpec):
    outer: str
    inner: FunctionSpec
    kind = "compose"

    def __post_init__(self):
        if self.outer not in POINTWISE:
            raise UnknownPrimitive(f"unknown pointwise map {self.outer!r}")

    def _eval(self, t):
        return POINTWISE[self.outer](self.inner._eval(t))

    def to_dict(self):
        return {"kind": self.kind, "outer": self.outer, "inner": self.inner.to_dict()}


@dataclass(frozen=True)
class Sum(FunctionSpec):
    parts: tuple[FunctionSpec, ...]
    kind = "sum"

    def _eval(self, t):
        out = np.zeros_like(t)
        for p in self.parts:
            out = out + p._eval(t)
        return out

    def to_dict(self):
        return {"kind": self.kind, "parts": [p.to_dict() for p in self.parts]}


@dataclass(frozen=True)
class Product(FunctionSpec):
    parts: tuple[FunctionSpec, ...]
    kind = "product"

    def _eval(self, t):
        out = np.ones_like(t)
        for p in self.parts:
            out = out * p._eval(t)
        return out

    def to_dict(self):
        return {"kind": self.kind, "parts": [p.to_dict() for p in self.parts]}


# ----------------------------------------------------------- parametric specs

PARAMETRIC_FORMS = ("affine", "sine", "tanh")


@dataclass(frozen=True)
class Parametric:
    """State-dependent coefficient ``(t, x) -> value``, applied componentwise.

    ``terms = (coef, forcing)`` are time functions:

    * ``affine``: ``coef(t) * x + forcing(t)``
    * ``sine``:   ``coef(t) * sin(x) + forcing(t)``
    * ``tanh``:   ``coef(t) * tanh(x) + forcing(t)``

    The Lipschitz modulus in ``x`` of every form is ``|coef(t)|``.
    ``params`` is reserved for form-specific constants and ``dim`` is the
    state dimension the coefficient accepts.
    """

    form: str
    terms: tuple[FunctionSpec, FunctionSpec]
    params: tuple[float, ...] = ()
    dim: int = 1
    kind = "parametric"

    def __post_init__(self):
        if self.form not in PARAMETRIC_FORMS:
            raise UnknownPrimitive(f"unknown parametric form {self.form!r}")
        if len(self.terms) != 2:
            raise SchemaError("parametric spec needs exactly two terms (coef, forcing)")

    @property
    def coef(self) -> FunctionSpec:
        return self.terms[0]

    @property
    def forcing(self) -> FunctionSpec:
        return self.terms[1]

    def lipschitz(self) -> FunctionSpec:
        return Compose("abs", self.coef)

    def is_state_free(self) -> bool:
        return isinstance(self.coef, Const) and self.coef.value == 0.0

    def __call__(self, t, x):
        """Evaluate with ``t`` broadcastable against the leading axes of ``x``."""
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        c = self.coef(t)
        b = self.forcing(t)
        if x.ndim > t.ndim:
            # trailing state axis
            c = np.expand_dims(c, -1)
            b = np.expand_dims(b, -1)
        if self.form == "affine":
            s = x
        elif self.form == "sine":
            s = np.sin(x)
        else:
            s = np.tanh(x)
        return _finite(c * s + b, f"parametric {self.form}")

    def to_dict(self):
        d = {
            "kind": self.kind,
            "form": self.form,
            "params": list(self.params),
            "terms": [s.to_dict() for s in self.terms],
        }
        if self.dim != 1:
            d["dim"] = self.dim
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


@dataclass(frozen=True)
class Nemytskii(FunctionSpec):
    """``t -> outer(t, inner(t))``."""

    outer: Parametric
    inner: FunctionSpec
    kind = "nemytskii"

    def _eval(self, t):
        return self.outer(t, self.inner._eval(t))

    def to_dict(self):
        return {"kind": self.kind, "outer": self.outer.to_dict(), "inner": self.inner.to_dict()}


def identity_parametric() -> Parametric:
    return Parametric("affine", (Const(1.0), Const(0.0)))


def compose(f_param: Parametric, u: FunctionSpec) -> Nemytskii:
    """Nemytskii composition ``t -> f_param(t, u(t))`` of a scalar ``u``."""
    if not isinstance(f_param, Parametric):
        raise SchemaError("outer argument must be a parametric spec")
    if f_param.dim != 1:
        raise DimensionMismatch(
            f"parametric spec expects state dimension {f_param.dim}, u is scalar"
        )
    return Nemytskii(f_param, u)


# ------------------------------------------------------------ evaluate/sample


def evaluate(spec: FunctionSpec, t):
    return spec(t)


def sample(spec: FunctionSpec | Callable, window: GridWindow) -> SampledPath:
    """Evaluate ``spec`` at every node of ``window``."""
    t = window.times
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        v = np.asarray(spec(t), dtype=float)
    _finite(v, getattr(spec, "kind", "callable"))
    return SampledPath(window, v)


# -------------------------------------------------------------------- JSON


def from_dict(d: dict) -> FunctionSpec | Parametric:
    """Inverse of ``to_dict``; raises ``SchemaError`` on malformed input."""
    if not isinstance(d, dict) or "kind" not in d:
        raise SchemaError(f"spec object must be a dict with a 'kind' key, got {d!r}")
    kind = d["kind"]
    try:
        if kind == "trig":
            return Trig(tuple(tuple(x) for x in d["terms"]))
        if kind == "const":
            return Const(float(d["value"]))
        if kind == "primitive":
            return Primitive(d["name"], tuple(sorted(d.get("params", {}).items())))
        if kind == "affine":
            return Affine(float(d["scale"]), float(d["offset"]), _fs(d["inner"]))
        if kind == "compose":
            return Compose(d["outer"], _fs(d["inner"]))
        if kind == "sum":
            return Sum(tuple(_fs(p) for p in d["parts"]))
        if kind == "product":
            return Product(tuple(_fs(p) for p in d["parts"]))
        if kind == "parametric":
            return Parametric(
                d["form"],
                tuple(_fs(p) for p in d["terms"]),
                tuple(float(v) for v in d.get("params", [])),
                int(d.get("dim", 1)),
            )
        if kind == "nemytskii":
            outer = from_dict(d["outer"])
            if not isinstance(outer, Parametric):
                raise SchemaError("nemytskii outer must be parametric")
            return compose(outer, _fs(d["inner"]))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"malformed {kind!r} spec: {exc}") from exc
    raise SchemaError(f"unknown spec kind {kind!r}")


def _fs(d) -> FunctionSpec:
    s = from_dict(d)
    if not isinstance(s, FunctionSpec):
        raise SchemaError("expected a time-function spec, got a parametric one")
    return s


def from_json(text: str) -> FunctionSpec | Parametric:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    return from_dict(d)
