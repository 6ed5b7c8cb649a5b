"""Initial densities f with bound and Hoelder metadata, plus named presets."""

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError, InvalidParameter, VerificationFailure


@dataclass(frozen=True, eq=False)
class InitialDatum:
    """Bounded datum; ``func`` maps points (trailing axis = dim) to values.

    Either ``func`` or a fixed lattice ``array`` must be given.
    """

    func: Optional[Callable]
    inf_f: float
    sup_f: float
    holder_exponent: Optional[float] = None
    holder_seminorm: Optional[float] = None
    name: str = "custom"
    array: Optional[np.ndarray] = None
    period: Optional[float] = None

    @property
    def is_constant(self):
        return self.sup_f == self.inf_f

    @property
    def has_holder(self):
        return self.holder_exponent is not None and self.holder_seminorm is not None

    def __call__(self, x):
        if self.func is None:
            raise InvalidParameter("lattice datum has no pointwise evaluator")
        return np.asarray(self.func(np.asarray(x, dtype=float)), dtype=float)

    def sample(self, grid):
        if self.array is not None:
            if self.array.shape != grid.shape:
                raise InvalidParameter("datum array does not match the grid",
                                       shape=self.array.shape, expected=grid.shape)
            return np.array(self.array, dtype=float)
        return np.broadcast_to(self(grid.coords()), grid.shape).astype(float)

    def scaled(self, r):
        """The datum x -> f(r x); its Hoelder seminorm picks up r^gamma."""
        if self.func is None:
            raise InvalidParameter("cannot rescale a lattice datum")
        f = self.func
        semi = None
        if self.has_holder:
            semi = self.holder_seminorm * r**self.holder_exponent
        period = None if self.period is None else self.period / r
        return replace(self, func=lambda x: f(r * x), holder_seminorm=semi,
                       name=f"{self.name}(r={r:g})", period=period)

    def check_holder(self, L, dim=1, pairs=1000, seed=0):
        """Check |f(x)-f(y)| <= [f]_gamma d(x,y)^gamma on random periodic pairs."""
        if not self.has_holder:
            raise ConfigurationError("datum carries no Hoelder metadata", datum=self.name)
        rng = np.random.default_rng(seed)
        x = rng.uniform(0, L, size=(pairs, dim))
        y = rng.uniform(0, L, size=(pairs, dim))
        d = np.abs(x - y)
        d = np.sqrt(np.sum(np.minimum(d, L - d) ** 2, axis=-1))
        lhs = np.abs(self(x) - self(y))
        rhs = self.holder_seminorm * d**self.holder_exponent
        worst = float(np.max(lhs - rhs))
        if worst > 1e-12 * max(1.0, abs(self.sup_f), abs(self.inf_f)):
            raise VerificationFailure("Hoelder bound violated", datum=self.name, excess=worst)
        return True

    def describe(self):
        return {"name": self.name, "inf": self.inf_f, "sup": self.sup_f,
                "gamma": self.holder_exponent, "seminorm": self.holder_seminorm}


def from_array(values, gamma=None, seminorm=None, name="array"):
    values = np.asarray(values, dtype=float)
    return InitialDatum(None, float(values.min()), float(values.max()), gamma, seminorm,
                        name=name, array=values)


def constant(c=1.0):
    c = float(c)
    return InitialDatum(lambda x: np.full(x.shape[:-1], c), c, c, 1.0, 0.0,
                        name=f"constant:{c:g}")


def _wrap(x, L):
    return x - L * np.round(x / L)


def gaussian_bump(L=1.0, width=None, center=None, amplitude=1.0):
    """Gaussian of the periodic (minimum image) distance to ``center``."""
    width = L / 20 if width is None else float(width)
    center = L / 2 if center is None else float(center)

    def f(x):
        d = _wrap(x - center, L)
        return amplitude * np.exp(-np.sum(d * d, axis=-1) / (2 * width * width))

    lip = abs(amplitude) * np.exp(-0.5) / width
    return InitialDatum(f, min(0.0, amplitude), max(0.0, amplitude), 1.0, lip,
                        name="gaussian-bump", period=L)


def cosine(L=1.0, amplitude=1.0):
    w = 2 * np.pi / L
    return InitialDatum(lambda x: amplitude * np.cos(w * x[..., 0]), -abs(amplitude),
                        abs(amplitude), 1.0, abs(amplitude) * w, name="cosine", period=L)


def triangle_wave(L=1.0, amplitude=None):
    """Piecewise-linear wave with kinks at 0 and L/2; slope 1 by default."""
    A = L / 4 if amplitude is None else float(amplitude)

    def f(x):
        s = np.mod(x[..., 0] / L, 1.0)
        return A * (1.0 - 4.0 * np.abs(s - 0.5))

    return InitialDatum(f, -abs(A), abs(A), 1.0, 4 * abs(A) / L, name="triangle-wave", period=L)


def sqrt_sine(L=1.0, amplitude=1.0):
    """|sin(pi x / L)|^(1/2): Hoelder of order 1/2 at its zeros."""
    A = float(amplitude)

    def f(x):
        return A * np.sqrt(np.abs(np.sin(np.pi * x[..., 0] / L)))

    return InitialDatum(f, min(0.0, A), max(0.0, A), 0.5, abs(A) * np.sqrt(np.pi / L),
                        name="sqrt-sine", period=L)


PRESETS = {
    "constant": constant,
    "gaussian-bump": gaussian_bump,
    "cosine": cosine,
    "triangle-wave": triangle_wave,
    "sqrt-sine": sqrt_sine,
}


def parse_datum(text, L=1.0):
    """``"constant:1"``, ``"cosine"``, ``"gaussian-bump:width=0.05,center=0.3"``."""
    name, _, args = str(text).partition(":")
    if name not in PRESETS:
        raise ConfigurationError(f"unknown datum preset {name!r}", known=sorted(PRESETS))
    if name == "constant":
        return constant(float(args) if args else 1.0)
    kwargs = {}
    for item in filter(None, args.split(",")):
        key, eq, val = item.partition("=")
        if not eq:
            raise ConfigurationError(f"datum parameter {item!r} is not key=value")
        kwargs[key.strip()] = float(val)
    try:
        return PRESETS[name](L=L, **kwargs)
    except TypeError as exc:
        raise ConfigurationError(f"bad parameters for datum {name!r}: {exc}") from None
