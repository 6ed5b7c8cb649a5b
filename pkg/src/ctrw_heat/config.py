"""Run configuration: JSON file sections merged with command-line overrides."""

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

from .errors import ConfigurationError
from .grid import Grid
from .kernels import make_kernel


@dataclass
class KernelConfig:
    type: str = "heatball"
    dim: int = 1
    r: float = 1.0
    params: dict = field(default_factory=dict)

    def build(self):
        return make_kernel({"type": self.type, "dim": self.dim, "r": self.r, **self.params})


@dataclass
class GridConfig:
    """``k`` defaults to alpha / (2 strip_lags); ``T`` to ``T_alphas`` times alpha."""

    L: float = 1.0
    M: int = 256
    k: Optional[float] = None
    T: Optional[float] = None
    T_alphas: float = 4.0
    strip_lags: Optional[int] = None
    cells_per_radius: float = 32.0

    def build(self, dim, alpha, default_lags=8):
        m = self.strip_lags or default_lags
        k = self.k if self.k is not None else alpha / (2 * m)
        T = self.T if self.T is not None else self.T_alphas * alpha
        return Grid.from_horizon(dim, self.L, self.M, k, T)


@dataclass
class RunConfig:
    kernel: KernelConfig = field(default_factory=KernelConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    datum: str = "gaussian-bump"
    engine: str = "strip"
    start: str = "warm"
    picard_tol: float = 1e-10
    quad_tol: float = 1e-10
    workers: Optional[int] = None
    r_list: Optional[list] = None
    testfn: str = "gaussian"
    csv: bool = False

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigurationError(f"unknown configuration keys {unknown}")
        try:
            kernel = KernelConfig(**data.pop("kernel", {}))
            grid = GridConfig(**data.pop("grid", {}))
            return cls(kernel=kernel, grid=grid, **data)
        except TypeError as exc:
            raise ConfigurationError(f"bad configuration: {exc}") from None

    def to_dict(self):
        return asdict(self)


def load_config(path=None, overrides=None):
    """Config file (if any) with ``overrides`` (dotted keys, None = unset) on top."""
    data = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config {path} is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigurationError("config file must hold a JSON object")
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        node = data
        *parents, leaf = key.split(".")
        for p in parents:
            node = node.setdefault(p, {})
        node[leaf] = value
    return RunConfig.from_dict(data)
