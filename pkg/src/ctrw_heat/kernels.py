"""Space-time jump kernels: the heat-ball mean value kernel and a smooth test kernel.

A kernel J(x, t) is a probability density on space-time supported in
``0 < t <= t_max`` and ``|x| <= space_radius``.  Everything here is done in
"radial" form when the kernel is radial: ``profile(rho, t)`` is J on the
sphere of radius ``rho`` and ``radius_at(t)`` bounds its spatial section,
which lets quadrature follow the support exactly.

Parabolic rescaling J_r(x, t) = r^(-n-2) J(x/r, t/r^2) is carried as a
``scale`` attribute so that every derived quantity (support, sections,
windows) rescales consistently.
"""

from dataclasses import dataclass, field, replace
from math import gamma, pi
from typing import Callable, Optional

import numpy as np
from scipy import integrate
from scipy.special import lambertw

from .errors import InvalidParameter, NumericalFailure
from .quadrature import gauss_legendre, interval_rule, panel_rule, piecewise_edges

# grading levels toward the ends of smooth time pieces
_GRADE_ZERO = 100
_GRADE_END = 40
_GRADE_BREAK = 20


def sphere_area(n):
    """Surface measure of the unit sphere in R^n (2 for n=1, 2*pi for n=2)."""
    return 2.0 * pi ** (n / 2) / gamma(n / 2)


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """A compactly supported space-time probability kernel.

    The ``base_*`` callables describe the unit-scale kernel; public methods
    apply ``scale``.  ``base_profile(rho, t)`` is required for radial kernels,
    ``base_section(t)`` (spatial support radius at time t) and
    ``base_window(rho)`` (time interval where radius rho is in the support)
    are optional accuracy aids.
    """

    dim: int
    base_density: Callable
    base_t_max: float
    base_radius: float
    radial: bool = True
    base_profile: Optional[Callable] = None
    base_section: Optional[Callable] = None
    base_window: Optional[Callable] = None
    base_breaks: tuple = ()
    name: str = "custom"
    params: dict = field(default_factory=dict)
    scale: float = 1.0

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise InvalidParameter(f"dimension must be 1 or 2, got {self.dim}")
        if self.radial and self.base_profile is None:
            raise InvalidParameter("radial kernels need a radial profile")

    @property
    def t_max(self):
        return self.base_t_max * self.scale**2

    @property
    def time_support(self):
        return (0.0, self.t_max)

    @property
    def space_radius(self):
        return self.base_radius * self.scale

    @property
    def time_breaks(self):
        return tuple(b * self.scale**2 for b in self.base_breaks)

    def __call__(self, x, t):
        """J(x, t); ``x`` has a trailing axis of length ``dim``."""
        s = self.scale
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        return s ** (-self.dim - 2) * self.base_density(x / s, t / s**2)

    def profile(self, rho, t):
        s = self.scale
        rho = np.asarray(rho, dtype=float)
        t = np.asarray(t, dtype=float)
        return s ** (-self.dim - 2) * self.base_profile(rho / s, t / s**2)

    def radius_at(self, t):
        """Radius of the spatial section of the support at time ``t``."""
        t = np.asarray(t, dtype=float)
        if self.base_section is None:
            inside = (t > 0) & (t <= self.t_max)
            return np.where(inside, self.space_radius, 0.0)
        return self.scale * self.base_section(t / self.scale**2)

    def window(self, rho):
        """Time interval (lo, hi) on which radius ``rho`` meets the support."""
        if self.base_window is None:
            return (0.0, self.t_max)
        lo, hi = self.base_window(rho / self.scale)
        return (lo * self.scale**2, hi * self.scale**2)

    def params_dict(self):
        out = {"type": self.name, "dim": self.dim, "r": self.scale}
        out.update(self.params)
        return out


def rescale(kernel, r):
    """Parabolic rescaling J_r(x, t) = r^(-n-2) J(x/r, t/r^2)."""
    if not (np.isfinite(r) and r > 0):
        raise InvalidParameter(f"rescaling factor must be positive, got {r}")
    return replace(kernel, scale=kernel.scale * float(r))


# --- heat ball -------------------------------------------------------------

HEATBALL_TMAX = 1.0 / (4.0 * pi)


def heatball_radius(n, t):
    """R(t) = sqrt(2 n t ln(1/(4 pi t))), zero outside (0, 1/(4 pi)]."""
    t = np.asarray(t, dtype=float)
    inside = (t > 0) & (t <= HEATBALL_TMAX)
    tt = np.where(inside, t, HEATBALL_TMAX)
    r2 = 2.0 * n * tt * np.log(1.0 / (4.0 * pi * tt))
    return np.where(inside, np.sqrt(np.clip(r2, 0.0, None)), 0.0)


def heatball_window(n, rho):
    """Times t with R(t) >= rho, from the two real branches of Lambert W."""
    rho = abs(float(rho))
    if rho == 0.0:
        return (0.0, HEATBALL_TMAX)
    c = 2.0 * pi * rho * rho / n
    if c >= np.exp(-1.0):
        edge = 1.0 / (4.0 * pi * np.e)
        return (edge, edge)
    s_hi = np.exp(lambertw(-c, 0).real)
    s_lo = np.exp(lambertw(-c, -1).real)
    return (s_lo / (4.0 * pi), s_hi / (4.0 * pi))


def heatball_eval(n, x, t):
    """H(x, t) = |x|^2 / (4 t^2) on E = {W(x, t) >= 1}, zero elsewhere."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    r2 = x * x if n == 1 and x.shape[-1:] != (1,) else np.sum(x * x, axis=-1)
    return _heatball_profile_sq(n, r2, t)


def _heatball_profile_sq(n, r2, t):
    inside = (t > 0) & (t <= HEATBALL_TMAX)
    tt = np.where(inside, t, HEATBALL_TMAX)
    bound = 2.0 * n * tt * np.log(1.0 / (4.0 * pi * tt))
    val = 0.25 * r2 / (tt * tt)
    return np.where(inside & (r2 <= bound), val, 0.0)


def heatball(dim):
    """The heat-ball mean value kernel in dimension ``dim``."""
    n = int(dim)
    r_peak = np.sqrt(n / (2.0 * pi * np.e))
    return KernelSpec(
        dim=n,
        base_density=lambda x, t: _heatball_profile_sq(n, np.sum(x * x, axis=-1), t),
        base_t_max=HEATBALL_TMAX,
        base_radius=float(r_peak),
        radial=True,
        base_profile=lambda rho, t: _heatball_profile_sq(n, rho * rho, t),
        base_section=lambda t: heatball_radius(n, t),
        base_window=lambda rho: heatball_window(n, rho),
        name="heatball",
    )


# --- smooth product test kernel ---------------------------------------------


def _bump(s):
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1.0
    ss = np.where(inside, s, 0.0)
    return np.where(inside, np.exp(-1.0 / (1.0 - ss * ss)), 0.0)


def bump_product(dim, rho=0.25, t1=0.02, t2=0.1):
    """Radial bump in x times a bump in t supported on [t1, t2].

    Satisfies all kernel axioms but has mu != -nu, so it exercises the
    general (non-heat) statements.
    """
    n = int(dim)
    if not (rho > 0 and 0 < t1 < t2):
        raise InvalidParameter("bump-product needs rho > 0 and 0 < t1 < t2",
                               rho=rho, t1=t1, t2=t2)
    area = sphere_area(n)
    cx = area * integrate.quad(lambda p: _bump(p / rho) * p ** (n - 1), 0, rho,
                               epsabs=0, epsrel=1e-13, limit=200)[0]
    mid, half = 0.5 * (t1 + t2), 0.5 * (t2 - t1)
    ct = integrate.quad(lambda t: _bump((t - mid) / half), t1, t2,
                        epsabs=0, epsrel=1e-13, limit=200)[0]

    def profile(p, t):
        return _bump(p / rho) * _bump((t - mid) / half) / (cx * ct)

    def section(t):
        t = np.asarray(t, dtype=float)
        return np.where((t > t1) & (t < t2), rho, 0.0)

    def window(p):
        return (t1, t2) if abs(p) < rho else (t1, t1)

    return KernelSpec(
        dim=n,
        base_density=lambda x, t: profile(np.sqrt(np.sum(x * x, axis=-1)), t),
        base_t_max=float(t2),
        base_radius=float(rho),
        radial=True,
        base_profile=profile,
        base_section=section,
        base_window=window,
        base_breaks=(float(t1),),
        name="bump-product",
        params={"rho": rho, "t1": t1, "t2": t2},
    )


def make_kernel(config):
    """Build a kernel from ``{"type": ..., "dim": ..., "r": ...}``."""
    cfg = dict(config)
    kind = cfg.pop("type", "heatball")
    dim = int(cfg.pop("dim", 1))
    r = float(cfg.pop("r", 1.0))
    if kind == "heatball":
        if cfg:
            raise InvalidParameter(f"unknown heatball parameters {sorted(cfg)}")
        base = heatball(dim)
    elif kind in ("bump-product", "bump"):
        base = bump_product(dim, **{k: float(v) for k, v in cfg.items()})
    else:
        raise InvalidParameter(f"unknown kernel type {kind!r}")
    return base if r == 1.0 else rescale(base, r)


# --- quadrature over the kernel support -------------------------------------


def time_edges(kernel, a=0.0, b=None):
    """Graded panel edges for time integrals of ``kernel`` over [a, b]."""
    b = kernel.t_max if b is None else b
    grade_lo = _GRADE_ZERO if a <= 0.0 else _GRADE_END
    return piecewise_edges(a, b, kernel.time_breaks, grade_lo, _GRADE_END, _GRADE_BREAK)


def _box_rule(kernel, order):
    """Cartesian tensor rule over the spatial bounding box."""
    R = kernel.space_radius
    x, w = gauss_legendre(order)
    pts = R * x
    wts = R * w
    if kernel.dim == 1:
        return pts[:, None], wts
    X, Y = np.meshgrid(pts, pts, indexing="ij")
    return np.stack([X.ravel(), Y.ravel()], axis=-1), np.outer(wts, wts).ravel()


def spatial_integral(kernel, t, weight=None, order=32):
    """Integral over x of J(x, t) * weight(|x|) at each time in ``t``.

    ``weight`` maps radius to a multiplier (default 1).
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if kernel.radial:
        R = kernel.radius_at(t)
        rho, w = interval_rule(0.0, R, order)
        vals = kernel.profile(rho, t[:, None]) * rho ** (kernel.dim - 1)
        if weight is not None:
            vals = vals * weight(rho)
        return sphere_area(kernel.dim) * np.sum(vals * w, axis=-1)
    pts, w = _box_rule(kernel, order)
    vals = kernel(pts[None, :, :], t[:, None])
    if weight is not None:
        vals = vals * weight(np.sqrt(np.sum(pts * pts, axis=-1)))[None, :]
    return vals @ w


def time_mass(kernel, a, b, time_order=8, space_order=32):
    """Integral of J over a <= t <= b and all of space."""
    a = max(float(a), 0.0)
    b = min(float(b), kernel.t_max)
    if b <= a:
        return 0.0
    nodes, w = panel_rule(time_edges(kernel, a, b), time_order)
    return float(spatial_integral(kernel, nodes, order=space_order) @ w)


def waiting_marginal(kernel, t, tol=1e-12, max_order=512):
    """tau(t) = integral of J(x, t) dx, refined until successive orders agree."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    order = 16
    prev = spatial_integral(kernel, t_arr, order=order)
    while True:
        order *= 2
        cur = spatial_integral(kernel, t_arr, order=order)
        err = np.max(np.abs(cur - prev) / np.maximum(1.0, np.abs(cur)))
        if err < tol:
            break
        if order >= max_order:
            raise NumericalFailure("waiting-time quadrature did not converge",
                                   estimate=cur.tolist(), error=float(err))
        prev = cur
    return cur if np.ndim(t) else float(cur[0])


def jump_marginal(kernel, x, tol=1e-12):
    """lambda(x) = integral of J(x, t) dt by adaptive quadrature."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if kernel.dim == 1 and x.size == 1:
        x = x.reshape(1)
    rho = float(np.sqrt(np.sum(x * x)))
    if kernel.radial:
        lo, hi = kernel.window(rho)
        def f(t):
            return float(kernel.profile(rho, t))
    else:
        lo, hi = 0.0, kernel.t_max
        def f(t):
            return float(kernel(x, t))
    lo, hi = max(lo, 0.0), min(hi, kernel.t_max)
    if hi <= lo:
        return 0.0
    pts = [p for p in kernel.time_breaks if lo < p < hi]
    if lo > 0 and hi > 10 * lo:
        # wide windows: integrate in log-time, where t^-2 type profiles are tame
        g, a, b = (lambda s: f(np.exp(s)) * np.exp(s)), np.log(lo), np.log(hi)
        pts = [np.log(p) for p in pts]
    else:
        g, a, b = f, lo, hi
    val, err, info = integrate.quad(g, a, b, points=pts or None,
                                    epsabs=1e-14 * kernel.scale ** (-kernel.dim),
                                    epsrel=tol, limit=400, full_output=1)[:3]
    if err > max(1e3 * tol * abs(val), 1e-12 * kernel.scale ** (-kernel.dim)):
        raise NumericalFailure("jump-length quadrature did not converge",
                               estimate=val, error=err)
    return val


@dataclass(frozen=True)
class MomentReport:
    mu: float
    nu: float
    alpha: float
    contraction: float
    mass: float
    level: int = 0

    def to_dict(self):
        return {"mu": self.mu, "nu": self.nu, "alpha": self.alpha,
                "contraction": self.contraction, "mass": self.mass}


def _moment_sums(kernel, time_order, space_order):
    nodes, w = panel_rule(time_edges(kernel), time_order)
    mass = spatial_integral(kernel, nodes, order=space_order) @ w
    mu = -(spatial_integral(kernel, nodes, order=space_order) * nodes) @ w
    nu = (spatial_integral(kernel, nodes, weight=lambda p: p * p, order=space_order) @ w)
    return float(mass), float(mu), float(nu) / (2 * kernel.dim)


def kernel_alpha(kernel, iterations=60):
    """alpha = sup{beta : I(beta) < 1}, by bisection on the remaining mass.

    The mass beyond beta is integrated directly, so the test "I(beta) < 1"
    is a positivity test and does not suffer from cancellation.
    """
    lo, hi = 0.0, kernel.t_max
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if time_mass(kernel, mid, kernel.t_max) > 0.0:
            lo = mid
        else:
            hi = mid
    return hi


def compute_moments(kernel, quad_tol=1e-10, max_level=3):
    """Mass, mu, nu by refined tensor quadrature plus alpha and I(alpha/2)."""
    if not quad_tol > 0:
        raise InvalidParameter("quad_tol must be positive")
    prev = _moment_sums(kernel, 8, 16)
    level = 0
    while True:
        level += 1
        cur = _moment_sums(kernel, 8 * 2**level, 16 * 2**level)
        diff = max(abs(c - p) for c, p in zip(cur, prev))
        if diff < quad_tol:
            break
        if level >= max_level:
            alpha = kernel_alpha(kernel)
            partial = MomentReport(cur[1], cur[2], alpha, time_mass(kernel, 0, alpha / 2),
                                   cur[0], level)
            raise NumericalFailure("moment quadrature did not converge",
                                   difference=diff, partial=partial.to_dict())
        prev = cur
    alpha = kernel_alpha(kernel)
    contraction = time_mass(kernel, 0.0, 0.5 * alpha, 16, 64)
    mass, mu, nu = cur
    return MomentReport(mu=mu, nu=nu, alpha=alpha, contraction=contraction,
                        mass=mass, level=level)


def spatial_abs_moment(kernel, gamma_=1.0, time_order=16, space_order=64):
    """Integral of |x|^gamma J(x, t) over space-time."""
    nodes, w = panel_rule(time_edges(kernel), time_order)
    vals = spatial_integral(kernel, nodes, weight=lambda p: p ** gamma_, order=space_order)
    return float(vals @ w)


def closed_form_moment(n):
    """Integral of s H(y, s) over space-time for the heat ball (Gamma form)."""
    n = int(n)
    if n < 1:
        raise InvalidParameter("dimension must be a positive integer")
    return (sphere_area(n) * n ** ((n + 2) / 2) * gamma((n + 4) / 2)
            / (2.0 * (n + 2) ** ((n + 6) / 2) * pi ** ((n + 2) / 2)))


def closed_form_second_moment(n):
    """(1/2n) * integral of |y|^2 H(y, s) over space-time (Gamma form)."""
    n = int(n)
    return (sphere_area(n) * n ** ((n + 2) / 2) * gamma((n + 6) / 2)
            / ((n + 4) * (n + 2) ** ((n + 6) / 2) * pi ** ((n + 2) / 2)))
