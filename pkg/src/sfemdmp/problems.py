"""Coefficient functions and the built-in problem catalog.

A problem is ``-div(b(x, u, grad u) grad u) + q(x, u) = f`` on the surface with
``u = g`` on the boundary.  All closures receive numpy arrays and must broadcast
over leading axes: ``x`` and ``xi`` have a trailing axis of length 3, ``z`` is
shaped like ``x[..., 0]``.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .errors import ParameterError


def _zero(x, z=None):
    return np.zeros(np.shape(x)[:-1])


def _one(x, z=None, xi=None):
    return np.ones(np.shape(x)[:-1])


def _norm(xi):
    return np.linalg.norm(xi, axis=-1)


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    b: Callable
    q: Callable
    f: Callable
    g: Callable
    p: float = 2.0
    p1: float = 2.0
    mu0: float = 1.0
    mu1: float = 1.0
    M0: float = 1.0
    M1: float = 1.0
    alpha: float = 0.0
    beta: float = 0.0
    epsilon_reg: float = 0.0
    # q identically zero: enables the range-coincidence checks
    q_is_zero: bool = False
    # b independent of (z, xi) and q linear in z
    is_linear: bool = False

    def __post_init__(self):
        if self.p < 2 or self.p1 < 2:
            raise ParameterError("growth exponents p and p1 must be >= 2")
        for name in ("mu0", "mu1", "M0", "M1", "alpha", "beta", "epsilon_reg"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be nonnegative")

    def fhat(self, x):
        """Source after moving ``q(x, 0)`` to the right-hand side."""
        x = np.asarray(x, dtype=float)
        return np.asarray(self.f(x), dtype=float) - np.asarray(self.q(x, np.zeros(x.shape[:-1])), dtype=float)

    def with_boundary_data(self, g):
        return replace(self, g=g)


def r_of(problem, x, z):
    """Difference quotient ``(q(x, z) - q(x, 0)) / z`` for ``z > 0``, zero otherwise."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    positive = z > 0
    zs = np.where(positive, z, 1.0)
    quotient = (np.asarray(problem.q(x, zs), dtype=float) - np.asarray(problem.q(x, np.zeros_like(zs)), dtype=float)) / zs
    return np.where(positive, quotient, 0.0)


# -- catalog -------------------------------------------------------------------


def _g_one_plus_xy(x):
    x = np.asarray(x, dtype=float)
    return 1.0 + x[..., 0] * x[..., 1]


def _g_ten_plus_x(x):
    x = np.asarray(x, dtype=float)
    return 10.0 + x[..., 0]


def radiative_cooling(sigma=1.0, g=None):
    if sigma < 0:
        raise ParameterError("sigma must be nonnegative")

    def q(x, z):
        return sigma * np.maximum(z, 0.0) ** 4

    return ProblemSpec(
        name="radiative-cooling",
        b=_one,
        q=q,
        f=_zero,
        g=g or _g_one_plus_xy,
        p=2.0,
        p1=5.0,
        mu0=0.5,
        mu1=0.5,
        M0=0.5,
        M1=0.5,
        alpha=0.0,
        beta=float(sigma),
        q_is_zero=sigma == 0,
        is_linear=sigma == 0,
    )


def p_laplacian(p=4.0, epsilon_reg=1e-8, g=None):
    if p < 2:
        raise ParameterError("p must be >= 2")
    if epsilon_reg < 0:
        raise ParameterError("epsilon_reg must be nonnegative")

    def b(x, z, xi):
        return epsilon_reg + _norm(xi) ** (p - 2.0)

    return ProblemSpec(
        name="p-laplacian",
        b=b,
        q=_zero,
        f=_zero,
        g=g or _g_ten_plus_x,
        p=float(p),
        p1=2.0,
        mu0=float(epsilon_reg),
        mu1=1.0,
        M0=float(epsilon_reg),
        M1=1.0,
        epsilon_reg=float(epsilon_reg),
        q_is_zero=True,
        is_linear=p == 2,
    )


def gas_dynamics(rho, g=None, p=2.0, mu0=1.0, mu1=1.0, M0=1.0, M1=1.0):
    """``b = rho(|xi|**2)``; the density law ``rho`` is supplied by the caller."""
    if not callable(rho):
        raise ParameterError("gas-dynamics needs a callable rho")

    def b(x, z, xi):
        return rho(_norm(xi) ** 2)

    return ProblemSpec(
        name="gas-dynamics",
        b=b,
        q=_zero,
        f=_zero,
        g=g or _g_one_plus_xy,
        p=p,
        mu0=mu0,
        mu1=mu1,
        M0=M0,
        M1=M1,
        q_is_zero=True,
    )


def custom(b=None, q=None, f=None, g=None, **metadata):
    return ProblemSpec(
        name=metadata.pop("name", "custom"),
        b=b or _one,
        q=q or _zero,
        f=f or _zero,
        g=g or _zero,
        **metadata,
    )


_CATALOG = {
    "radiative-cooling": radiative_cooling,
    "p-laplacian": p_laplacian,
    "gas-dynamics": gas_dynamics,
    "custom": custom,
}

PROBLEM_NAMES = tuple(_CATALOG)


def catalog(name, **params):
    """Look up a problem by name and instantiate it with ``params``."""
    try:
        factory = _CATALOG[name]
    except KeyError:
        raise ParameterError(f"unknown problem {name!r}; choose from {', '.join(_CATALOG)}") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise ParameterError(f"bad parameters for {name}: {exc}") from None


# -- sampled assumption checks -------------------------------------------------


def _sample_points(bbox, n, rng):
    lo, hi = np.asarray(bbox[0], dtype=float), np.asarray(bbox[1], dtype=float)
    return lo + (hi - lo) * rng.random((n, 3))


def check_ellipticity(problem, bbox, n=10_000, bound=10.0, seed=0, rtol=1e-12):
    """Sample ``mu0 + mu1|xi|^(p-2) <= b <= M0 + M1|xi|^(p-2)``.

    Returns the number of violating draws.
    """
    rng = np.random.default_rng(seed)
    x = _sample_points(bbox, n, rng)
    z = rng.uniform(-bound, bound, n)
    direction = rng.normal(size=(n, 3))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    xi = direction * rng.uniform(0.0, bound, n)[:, None]
    s = _norm(xi) ** (problem.p - 2.0)
    val = np.asarray(problem.b(x, z, xi), dtype=float)
    lower = problem.mu0 + problem.mu1 * s
    upper = problem.M0 + problem.M1 * s
    slack = rtol * np.maximum(1.0, upper)
    return int(np.count_nonzero((val < lower - slack) | (val > upper + slack)))


def check_growth(problem, bbox, n=10_000, bound=10.0, seed=0, rtol=1e-12):
    """Sample the growth conditions on ``q``; returns the number of violations."""
    rng = np.random.default_rng(seed)
    x = _sample_points(bbox, n, rng)
    z = rng.uniform(-bound, bound, n)
    q0 = np.asarray(problem.q(x, np.zeros(n)), dtype=float)
    qz = np.asarray(problem.q(x, z), dtype=float)
    neg = z <= 0
    zp = np.maximum(z, 0.0)
    upper = problem.alpha * zp + problem.beta * zp ** (problem.p1 - 1.0)
    slack = rtol * np.maximum(1.0, np.abs(upper) + np.abs(q0))
    bad_neg = neg & (np.abs(qz - q0) > slack)
    diff = qz - q0
    bad_pos = ~neg & ((diff < -slack) | (diff > upper + slack))
    return int(np.count_nonzero(bad_neg | bad_pos | (q0 < -slack)))
