"""Frozen-coefficient (Picard) iteration for the nonlinear discrete system."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import List

import numpy as np

from . import linalg
from .assembly import assemble, boundary_values, interior_blocks
from .errors import ConvergenceError, NotPositiveDefiniteError, ParameterError, SolverError
from .problems import custom

log = logging.getLogger(__name__)

SUBSOLVERS = ("cg", "cholesky")
INITIAL_GUESSES = ("zero", "mean", "harmonic")


@dataclass(frozen=True)
class SolveOptions:
    max_picard: int = 200
    picard_tol: float = 1e-10
    linear_tol: float = 1e-12
    damping: float = 1.0
    subsolver: str = "cg"
    initial_guess: str = "zero"
    lift: str = "mesh"

    def __post_init__(self):
        if self.max_picard < 1:
            raise ParameterError("max_picard must be positive")
        if not (self.picard_tol > 0 and self.linear_tol > 0):
            raise ParameterError("tolerances must be positive")
        if not 0 < self.damping <= 1:
            raise ParameterError("damping must lie in (0, 1]")
        if self.subsolver not in SUBSOLVERS:
            raise ParameterError(f"subsolver must be one of {SUBSOLVERS}")
        if self.initial_guess not in INITIAL_GUESSES:
            raise ParameterError(f"initial_guess must be one of {INITIAL_GUESSES}")
        if self.lift not in ("mesh", "exact"):
            raise ParameterError("lift must be 'mesh' or 'exact'")


@dataclass
class SolveReport:
    iterations: int = 0
    final_increment: float = float("inf")
    converged: bool = False
    increments: List[float] = field(default_factory=list)
    linear_iters_per_step: List[int] = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def _linear_solve(A, rhs, x0, opts):
    if opts.subsolver == "cholesky":
        return linalg.cholesky_solve(A, rhs), 0
    x, info = linalg.pcg(A, rhs, tol=opts.linear_tol, x0=x0)
    return x, info.iterations


def _diagnostics(A):
    diag = A.diagonal()
    return {
        "n": A.shape[0],
        "nnz": int(A.nnz),
        "min_diagonal": float(diag.min()) if diag.size else None,
        "symmetry_defect": linalg.symmetry_defect(A),
    }


def _initial_guess(mesh, problem, g, opts):
    n = mesh.n_interior
    c = np.zeros(mesh.n_vertices)
    c[n:] = g
    if opts.initial_guess == "mean" and g.size:
        c[:n] = g.mean()
    elif opts.initial_guess == "harmonic":
        laplace = custom(g=problem.g)
        A_bar, d = assemble(mesh, laplace, c, lift=opts.lift)
        A, At = interior_blocks(A_bar, n)
        c[:n], _ = _linear_solve(A, d[:n] - At @ g, None, opts)
    return c


def picard_solve(mesh, problem, opts=None):
    """Solve the discrete problem by successive linearization.

    Each step freezes ``b`` and ``r`` at the current iterate, solves the
    interior system ``A c = d - A~ g~`` and relaxes the interior values by
    ``opts.damping``.  Boundary values stay pinned to ``g`` at the boundary
    nodes.  Iteration stops once the sup-norm increment drops to
    ``opts.picard_tol``.

    Returns
    -------
    u : ndarray
        Nodal values in mesh node order.
    report : SolveReport
    """
    opts = opts or SolveOptions()
    n = mesh.n_interior
    g = boundary_values(mesh, problem)
    try:
        c = _initial_guess(mesh, problem, g, opts)
    except (NotPositiveDefiniteError, ConvergenceError, ValueError) as exc:
        raise SolverError(f"initial guess failed: {exc}", 0) from exc
    report = SolveReport()
    for k in range(1, opts.max_picard + 1):
        A_bar, d = assemble(mesh, problem, c, lift=opts.lift)
        A, At = interior_blocks(A_bar, n)
        rhs = d[:n] - At @ g
        try:
            sol, lin_iters = _linear_solve(A, rhs, c[:n], opts)
        except (NotPositiveDefiniteError, ConvergenceError, ValueError) as exc:
            raise SolverError(f"linear solve failed in Picard step {k}: {exc}", k, _diagnostics(A)) from exc
        step = opts.damping * (sol - c[:n])
        c[:n] += step
        increment = float(np.abs(step).max()) if n else 0.0
        report.iterations = k
        report.final_increment = increment
        report.increments.append(increment)
        report.linear_iters_per_step.append(lin_iters)
        log.debug("picard step %d: increment %.3e, %d linear iterations", k, increment, lin_iters)
        if increment <= opts.picard_tol:
            report.converged = True
            break
    return c, report


def residual_norm(mesh, problem, u, lift="mesh"):
    """Relative residual ``|A(u) c + A~(u) g~ - d|_inf`` of the interior equations.

    Normalized by the larger of ``|d|_inf`` and ``|A~(u) g~|_inf`` so that
    problems with a vanishing load are measured against the boundary forcing.
    """
    n = mesh.n_interior
    A_bar, d = assemble(mesh, problem, u, lift=lift)
    A, At = interior_blocks(A_bar, n)
    forcing = At @ u[n:]
    res = A @ u[:n] + forcing - d[:n]
    scale = max(float(np.abs(d[:n]).max(initial=0.0)), float(np.abs(forcing).max(initial=0.0)))
    return float(np.abs(res).max(initial=0.0)) / scale if scale > 0 else float(np.abs(res).max(initial=0.0))
