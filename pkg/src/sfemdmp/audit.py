"""Checks of the discrete maximum principle hypotheses and conclusions.

Three layers are audited:

* mesh angles, through the per-element constants ``grad chi_i . grad chi_j``;
* the assembled matrix: nonpositive off-diagonals in interior rows,
  nonnegative row sums, positive definite interior block;
* the nodal solution against the max/min/nonnegativity statements.

:func:`algebraic_dwmp_oracle` checks the underlying matrix statement by brute
force on small random instances.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from .assembly import _geometry_arrays, interior_blocks
from .errors import ParameterError
from .linalg import is_positive_definite

ANGLE_MODES = ("acute", "nonobtuse")
DMP_VARIANTS = ("weak-max", "strict-max", "weak-min", "strict-min", "nonneg", "nonpos")
MAX_LISTED = 100


@dataclass
class AngleReport:
    mode: str
    passed: bool
    worst_pair_product: float
    sigma0_estimate: float
    violations: List[Tuple[int, int, int]] = field(default_factory=list)
    n_violations: int = 0


@dataclass
class MatrixReport:
    sign_passed: bool
    sign_tolerance: float
    sign_violations: List[Tuple[int, int, float]]
    n_sign_violations: int
    row_sum_passed: bool
    row_sum_tolerance: float
    row_sum_min: float
    row_sum_violations: List[Tuple[int, float]]
    n_row_sum_violations: int
    spd: bool


@dataclass
class DMPCheck:
    variant: str
    passed: bool
    value: float
    bound: float
    witness: Optional[int]


@dataclass
class AuditReport:
    angles: Optional[AngleReport] = None
    matrix: Optional[MatrixReport] = None
    dmp: List[DMPCheck] = field(default_factory=list)

    @property
    def dmp_verdict(self):
        if not self.dmp or not all(c.passed for c in self.dmp):
            return "fail"
        return "strict-pass" if any(c.variant.startswith("strict") for c in self.dmp) else "weak-pass"

    @property
    def passed(self):
        ok = self.dmp_verdict != "fail" if self.dmp else True
        if self.angles is not None:
            ok &= self.angles.passed
        if self.matrix is not None:
            ok &= self.matrix.sign_passed and self.matrix.row_sum_passed and self.matrix.spd
        return ok

    def to_dict(self):
        out = {}
        if self.angles is not None:
            out["angles"] = asdict(self.angles)
        if self.matrix is not None:
            m = self.matrix
            out["sign_pattern"] = {
                "passed": m.sign_passed,
                "tolerance": m.sign_tolerance,
                "n_violations": m.n_sign_violations,
                "violations": [list(v) for v in m.sign_violations],
            }
            out["row_sums"] = {
                "passed": m.row_sum_passed,
                "tolerance": m.row_sum_tolerance,
                "min": m.row_sum_min,
                "n_violations": m.n_row_sum_violations,
                "violations": [list(v) for v in m.row_sum_violations],
            }
            out["spd"] = {"passed": m.spd, "method": "ldlt"}
        out["dmp"] = {"verdict": self.dmp_verdict, "checks": [asdict(c) for c in self.dmp]}
        out["passed"] = bool(self.passed)
        return out

    def to_json(self, **kwargs):
        return json.dumps(_plain(self.to_dict()), indent=2, sort_keys=True, **kwargs)


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


# -- angles --------------------------------------------------------------------


def check_angles(mesh, mode="acute", rtol=1e-12):
    """Sign of ``grad chi_a . grad chi_b`` for every element and local pair.

    Only pairs with at least one interior node count.  ``acute`` requires every
    product to be strictly negative, ``nonobtuse`` nonpositive; products within
    ``rtol * max|product|`` of zero are treated as zero.  ``sigma0_estimate`` is
    ``-h**2`` times the largest product, i.e. the best constant the mesh
    supports.
    """
    if mode not in ANGLE_MODES:
        raise ParameterError(f"mode must be one of {ANGLE_MODES}")
    p = mesh.vertices[mesh.triangles]
    _, _, grads = _geometry_arrays(p)
    pair = np.einsum("eak,ebk->eab", grads, grads)
    local = np.array([(0, 1), (1, 2), (0, 2)])
    products = pair[:, local[:, 0], local[:, 1]]
    interior = mesh.triangles < mesh.n_interior
    counted = interior[:, local[:, 0]] | interior[:, local[:, 1]]
    if not counted.any():
        return AngleReport(mode, True, float("-inf"), float("inf"))
    tol = rtol * np.abs(products).max()
    worst = float(products[counted].max())
    bad = counted & ((products >= -tol) if mode == "acute" else (products > tol))
    where = np.argwhere(bad)
    violations = [(int(e), int(local[k, 0]), int(local[k, 1])) for e, k in where[:MAX_LISTED]]
    return AngleReport(
        mode=mode,
        passed=not bad.any(),
        worst_pair_product=worst,
        sigma0_estimate=-worst * mesh.h**2,
        violations=violations,
        n_violations=int(bad.sum()),
    )


# -- matrix ----------------------------------------------------------------------


def check_matrix_conditions(A_bar, n_interior, sign_rtol=1e-12, row_rtol=1e-10):
    """Sign pattern, row sums and positive definiteness of the interior rows."""
    A_bar = sp.csr_matrix(A_bar)
    top = A_bar[:n_interior].tocoo()
    scale = float(np.abs(top.data).max()) if top.nnz else 0.0
    sign_tol = sign_rtol * scale
    row_tol = row_rtol * scale

    offdiag = (top.row != top.col) & (top.data > sign_tol)
    order = np.lexsort((top.col[offdiag], top.row[offdiag]))
    sign_list = [
        (int(i), int(j), float(a))
        for i, j, a in zip(top.row[offdiag][order], top.col[offdiag][order], top.data[offdiag][order])
    ]

    sums = np.asarray(A_bar[:n_interior].sum(axis=1)).ravel()
    low = np.flatnonzero(sums < -row_tol)
    row_list = [(int(i), float(sums[i])) for i in low[:MAX_LISTED]]

    A, _ = interior_blocks(A_bar, n_interior)
    spd = is_positive_definite(A) if n_interior else True
    return MatrixReport(
        sign_passed=not sign_list,
        sign_tolerance=sign_tol,
        sign_violations=sign_list[:MAX_LISTED],
        n_sign_violations=len(sign_list),
        row_sum_passed=low.size == 0,
        row_sum_tolerance=row_tol,
        row_sum_min=float(sums.min()) if sums.size else 0.0,
        row_sum_violations=row_list,
        n_row_sum_violations=int(low.size),
        spd=spd,
    )


# -- nodal verdicts ---------------------------------------------------------------


def check_dmp(u, g_values, variant, rtol=1e-10):
    """Compare nodal values with the boundary data.

    ``u`` holds all nodal values (boundary last), ``g_values`` the boundary
    data.  Slack is ``rtol * (1 + max|g|)``.
    """
    if variant not in DMP_VARIANTS:
        raise ParameterError(f"variant must be one of {DMP_VARIANTS}")
    u = np.asarray(u, dtype=float)
    g = np.asarray(g_values, dtype=float)
    if u.ndim != 1 or g.ndim != 1 or g.size == 0 or g.size > u.size:
        raise ParameterError("u must be a nodal vector and g_values a nonempty boundary slice of it")
    slack = rtol * (1.0 + np.abs(g).max())
    imax, imin = int(np.argmax(u)), int(np.argmin(u))
    umax, umin = float(u[imax]), float(u[imin])
    if variant == "weak-max":
        bound = max(0.0, float(g.max()))
        ok, value, witness = umax <= bound + slack, umax, imax
    elif variant == "strict-max":
        bound = float(g.max())
        ok, value, witness = abs(umax - bound) <= slack, umax, imax
    elif variant == "weak-min":
        bound = min(0.0, float(g.min()))
        ok, value, witness = umin >= bound - slack, umin, imin
    elif variant == "strict-min":
        bound = float(g.min())
        ok, value, witness = abs(umin - bound) <= slack, umin, imin
    elif variant == "nonneg":
        bound = 0.0
        ok, value, witness = umin >= -slack, umin, imin
    else:
        bound = 0.0
        ok, value, witness = umax <= slack, umax, imax
    return DMPCheck(variant, bool(ok), value, bound, None if ok else witness)


def applicable_dmp_variants(problem, fhat_values, g_values):
    """Nodal statements that the theory guarantees for this problem and data.

    ``fhat_values`` are samples of ``f - q(., 0)`` (e.g. at quadrature points).
    """
    fmax = float(np.max(fhat_values)) if np.size(fhat_values) else 0.0
    fmin = float(np.min(fhat_values)) if np.size(fhat_values) else 0.0
    g = np.asarray(g_values, dtype=float)
    variants = []
    if problem.q_is_zero:
        if fmax <= 0:
            variants.append("strict-max")
        if fmin >= 0:
            variants.append("strict-min")
        return variants
    if fmax <= 0:
        variants.append("strict-max" if g.min() >= 0 else "weak-max")
        if g.max() <= 0:
            variants.append("nonpos")
    if fmin >= 0:
        variants.append("strict-min" if g.max() <= 0 else "weak-min")
        if g.min() >= 0:
            variants.append("nonneg")
    return variants


def audit(mesh, problem, u, A_bar, angle_mode="acute", variants=None):
    """Full audit of a solved system.  ``A_bar`` is assembled at ``u``."""
    n = mesh.n_interior
    g = u[n:]
    if variants is None:
        p = mesh.vertices[mesh.triangles]
        mids = 0.5 * (p + np.roll(p, -1, axis=1))
        fhat = problem.fhat(mids.reshape(-1, 3))
        variants = applicable_dmp_variants(problem, fhat, g)
    return AuditReport(
        angles=check_angles(mesh, angle_mode),
        matrix=check_matrix_conditions(A_bar, n),
        dmp=[check_dmp(u, g, v) for v in variants],
    )


# -- algebraic oracle --------------------------------------------------------------


@dataclass
class OracleStats:
    trials: int
    violations: int
    rejected: int
    max_excess: float
    counterexamples: list = field(default_factory=list)

    @property
    def passed(self):
        return self.violations == 0


def dwmp_holds(A, A_tilde, c_tilde, d, strict=False, rtol=1e-9):
    """Solve ``A c = d - A~ c~`` and test the matrix maximum principle.

    Returns ``(holds, excess, c)`` where ``excess`` is how far the maximum
    overshoots the bound (negative when it holds with room to spare).
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    A_tilde = np.atleast_2d(np.asarray(A_tilde, dtype=float))
    c_tilde = np.atleast_1d(np.asarray(c_tilde, dtype=float))
    d = np.atleast_1d(np.asarray(d, dtype=float))
    c = np.linalg.solve(A, d - A_tilde @ c_tilde)
    full_max = max(c.max(), c_tilde.max())
    slack = rtol * (1.0 + np.abs(c_tilde).max() + np.abs(c).max())
    if strict:
        excess = abs(full_max - c_tilde.max())
    else:
        excess = full_max - max(0.0, c_tilde.max())
    return bool(excess <= slack), float(excess), c


def _random_instance(rng, size_bound, zero_row_sums):
    total = int(rng.integers(2, size_bound + 1))
    n = int(rng.integers(1, total))
    m = total - n
    density = rng.uniform(0.2, 1.0)
    upper = -rng.uniform(0.0, 1.0, (n, n)) * (rng.random((n, n)) < density)
    off = np.triu(upper, 1)
    off = off + off.T
    coupling = -rng.uniform(0.0, 1.0, (n, m)) * (rng.random((n, m)) < density)
    slack = np.zeros(n) if zero_row_sums else rng.uniform(0.0, 1.0, n) * (rng.random(n) < 0.7)
    diag = -(off.sum(axis=1) + coupling.sum(axis=1)) + slack
    A = off + np.diag(diag)
    return A, coupling


def algebraic_dwmp_oracle(trials=1000, size_bound=12, seed=0, zero_row_sums=False, max_rejections=100_000):
    """Random brute-force check of the matrix maximum principle.

    Builds matrices ``[[A, A~], [0, I]]`` with nonpositive off-diagonals,
    nonnegative (or zero) row sums and symmetric positive definite ``A``
    (rejection sampling on the eigenvalues), draws ``d <= 0`` and boundary
    values, solves densely and checks the weak (or, for zero row sums, strict)
    principle.
    """
    if size_bound > 12 or size_bound < 2:
        raise ParameterError("size_bound must lie in [2, 12]")
    rng = np.random.default_rng(seed)
    stats = OracleStats(trials, 0, 0, float("-inf"))
    done = 0
    while done < trials:
        A, A_tilde = _random_instance(rng, size_bound, zero_row_sums)
        if np.linalg.eigvalsh(A).min() <= 1e-8 * max(1.0, np.abs(A).max()):
            stats.rejected += 1
            if stats.rejected > max_rejections:
                raise RuntimeError("oracle could not draw positive definite instances")
            continue
        n, m = A_tilde.shape
        d = -rng.uniform(0.0, 1.0, n) * (rng.random(n) < 0.5)
        c_tilde = rng.uniform(-5.0, 5.0, m)
        holds, excess, c = dwmp_holds(A, A_tilde, c_tilde, d, strict=zero_row_sums)
        stats.max_excess = max(stats.max_excess, excess)
        if not holds:
            stats.violations += 1
            stats.counterexamples.append({"A": A, "A_tilde": A_tilde, "c_tilde": c_tilde, "d": d, "c": c})
        done += 1
    return stats
