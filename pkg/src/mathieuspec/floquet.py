"""Truncated Fourier representation of the quasimomentum family H_t(a, b).

In the basis e^{i(2 pi k + t)x}, k = -M..M, the operator is tridiagonal:
row k reads (2 pi k + t)^2 c_k + a c_{k+1} + b c_{k-1} = lambda c_k.  The
adjoint family is the same construction with (a, b) -> (conj b, conj a),
which is exactly the conjugate transpose of the matrix; left eigenvectors
of the primal matrix therefore are the adjoint eigenfunctions.

Eigenvalue curves are numbered so that lambda_n(t) ~ (2 pi n + t)^2 at the
mid-zone anchor t = pi/2 and continued by nearest-distance assignment,
with lambda_n(-t) = lambda_n(t) extending them to negative quasimomentum.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linear_sum_assignment

from .errors import (ConvergenceError, MultipleEigenvalueError,
                     TrackingAmbiguityError, ValidationError)
from .potential import MathieuPotential, RHO_PAIRING

TWO_PI = 2.0 * math.pi

#: Relative gap below which eigenvalues are treated as one cluster.
CLUSTER_RTOL = 1e-7

#: Relative singular-value cutoff for geometric-multiplicity counting.
GM_RTOL = 1e-8


def free_lambda(n: int, t: float) -> float:
    """Unperturbed eigenvalue (2 pi n + |t|)^2 used as labeling reference."""
    return (TWO_PI * n + abs(t)) ** 2


def default_m(n_max: int) -> int:
    """Half-bandwidth heuristic: nearest-neighbor coupling decays fast."""
    return max(2 * n_max + 16, 32)


@dataclass
class TruncatedOperator:
    """Tridiagonal truncation of H_t on Fourier indices k = -M..M."""

    t: float
    M: int
    diag: np.ndarray
    super: complex  # couples c_{k+1} into row k
    sub: complex    # couples c_{k-1} into row k

    @property
    def size(self) -> int:
        return 2 * self.M + 1

    @property
    def ks(self) -> np.ndarray:
        return np.arange(-self.M, self.M + 1)

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.diag)) + abs(self.super) + abs(self.sub))

    def index(self, k: int) -> int:
        if abs(k) > self.M:
            raise IndexError(f"Fourier index {k} outside truncation |k|<={self.M}")
        return k + self.M

    def to_dense(self) -> np.ndarray:
        n = self.size
        a = np.zeros((n, n), dtype=complex)
        np.fill_diagonal(a, self.diag)
        if n > 1:
            a[np.arange(n - 1), np.arange(1, n)] = self.super
            a[np.arange(1, n), np.arange(n - 1)] = self.sub
        return a

    @property
    def is_hermitian(self) -> bool:
        return self.sub == np.conj(self.super)


def assemble(pot: MathieuPotential, t: float, M: int) -> TruncatedOperator:
    """Build the truncated operator; M >= 4 so the window brackets a band."""
    if M < 4:
        raise ValidationError("truncation half-bandwidth M must be >= 4")
    ks = np.arange(-M, M + 1)
    diag = (TWO_PI * ks + t).astype(float) ** 2
    return TruncatedOperator(t=float(t), M=int(M), diag=diag,
                             super=complex(pot.a), sub=complex(pot.b))


@dataclass
class EigenSolution:
    """Eigen-decomposition with residual certificates and cluster analysis.

    ``vectors[:, i]`` is the unit right eigenvector for ``lambdas[i]``;
    ``left_vectors[:, i]`` solves the conjugate-transpose problem at
    conj(lambdas[i]) and is the matching adjoint eigenfunction.
    ``deficiency_flags[i]`` marks members of clusters whose geometric
    multiplicity falls short of the cluster size.
    """

    op: TruncatedOperator
    lambdas: np.ndarray
    vectors: np.ndarray
    left_vectors: np.ndarray
    residuals: np.ndarray
    left_residuals: np.ndarray
    deficiency_flags: np.ndarray
    clusters: List[List[int]]

    @property
    def scale(self) -> float:
        return self.op.scale

    def nearest(self, lam_ref: complex) -> int:
        return int(np.argmin(np.abs(self.lambdas - lam_ref)))

    def cluster_of(self, i: int) -> List[int]:
        for cl in self.clusters:
            if i in cl:
                return cl
        return [i]

    def is_clustered(self, i: int) -> bool:
        return len(self.cluster_of(i)) > 1


def _cluster_indices(lams: np.ndarray, rtol: float) -> List[List[int]]:
    """Single-linkage grouping of eigenvalues with gaps below rtol locally.

    The gap threshold scales with the eigenvalue magnitude, not the matrix
    norm: tridiagonal eigenvalues come out far more accurately than the
    worst-case eps*||A|| bound, and a global threshold would smear whole
    near-endpoint neighborhoods into fake clusters as M grows.
    """
    n = len(lams)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    # single-linkage needs all close pairs, not just real-sorted neighbors;
    # n is small so the quadratic sweep is fine
    for ii in range(n):
        for jj in range(ii + 1, n):
            tol = rtol * (1.0 + min(abs(lams[ii]), abs(lams[jj])))
            if abs(lams[ii] - lams[jj]) < tol:
                ri, rj = find(ii), find(jj)
                if ri != rj:
                    parent[ri] = rj
    groups: Dict[int, List[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [sorted(g) for g in groups.values()]


def eig(op: TruncatedOperator) -> EigenSolution:
    """Dense non-Hermitian eigensolve with certificates.

    LAPACK's QR iteration handles the tridiagonal matrix directly; the left
    eigenvectors come out of the same factorization, so no conjugate
    matching step is needed.  Hermitian inputs (self-adjoint potential) go
    through the symmetric solver, where left = right holds exactly.
    """
    a = op.to_dense()
    scale = op.scale
    try:
        if op.is_hermitian:
            w, vr = sla.eigh(a)
            w = w.astype(complex)
            vl = vr
        else:
            w, vl, vr = sla.eig(a, left=True, right=True)
    except sla.LinAlgError as exc:
        raise ConvergenceError(
            f"eigensolver did not converge at t={op.t!r}, M={op.M}: {exc}"
        ) from exc
    res = np.linalg.norm(a @ vr - vr * w[None, :], axis=0)
    lres = np.linalg.norm(a.conj().T @ vl - vl * np.conj(w)[None, :], axis=0)
    bad = res > 1e-8 * max(scale, 1.0)
    if np.any(bad):
        raise MultipleEigenvalueError(
            f"eigensolver residual {res[bad].max():.3e} exceeds certificate "
            f"at t={op.t!r}")
    clusters = [c for c in _cluster_indices(w, CLUSTER_RTOL) if len(c) > 1]
    flags = np.zeros(len(w), dtype=bool)
    # exactly one zero coupling -> bidiagonal; repeated diagonal values then
    # have a one-dimensional eigenspace (the kernel recursion has a single
    # free parameter), which no singular-value threshold can see once the
    # Jordan chain vector norm explodes
    bidiagonal = (op.super == 0) != (op.sub == 0)
    for cl in clusters:
        if bidiagonal:
            flags[cl] = True
            continue
        mean = w[cl].mean()
        sv = np.linalg.svd(a - mean * np.eye(len(w)), compute_uv=False)
        gm = int(np.sum(sv < GM_RTOL * max(scale, 1.0)))
        if gm < len(cl):
            flags[cl] = True
    return EigenSolution(op=op, lambdas=w, vectors=vr, left_vectors=vl,
                         residuals=res, left_residuals=lres,
                         deficiency_flags=flags, clusters=clusters)


def adjoint_solution(pot: MathieuPotential, t: float, M: int) -> EigenSolution:
    """Eigen-decomposition of the adjoint family H_t(conj b, conj a)."""
    return eig(assemble(pot.adjoint(), t, M))


# --------------------------------------------------------------------------
# Bloch functions
# --------------------------------------------------------------------------

@dataclass
class BlochFunction:
    """Fourier coefficients of a normalized eigenfunction of H_t.

    ``u`` is the coefficient at k = n and ``v`` the coefficient at the
    mirror index (k = -n for the periodic family, k = -n-1 for the
    antiperiodic one); ``tail_norm`` collects the rest.
    """

    n: int
    t: float
    family: str
    ks: np.ndarray
    coeffs: np.ndarray
    lam: complex
    u: complex
    v: complex
    tail_norm: float
    residual: float

    def coeff(self, k: int) -> complex:
        i = int(k - self.ks[0])
        if i < 0 or i >= len(self.ks):
            return 0.0 + 0.0j
        return complex(self.coeffs[i])

    def evaluate(self, x) -> np.ndarray:
        """Psi(x) = sum_k c_k e^{i(2 pi k + t)x} at (an array of) x."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        freqs = TWO_PI * self.ks + self.t
        return np.exp(1j * np.outer(x, freqs)) @ self.coeffs

    def mirror_index(self) -> int:
        return -self.n if self.family == "periodic" else -self.n - 1


def _extract(n, t, family, ks, coeffs, lam, residual) -> BlochFunction:
    offset = int(ks[0])
    mirror = -n if family == "periodic" else -n - 1
    u = complex(coeffs[n - offset]) if ks[0] <= n <= ks[-1] else 0.0j
    v = complex(coeffs[mirror - offset]) if ks[0] <= mirror <= ks[-1] else 0.0j
    rest = coeffs.copy()
    if ks[0] <= n <= ks[-1]:
        rest[n - offset] = 0.0
    if ks[0] <= mirror <= ks[-1]:
        rest[mirror - offset] = 0.0
    return BlochFunction(n=n, t=float(t), family=family, ks=ks,
                         coeffs=coeffs, lam=complex(lam), u=u, v=v,
                         tail_norm=float(np.linalg.norm(rest)),
                         residual=float(residual))


def two_periodic_pair(pot: MathieuPotential, n: int, at_pi: bool,
                      M: Optional[int] = None):
    """Resolve the (near-)degenerate eigenpair at t = 0 or t = pi.

    The gauge scaling c_k -> (a/b)^{k/2} c_k equalizes the couplings to
    sqrt(ab), after which the matrix commutes with the reflection k -> -k
    (t = 0) or k -> -1-k (t = pi).  The two pair members live in opposite
    parity blocks and stay perfectly conditioned even when their eigenvalue
    splitting is far below double precision.  Requires ab != 0.

    Returns [(Psi_even, Psi*_even), (Psi_odd, Psi*_odd)].
    """
    if pot.ab == 0:
        raise MultipleEigenvalueError(
            "two-periodic pair is a Jordan block when ab = 0")
    if M is None:
        M = default_m(abs(n) + 2)
    s = cmath.sqrt(pot.a / pot.b)
    g = cmath.sqrt(pot.ab)
    if abs(math.log(abs(s))) * M > 600.0:
        raise MultipleEigenvalueError(
            "coupling ratio too extreme for the gauge-symmetrized pair")
    if at_pi:
        ks = np.arange(-M, M)       # reflection k -> -1-k needs an even count
        t = math.pi
        refl = lambda k: -1 - k
        family = "antiperiodic"
    else:
        ks = np.arange(-M, M + 1)
        t = 0.0
        refl = lambda k: -k
        family = "periodic"
    nk = len(ks)
    offset = int(ks[0])
    diag = (TWO_PI * ks + t) ** 2
    sym = np.diag(diag).astype(complex)
    sym += np.diag(np.full(nk - 1, g), 1) + np.diag(np.full(nk - 1, g), -1)

    cols_even, cols_odd = [], []
    seen = set()
    for k in ks:
        if k in seen:
            continue
        r = refl(k)
        seen.update((int(k), int(r)))
        if r == k:
            e = np.zeros(nk)
            e[k - offset] = 1.0
            cols_even.append(e)
        else:
            hi, lo = max(k, r), min(k, r)
            for sign, cols in ((1.0, cols_even), (-1.0, cols_odd)):
                e = np.zeros(nk)
                e[hi - offset] = 1.0 / math.sqrt(2.0)
                e[lo - offset] = sign / math.sqrt(2.0)
                cols.append(e)

    lam_ref = free_lambda(n, t)
    scaling = np.exp(-np.log(s) * ks)          # s^{-k}
    adj_scaling = np.exp(np.log(np.conj(s)) * ks)  # conj(s)^{k}
    dense = np.diag(diag).astype(complex)
    dense += np.diag(np.full(nk - 1, pot.a, dtype=complex), 1)
    dense += np.diag(np.full(nk - 1, pot.b, dtype=complex), -1)

    out = []
    for cols in (cols_even, cols_odd):
        basis = np.array(cols).T
        block = basis.T @ sym @ basis          # complex symmetric block
        w, vr = sla.eig(block)
        j = int(np.argmin(np.abs(w - lam_ref)))
        vfull = basis @ vr[:, j]
        psi = scaling * vfull
        psi = psi / np.linalg.norm(psi)
        psi_adj = adj_scaling * np.conj(vfull)
        psi_adj = psi_adj / np.linalg.norm(psi_adj)
        lam = complex(w[j])
        resid = float(np.linalg.norm(dense @ psi - lam * psi))
        primal = _extract(n, t, family, ks, psi, lam, resid)
        partner = _extract(n, t, family, ks, psi_adj, np.conj(lam), resid)
        out.append((primal, partner))
    return out


def bloch_function(pot: MathieuPotential, t: float, n: int,
                   family: str = "periodic", M: Optional[int] = None,
                   lambda_ref: Optional[complex] = None,
                   solution: Optional[EigenSolution] = None
                   ) -> Tuple[BlochFunction, BlochFunction]:
    """Normalized eigenfunction of band n at quasimomentum t, with partner.

    The partner is the adjoint eigenfunction for the conjugate eigenvalue.
    Raises MultipleEigenvalueError when the targeted eigenvalue sits in a
    deficient or unresolvable cluster; at exactly t = 0 or |t| = pi the
    gauge-symmetrized parity path resolves the two-periodic pair instead.
    """
    if family not in ("periodic", "antiperiodic"):
        raise ValidationError(f"unknown family {family!r}")
    if M is None:
        M = default_m(abs(n) + 2)
    sol = solution if solution is not None else eig(assemble(pot, t, M))
    if lambda_ref is None:
        lambda_ref = free_lambda(n, t)
    i = sol.nearest(lambda_ref)
    if sol.is_clustered(i):
        if sol.deficiency_flags[i]:
            raise MultipleEigenvalueError(
                f"eigenvalue near {lambda_ref:.6g} at t={t!r} is deficient")
        two_periodic = (t == 0.0 or abs(t) == math.pi) and not pot.is_free
        if two_periodic and pot.ab != 0:
            # parity blocks resolve the pair; hand even to the n >= 0 label
            pair = two_periodic_pair(pot, n, at_pi=abs(t) == math.pi, M=M)
            return pair[0] if n >= 0 else pair[1]
        raise MultipleEigenvalueError(
            f"eigenvalue near {lambda_ref:.6g} at t={t!r} is clustered "
            "(gap below the deficiency threshold)")
    ks = sol.op.ks
    primal = _extract(n, t, family, ks, sol.vectors[:, i].copy(),
                      sol.lambdas[i], sol.residuals[i])
    partner = _extract(n, t, family, ks, sol.left_vectors[:, i].copy(),
                       np.conj(sol.lambdas[i]), sol.left_residuals[i])
    return primal, partner


# --------------------------------------------------------------------------
# Curve tracking
# --------------------------------------------------------------------------

@dataclass
class BlochCurveSet:
    """Continuously numbered eigenvalue curves sampled on [0, pi].

    lambda_n(-t) = lambda_n(t) extends every curve to (-pi, pi]; accessors
    take any quasimomentum in that interval.  ``pair_labels`` records which
    labels coalesce at the two-periodic endpoints.
    """

    pot: MathieuPotential
    M: int
    t_samples: np.ndarray
    curves: Dict[int, np.ndarray]
    residuals: Dict[int, np.ndarray]
    pair_labels: dict
    ambiguities: list = field(default_factory=list)
    solutions: Optional[Dict[float, EigenSolution]] = None

    @property
    def n_values(self) -> List[int]:
        return sorted(self.curves.keys())

    def value(self, n: int, t: float) -> complex:
        """lambda_n(t) by linear interpolation of the samples."""
        tt = abs(float(t))
        arr = self.curves[n]
        re = np.interp(tt, self.t_samples, arr.real)
        im = np.interp(tt, self.t_samples, arr.imag)
        return complex(re, im)

    def symmetric_grid(self) -> np.ndarray:
        """The sample grid mirrored onto (-pi, pi]."""
        pos = self.t_samples
        neg = -pos[(pos > 0) & (pos < math.pi)][::-1]
        return np.concatenate([neg, pos])

    def rows(self):
        """(n, t, lambda, residual) over the mirrored grid, for export."""
        for n in self.n_values:
            lam = self.curves[n]
            res = self.residuals[n]
            for j in range(len(self.t_samples) - 1, 0, -1):
                if 0.0 < self.t_samples[j] < math.pi:
                    yield n, -self.t_samples[j], lam[j], res[j]
            for j in range(len(self.t_samples)):
                yield n, self.t_samples[j], lam[j], res[j]


def default_grid(t_points: int = 128) -> np.ndarray:
    """Grid on [0, pi], dyadically refined toward the pairing endpoints."""
    if t_points < 16:
        raise ValidationError("grid needs at least 16 points")
    base = np.linspace(0.0, math.pi, t_points)
    fine = math.pi * 2.0 ** (-np.arange(3, 26, dtype=float))
    grid = np.unique(np.concatenate([base, fine, math.pi - fine]))
    return grid


def _predict(prev: np.ndarray, prev2: Optional[np.ndarray],
             dt_ratio: float) -> np.ndarray:
    if prev2 is None:
        return prev
    return prev + (prev - prev2) * dt_ratio


def _assign(pred: np.ndarray, lams: np.ndarray, scale: float):
    """Minimal-total-distance assignment of predictions to eigenvalues.

    Returns (indices, margins, seps): per label the assigned eigenvalue
    index, the cost margin to the best alternative, and the distance
    between the two candidates (a tiny margin is only ambiguous when the
    candidates are genuinely far apart).
    """
    cost = np.abs(pred[:, None] - lams[None, :])
    rows, cols = linear_sum_assignment(cost)
    idx = np.empty(len(pred), dtype=int)
    idx[rows] = cols
    margins = np.empty(len(pred))
    seps = np.empty(len(pred))
    for r in range(len(pred)):
        c = idx[r]
        others = np.delete(np.arange(len(lams)), c)
        alt = others[np.argmin(cost[r, others])]
        margins[r] = cost[r, alt] - cost[r, c]
        seps[r] = abs(lams[alt] - lams[c])
    return idx, margins, seps


def track_curves(pot: MathieuPotential, t_grid: Optional[np.ndarray] = None,
                 n_range=None, M: Optional[int] = None,
                 keep_solutions: bool = False,
                 refine_cap: int = 6) -> BlochCurveSet:
    """Track continuously numbered eigenvalue curves over [0, pi].

    Labels are anchored at t = pi/2 by nearest-unperturbed matching
    (lambda_n ~ (2 pi n + pi/2)^2) and continued stepwise by minimal-sum
    assignment with linear extrapolation.  The grid refines itself where a
    matching is ambiguous, up to ``refine_cap`` rounds; leftover
    ambiguities are reported on the result rather than raised.
    """
    if n_range is None:
        n_range = range(-3, 4)
    labels = sorted(int(n) for n in n_range)
    n_max = max(abs(n) for n in labels)
    if M is None:
        M = stable_m(pot, n_max)
    if t_grid is None:
        t_grid = default_grid()
    t_grid = np.unique(np.asarray(t_grid, dtype=float))
    if t_grid[0] < 0 or t_grid[-1] > math.pi + 1e-12:
        raise ValidationError("tracking grid must lie in [0, pi]")

    cache: Dict[float, EigenSolution] = {}

    def solve(t: float) -> EigenSolution:
        if t not in cache:
            cache[t] = eig(assemble(pot, t, M))
        return cache[t]

    ambiguities: list = []
    grid = t_grid

    for _round in range(refine_cap + 1):
        grid = t_grid
        anchor_j = int(np.argmin(np.abs(grid - math.pi / 2)))
        sol = solve(grid[anchor_j])
        refs = np.array([free_lambda(n, grid[anchor_j]) for n in labels],
                        dtype=complex)
        idx, _, _ = _assign(refs, sol.lambdas, sol.scale)
        assigned = {grid[anchor_j]: idx}

        new_points: List[float] = []

        def march(js):
            prev_idx = idx
            prev_t = grid[anchor_j]
            prev2_vals = None
            prev_vals = sol.lambdas[prev_idx]
            for j in js:
                t = grid[j]
                s = solve(t)
                dt_prev = abs(t - prev_t)
                ratio = 1.0 if prev2_vals is None else dt_prev / max(
                    abs(prev_t - prev2_t), 1e-300)
                pred = _predict(prev_vals, prev2_vals, ratio)
                aidx, margins, seps = _assign(pred, s.lambdas, s.scale)
                tol = np.maximum(s.residuals[aidx], 1e-12 * s.scale)
                bad = (margins < tol) & (seps > 10.0 * tol)
                if np.any(bad) and dt_prev > 1e-9:
                    new_points.append(0.5 * (t + prev_t))
                assigned[t] = aidx
                prev2_t, prev2_vals = prev_t, prev_vals
                prev_t, prev_vals, prev_idx = t, s.lambdas[aidx], aidx

        march(range(anchor_j + 1, len(grid)))
        march(range(anchor_j - 1, -1, -1))

        if not new_points:
            break
        t_grid = np.unique(np.concatenate([grid, new_points]))

    if new_points:
        # refinement budget exhausted: report the ambiguous spots; the
        # last fully processed grid is what gets emitted
        for tmid in new_points:
            ambiguities.append({"t": float(tmid),
                                "note": "matching margin below residual"})

    curves = {n: np.empty(len(grid), dtype=complex) for n in labels}
    residuals = {n: np.empty(len(grid)) for n in labels}
    for j, t in enumerate(grid):
        s = cache[t]
        aidx = assigned[t]
        for r, n in enumerate(labels):
            curves[n][j] = s.lambdas[aidx[r]]
            residuals[n][j] = s.residuals[aidx[r]]

    pair_labels = {"zero": [], "pi": []}
    for n in labels:
        if n >= 1 and -n in curves:
            gap = abs(curves[n][0] - curves[-n][0])
            pair_labels["zero"].append(
                {"pair": [n, -n], "lambda": _c2l(curves[n][0]), "gap": float(gap)})
        if n >= 0 and (-n - 1) in curves:
            gap = abs(curves[n][-1] - curves[-n - 1][-1])
            pair_labels["pi"].append(
                {"pair": [n, -n - 1], "lambda": _c2l(curves[n][-1]),
                 "gap": float(gap)})
    pair_labels["rho"] = RHO_PAIRING

    return BlochCurveSet(pot=pot, M=M, t_samples=grid, curves=curves,
                         residuals=residuals, pair_labels=pair_labels,
                         ambiguities=ambiguities,
                         solutions=dict(cache) if keep_solutions else None)


def _c2l(z: complex) -> list:
    return [float(np.real(z)), float(np.imag(z))]


def stable_m(pot: MathieuPotential, n_max: int, t_check: float = 1.0,
             rtol: float = 1e-9, m_cap: int = 512) -> int:
    """Smallest M (from the heuristic) passing the truncation check.

    Eigenvalues in the window |lambda| <= (2 pi n_max)^2 must move by less
    than rtol*(1+|lambda|) when M grows by 10; M doubles until they do.
    """
    M = default_m(n_max)
    window = (TWO_PI * n_max) ** 2 + 1.0
    while True:
        w1 = np.asarray(sla.eigvals(assemble(pot, t_check, M).to_dense()))
        w2 = np.asarray(sla.eigvals(assemble(pot, t_check, M + 10).to_dense()))
        sel = np.abs(w1) <= window
        drift = np.array([np.min(np.abs(w2 - lam)) for lam in w1[sel]])
        if np.all(drift <= rtol * (1.0 + np.abs(w1[sel]))):
            return M
        if M >= m_cap:
            raise TrackingAmbiguityError(
                f"truncation did not stabilize below M={m_cap}")
        M *= 2


# --------------------------------------------------------------------------
# Labeled access used by the profile and expansion machinery
# --------------------------------------------------------------------------

class BandSolver:
    """Cache of labeled eigen-solutions along a set of tracked curves.

    Resolves (n, t) -> (lambda, Psi coefficients, adjoint coefficients)
    for any t in (-pi, pi], reusing one matrix factorization per distinct
    quasimomentum and the tracked curves as labeling references.
    """

    def __init__(self, pot: MathieuPotential, curves: BlochCurveSet):
        self.pot = pot
        self.curves = curves
        self.M = curves.M
        self._cache: Dict[float, EigenSolution] = {}
        if curves.solutions:
            for t, s in curves.solutions.items():
                self._cache[float(t)] = s

    def solution(self, t: float) -> EigenSolution:
        t = float(t)
        if t not in self._cache:
            self._cache[t] = eig(assemble(self.pot, t, self.M))
        return self._cache[t]

    def band_index(self, t: float, n: int) -> int:
        sol = self.solution(t)
        return sol.nearest(self.curves.value(n, t))

    def band(self, t: float, n: int):
        """(lambda, right vector, left vector, flags) for band n at t.

        flags: 'simple', 'clustered', or 'deficient'.
        """
        sol = self.solution(t)
        i = sol.nearest(self.curves.value(n, t))
        if sol.deficiency_flags[i]:
            status = "deficient"
        elif sol.is_clustered(i):
            status = "clustered"
        else:
            status = "simple"
        return sol.lambdas[i], sol.vectors[:, i], sol.left_vectors[:, i], status

    @property
    def ks(self) -> np.ndarray:
        return np.arange(-self.M, self.M + 1)
