"""Projection-norm profiles, singularity detection, and classification.

|d_n(t)| is the inner product of the band-n eigenfunction with its adjoint
partner; its reciprocal is the spectral projection norm.  Two independent
routes compute it: full Fourier coefficient inner products from the matrix
engine, and the closed Wronskian-based formula from the ODE engine.  The
classification logic combines the modulus test |a| = |b|, the Diophantine
verdict on arg(ab)/pi, and the coupling-product cases for the shape of the
spectral expansion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple, Union

import numpy as np

from . import floquet as flq
from .discriminant import (CriticalPoint, dn_via_wronskian,
                           find_critical_points, fundamental_solutions)
from .errors import (DegenerateProductError, MultipleEigenvalueError,
                     QuadratureError, SimplenessError)
from .potential import (DiophantineVerdict, MathieuPotential, alpha_of,
                        asymptotic_constants, check_diophantine,
                        snap_rational)

TWO_PI = 2.0 * math.pi

#: |ab| boundary below which every endpoint eigenvalue is provably simple.
COUPLING_SIMPLE_BOUND = 16.0 / 9.0

ELEGANT = "Elegant"
ASYMPTOTICALLY_ELEGANT = "AsymptoticallyElegant"
GASYMOV = "Gasymov"


def make_solver(pot: MathieuPotential, n_max: int,
                t_points: int = 96) -> flq.BandSolver:
    """Tracked curves + labeled eigen-solve cache for bands |n| <= n_max+1."""
    curves = flq.track_curves(
        pot, t_grid=flq.default_grid(t_points),
        n_range=range(-(n_max + 1), n_max + 2), keep_solutions=True)
    return flq.BandSolver(pot, curves)


# --------------------------------------------------------------------------
# |d_n(t)| profiles
# --------------------------------------------------------------------------

@dataclass
class ProjectionProfile:
    """Sampled |d_n(t)| with method provenance and exclusions.

    ``samples`` holds (t, |d_n(t)|, method) triples with method either
    'eigenvector' or 'wronskian'; ``excluded`` lists quasimomenta where the
    band eigenvalue was not resolvably simple.
    """

    n: int
    samples: List[Tuple[float, float, str]]
    sup_inverse: float
    excluded: List[float]
    two_term_gap: List[Tuple[float, float]] = field(default_factory=list)

    def by_method(self, method: str) -> List[Tuple[float, float]]:
        return [(t, d) for (t, d, m) in self.samples if m == method]


def _dn_eigenvector(solver: flq.BandSolver, n: int, t: float):
    """(|d|, lam, diag) via coefficient inner products; None when excluded.

    diag carries the two-term truncation gap |<c,c*> - (u u* + v v*)|.
    """
    pot = solver.pot
    if (t == 0.0 or abs(t) == math.pi):
        sol = solver.solution(t)
        i = sol.nearest(solver.curves.value(n, t))
        if sol.is_clustered(i):
            if sol.deficiency_flags[i] or pot.ab == 0:
                return None
            try:
                pair = flq.two_periodic_pair(pot, n, at_pi=abs(t) == math.pi,
                                             M=solver.M)
            except MultipleEigenvalueError:
                return None
            primal, partner = pair[0] if n >= 0 else pair[1]
            d = np.vdot(partner.coeffs, primal.coeffs)
            uu = (primal.u * np.conj(partner.u)
                  + primal.v * np.conj(partner.v))
            return abs(d), primal.lam, abs(d - uu)
    lam, v, w, status = solver.band(t, n)
    if status != "simple":
        return None
    d = np.vdot(w, v)
    ks = solver.ks
    iu = n + solver.M
    mirror = -n if abs(t) <= math.pi / 2 else -n - 1
    iv = mirror + solver.M
    uu = 0.0j
    if 0 <= iu < len(ks):
        uu += v[iu] * np.conj(w[iu])
    if 0 <= iv < len(ks):
        uu += v[iv] * np.conj(w[iv])
    return abs(d), lam, abs(d - uu)


def dn_profile(pot: MathieuPotential, n: int, t_grid,
               solver: Optional[flq.BandSolver] = None,
               wronskian_fraction: float = 0.12) -> ProjectionProfile:
    """|d_n(t)| along the grid with the ODE formula as a cross-check.

    Every grid point gets the eigenvector value; at least
    ``wronskian_fraction`` of the valid points also get the closed-formula
    value.  Unresolvable points are recorded, never raised.
    """
    if solver is None:
        solver = make_solver(pot, abs(n) + 1)
    samples: List[Tuple[float, float, str]] = []
    excluded: List[float] = []
    gaps = []
    valid_ts = []
    for t in np.asarray(t_grid, dtype=float):
        got = _dn_eigenvector(solver, n, float(t))
        if got is None:
            excluded.append(float(t))
            continue
        d, lam, gap = got
        samples.append((float(t), float(d), "eigenvector"))
        gaps.append((float(t), float(gap)))
        valid_ts.append((float(t), lam))
    stride = max(1, int(1.0 / max(wronskian_fraction, 1e-6)))
    for (t, lam) in valid_ts[::stride]:
        try:
            dw = dn_via_wronskian(pot, n, t, lam)
        except (SimplenessError, MultipleEigenvalueError):
            continue
        samples.append((t, float(dw), "wronskian"))
    inv = [1.0 / d for (_, d, m) in samples if m == "eigenvector" and d > 0]
    return ProjectionProfile(n=n, samples=samples,
                             sup_inverse=max(inv) if inv else math.inf,
                             excluded=excluded, two_term_gap=gaps)


# --------------------------------------------------------------------------
# Integrals of |d_n(t)|^-1
# --------------------------------------------------------------------------

_GLX, _GLW = np.polynomial.legendre.leggauss(8)


def _panel_edges(lo: float, hi: float, refine_lo: bool, refine_hi: bool,
                 depth: int) -> np.ndarray:
    base = np.linspace(lo, hi, 9)
    edges = [base]
    w = hi - lo
    if refine_lo:
        edges.append(lo + w * 0.5 ** np.arange(4, depth))
    if refine_hi:
        edges.append(hi - w * 0.5 ** np.arange(4, depth))
    return np.unique(np.concatenate(edges))


def _integrate_segments(f, segments, depth: int):
    """(integral, trouble) where trouble lists nodes with non-finite f."""
    total = 0.0
    trouble = []
    for (lo, hi, ref_lo, ref_hi) in segments:
        if hi <= lo:
            continue
        edges = _panel_edges(lo, hi, ref_lo, ref_hi, depth)
        for e0, e1 in zip(edges[:-1], edges[1:]):
            half = 0.5 * (e1 - e0)
            mid = 0.5 * (e0 + e1)
            xs = mid + half * _GLX
            vals = np.array([f(x) for x in xs])
            if not np.all(np.isfinite(vals)):
                trouble.extend(float(x) for x, v in zip(xs, vals)
                               if not math.isfinite(v))
                continue
            total += half * float(np.sum(_GLW * vals))
    return total, trouble


@dataclass
class InverseIntegral:
    """Integral of |d_n|^-1 with the shrinking-exclusion divergence scan."""

    value: float
    divergence_flag: bool
    sequence: List[Tuple[float, float]]
    excluded: List[float]


def integral_inverse_dn(pot: MathieuPotential, n: int,
                        interval: Tuple[float, float],
                        epsilon_floor: float = 1e-6,
                        solver: Optional[flq.BandSolver] = None,
                        depth: int = 14) -> InverseIntegral:
    """Adaptive quadrature of |d_n(t)|^-1 excluding trouble neighborhoods.

    Excluded points (simpleness failures) are located by a coarse scan;
    the integral is evaluated for the shrinking exclusion radii 10^-2 ..
    epsilon_floor and flagged divergent when it keeps growing by >= 25%
    per decade without saturating.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not (-math.pi <= lo < hi <= math.pi):
        raise QuadratureError("interval must sit inside (-pi, pi]")
    if solver is None:
        solver = make_solver(pot, abs(n) + 1)

    cache = {}

    def inv_d(t: float) -> float:
        key = round(t, 15)
        if key not in cache:
            got = _dn_eigenvector(solver, n, t)
            cache[key] = math.inf if got is None or got[0] == 0 else 1.0 / got[0]
        return cache[key]

    scan = np.linspace(lo, hi, 65)
    excluded = [float(t) for t in scan if not math.isfinite(inv_d(float(t)))]
    # endpoint trouble shows up as a blow-up even when the scan misses it
    for endpoint in (lo, hi):
        if endpoint not in excluded and not math.isfinite(inv_d(endpoint)):
            excluded.append(endpoint)
    excluded = sorted(set(excluded))

    ks = [k for k in range(2, 7) if 10.0 ** -k >= epsilon_floor]
    if not ks or 10.0 ** -ks[-1] > epsilon_floor:
        ks.append(-int(round(math.log10(epsilon_floor))))
    seq = []
    for k in sorted(set(ks)):
        eps = 10.0 ** -k
        for _attempt in range(4):
            segments = _exclude(lo, hi, excluded, eps)
            val, bad = _integrate_segments(inv_d, segments, depth)
            if not bad:
                break
            # the coarse scan missed a trouble spot; exclude it and retry
            excluded = sorted(set(excluded) | set(bad))
        else:
            raise QuadratureError("exclusion scan kept finding new "
                                  "non-simple points", trace=excluded)
        check, bad = _integrate_segments(inv_d, segments, depth + 2)
        if bad or abs(check - val) > 0.05 * (abs(check) + 1e-12):
            raise QuadratureError("quadrature did not settle",
                                  trace=[(depth, val), (depth + 2, check)])
        seq.append((eps, check))
    growth_ok = len(seq) >= 2 and all(
        b >= 1.25 * a for (_, a), (_, b) in zip(seq[:-1], seq[1:]))
    diverging = bool(excluded) and growth_ok
    return InverseIntegral(value=seq[-1][1], divergence_flag=diverging,
                           sequence=seq, excluded=excluded)


def _exclude(lo, hi, pts, eps):
    """Subtract eps-neighborhoods of pts from [lo, hi]; tag refined ends."""
    segments = []
    cur = lo
    cur_ref = False
    for p in pts:
        a, b = p - eps, p + eps
        if b <= lo or a >= hi:
            continue
        if a > cur:
            segments.append((cur, a, cur_ref, True))
        cur = max(cur, b)
        cur_ref = True
    if cur < hi:
        segments.append((cur, hi, cur_ref, False))
    return segments


# --------------------------------------------------------------------------
# Singularities and essential spectral singularities
# --------------------------------------------------------------------------

@dataclass
class EssRecord:
    """A confirmed essential spectral singularity with its evidence."""

    point: CriticalPoint
    geometric_multiplicity: int
    cluster_size: int
    divergence_flag: Optional[bool]
    band_guess: int

    def to_dict(self) -> dict:
        d = self.point.to_dict()
        d.update({"geometric_multiplicity": self.geometric_multiplicity,
                  "cluster_size": self.cluster_size,
                  "divergence_flag": self.divergence_flag})
        return d


def detect_singularities(pot: MathieuPotential, window: Tuple[float, float],
                         solver: Optional[flq.BandSolver] = None,
                         run_integrals: bool = True,
                         im_halfwidth: float = 6.0):
    """Spectral singularities and ESS inside the window.

    Critical points with real quasimomentum are the candidates.  The
    two-periodic ones are cross-checked against the endpoint matrix
    spectra: a candidate with no matching eigenvalue cluster there is
    re-classified interior; clustered ones get the geometric-multiplicity
    verdict, and deficient ones become ESS once the local integral of
    |d_n|^-1 is seen to diverge.

    Returns (singularities, ess_records).
    """
    cps = find_critical_points(pot, window, im_halfwidth=im_halfwidth)
    singular: List[CriticalPoint] = []
    ess: List[EssRecord] = []
    n_hint = max(2, int(math.sqrt(max(window[1], 1.0)) / TWO_PI) + 1)
    if solver is None and run_integrals:
        solver = make_solver(pot, n_hint)
    endpoint_cache = {}

    def endpoint_solution(at_pi: bool):
        if at_pi not in endpoint_cache:
            M = flq.default_m(n_hint + 2)
            endpoint_cache[at_pi] = flq.eig(
                flq.assemble(pot, math.pi if at_pi else 0.0, M))
        return endpoint_cache[at_pi]

    for cp in cps:
        # A genuinely complex t* has Im t* >> the measurement noise, which
        # is the F-error amplified by 1/|sin t*| (or its square root when
        # t* is next to an endpoint).  Narrow spectral gaps poke past
        # |F| = 2 by tiny amounts, so a flat threshold cannot work.
        est = fundamental_solutions(pot, cp.lambda_star).est_error
        sin_mag = abs(np.sin(cp.t_star))
        noise = 5.0 * est / max(sin_mag, math.sqrt(est))
        if abs(cp.t_star.imag) > max(1e-8, noise):
            continue  # complex quasimomentum: the point is off the spectrum
        if cp.is_two_periodic:
            at_pi = cp.family == "antiperiodic"
            sol = endpoint_solution(at_pi)
            i = sol.nearest(cp.lambda_star)
            cluster = sol.cluster_of(i)
            if len(cluster) < 2 or \
                    abs(sol.lambdas[i] - cp.lambda_star) > 1e-5 * (
                        1.0 + abs(cp.lambda_star)):
                # endpoint spectrum shows no double there: interior point
                cp.is_two_periodic = False
                cp.family = "interior"
                singular.append(cp)
                continue
            deficient = bool(sol.deficiency_flags[i])
            gm = 1 if deficient else len(cluster)
            if not deficient:
                continue  # semisimple double: projections stay bounded
            singular.append(cp)
            # a multiple two-periodic eigenvalue with a one-dimensional
            # eigenspace is an ESS; the local integral divergence is only
            # recorded as evidence because its mass scales with the
            # (factorially small) Jordan coupling and saturates at any
            # reachable exclusion radius once the band index grows
            div_flag = None
            if run_integrals:
                t0 = math.pi if at_pi else 0.0
                band = abs(cp.n_guess)
                span = (max(t0 - 0.05, 0.0), t0) if at_pi else (0.0, 0.05)
                try:
                    result = integral_inverse_dn(pot, band, span,
                                                 solver=solver)
                    div_flag = result.divergence_flag
                except QuadratureError:
                    div_flag = None
            ess.append(EssRecord(point=cp, geometric_multiplicity=gm,
                                 cluster_size=len(cluster),
                                 divergence_flag=div_flag,
                                 band_guess=cp.n_guess))
        else:
            singular.append(cp)
    return singular, ess


# --------------------------------------------------------------------------
# Quasimomentum region decomposition near t = 0
# --------------------------------------------------------------------------

@dataclass
class RegionDecomposition:
    """The five scaled windows partitioning [0, n^-3] for band n.

    Boundaries come from eps_n = sqrt(|alpha_n beta_n|) and |beta_n| mapped
    through t = (window value) / (4 pi n).  I4 collapses when the moduli
    are equal and 5/4 eps_n exceeds |beta_n|.
    """

    n: int
    i1: Tuple[float, float]
    i2: Tuple[float, float]
    i3: Tuple[float, float]
    i4: Tuple[float, float]
    i5: Tuple[float, float]
    notices: List[str] = field(default_factory=list)


def region_decomposition(pot: MathieuPotential, n: int) -> RegionDecomposition:
    if n < 2:
        raise ValueError("region decomposition needs n >= 2")
    if pot.is_free:
        raise DegenerateProductError("epsilon undefined for the free operator")
    consts = asymptotic_constants(pot, n)
    notices = []
    eps = consts.epsilon_n
    eps_val = 0.0 if eps.is_zero else math.exp(eps.log_magnitude) \
        if eps.log_magnitude > -700 else 0.0
    if eps_val == 0.0 and not eps.is_zero:
        notices.append("epsilon underflows double precision; inner regions collapse")
    if eps.is_zero:
        notices.append("epsilon is exactly zero (one coupling vanishes)")
    beta_mag = 0.0 if consts.beta_n.is_zero else (
        math.exp(consts.beta_n.log_magnitude)
        if consts.beta_n.log_magnitude > -700 else 0.0)
    denom = 4.0 * math.pi * n
    top = n ** -3.0
    t_q1 = min(0.25 * eps_val / denom, top)
    t_q2 = min(1.25 * eps_val / denom, top)
    t_beta = min(beta_mag / denom, top)
    if t_beta < t_q2:
        t_beta = t_q2
        notices.append("I4 collapses: 5/4 eps exceeds |beta|")
    return RegionDecomposition(
        n=n,
        i1=(0.0, t_q1),
        i2=(t_q1, t_q2),
        i3=(t_q2, top),
        i4=(t_q2, t_beta),
        i5=(t_beta, top),
        notices=notices)


# --------------------------------------------------------------------------
# Classification
# --------------------------------------------------------------------------

@dataclass
class SpectralityReport:
    """Classification record serialized with stable field names."""

    modulus_equal: bool
    diophantine: Optional[DiophantineVerdict]
    asymptotically_spectral: str
    singularities: List[CriticalPoint]
    ess: List[EssRecord]
    ess_at_infinity: str
    expansion_form: str
    alpha: Optional[float] = None
    alpha_exact: Optional[Fraction] = None
    notes: List[str] = field(default_factory=list)
    ess_at_infinity_evidence: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "modulus_equal": bool(self.modulus_equal),
            "diophantine": self.diophantine.to_dict() if self.diophantine else None,
            "asymptotically_spectral": self.asymptotically_spectral,
            "singularities": [c.to_dict() for c in self.singularities],
            "ess": [e.to_dict() for e in self.ess],
            "ess_at_infinity": self.ess_at_infinity,
            "expansion_form": self.expansion_form,
            "alpha": self.alpha,
            "alpha_exact": (str(self.alpha_exact)
                            if self.alpha_exact is not None else None),
            "notes": list(self.notes),
            "ess_at_infinity_evidence": self.ess_at_infinity_evidence,
        }


def classify_operator(pot: MathieuPotential,
                      alpha_input: Union[Fraction, float, None] = None,
                      singularity_window: Optional[Tuple[float, float]] = None,
                      ess_scan_nmax: int = 0,
                      diophantine_bound: int = 100_000) -> SpectralityReport:
    """Spectrality verdicts and the expansion-form label for (a, b).

    The asymptotic-spectrality conjunction needs |a| = |b| plus the
    odd-integer-avoidance condition on arg(ab)/pi.  The expansion form is
    decided by the coupling product alone: zero product -> endpoint-paired
    form, small product -> term-by-term form, otherwise the grouped form.
    Singularity detection and the bounded-n integral evidence only run
    when a window / scan depth is requested.
    """
    a_mag, b_mag = abs(pot.a), abs(pot.b)
    modulus_equal = math.isclose(a_mag, b_mag, rel_tol=1e-12, abs_tol=1e-300)
    notes: List[str] = []
    alpha_val: Optional[float] = None
    alpha_exact: Optional[Fraction] = None
    verdict: Optional[DiophantineVerdict] = None

    if pot.is_free:
        notes.append("free operator: self-adjoint, all projections orthogonal")
        report = SpectralityReport(
            modulus_equal=True, diophantine=None,
            asymptotically_spectral="holds",
            singularities=[], ess=[], ess_at_infinity="fails",
            expansion_form=GASYMOV,
            notes=notes + ["coupling product is zero, so the endpoint-paired "
                           "form is emitted even though the plain expansion "
                           "already converges"])
        return report

    if pot.ab != 0:
        if alpha_input is None:
            alpha_val = alpha_of(pot)
            alpha_exact = snap_rational(alpha_val)
        elif isinstance(alpha_input, Fraction):
            alpha_exact = alpha_input
            alpha_val = float(alpha_input)
        else:
            alpha_val = float(alpha_input)
        verdict = check_diophantine(
            alpha_exact if alpha_exact is not None else alpha_val,
            search_bound=diophantine_bound)

    if not modulus_equal:
        spectral = "fails"
        notes.append("modulus test fails: projection norms grow like |b/a|^n")
    elif verdict is None:
        spectral = "fails"
        notes.append("one coupling vanishes: endpoint doubles force blow-up")
    elif verdict.condition8 == "holds":
        spectral = "holds"
    elif verdict.condition8 == "fails":
        spectral = "fails"
    else:
        spectral = "undecided-float"

    ab = pot.ab
    if ab == 0:
        form = GASYMOV
    elif abs(ab) < COUPLING_SIMPLE_BOUND:
        form = ELEGANT
    else:
        form = ASYMPTOTICALLY_ELEGANT

    if ab != 0 and ab.imag == 0:
        if pot.is_self_adjoint:
            notes.append("self-adjoint potential: spectral operator")
        else:
            notes.append("real coupling product without self-adjointness: "
                         "not a spectral operator")

    singular: List[CriticalPoint] = []
    ess: List[EssRecord] = []
    if singularity_window is not None:
        singular, ess = detect_singularities(pot, singularity_window)

    evidence = {}
    if ab == 0:
        ess_inf = "holds"
    else:
        ess_inf = "fails"
        if ess_scan_nmax >= 1:
            solver = make_solver(pot, ess_scan_nmax + 1)
            vals = {}
            for n in range(1, ess_scan_nmax + 1):
                res = integral_inverse_dn(pot, n, (-math.pi + 1e-9, math.pi),
                                          solver=solver)
                vals[n] = res.value
                if res.divergence_flag:
                    ess_inf = "undecided"
            evidence = {"full_interval_integrals": vals}

    return SpectralityReport(
        modulus_equal=modulus_equal, diophantine=verdict,
        asymptotically_spectral=spectral, singularities=singular, ess=ess,
        ess_at_infinity=ess_inf, expansion_form=form,
        alpha=alpha_val, alpha_exact=alpha_exact, notes=notes,
        ess_at_infinity_evidence=evidence)
