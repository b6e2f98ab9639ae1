"""Weighted operator p-norms, measured growth/decay rates, and the
admissible-exponent calculus.

Induced p->p norms between weighted spaces are exact at p in {1, 2, inf}
and bracketed elsewhere: a nonlinear power iteration gives a certified
lower bound, interpolation between the exact endpoints gives the upper
bound.  From the measured 1->1 growth rate alpha and the 2->2 decay rate
tau (the spectral gap) the module derives the critical exponents, the
admissible interval (p1, p2) around 2, and the decay rate gamma(p) of the
semigroup on the complement of the harmonic space.
"""

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .complexes import (
    Cochain,
    OperatorMatrix,
    SimplicialComplex,
    coboundary,
    codifferential,
    lp_norm,
)
from .spectral import SpectralData, harmonic_projector, laplacian_spectrum


def conjugate_exponent(p):
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1)


def _entries(T) -> np.ndarray:
    return T.entries if isinstance(T, OperatorMatrix) else np.asarray(T, dtype=float)


def _weight_pair(A, w_dom, w_cod):
    w_dom = np.ones(A.shape[1]) if w_dom is None else np.asarray(w_dom, dtype=float)
    w_cod = np.ones(A.shape[0]) if w_cod is None else np.asarray(w_cod, dtype=float)
    return w_dom, w_cod


def opnorm_exact_extremes(T, p, w_dom=None, w_cod=None) -> float:
    """Exact induced norm between weighted l^p spaces at p = 1 or p = inf.

    p = 1 is the largest weighted column sum of W_cod T W_dom^-1; p = inf
    is the largest absolute row sum (weights drop out of sup norms).  The
    two are exactly dual under the weighted adjoint.
    """
    A = _entries(T)
    w_dom, w_cod = _weight_pair(A, w_dom, w_cod)
    if min(A.shape) == 0:
        return 0.0
    p = float(p)
    if p == 1.0:
        B = (np.abs(A) * w_cod[:, None]) / w_dom[None, :]
        return float(B.sum(axis=0).max())
    if math.isinf(p):
        return float(np.abs(A).sum(axis=1).max())
    raise ValueError(f"exact extremes cover p in {{1, inf}} only, got {p}; use the power method")


def _pnorm(x: np.ndarray, p: float) -> float:
    if math.isinf(p):
        return float(np.max(np.abs(x))) if x.size else 0.0
    return float(np.sum(np.abs(x) ** p) ** (1.0 / p))


def _dual_vector(y: np.ndarray, p: float) -> np.ndarray:
    """Unit-q-norm vector pairing to |y|_p (q the conjugate of p)."""
    norm = _pnorm(y, p)
    if norm == 0.0:
        return np.zeros_like(y)
    return np.sign(y) * (np.abs(y) / norm) ** (p - 1.0)


def opnorm_power_method(T, p, w_dom=None, w_cod=None, iters: int = 64,
                        seed: int = 0) -> float:
    """Certified lower bound on the weighted p->p norm, 1 < p < inf.

    Nonlinear power iteration on the p-norm functional of the similarity
    transform W_cod^(1/p) T W_dom^(-1/p).  Every iterate evaluates
    |Bx|_p / |x|_p, so the running maximum is a valid lower bound that is
    nondecreasing in the iteration budget and deterministic for a seed.
    """
    p = float(p)
    if not 1.0 < p < math.inf:
        raise ValueError(f"power method needs 1 < p < inf, got {p}")
    A = _entries(T)
    w_dom, w_cod = _weight_pair(A, w_dom, w_cod)
    if min(A.shape) == 0:
        return 0.0
    B = (A * w_cod[:, None] ** (1.0 / p)) / (w_dom[None, :] ** (1.0 / p))
    q = p / (p - 1.0)

    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, size=B.shape[1])
    if _pnorm(x, p) == 0.0:
        x = np.ones(B.shape[1])
    x /= _pnorm(x, p)

    best = 0.0
    for _ in range(iters):
        y = B @ x
        best = max(best, _pnorm(y, p))
        if best == 0.0:
            break
        z = B.T @ _dual_vector(y, p)
        if _pnorm(z, q) <= float(z @ x) * (1.0 + 1e-12):
            break
        x = _dual_vector(z, q)
    return best


def riesz_thorin_bound(M0, p0, M1, p1, theta):
    """Interpolated exponent and norm bound between two p->p estimates.

    1/p = (1-theta)/p0 + theta/p1 and the bound is M0^(1-theta) M1^theta.
    Exact-arithmetic inputs (fractions) keep the exponent exact.
    """
    if not 0 < theta < 1:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    if p0 == p1:
        raise ValueError("endpoints must differ")
    for pe in (p0, p1):
        if not (pe == math.inf or pe >= 1):
            raise ValueError(f"exponent {pe} out of [1, inf]")
    if M0 <= 0 or M1 <= 0:
        raise ValueError("endpoint norms must be positive")
    inv = (0 if p0 == math.inf else (1 - theta) / p0) + (0 if p1 == math.inf else theta / p1)
    p = math.inf if inv == 0 else 1 / inv
    bound = M0 ** (1 - theta) * M1 ** theta
    return p, bound


def opnorm_bracket(T, p, w_dom=None, w_cod=None, iters: int = 64,
                   seed: int = 0) -> tuple[float, float]:
    """(lower, upper) bracket on the weighted p->p norm.

    Exact at p in {1, 2, inf}; otherwise the power method supplies the
    lower bound and interpolation from the exact endpoints {1, 2} or
    {2, inf} the upper bound.
    """
    A = _entries(T)
    w_dom, w_cod = _weight_pair(A, w_dom, w_cod)
    p = float(p)
    if p == 1.0 or math.isinf(p):
        exact = opnorm_exact_extremes(A, p, w_dom, w_cod)
        return exact, exact
    if p == 2.0:
        exact = _opnorm2(A, w_dom, w_cod)
        return exact, exact
    lower = opnorm_power_method(A, p, w_dom, w_cod, iters=iters, seed=seed)
    m2 = _opnorm2(A, w_dom, w_cod)
    if p < 2.0:
        m1 = opnorm_exact_extremes(A, 1, w_dom, w_cod)
        theta = 2.0 - 2.0 / p  # solves 1/p = (1-theta)/1 + theta/2
        upper = 0.0 if m1 == 0.0 or m2 == 0.0 else m1 ** (1 - theta) * m2 ** theta
    else:
        mi = opnorm_exact_extremes(A, math.inf, w_dom, w_cod)
        theta = 1.0 - 2.0 / p  # solves 1/p = (1-theta)/2
        upper = 0.0 if mi == 0.0 or m2 == 0.0 else m2 ** (1 - theta) * mi ** theta
    return lower, upper


def _opnorm2(A: np.ndarray, w_dom: np.ndarray, w_cod: np.ndarray) -> float:
    if min(A.shape) == 0:
        return 0.0
    B = (A * np.sqrt(w_cod)[:, None]) / np.sqrt(w_dom)[None, :]
    return float(np.linalg.svd(B, compute_uv=False)[0])


@dataclass
class AlphaFit:
    """Log-linear fit of the exact 1->1 heat norms over a time grid.

    ``alpha`` is the least-squares slope clamped at 0, ``c1`` the fitted
    intercept, and ``envelope_c1`` the smallest constant whose envelope
    c * exp(alpha t) dominates every measured norm on the grid.
    """

    alpha: float
    c1: float
    envelope_c1: float
    residual: float
    t_grid: tuple
    norms: tuple


def measure_alpha(K: SimplicialComplex, ell: int, t_grid,
                  spectral: SpectralData | None = None,
                  complement: bool = False) -> AlphaFit:
    """Growth rate of the heat semigroup on the weighted l^1 space.

    Evaluates the exact 1->1 norm of P_t (or of P_t (1-H) when
    ``complement`` is set) on the grid and fits log-norm against t.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.size < 3 or np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise ValueError("degenerate grid: need >= 3 positive increasing times")
    s = spectral if spectral is not None else laplacian_spectrum(K, ell)
    w = s.weights
    norms = []
    for ti in t:
        if complement:
            M = s.function_matrix(lambda lam: np.exp(-ti * lam) * (lam > 0))
        else:
            M = s.function_matrix(lambda lam: np.exp(-ti * lam))
        norms.append(opnorm_exact_extremes(M, 1, w, w))
    norms = np.asarray(norms)
    logs = np.log(np.maximum(norms, 1e-300))
    slope, intercept = np.polyfit(t, logs, 1)
    residual = float(np.sqrt(np.mean((logs - (slope * t + intercept)) ** 2)))
    # Clamp at 0 from below and snap slopes inside double-precision
    # measurement noise to an exact 0.
    alpha = float(slope) if slope > 1e-12 else 0.0
    envelope = float(np.max(norms * np.exp(-alpha * t)))
    return AlphaFit(alpha, float(np.exp(intercept)), envelope, residual,
                    tuple(map(float, t)), tuple(map(float, norms)))


def measure_tau(s: SpectralData) -> float:
    """Exact 2->2 decay rate on the complement of the harmonic space.

    Equals the spectral gap; in finite dimension the decay inequality is
    an equality with constant 1.
    """
    if s.gap <= 0:
        raise ValueError("decay rate needs a positive gap")
    return s.gap


def admissible_interval(alpha, tau, epsilon=0):
    """Admissible exponent interval (p1, p2) around 2.

    p1 = 2(alpha + tau + epsilon) / (alpha + 2 tau) and p2 is its
    conjugate; epsilon = 0 gives the critical exponent q0.  Requires
    epsilon < tau so that p1 stays below 2.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    if not 0 <= epsilon < tau:
        raise ValueError("epsilon must satisfy 0 <= epsilon < tau")
    p1 = 2 * (alpha + tau + epsilon) / (alpha + 2 * tau)
    p2 = math.inf if p1 == 1 else p1 / (p1 - 1)
    return p1, p2


def decay_rate(alpha, tau, p):
    """Decay rate gamma(p) of the semigroup on the harmonic complement.

    theta = 2/p' below 2 and 2/p above (the complement semigroup is
    self-adjoint, so the two sides mirror); gamma(p) = theta tau -
    (1-theta) alpha is positive exactly inside the epsilon = 0 interval
    and equals tau at p = 2.
    """
    if not 1 < p < math.inf:
        raise ValueError(f"decay rate needs 1 < p < inf, got {p}")
    theta = 2 * (1 - 1 / p) if p <= 2 else 2 / p
    return theta * tau - alpha * (1 - theta)


def projector_norm_profile(K: SimplicialComplex, ell: int, p_grid,
                           spectral: SpectralData | None = None,
                           iters: int = 64, seed: int = 0) -> list[dict]:
    """Brackets on the p->p norms of the harmonic projector."""
    s = spectral if spectral is not None else laplacian_spectrum(K, ell)
    H = harmonic_projector(s).entries
    w = s.weights
    rows = []
    for p in p_grid:
        lower, upper = opnorm_bracket(H, p, w, w, iters=iters, seed=seed)
        rows.append({"p": float(p), "lower": lower, "upper": upper})
    return rows


def _vertex_components_and_distances(K: SimplicialComplex):
    """BFS over the 1-skeleton: component id and pairwise hop distances."""
    ids = [v for (v,) in K.simplices[0]]
    pos = {v: i for i, v in enumerate(ids)}
    adj = K.vertex_adjacency()
    n = len(ids)
    dist = np.full((n, n), np.inf)
    component = {}
    comp_id = 0
    for start in ids:
        if start in component:
            continue
        queue = deque([start])
        component[start] = comp_id
        dist[pos[start], pos[start]] = 0
        while queue:
            u = queue.popleft()
            for nb in adj[u]:
                if nb not in component:
                    component[nb] = comp_id
                    queue.append(nb)
        comp_id += 1
    for start in ids:
        i = pos[start]
        dist[i, i] = 0
        queue = deque([start])
        seen = {start}
        while queue:
            u = queue.popleft()
            for nb in adj[u]:
                if nb not in seen:
                    seen.add(nb)
                    dist[i, pos[nb]] = dist[i, pos[u]] + 1
                    queue.append(nb)
    return ids, pos, component, dist


@dataclass
class KernelDecayFit:
    """Off-diagonal decay of Laplacian * P_(t0/4) against graph distance."""

    rho: float | None
    residual: float | None
    t0: float
    degenerate: bool
    component_fits: list
    bins: list  # (distance, max |entry|) over the whole complex


def kernel_decay_fit(K: SimplicialComplex, ell: int, t0: float,
                     spectral: SpectralData | None = None) -> KernelDecayFit:
    """Fit exp(-2 rho / t0 * distance) to the entries of Laplacian P_(t0/4).

    Distance between two ell-simplices is the smallest 1-skeleton hop
    distance between their vertex sets.  Disconnected complexes are fitted
    per component (entries across components vanish identically); the
    reported rho is the most conservative component value.
    """
    if t0 <= 0:
        raise ValueError("t0 must be positive")
    s = spectral if spectral is not None else laplacian_spectrum(K, ell)
    M = s.function_matrix(lambda lam: lam * np.exp(-lam * t0 / 4.0))

    _, pos, component, vdist = _vertex_components_and_distances(K)
    simplices = K.simplices[ell]
    n = len(simplices)
    comp_of = [component[sigma[0]] for sigma in simplices]
    sdist = np.zeros((n, n))
    for i, si in enumerate(simplices):
        for j, sj in enumerate(simplices):
            if comp_of[i] != comp_of[j]:
                sdist[i, j] = np.inf
                continue
            sdist[i, j] = min(vdist[pos[u], pos[v]] for u in si for v in sj)

    fits = []
    for cid in sorted(set(comp_of)):
        members = [i for i, c in enumerate(comp_of) if c == cid]
        bins: dict[int, float] = {}
        for i in members:
            for j in members:
                d = int(sdist[i, j])
                mag = abs(M[i, j])
                bins[d] = max(bins.get(d, 0.0), mag)
        usable = sorted((d, m) for d, m in bins.items() if m > 1e-250)
        if len(usable) < 2:
            continue
        ds = np.array([d for d, _ in usable], dtype=float)
        logs = np.log([m for _, m in usable])
        slope, intercept = np.polyfit(ds, logs, 1)
        residual = float(np.sqrt(np.mean((logs - (slope * ds + intercept)) ** 2)))
        fits.append({
            "component": cid,
            "rho": float(-slope * t0 / 2.0),
            "residual": residual,
            "bins": [(int(d), float(m)) for d, m in usable],
        })

    all_bins: dict[int, float] = {}
    for i in range(n):
        for j in range(n):
            if np.isfinite(sdist[i, j]):
                d = int(sdist[i, j])
                all_bins[d] = max(all_bins.get(d, 0.0), abs(M[i, j]))
    bins_sorted = sorted(all_bins.items())

    if not fits:
        return KernelDecayFit(None, None, t0, True, [], bins_sorted)
    best = min(fits, key=lambda f: f["rho"])
    return KernelDecayFit(best["rho"], best["residual"], t0, False, fits, bins_sorted)


@dataclass
class VolumeGrowthFit:
    """Smallest gamma with ball volumes <= c * exp(gamma * r) everywhere."""

    gamma_vol: float
    c: float
    max_radius: int


def volume_growth_fit(K: SimplicialComplex) -> VolumeGrowthFit:
    """Exponential envelope of vertex-ball volumes by breadth-first search.

    Ball volume is the sum of vertex weights within hop distance r.  The
    constant c is pinned to the largest r = 0 ball, and gamma_vol is the
    smallest rate whose envelope dominates every center and radius.
    """
    ids, pos, _, vdist = _vertex_components_and_distances(K)
    w0 = K.weight_vector(0)
    c = float(np.max(w0))
    gamma = 0.0
    max_radius = 0
    for v in ids:
        i = pos[v]
        finite = vdist[i][np.isfinite(vdist[i])]
        radius = int(finite.max())
        max_radius = max(max_radius, radius)
        for r in range(1, radius + 1):
            vol = float(np.sum(w0[vdist[i] <= r]))
            gamma = max(gamma, math.log(vol / c) / r)
    return VolumeGrowthFit(gamma, c, max_radius)


def select_t0(rho: float, gamma_vol: float) -> float:
    """Pick t0 with (gamma_vol / 2 rho) * t0 = 1/2 < 1 (or 1 when flat)."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    if gamma_vol < 0:
        raise ValueError("gamma_vol must be nonnegative")
    return rho / gamma_vol if gamma_vol > 0 else 1.0


@dataclass
class GaffneyReport:
    max_ratio: float
    upper_bound_2: float
    p: float
    gamma_shift: float
    n_samples: int


def gaffney_constant(K: SimplicialComplex, ell: int, gamma_shift: float,
                     p=2, n_samples: int = 50, seed: int = 0,
                     spectral: SpectralData | None = None) -> GaffneyReport:
    """Sampled constant in |d w|_p + |delta w|_p <= c |(Lap+gamma)^(1/2) w|_p.

    Returns the largest observed ratio over seeded random cochains.  At
    p = 2 the Pythagorean identity |dw|^2 + |delta w|^2 = <Lap w, w> gives
    the exact spectral bound sqrt(2 lam_max / (lam_max + gamma)) <= sqrt 2,
    reported alongside.
    """
    if gamma_shift <= 0:
        raise ValueError("shift must be positive")
    s = spectral if spectral is not None else laplacian_spectrum(K, ell)
    d_mat = coboundary(K, ell).entries if ell < K.max_degree else None
    delta_mat = codifferential(K, ell).entries if ell >= 1 else None
    rng = np.random.default_rng(seed)
    max_ratio = 0.0
    for _ in range(n_samples):
        v = rng.uniform(-1.0, 1.0, size=K.n_simplices(ell))
        num = 0.0
        if d_mat is not None:
            num += lp_norm(K, Cochain(ell + 1, d_mat @ v), p)
        if delta_mat is not None:
            num += lp_norm(K, Cochain(ell - 1, delta_mat @ v), p)
        den_vals = s.apply_function(lambda lam: np.sqrt(lam + gamma_shift), v)
        den = lp_norm(K, Cochain(ell, den_vals), p)
        if den > 0:
            max_ratio = max(max_ratio, num / den)
    lam_max = float(s.eigenvalues[-1]) if s.dim else 0.0
    bound = math.sqrt(2.0 * lam_max / (lam_max + gamma_shift)) if lam_max > 0 else 0.0
    return GaffneyReport(max_ratio, bound, float(p), gamma_shift, n_samples)


def dimension_consistency(K: SimplicialComplex, p_list=()) -> list[dict]:
    """Spectral kernel dimension vs. rank-oracle Betti number, per degree.

    Also checks that every kernel basis cochain has a finite norm in each
    requested p and that the decomposition returns it unchanged as its
    harmonic part.
    """
    from .complexes import betti_numbers
    from .decomposition import decompose  # deferred: decomposition imports this module

    betti = betti_numbers(K)
    rows = []
    for ell in range(K.max_degree + 1):
        s = laplacian_spectrum(K, ell)
        kernel = s.kernel_basis()
        finite = True
        projector_residual = 0.0
        for i in range(s.kernel_dim):
            v = Cochain(ell, kernel[:, i])
            for p in p_list:
                finite = finite and math.isfinite(lp_norm(K, v, p))
            dec = decompose(K, ell, v, spectral=s)
            defect = s.norm2(dec.omega3.values - v.values) / max(s.norm2(v.values), 1e-300)
            projector_residual = max(projector_residual, defect)
        equal = s.kernel_dim == betti[ell]
        rows.append({
            "degree": ell,
            "spectral_dim": s.kernel_dim,
            "betti": betti[ell],
            "equal": equal,
            "pnorms_finite": finite,
            "projector_residual": projector_residual,
            "ok": equal and finite and projector_residual <= 1e-8,
        })
    return rows


@dataclass
class InterpolationReport:
    """Measured rates and the derived exponent calculus for one degree."""

    degree: int
    alpha: float
    c1: float
    alpha_residual: float
    tau: float
    epsilon: float
    q0: float
    q_eps: float
    p1: float
    p2: float
    gamma_of_p: list
    profile: list  # rows (p, projector lower, projector upper, gamma)
    rho: float | None
    gamma_vol: float
    t0: float | None
    levelset_condition: float | None

    def to_json_dict(self):
        return {
            "degree": self.degree,
            "alpha": self.alpha,
            "c1": self.c1,
            "alpha_residual": self.alpha_residual,
            "tau": self.tau,
            "epsilon": self.epsilon,
            "q0": self.q0,
            "q_eps": self.q_eps,
            "p1": self.p1,
            "p2": self.p2,
            "gamma_of_p": [[p, g] for p, g in self.gamma_of_p],
            "profile": self.profile,
            "rho": self.rho,
            "gamma_vol": self.gamma_vol,
            "t0": self.t0,
            "levelset_condition": self.levelset_condition,
        }

    def to_csv_rows(self):
        gamma = dict(self.gamma_of_p)
        rows = [("p", "lower", "upper", "gamma")]
        for row in self.profile:
            rows.append((row["p"], row["lower"], row["upper"], gamma.get(row["p"], "")))
        return rows


_DEFAULT_T_GRID = (0.25, 0.5, 1.0, 2.0, 4.0)
_DEFAULT_P_SAMPLES = (1.25, 4.0 / 3.0, 1.5, 2.0, 3.0, 4.0)


def interpolation_report(K: SimplicialComplex, ell: int, epsilon: float | None = None,
                         t_grid=_DEFAULT_T_GRID, p_samples=_DEFAULT_P_SAMPLES,
                         spectral: SpectralData | None = None,
                         seed: int = 0) -> InterpolationReport:
    """Measure (alpha, tau, rho, gamma_vol) and derive the exponent calculus.

    epsilon defaults to tau/20.  When the whole degree is harmonic (gap
    +inf) the interval degenerates to (1, inf) and gamma(p) to +inf.
    """
    s = spectral if spectral is not None else laplacian_spectrum(K, ell)
    fit = measure_alpha(K, ell, t_grid, spectral=s)

    if math.isinf(s.gap):
        tau = math.inf
        eps = 0.0 if epsilon is None else float(epsilon)
        q0 = q_eps = p1 = 1.0
        p2 = math.inf
        gammas = [(float(p), math.inf) for p in p_samples]
        ps = [p for p, _ in gammas]
    else:
        tau = s.gap
        eps = tau / 20.0 if epsilon is None else float(epsilon)
        q0, _ = admissible_interval(fit.alpha, tau, 0.0)
        p1, p2 = admissible_interval(fit.alpha, tau, eps)
        q_eps = p1
        ps = sorted({float(p) for p in p_samples if p1 < p < p2} | {2.0})
        gammas = [(p, float(decay_rate(fit.alpha, tau, p))) for p in ps]

    profile = projector_norm_profile(K, ell, ps, spectral=s, seed=seed)
    for row, (_, g) in zip(profile, gammas):
        row["gamma"] = g

    vol = volume_growth_fit(K)
    provisional = kernel_decay_fit(K, ell, 1.0, spectral=s)
    rho = t0 = condition = None
    if not provisional.degenerate and provisional.rho > 0:
        t0_sel = select_t0(provisional.rho, vol.gamma_vol)
        refit = kernel_decay_fit(K, ell, t0_sel, spectral=s)
        if not refit.degenerate and refit.rho > 0:
            rho = refit.rho
            t0 = select_t0(rho, vol.gamma_vol)
            condition = (vol.gamma_vol / (2.0 * rho)) * t0
        else:
            rho, t0 = provisional.rho, t0_sel
            condition = (vol.gamma_vol / (2.0 * provisional.rho)) * t0_sel

    return InterpolationReport(
        degree=ell,
        alpha=fit.alpha,
        c1=fit.c1,
        alpha_residual=fit.residual,
        tau=tau,
        epsilon=eps,
        q0=float(q0),
        q_eps=float(q_eps),
        p1=float(p1),
        p2=float(p2),
        gamma_of_p=gammas,
        profile=profile,
        rho=rho,
        gamma_vol=vol.gamma_vol,
        t0=t0,
        levelset_condition=condition,
    )
