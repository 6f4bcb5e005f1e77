"""Iterative solvers, a closed-form field library and random walks.

The solvers are deliberately simple lattice relaxations: red-black SOR
for linear problems and pseudo-time marching for the extremal Pucci
equations.  The random walk is the probabilistic counterpart of the
discrete Laplace problem: its hitting probabilities solve the same
linear system the relaxation solves, which is what the probabilistic
Harnack check exploits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np
from numpy.typing import NDArray

from .grid import Grid, ScalarField, Region, Ball, ClosedBall, ball_volume
from .operators import Ellipticity, hessian, laplacian, pucci_minus, pucci_plus
from .reports import make_report, CheckReport

__all__ = [
    "BoundaryData", "SolverConfig", "WalkConfig", "solve_poisson",
    "solve_pucci", "field_library", "random_walk_hitting",
    "probabilistic_harnack_check", "discrete_harmonic_hitting",
]


@dataclass
class BoundaryData:
    """Dirichlet data imposed on every node outside the open domain."""

    fn: Callable

    def values(self, grid: Grid) -> NDArray:
        return np.asarray(self.fn(grid.coords()), dtype=float)


@dataclass
class SolverConfig:
    mode: str = "gauss-seidel-red-black"   # | "jacobi" | "pseudo-time"
    tol: float = 1e-9
    max_iter: int = 200_000
    omega: float | None = None             # SOR relaxation (auto if None)
    tau: float | None = None                # pseudo-time step (auto if None)


def _neighbor_sum(u: NDArray, inside: NDArray) -> NDArray:
    acc = np.zeros_like(u)
    for ax in range(u.ndim):
        acc += np.roll(u, 1, axis=ax) + np.roll(u, -1, axis=ax)
    return acc


def solve_poisson(grid: Grid, domain: Region, f, g: BoundaryData,
                  config: SolverConfig | None = None) -> tuple[ScalarField, CheckReport]:
    """Relax ``lap u = f`` on the domain with Dirichlet data outside.

    ``f`` may be a callable or a constant.  Returns the field and a
    convergence report (residual in the discrete max norm).
    """
    config = config or SolverConfig()
    inside = domain.mask(grid)
    # domain nodes sitting on the hull have no full stencil; peel them off
    hull = np.zeros(grid.counts, dtype=bool)
    for ax in range(grid.dim):
        sl = [slice(None)] * grid.dim
        sl[ax] = 0; hull[tuple(sl)] = True
        sl[ax] = -1; hull[tuple(sl)] = True
    inside = inside & ~hull
    gvals = g.values(grid)
    if callable(f):
        fv = np.asarray(f(grid.coords()), dtype=float)
    else:
        fv = np.full(grid.counts, float(f))
    h2 = grid.h ** 2
    u = gvals.copy()
    u[inside] = 0.0

    n_nb = 2 * grid.dim
    it = 0
    res = np.inf
    if config.mode in ("jacobi", "pseudo-time"):
        # pseudo-time marching on lap u = f is a damped Jacobi sweep
        damp = 1.0 if config.mode == "jacobi" else \
            (config.tau or 1.0) * n_nb / h2 if config.tau else 1.0
        while it < config.max_iter:
            nb = _neighbor_sum(u, inside)
            new = (nb - h2 * fv) / n_nb
            d = damp * (new[inside] - u[inside])
            res = float(np.abs(d).max()) if inside.any() else 0.0
            u[inside] += d
            it += 1
            if res < config.tol:
                break
    elif config.mode == "gauss-seidel-red-black":
        omega = config.omega
        if omega is None:
            hmax = max(grid.counts)
            omega = 2.0 / (1.0 + math.sin(math.pi / hmax))
        idx = np.indices(grid.counts).sum(axis=0)
        red = inside & (idx % 2 == 0)
        black = inside & (idx % 2 == 1)
        while it < config.max_iter:
            delta = 0.0
            for color in (red, black):
                nb = _neighbor_sum(u, inside)
                upd = (nb - h2 * fv) / n_nb
                d = omega * (upd[color] - u[color])
                if d.size:
                    delta = max(delta, float(np.abs(d).max()))
                u[color] += d
            res = delta
            it += 1
            if res < config.tol:
                break
    else:
        raise ValueError(f"unknown mode {config.mode!r}")

    # true residual of the discrete equation
    nb = _neighbor_sum(u, inside)
    eq = (nb - n_nb * u) / h2 - fv
    true_res = float(np.abs(eq[inside]).max()) if inside.any() else 0.0
    fldname = "poisson"
    rep = make_report("poisson-solve", true_res,
                      config.tol * 8 * grid.dim / h2,
                      constants={"iterations": it, "mode": config.mode,
                                 "update_residual": res},
                      grid=grid.meta(),
                      notes="discrete equation residual after relaxation")
    return ScalarField(grid, u, name=fldname), rep


def solve_pucci(grid: Grid, domain: Region, f, g: BoundaryData,
                ell: Ellipticity, sign: str = "minus",
                config: SolverConfig | None = None,
                warm_start: ScalarField | None = None) -> tuple[ScalarField, CheckReport]:
    """Pseudo-time marching for ``P(D^2 u) = f`` with Dirichlet data.

    Steps ``u += tau (P(D^2_h u) - f)`` with the parabolic-stable step
    ``tau = h^2 / (4 n Lam)``; monotone and convergent for either
    extremal operator.
    """
    config = config or SolverConfig(mode="pseudo-time", tol=1e-3,
                                    max_iter=20_000)
    inside = domain.mask(grid)
    hull = np.zeros(grid.counts, dtype=bool)
    for ax in range(grid.dim):
        sl = [slice(None)] * grid.dim
        sl[ax] = slice(0, 1); hull[tuple(sl)] = True
        sl[ax] = slice(-1, None); hull[tuple(sl)] = True
    inside = inside & ~hull
    gvals = g.values(grid)
    if callable(f):
        fv = np.asarray(f(grid.coords()), dtype=float)
    else:
        fv = np.full(grid.counts, float(f))
    tau = config.tau or grid.h ** 2 / (4 * grid.dim * ell.Lam)
    u = (warm_start.values.copy() if warm_start is not None
         else gvals.copy())
    u[~inside] = gvals[~inside]
    op = pucci_minus if sign == "minus" else pucci_plus
    core = tuple(slice(1, c - 1) for c in grid.counts)
    it = 0
    res = np.inf
    while it < config.max_iter:
        H = hessian(ScalarField(grid, u))
        P = op(H.values, ell)
        upd = np.zeros(grid.counts)
        upd[core] = tau * (P - fv[core])
        upd[~inside] = 0.0
        u = u + upd
        res = float(np.abs(upd[inside]).max()) if inside.any() else 0.0
        it += 1
        # update/tau tracks the equation defect; config.tol is the target
        if res < config.tol * tau:
            break
    H = hessian(ScalarField(grid, u))
    P = op(H.values, ell)
    eq = np.zeros(grid.counts)
    eq[core] = P - fv[core]
    true_res = float(np.abs(eq[inside]).max()) if inside.any() else 0.0
    rep = make_report("pucci-solve", true_res, 10 * config.tol,
                      constants={"iterations": it, "sign": sign,
                                 "tau": tau},
                      grid=grid.meta(),
                      notes="extremal equation defect; downstream checks "
                            "absorb it as forcing")
    return ScalarField(grid, u, name=f"pucci-{sign}"), rep


# ---------------------------------------------------------------------------
# closed-form field library


def field_library(name: str, grid: Grid, **kw) -> ScalarField:
    """Named closed-form fields used across the checks.

    Singular profiles carry a mask excluding a small ball around the
    singularity (values there are evaluated at the clamped radius).
    """
    pts = grid.coords()
    n = grid.dim

    def radial(fn, r_clip=0.0):
        r = np.linalg.norm(pts, axis=-1)
        rc = np.maximum(r, max(r_clip, grid.h / 2))
        vals = fn(rc)
        mask = None
        if r_clip > 0:
            mask = r >= r_clip
        return ScalarField(grid, vals, name=name, mask=mask)

    if name == "linear":
        slope = np.asarray(kw.get("slope", [1.0] + [0.0] * (n - 1)))
        return ScalarField(grid, pts @ slope, name=name)
    if name == "quadratic":
        A = np.asarray(kw.get("A", np.eye(n)))
        return ScalarField(grid, 0.5 * np.einsum("...i,ij,...j->...",
                                                 pts, A, pts), name=name)
    if name == "paraboloid":
        M = kw.get("M", 1.0)
        return ScalarField(grid, 0.5 * M * np.sum(pts ** 2, axis=-1),
                           name=name)
    if name == "gaussian":
        s = kw.get("sigma", 1.0)
        return ScalarField(grid,
                           np.exp(-np.sum(pts ** 2, axis=-1) / (2 * s * s)),
                           name=name)
    if name == "harmonic-poly":
        # harmonic polynomials: 1d linear, 2d real/imag parts of z^k, 3d x*y etc.
        k = kw.get("degree", 2)
        part = kw.get("part", "re")
        if n == 1:
            return ScalarField(grid, pts[..., 0], name=name)
        if n == 2:
            z = pts[..., 0] + 1j * pts[..., 1]
            w = z ** k
            vals = w.real if part == "re" else w.imag
            return ScalarField(grid, vals, name=name)
        vals = pts[..., 0] * pts[..., 1] if k == 2 \
            else pts[..., 0] ** 2 - pts[..., 2] ** 2
        return ScalarField(grid, vals, name=name)
    if name == "fundamental":
        # fundamental-solution-type profile, singular at the origin
        r_clip = kw.get("r_clip", 4 * grid.h)
        if n == 1:
            return radial(lambda r: np.abs(r), 0.0)
        if n == 2:
            return radial(lambda r: -np.log(r), r_clip)
        return radial(lambda r: r ** (2 - n), r_clip)
    if name == "poisson-kernel-ish":
        # positive harmonic on B_1 with boundary singularity at e_1
        e = np.zeros(n); e[0] = 1.05
        r2 = np.sum((pts - e) ** 2, axis=-1)
        vals = (1.05 ** 2 - np.sum(pts ** 2, axis=-1)) / r2 ** (n / 2)
        return ScalarField(grid, vals, name=name)
    if name == "power":
        alpha = kw.get("alpha", 0.5)
        return radial(lambda r: r ** alpha, 0.0)
    if name == "log-profile":
        # Lipschitz-violating modulus: r * (1 - log r) style
        return radial(lambda r: np.where(r > 0, -1.0 / np.log(
            np.minimum(r, 0.5) / 2.0), 0.0), 0.0)
    if name == "pucci-radial":
        # homogeneous supersolution profile for the window (lam, Lam)
        ell = kw.get("ell", Ellipticity(1.0, 2.0))
        alpha = ell.Lam * n / ell.lam - 1.0
        r_clip = kw.get("r_clip", 4 * grid.h)
        if alpha <= 0:
            return radial(lambda r: -np.log(r), r_clip)
        return radial(lambda r: r ** (-alpha), r_clip)
    if name == "cone":
        return radial(lambda r: r, 0.0)
    if name == "bump":
        s = kw.get("radius", 0.5)
        r2 = np.sum(pts ** 2, axis=-1) / s ** 2
        return ScalarField(grid, np.clip(1 - r2, 0, None) ** 2, name=name)
    raise KeyError(f"unknown field {name!r}")


# ---------------------------------------------------------------------------
# random walks


@dataclass
class WalkConfig:
    n_samples: int = 10_000
    max_steps: int = 100_000
    seed: int = 0
    chunk: int = 8192  # fixed stream width; results independent of scheduling


def random_walk_hitting(grid: Grid, start, target: Region, domain: Region,
                        config: WalkConfig) -> tuple[float, float, CheckReport]:
    """Probability of hitting the target before leaving the domain.

    Nearest-neighbor walk on the lattice; each walk consumes its own
    Philox substream keyed by ``(seed, chunk index)`` with a fixed chunk
    width, so estimates are reproducible however the chunks are run.
    Returns (estimate, standard error, report); capped walks count as
    misses and are reported.
    """
    start_idx = np.asarray(grid.index_of(start))
    tmask = target.mask(grid)
    dmask = domain.mask(grid)
    counts = np.asarray(grid.counts)
    if tmask[tuple(start_idx)]:
        rep = make_report("walk-hitting", 1.0, 1.0, constants={"trivial": True})
        return 1.0, 0.0, rep

    hits = 0
    capped = 0
    n = grid.dim
    done_total = 0
    block = 512
    for c0 in range(0, config.n_samples, config.chunk):
        m = min(config.chunk, config.n_samples - c0)
        rng = np.random.default_rng(
            np.random.Philox(key=[config.seed, c0 // config.chunk]))
        pos = np.tile(start_idx, (m, 1))
        alive = np.ones(m, dtype=bool)
        steps = 0
        while alive.any() and steps < config.max_steps:
            nblk = min(block, config.max_steps - steps)
            draws = rng.integers(0, 2 * n, size=(m, nblk), dtype=np.int8)
            for t in range(nblk):
                d = draws[alive, t]
                ax = d // 2
                sg = np.where(d % 2 == 0, 1, -1)
                p = pos[alive]
                p[np.arange(len(p)), ax] += sg
                pos[alive] = p
                # clamp to the hull for mask lookups
                pc = np.clip(p, 0, counts - 1)
                off_hull = np.any((p < 0) | (p >= counts), axis=1)
                t_hit = tmask[tuple(pc.T)] & ~off_hull
                d_out = off_hull | ~dmask[tuple(pc.T)]
                finished = t_hit | d_out
                hits += int(t_hit.sum())
                idx_alive = np.flatnonzero(alive)
                alive[idx_alive[finished]] = False
            steps += nblk
        capped += int(alive.sum())
    p_hat = hits / config.n_samples
    se = math.sqrt(max(p_hat * (1 - p_hat), 1e-12) / config.n_samples)
    rep = make_report("walk-hitting", 0.0, 0.0,
                      constants={"estimate": p_hat, "stderr": se,
                                 "capped": capped,
                                 "n_samples": config.n_samples},
                      grid=grid.meta(), seed=config.seed,
                      notes="Monte Carlo hitting probability")
    return p_hat, se, rep


def discrete_harmonic_hitting(grid: Grid, target: Region, domain: Region,
                              tol: float = 1e-10,
                              max_iter: int = 200_000) -> ScalarField:
    """Exact hitting probabilities of the lattice walk.

    Solves the discrete Laplace problem: value 1 on the target, 0 outside
    the domain, and the neighbor average on interior nodes — the same
    linear system the walk samples.
    """
    tmask = target.mask(grid)
    dmask = domain.mask(grid)
    hull = np.zeros(grid.counts, dtype=bool)
    for ax in range(grid.dim):
        sl = [slice(None)] * grid.dim
        sl[ax] = 0; hull[tuple(sl)] = True
        sl[ax] = -1; hull[tuple(sl)] = True
    free = dmask & ~tmask & ~hull
    u = np.zeros(grid.counts)
    u[tmask] = 1.0
    idx = np.indices(grid.counts).sum(axis=0)
    red = free & (idx % 2 == 0)
    black = free & (idx % 2 == 1)
    hmax = max(grid.counts)
    omega = 2.0 / (1.0 + math.sin(math.pi / hmax))
    nnb = 2 * grid.dim
    for it in range(max_iter):
        delta = 0.0
        for color in (red, black):
            nb = _neighbor_sum(u, free)
            d = omega * (nb[color] / nnb - u[color])
            if d.size:
                delta = max(delta, float(np.abs(d).max()))
            u[color] += d
        if delta < tol:
            break
    return ScalarField(grid, u, name="hitting")


def probabilistic_harnack_check(grid: Grid, A: Region, rho: float,
                                config: WalkConfig,
                                c_pinned: float = 0.02,
                                n_starts: int = 5) -> CheckReport:
    """Walks started deep inside see every chunk of a small central set.

    For starts in ``B_{1/3}`` the probability of hitting ``A cap B_rho``
    before leaving ``B_1`` is at least ``c |A cap B_rho|``; estimated by
    Monte Carlo with a 3-sigma allowance and the pinned lattice constant.
    """
    n = grid.dim
    b1 = Ball((0.0,) * n, 1.0)
    brho = ClosedBall((0.0,) * n, rho)
    target = A & brho
    meas = target.measure(grid)
    pts = grid.coords()
    third = np.argwhere(np.linalg.norm(pts, axis=-1) <= 1 / 3)
    stride = max(1, len(third) // n_starts)
    starts = third[::stride][:n_starts]
    worst = np.inf
    worst_se = 0.0
    for sidx in starts:
        x = pts[tuple(sidx)]
        p, se, _ = random_walk_hitting(grid, x, target, b1, config)
        if p < worst:
            worst, worst_se = p, se
    lhs = c_pinned * meas
    rhs = worst + 3 * worst_se
    return make_report("probabilistic-harnack", lhs, rhs,
                       constants={"c_pinned": c_pinned, "measure": meas,
                                  "worst_estimate": worst,
                                  "stderr": worst_se,
                                  "n_starts": len(starts)},
                       grid=grid.meta(), seed=config.seed,
                       notes="minimal hitting probability vs target measure")
