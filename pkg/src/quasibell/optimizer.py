"""Multistart simplex search for the maximal quantum violation ``max |<K_N>|``.

Directions are parameterized by polar/azimuthal angles so they stay exactly
unit.  Each restart runs adaptive Nelder-Mead from a random point on the
sphere and is re-started from its own optimum until the objective stops
improving.  The objective only depends on inner products, so reported
solutions are rotated to a canonical gauge (``a0 -> x``, ``a1`` in the xy
plane) and Alice/Bob indices ``1..N`` are relabeled together so that the
repeated directions sit at ``2..N``.
"""
import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import kernel
from .errors import BudgetExhausted
from .quasi_bell import QuasiBellInstance, hexagonal_settings, quantum_value

log = logging.getLogger(__name__)

MAX_ORDER = 10


def default_restarts(N):
    return 64 if N <= 4 else 256


def angles_to_dirs(params):
    params = np.asarray(params, dtype=float)
    th, ph = params[0::2], params[1::2]
    st = np.sin(th)
    return np.stack([st * np.cos(ph), st * np.sin(ph), np.cos(th)], axis=1)


def dirs_to_angles(dirs):
    dirs = np.asarray(dirs, dtype=float)
    out = np.empty(2 * len(dirs))
    out[0::2] = np.arccos(np.clip(dirs[:, 2], -1.0, 1.0))
    out[1::2] = np.arctan2(dirs[:, 1], dirs[:, 0])
    return out


def _expand(dirs, N, ansatz):
    """Split the free directions into Alice's and Bob's ``N+1`` directions."""
    if ansatz == "reduced" and N >= 2:
        a, b = dirs[:3], dirs[3:]
        a = np.vstack([a[:2], np.repeat(a[2:3], N - 1, axis=0)])
        b = np.vstack([b[:2], np.repeat(b[2:3], N - 1, axis=0)])
        return a, b
    return dirs[: N + 1], dirs[N + 1:]


def free_directions(N, ansatz):
    return 6 if ansatz == "reduced" and N >= 2 else 2 * (N + 1)


def _seed_start(N, ansatz):
    """Order-2 hexagonal optimum, with its third direction repeated for higher orders."""
    hexa = hexagonal_settings()
    a, b = hexa.a_dirs, hexa.b_dirs
    if N < 2:
        a, b = a[: N + 1], b[: N + 1]
    elif ansatz != "reduced":
        a = np.vstack([a[:2], np.repeat(a[2:3], N - 1, axis=0)])
        b = np.vstack([b[:2], np.repeat(b[2:3], N - 1, axis=0)])
    # tilt out of the plane so the polar angles are not all pi/2 (simplex can then move freely)
    return dirs_to_angles(np.vstack([a, b])) + 1e-3


def _random_start(rng, m):
    v = rng.standard_normal((m, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return dirs_to_angles(v)


@dataclass
class RestartTrace:
    index: int
    value: float
    evaluations: int
    converged: bool
    rounds: int


@dataclass
class OptimizationResult:
    N: int
    best_value: float
    signed_value: float
    best_dirs: np.ndarray
    restarts_used: int
    evaluations: int
    seed: int
    converged: bool
    gradient_norm: float
    ansatz: str = "full"
    budget_exhausted: bool = False
    traces: list = field(default_factory=list)

    @property
    def a_dirs(self):
        return self.best_dirs[: self.N + 1]

    @property
    def b_dirs(self):
        return self.best_dirs[self.N + 1:]

    def instance(self):
        return QuasiBellInstance(self.N, self.a_dirs, self.b_dirs)

    def to_dict(self, traces=True):
        vals = [t.value for t in self.traces]
        out = {
            "N": self.N,
            "best_value": self.best_value,
            "signed_value": self.signed_value,
            "a_dirs": self.a_dirs.tolist(),
            "b_dirs": self.b_dirs.tolist(),
            "restarts_used": self.restarts_used,
            "evaluations": self.evaluations,
            "seed": self.seed,
            "converged": self.converged,
            "gradient_norm": self.gradient_norm,
            "ansatz": self.ansatz,
            "budget_exhausted": self.budget_exhausted,
        }
        if traces and vals:
            out["trace_summary"] = {
                "best": max(vals),
                "median": float(np.median(vals)),
                "worst": min(vals),
                "hits_within_1e-6": int(sum(v >= max(vals) - 1e-6 for v in vals)),
            }
        return out


def _local_search(N, ansatz, start, tol, maxfev, max_rounds=6):
    """Nelder-Mead from ``start``, re-started at its optimum until no further gain."""
    def objective(p):
        a, b = _expand(angles_to_dirs(p), N, ansatz)
        return -abs(kernel.signed_value(a, b))

    opts = {"adaptive": True, "xatol": 1e-9, "fatol": tol, "maxfev": maxfev}
    res = minimize(objective, start, method="Nelder-Mead", options=opts)
    nfev, rounds, x, fun, ok = res.nfev, 1, res.x, res.fun, res.success
    while rounds < max_rounds and nfev < maxfev:
        opts["maxfev"] = maxfev - nfev
        res = minimize(objective, x, method="Nelder-Mead", options=opts)
        nfev += res.nfev
        rounds += 1
        gain = fun - res.fun
        if res.fun < fun:
            x, fun = res.x, res.fun
        ok = res.success
        if gain <= tol:
            break
    return x, -fun, nfev, ok, rounds


def _run_restart(args):
    N, ansatz, index, start, tol, maxfev = args
    x, val, nfev, ok, rounds = _local_search(N, ansatz, start, tol, maxfev)
    return index, x, val, nfev, ok, rounds


def gauge_fix(a, b):
    """Rotate both parties so ``a0`` is along x and ``a1`` lies in the xy plane (y >= 0)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    e1 = a[0] / np.linalg.norm(a[0])
    ref = a[1] if len(a) > 1 else b[0]
    ref = ref - (ref @ e1) * e1
    if np.linalg.norm(ref) < 1e-9:
        # pick any vector orthogonal to e1
        trial = np.eye(3)[np.argmin(np.abs(e1))]
        ref = trial - (trial @ e1) * e1
    e2 = ref / np.linalg.norm(ref)
    e3 = np.cross(e1, e2)
    rot = np.vstack([e1, e2, e3])
    a2, b2 = a @ rot.T, b @ rot.T
    # with the rows orthonormal this is a proper rotation; reflect z to keep the rest above the plane
    if np.sum(np.concatenate([a2[:, 2], b2[:, 2]])) < 0:
        a2[:, 2] *= -1
        b2[:, 2] *= -1
    return a2, b2


def canonical_relabel(a, b):
    """Relabel indices ``1..N`` (same permutation for both parties) so the odd one out is index 1.

    ``K_N`` is invariant under such a simultaneous relabeling, so the value is unchanged.
    """
    N = len(a) - 1
    if N < 3:
        return a, b
    best, best_c = None, 1
    for c in range(1, N + 1):
        rest = [k for k in range(1, N + 1) if k != c]
        spread = max(
            max(np.arccos(np.clip(x[i] @ x[j], -1, 1)) for i, j in itertools.combinations(rest, 2))
            for x in (a, b)
        )
        if best is None or spread < best - 1e-12:
            best, best_c = spread, c
    order = [0, best_c] + [k for k in range(1, N + 1) if k != best_c]
    return a[order], b[order]


def maximize(N, restarts=None, seed=0, tol=1e-9, max_evals=None, ansatz="full", jobs=1,
             seed_start=True, strict=False):
    """Maximize ``|<K_N>|`` over unit measurement directions.

    Returns an :class:`OptimizationResult`.  When ``max_evals`` runs out the
    best point found so far is returned with ``converged=False`` (or
    :class:`BudgetExhausted` is raised when ``strict``).
    """
    if not 0 <= N <= MAX_ORDER:
        raise ValueError(f"order {N} outside [0, {MAX_ORDER}]")
    if ansatz not in ("full", "reduced"):
        raise ValueError(f"unknown ansatz {ansatz!r}")
    restarts = default_restarts(N) if restarts is None else int(restarts)
    m = free_directions(N, ansatz)
    per_restart = 2000 * 2 * m

    children = np.random.SeedSequence(seed).spawn(restarts)
    starts = []
    for r in range(restarts):
        if r == 0 and seed_start:
            starts.append(_seed_start(N, ansatz))
        else:
            starts.append(_random_start(np.random.default_rng(children[r]), m))

    budget = max_evals
    exhausted = False
    tasks = []
    for r, start in enumerate(starts):
        cap = per_restart
        if budget is not None:
            if budget <= 0:
                exhausted = True
                break
            cap = min(cap, budget)
            budget -= cap
        tasks.append((N, ansatz, r, start, tol, cap))

    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_restart, tasks))
    else:
        outcomes = [_run_restart(t) for t in tasks]

    traces, best = [], None
    total = 0
    for index, x, val, nfev, ok, rounds in outcomes:
        total += nfev
        traces.append(RestartTrace(index, float(val), int(nfev), bool(ok), rounds))
        if best is None or val > best[1] + 1e-15:
            best = (x, val, ok)
        if not ok and budget is not None:
            exhausted = True
    if best is None:
        raise BudgetExhausted("no evaluations were allowed", None)

    a, b = _expand(angles_to_dirs(best[0]), N, ansatz)
    a, b = canonical_relabel(*gauge_fix(a, b))
    inst = QuasiBellInstance(N, a, b)
    signed = quantum_value(inst)
    grad = local_stationarity_check(inst, hessian=False).gradient_norm
    converged = bool(best[2]) and not exhausted and grad < 1e-4
    result = OptimizationResult(
        N=N,
        best_value=abs(signed),
        signed_value=signed,
        best_dirs=np.vstack([a, b]),
        restarts_used=len(outcomes),
        evaluations=total,
        seed=seed,
        converged=converged,
        gradient_norm=grad,
        ansatz=ansatz,
        budget_exhausted=exhausted,
        traces=traces,
    )
    log.info("order %d: best |<K>| = %.6f after %d evaluations", N, result.best_value, total)
    if exhausted and strict:
        raise BudgetExhausted(f"evaluation budget {max_evals} exhausted", result)
    return result


@dataclass
class StationarityReport:
    value: float
    gradient: np.ndarray
    gradient_norm: float
    max_abs_partial: float
    hessian_eigenvalues: np.ndarray = None
    max_curvature: float = None
    min_curvature: float = None
    local_max: bool = None

    def to_dict(self):
        d = {
            "value": self.value,
            "gradient_norm": self.gradient_norm,
            "max_abs_partial": self.max_abs_partial,
        }
        if self.hessian_eigenvalues is not None:
            d.update(max_curvature=self.max_curvature, min_curvature=self.min_curvature,
                     local_max=self.local_max)
        return d


def local_stationarity_check(inst, step=1e-5, hessian=True, hessian_step=1e-4, curvature_tol=1e-6):
    """Finite-difference gradient (and Hessian) of ``|<K_N>|`` in spherical coordinates.

    Curvatures are for ``|<K_N>|`` (sign-adjusted), so a local maximum has all
    eigenvalues ``<= curvature_tol``; three of them vanish from the global
    rotation symmetry.
    """
    N = inst.N
    p0 = dirs_to_angles(np.vstack([inst.a_dirs, inst.b_dirs]))

    def f(p):
        d = angles_to_dirs(p)
        return kernel.signed_value(d[: N + 1], d[N + 1:])

    v0 = f(p0)
    sign = 1.0 if v0 >= 0 else -1.0
    n = len(p0)
    eye = np.eye(n)
    grad = np.array([(f(p0 + step * eye[i]) - f(p0 - step * eye[i])) / (2 * step) for i in range(n)])
    grad *= sign
    report = StationarityReport(abs(v0), grad, float(np.linalg.norm(grad)), float(np.max(np.abs(grad))))
    if not hessian:
        return report
    h = hessian_step
    H = np.empty((n, n))
    for i in range(n):
        H[i, i] = (f(p0 + h * eye[i]) - 2 * v0 + f(p0 - h * eye[i])) / h**2
        for j in range(i + 1, n):
            H[i, j] = H[j, i] = (
                f(p0 + h * (eye[i] + eye[j])) - f(p0 + h * (eye[i] - eye[j]))
                - f(p0 - h * (eye[i] - eye[j])) + f(p0 - h * (eye[i] + eye[j]))
            ) / (4 * h**2)
    eig = np.linalg.eigvalsh(sign * H)
    report.hessian_eigenvalues = eig
    report.max_curvature = float(eig[-1])
    report.min_curvature = float(eig[0])
    report.local_max = bool(eig[-1] <= curvature_tol)
    return report


@dataclass
class CoplanarityReport:
    max_plane_distance: float
    plane_normal: np.ndarray
    max_repeat_angle: float
    repeat_angle_a: float
    repeat_angle_b: float

    def to_dict(self):
        d = dict(self.__dict__)
        d["plane_normal"] = self.plane_normal.tolist()
        return d


def coplanarity_report(r):
    """Distance of the optimal directions from their best-fit plane through the origin,
    and the largest angle among the directions with index >= 2 on each side."""
    inst = r.instance() if isinstance(r, OptimizationResult) else r
    dirs = np.vstack([inst.a_dirs, inst.b_dirs])
    _, _, vt = np.linalg.svd(dirs)
    normal = vt[-1]
    dist = float(np.max(np.abs(dirs @ normal)))

    def spread(x):
        if len(x) < 4:
            return 0.0
        tail = x[2:]
        return max(float(np.arccos(np.clip(tail[i] @ tail[j], -1, 1)))
                   for i, j in itertools.combinations(range(len(tail)), 2))

    sa, sb = spread(inst.a_dirs), spread(inst.b_dirs)
    return CoplanarityReport(dist, normal, max(sa, sb), sa, sb)


def random_search(N, samples, seed=0, batch=4096):
    """Best ``|<K_N>|`` over uniformly random direction sets (no local refinement)."""
    rng = np.random.default_rng(seed)
    n = N + 1
    best = 0.0
    done = 0
    while done < samples:
        s = min(batch, samples - done)
        v = rng.standard_normal((s, 2 * n, 3))
        v /= np.linalg.norm(v, axis=2, keepdims=True)
        vals = np.abs(kernel.signed_value_batch(v[:, :n], v[:, n:]))
        best = max(best, float(vals.max()))
        done += s
    return best
