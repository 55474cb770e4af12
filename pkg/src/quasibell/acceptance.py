"""Exit criteria for the package, runnable from pytest or ``quasibell selftest``.

Each check returns a :class:`Check` with the measured quantity and the
tolerance it was held to.  Nothing here is calibrated after the fact: the
tolerances are fixed constants.
"""
import time
from dataclasses import dataclass

import numpy as np

from . import joint, quasi_bell, symmetrize, werner
from .joint import random_unit
from .optimizer import local_stationarity_check, maximize
from .pauli import SIGMA

TEST_EXPRESSION_GRID = np.array([
    [4, 0, 0, 0, 0, 0, 0, -4],
    [0, 0, 4, 0, 0, -4, 0, 0],
    [0, 4, 0, 0, 0, 0, -4, 0],
    [0, 0, 0, 4, -4, 0, 0, 0],
])

REFERENCE_MAXIMA = {1: 1.414, 2: 1.500, 3: 1.432, 4: 1.469, 5: 1.443, 6: 1.467}
REFERENCE_MAXIMA_EXTENDED = {7: 1.45, 8: 1.467, 9: 1.455, 10: 1.469}

INNER_PRODUCTS_ORDER2 = np.array([
    [-1.0, -0.5, -0.5],
    [-0.5, 0.5, -1.0],
    [-0.5, -1.0, 0.5],
])


@dataclass
class Check:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0
    budget: float = None

    def line(self):
        mark = "PASS" if self.passed else "FAIL"
        limit = f" of {self.budget:g}s" if self.budget else ""
        return f"[{mark}] {self.number:>2}. {self.name}: {self.detail} ({self.seconds:.2f}s{limit})"


def _timed(number, name, fn, budget=None):
    t0 = time.perf_counter()
    passed, detail = fn()
    dt = time.perf_counter() - t0
    if budget is not None and dt > budget:
        passed = False
        detail += f"; over the {budget:g}s runtime budget"
    return Check(number, name, bool(passed), detail, dt, budget)


def chsh_reproduction():
    def run():
        q = abs(quasi_bell.quantum_value(quasi_bell.chsh_settings()))
        rep = quasi_bell.classical_bound_verify(1)
        ok = abs(q - np.sqrt(2)) <= 1e-9 and rep.all_unit and rep.assignments == 16
        ok &= (rep.min_value, rep.max_value) == (-1, 1)
        return ok, f"|<K_1>|={q:.12f}, classical range [{rep.min_value},{rep.max_value}] over {rep.assignments}"
    return _timed(1, "CHSH reproduction", run, budget=1)


def order2_headline():
    def run():
        inst = quasi_bell.hexagonal_settings()
        q = quasi_bell.quantum_value(inst)
        a012 = symmetrize.symmetrize_triple(*inst.a_dirs).vector
        b012 = symmetrize.symmetrize_triple(*inst.b_dirs).vector
        gram_err = np.max(np.abs(quasi_bell.inner_product_matrix(inst) - INNER_PRODUCTS_ORDER2))
        ok = abs(q - 1.5) <= 1e-12 and np.max(np.abs(a012)) <= 1e-12 and np.max(np.abs(b012)) <= 1e-12
        ok &= gram_err <= 1e-12
        return ok, (f"<K_2>={q:.15f}, |a012|={np.linalg.norm(a012):.1e}, "
                    f"|b012|={np.linalg.norm(b012):.1e}, inner-product err={gram_err:.1e}")
    return _timed(2, "Order-2 headline 3/2", run, budget=1)


def expression_grid_check():
    def run():
        grid = quasi_bell.test_expressions(2)
        ok = np.array_equal(grid, TEST_EXPRESSION_GRID)
        return ok, "4x8 grid " + ("matches" if ok else "differs")
    return _timed(3, "Test-expression grid", run, budget=1)


def classical_certificate(max_order=8):
    def run():
        bad = []
        total = 0
        for N in range(max_order + 1):
            rep = quasi_bell.classical_bound_verify(N)
            total += rep.assignments
            if not (rep.all_unit and rep.min_value == -1 and rep.max_value == 1):
                bad.append(N)
        return not bad, f"K_N = +-1 for all {total} assignments, N=0..{max_order}" if not bad else f"failed at N={bad}"
    return _timed(4, "Classical certificate", run, budget=30)


def maximization_check(orders=(1, 2, 3, 4, 5, 6), restarts=64, seed=0, tol=0.005, table=None, budget=900):
    table = REFERENCE_MAXIMA if table is None else table

    def run():
        parts, ok = [], True
        for N in orders:
            r = maximize(N, restarts=restarts, seed=seed)
            good = abs(r.best_value - table[N]) <= tol
            ok &= good
            parts.append(f"N={N}: {r.best_value:.4f} (expected {table[N]})")
        return ok, "; ".join(parts)
    return _timed(5, "Maximized violations", run, budget=budget)


def negative_probability():
    def run():
        t = symmetrize.symmetrized_pair_joint_table([1 / np.sqrt(2), 1 / np.sqrt(2), 0], [1, 0, 0], [0, 1, 0])
        p = t[(-1, -1)]
        expected = (1 - np.sqrt(2)) / 4
        return abs(p - expected) <= 1e-12, f"p(-,-)={p:.15f}, expected {expected:.15f}"
    return _timed(6, "Negative joint probability", run, budget=1)


def werner_thresholds():
    def run():
        z2 = werner.violation_threshold(2, quasi_bell.hexagonal_settings())
        z1 = werner.violation_threshold(1, quasi_bell.chsh_settings())
        ok = abs(z2 - 2 / 3) <= 1e-9 and abs(z1 - 1 / np.sqrt(2)) <= 1e-9
        return ok, f"z(N=2)={z2:.12f}, z(N=1)={z1:.12f}"
    return _timed(7, "Werner thresholds", run)


def moyal_equivalence(trials=20, seed=2024):
    def run():
        rng = np.random.default_rng(seed)
        worst = cos_worst = 0.0
        for _ in range(trials):
            d = random_unit(rng, 3)
            mat = symmetrize.moyal_product_matrix(d)
            ref = symmetrize.symmetrize_triple(*d).vector
            worst = max(worst, float(np.max(np.abs(mat - np.tensordot(ref, SIGMA, axes=1)))))
            cos_worst = max(cos_worst, abs(0.5 * np.trace(mat)))
        ok = worst <= 1e-5 and cos_worst <= 1e-6
        return ok, f"max entry err {worst:.2e}, scalar (cosine) part {cos_worst:.2e} over {trials} triples"
    return _timed(8, "Moyal = symmetrization", run, budget=10)


def oracle_chain(trials=100, ks=(2, 3, 4, 5, 6, 7), seed=99):
    def run():
        rng = np.random.default_rng(seed)
        worst, parity_ok = 0.0, True
        for k in ks:
            for _ in range(trials):
                d = random_unit(rng, k)
                bf = symmetrize.symmetrize_bruteforce(d)
                pr = symmetrize.symmetrize_pairing(d)
                worst = max(worst, abs(bf.scalar - pr.scalar), float(np.max(np.abs(bf.vector - pr.vector))))
                if k % 2 == 0:
                    parity_ok &= np.max(np.abs(bf.vector)) <= 1e-10
                else:
                    parity_ok &= abs(bf.scalar) <= 1e-10
        return worst <= 1e-10 and parity_ok, f"max |pairing - bruteforce| = {worst:.2e}, parity law {'holds' if parity_ok else 'broken'}"
    return _timed(9, "Symmetrization oracle chain", run, budget=60)


def property_suites(instances=500, pure=100, seed=7):
    def run():
        r = joint.frechet_property_run(instances, seed=seed, pure=pure)
        ok = r.counterexamples == 0 and r.lower_only_witnesses > 0 and r.pure_collapse_error <= 1e-9
        return ok, (f"pair counterexamples {r.pair_counterexamples}/{instances}, "
                    f"triple {r.triple_counterexamples}/{instances} ({r.triple_positive} positive, "
                    f"{r.lower_only_witnesses} lower-only witnesses), "
                    f"pure-state collapse err {r.pure_collapse_error:.1e}")
    return _timed(10, "Positivity / Frechet property suites", run)


def stationarity():
    def run():
        rep = local_stationarity_check(quasi_bell.hexagonal_settings(), hessian=False)
        return rep.gradient_norm < 1e-6, f"gradient norm {rep.gradient_norm:.2e}"
    return _timed(11, "Stationarity at order-2 optimum", run)


ALL_CHECKS = [
    chsh_reproduction,
    order2_headline,
    expression_grid_check,
    classical_certificate,
    maximization_check,
    negative_probability,
    werner_thresholds,
    moyal_equivalence,
    oracle_chain,
    property_suites,
    stationarity,
]


def run_all(skip_slow=False, echo=print):
    results = []
    for fn in ALL_CHECKS:
        if skip_slow and fn is maximization_check:
            continue
        c = fn()
        results.append(c)
        if echo:
            echo(c.line())
    return results
