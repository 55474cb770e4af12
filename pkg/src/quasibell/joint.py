"""Joint (quasi-)probability tables for spin observables.

Covers the commuting two-qubit table, the local-hidden-variable form, and
tables for two or three noncommuting observables on Alice's qubit built from
explicitly supplied correlators.  Tables may carry negative entries; the
positivity and Frechet checks below map out when they do.

A correlation matrix that would simulate noncommuting measurements on one
qubit is not modelled as an object here; the pair correlator ``<a0 a1>`` is
taken as an input instead, which covers every such choice.

Frechet/positivity equivalence is checked for two and three observables only.
"""
import itertools
from dataclasses import dataclass, field

import numpy as np

from .config import get_tolerances
from .errors import InconsistentMarginals, OutOfRange, WrongArity
from .pauli import BlochState, as_bloch, as_direction, kron, projector

OUTCOMES2 = tuple(itertools.product((1, -1), repeat=2))
OUTCOMES3 = tuple(itertools.product((1, -1), repeat=3))
PAIRS = ((0, 1), (0, 2), (1, 2))


def _key(outcome):
    return "(" + ",".join("+" if s > 0 else "-" for s in outcome) + ")"


@dataclass(frozen=True)
class CorrelatorSpec:
    """Pair correlators keyed by index pair, plus the triple correlator if any."""

    pair: dict
    triple: float = None

    @classmethod
    def for_pair(cls, c01):
        return cls({(0, 1): float(c01)})

    @classmethod
    def for_triple(cls, c01, c02, c12, c012):
        return cls({(0, 1): float(c01), (0, 2): float(c02), (1, 2): float(c12)}, float(c012))

    def within_unit_range(self):
        vals = list(self.pair.values()) + ([self.triple] if self.triple is not None else [])
        return all(-1.0 <= v <= 1.0 for v in vals)

    def to_dict(self):
        out = {f"{i}{j}": v for (i, j), v in self.pair.items()}
        if self.triple is not None:
            out["012"] = self.triple
        return out


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __contains__(self, x):
        return self.lo - 1e-12 <= x <= self.hi + 1e-12

    @property
    def width(self):
        return self.hi - self.lo


@dataclass(frozen=True)
class OutcomeTable:
    """Signed probabilities over ``{+1,-1}**arity`` outcome tuples."""

    arity: int
    entries: dict
    directions: tuple = ()
    bloch_u: np.ndarray = field(default_factory=lambda: np.zeros(3))
    correlators: CorrelatorSpec = None

    def __getitem__(self, outcome):
        return self.entries[tuple(outcome)]

    def total(self):
        return float(sum(self.entries.values()))

    def min_entry(self):
        return float(min(self.entries.values()))

    def is_nonnegative(self, tol=None):
        tol = get_tolerances().positivity if tol is None else tol
        return self.min_entry() >= -tol

    def marginal(self, keep):
        """Marginal table over the observable indices in ``keep`` (in that order)."""
        keep = tuple(keep)
        out = {o: 0.0 for o in itertools.product((1, -1), repeat=len(keep))}
        for outcome, p in self.entries.items():
            out[tuple(outcome[k] for k in keep)] += p
        return out

    def to_dict(self):
        return {
            "arity": self.arity,
            "directions": [np.asarray(d).tolist() for d in self.directions],
            "bloch_u": np.asarray(self.bloch_u).tolist(),
            "correlators": self.correlators.to_dict() if self.correlators else None,
            "entries": {_key(o): p for o, p in self.entries.items()},
            "min_entry": self.min_entry(),
        }


def quantum_pair_table(s: BlochState, a, b):
    """Commuting two-qubit outcome probabilities ``Tr[rho P_a (x) P_b]`` (closed form)."""
    a = as_direction(a, unit=True, name="a")
    b = as_direction(b, unit=True, name="b")
    au, bv, aRb = a @ s.u, b @ s.v, a @ s.R @ b
    entries = {(x, y): 0.25 * (1 + x * au + y * bv + x * y * aRb) for x, y in OUTCOMES2}
    return OutcomeTable(2, entries, (a, b), s.u)


def quantum_pair_table_trace(s: BlochState, a, b):
    """Same table evaluated as traces against the density matrix."""
    rho = s.density_matrix()
    entries = {
        (x, y): float(np.trace(rho @ kron(projector(a, x), projector(b, y))).real)
        for x, y in OUTCOMES2
    }
    return OutcomeTable(2, entries, (as_direction(a), as_direction(b)), s.u)


def lhv_pair_table(fbar_a, fbar_b, fbar_ab):
    """Local-hidden-variable pair table from the averaged response functions."""
    for name, v in (("fbar_a", fbar_a), ("fbar_b", fbar_b), ("fbar_ab", fbar_ab)):
        if not -1.0 <= v <= 1.0:
            raise OutOfRange(f"{name}={v} outside [-1, 1]")
    entries = {
        (x, y): 0.25 * (1 + x * fbar_a + y * fbar_b + x * y * fbar_ab) for x, y in OUTCOMES2
    }
    return OutcomeTable(2, entries)


def noncommuting_pair_table(u, a0, a1, c: CorrelatorSpec):
    u = as_bloch(u)
    a0 = as_direction(a0, unit=True, name="a0")
    a1 = as_direction(a1, unit=True, name="a1")
    x, y = a0 @ u, a1 @ u
    c01 = c.pair[(0, 1)]
    entries = {(s0, s1): 0.25 * (1 + s0 * x + s1 * y + s0 * s1 * c01) for s0, s1 in OUTCOMES2}
    return OutcomeTable(2, entries, (a0, a1), u, c)


def positivity_interval(u, a0, a1):
    """Range of ``<a0 a1>`` keeping all four pair entries non-negative."""
    u = as_bloch(u)
    x = as_direction(a0, unit=True, name="a0") @ u
    y = as_direction(a1, unit=True, name="a1") @ u
    # same-sign outcomes bound the correlator from below, opposite-sign from above
    lo = max(-1 - x - y, -1 + x + y)
    hi = min(1 + x - y, 1 - x + y)
    return Interval(lo, hi)


def mixed_state_correlator(u, a0, a1):
    """Symmetric positivity-respecting ``<a0 a1>`` for a (possibly mixed) state.

    ``D = [a0.u + a1.u + (1-|u|) a0.a1] (1-|u|)`` added to the product of the
    single-observable expectations.  The bracket is not confined to [-1, 1],
    so the result can leave :func:`positivity_interval`; for example
    ``u = 0.8 z``, ``a0 = a1 = -z`` gives 0.36 against the interval [0.6, 1].
    """
    u = as_bloch(u)
    a0, a1 = as_direction(a0), as_direction(a1)
    x, y = a0 @ u, a1 @ u
    r = 1.0 - np.linalg.norm(u)
    return float((x + y + r * (a0 @ a1)) * r + x * y)


def alpha_family_difference(u, a, alpha):
    """``D = (alpha + a.u)(1 - |u|)``; any alpha in [-1, 1] meets the mixed-state bound."""
    if not -1.0 <= alpha <= 1.0:
        raise OutOfRange(f"alpha={alpha} outside [-1, 1]")
    u = as_bloch(u)
    return float((alpha + as_direction(a) @ u) * (1.0 - np.linalg.norm(u)))


def mixed_difference_bound(u, a):
    """Interval allowed for ``D(a, u_hat)`` by positivity of a mixed state."""
    u = as_bloch(u)
    au = as_direction(a) @ u
    r = 1.0 - np.linalg.norm(u)
    return Interval((-1 + au) * r, (1 + au) * r)


def independence_correlators(u, dirs):
    """Correlators of independent outcomes: products of single expectations."""
    u = as_bloch(u)
    m = [as_direction(d) @ u for d in dirs]
    if len(dirs) == 2:
        return CorrelatorSpec.for_pair(m[0] * m[1])
    return CorrelatorSpec.for_triple(m[0] * m[1], m[0] * m[2], m[1] * m[2], m[0] * m[1] * m[2])


@dataclass
class FrechetReport:
    per_outcome: dict
    frechet_holds: bool
    positive: bool
    equivalent: bool

    def to_dict(self):
        return {
            "per_outcome": {_key(o): v for o, v in self.per_outcome.items()},
            "frechet_holds": self.frechet_holds,
            "positive": self.positive,
            "equivalent": self.equivalent,
        }


def frechet_pair_check(t: OutcomeTable, tol=None):
    if t.arity != 2:
        raise WrongArity(f"expected a pair table, got arity {t.arity}")
    tol = get_tolerances().positivity if tol is None else tol
    p0, p1 = t.marginal([0]), t.marginal([1])
    per = {}
    for o in OUTCOMES2:
        lower = p0[(o[0],)] + p1[(o[1],)] - 1
        upper = min(p0[(o[0],)], p1[(o[1],)])
        p = t.entries[o]
        per[o] = {"lower": lower, "upper": upper, "p": p,
                  "lower_ok": p >= lower - tol, "upper_ok": p <= upper + tol}
    holds = all(v["lower_ok"] and v["upper_ok"] for v in per.values())
    positive = t.is_nonnegative(tol)
    return FrechetReport(per, holds, positive, holds == positive)


def noncommuting_triple_table(u, dirs, c: CorrelatorSpec):
    u = as_bloch(u)
    dirs = tuple(as_direction(d, unit=True, name=f"a{i}") for i, d in enumerate(dirs))
    if len(dirs) != 3 or c.triple is None:
        raise WrongArity("triple table needs three directions and a triple correlator")
    m = [d @ u for d in dirs]
    entries = {}
    for s in OUTCOMES3:
        val = 1 + sum(s[i] * m[i] for i in range(3))
        val += sum(s[i] * s[j] * c.pair[(i, j)] for i, j in PAIRS)
        val += s[0] * s[1] * s[2] * c.triple
        entries[s] = val / 8
    return OutcomeTable(3, entries, dirs, u, c)


@dataclass
class TripleFrechetReport:
    lower_holds: bool
    upper_holds: bool
    positive: bool
    upper_equivalent: bool
    lower_implied: bool
    rewritten_consistent: bool
    pair_reports: list

    def to_dict(self):
        d = {k: v for k, v in self.__dict__.items() if k != "pair_reports"}
        d["pair_reports"] = [r.to_dict() for r in self.pair_reports]
        return d


def frechet_triple_check(t: OutcomeTable, pair_tables, tol=None):
    """Three-observable Frechet bounds, directly and in their rewritten forms."""
    if t.arity != 3 or len(pair_tables) != 3:
        raise WrongArity("need one triple table and three pair tables")
    tol = get_tolerances().positivity if tol is None else tol
    pairs = {}
    for (i, j), pt in zip(PAIRS, pair_tables):
        mine = t.marginal([i, j])
        if any(abs(mine[o] - pt.entries[o]) > 1e-10 for o in OUTCOMES2):
            raise InconsistentMarginals(f"pair table ({i},{j}) disagrees with triple marginal")
        pairs[(i, j)] = pt.entries
    single = [t.marginal([i]) for i in range(3)]
    p = t.entries

    lower_ok = upper_ok = consistent = True
    for s in OUTCOMES3:
        lowers = []
        for i, (j, k) in ((0, (1, 2)), (1, (0, 2)), (2, (0, 1))):
            lowers.append((single[i][(s[i],)] + pairs[(j, k)][(s[j], s[k])] - 1, i, j, k))
        uppers = [(pairs[(m, n)][(s[m], s[n])], l, m, n)
                  for l, (m, n) in ((2, (0, 1)), (1, (0, 2)), (0, (1, 2)))]
        lo, i, j, k = max(lowers)
        hi, l, m, n = min(uppers)
        lower_ok &= p[s] >= lo - tol
        upper_ok &= p[s] <= hi + tol

        def flip(idx_signs):
            o = list(s)
            for idx, sign in idx_signs:
                o[idx] = sign * s[idx]
            return p[tuple(o)]

        lower_rw = (flip([(i, -1), (j, -1), (k, -1)]) + flip([(i, -1), (j, -1)])
                    + flip([(i, -1), (k, -1)]))
        upper_rw = flip([(l, -1)])
        consistent &= abs((p[s] - lo) - lower_rw) <= 1e-10
        consistent &= abs((hi - p[s]) - upper_rw) <= 1e-10

    positive = t.is_nonnegative(tol)
    pair_reports = [frechet_pair_check(pt, tol) for pt in pair_tables]
    return TripleFrechetReport(
        lower_holds=bool(lower_ok),
        upper_holds=bool(upper_ok),
        positive=positive,
        upper_equivalent=bool(upper_ok) == positive,
        lower_implied=(not positive) or bool(lower_ok),
        rewritten_consistent=bool(consistent),
        pair_reports=pair_reports,
    )


def pair_tables_of(u, dirs, c: CorrelatorSpec):
    """The three pair tables implied by a triple's directions and correlators."""
    return [
        noncommuting_pair_table(u, dirs[i], dirs[j], CorrelatorSpec.for_pair(c.pair[(i, j)]))
        for i, j in PAIRS
    ]


def random_unit(rng, size=None):
    shape = (3,) if size is None else (size, 3)
    v = rng.standard_normal(shape)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def random_in_ball(rng):
    return random_unit(rng) * rng.random() ** (1 / 3)


def _blended_triple(rng, u, dirs):
    # pull random correlators toward the product distribution so that both
    # positive and non-positive tables show up in a run
    lam = rng.uniform(0, 1)
    ind = independence_correlators(u, dirs)
    c = (1 - lam) * np.array([ind.pair[(0, 1)], ind.pair[(0, 2)], ind.pair[(1, 2)], ind.triple])
    c += lam * rng.uniform(-1, 1, 4)
    return CorrelatorSpec.for_triple(*c)


@dataclass
class PropertyRun:
    instances: int
    seed: int
    pair_counterexamples: int
    pair_positive: int
    triple_counterexamples: int
    triple_positive: int
    lower_only_witnesses: int
    pure_instances: int
    pure_collapse_error: float

    @property
    def counterexamples(self):
        return self.pair_counterexamples + self.triple_counterexamples

    def to_dict(self):
        d = dict(self.__dict__)
        d["counterexamples"] = self.counterexamples
        return d


def frechet_property_run(instances=500, seed=7, pure=100):
    """Random search for tables where the Frechet and positivity verdicts disagree.

    Pairs: both verdicts must coincide.  Triples: upper bounds must coincide
    with positivity and the lower bounds must follow from it; tables where
    only the lower bounds hold are counted as witnesses that they are weaker.
    Pure states: the positivity interval must shrink to the product value.
    """
    rng = np.random.default_rng(seed)
    pair_bad = pair_pos = 0
    for _ in range(instances):
        u = random_in_ball(rng)
        a0, a1 = random_unit(rng), random_unit(rng)
        c = CorrelatorSpec.for_pair(rng.uniform(-1, 1))
        rep = frechet_pair_check(noncommuting_pair_table(u, a0, a1, c))
        pair_bad += not rep.equivalent
        pair_pos += rep.positive
    triple_bad = triple_pos = weaker = 0
    for _ in range(instances):
        u = random_in_ball(rng)
        dirs = random_unit(rng, 3)
        c = _blended_triple(rng, u, dirs)
        rep = frechet_triple_check(noncommuting_triple_table(u, dirs, c), pair_tables_of(u, dirs, c))
        triple_bad += not (rep.upper_equivalent and rep.lower_implied and rep.rewritten_consistent)
        triple_pos += rep.positive
        weaker += rep.lower_holds and not rep.positive
    collapse = 0.0
    for _ in range(pure):
        u = random_unit(rng)
        a0 = u if rng.random() < 0.5 else -u
        a1 = random_unit(rng)
        iv = positivity_interval(u, a0, a1)
        indep = (a0 @ u) * (a1 @ u)
        collapse = max(collapse, abs(iv.lo - indep), abs(iv.hi - indep))
    return PropertyRun(instances, seed, pair_bad, pair_pos, triple_bad, triple_pos, weaker, pure, float(collapse))
