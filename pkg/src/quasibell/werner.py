"""Werner-state noise: ``rho(z) = (1-z) I/4 + z |psi><psi|`` scales every singlet correlator by ``z``."""
import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import NoViolation, OutOfRange
from .quasi_bell import QuasiBellInstance, quantum_value, werner_value

# Published locality / nonlocality edges for the Werner state with standard
# LHV models.  Shown as annotations only; nothing here computes them.
LITERATURE_ANNOTATIONS = {
    "chsh_nonlocal_above": 1 / np.sqrt(2),
    "vertesi_nonlocal_above": 0.7056,
    "brierley_nonlocal_above": 0.7012,
    "hirsch_local_up_to": 0.6829,
    "toner_local_up_to": 0.6595,
}
CAVEAT = (
    "Standard local hidden variable models do not assign joint probabilities to "
    "noncommuting observables, so this threshold is not directly comparable with "
    "their locality ranges."
)


@dataclass
class WernerSweep:
    N: int
    instance: QuasiBellInstance
    z_grid: np.ndarray
    values: np.ndarray
    threshold: float

    def violated(self):
        return self.values > 1.0

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["z", "value", "violated"])
        for z, v, flag in zip(self.z_grid, self.values, self.violated()):
            w.writerow([repr(float(z)), repr(float(v)), str(bool(flag)).lower()])
        return buf.getvalue()

    def to_dict(self):
        return {
            "N": self.N,
            "threshold": self.threshold,
            "z_grid": self.z_grid.tolist(),
            "values": self.values.tolist(),
        }


def violation_threshold(N, inst: QuasiBellInstance, check=True):
    """Smallest ``z`` above which the Werner state violates ``|<K_N>| <= 1``."""
    if inst.N != N:
        raise ValueError(f"instance has order {inst.N}, expected {N}")
    q = abs(quantum_value(inst))
    if q <= 1.0 + 1e-12:
        raise NoViolation(f"|<K_{N}>| = {q:.12g} does not exceed the classical bound")
    z = 1.0 / q
    if check:
        root = brentq(lambda t: abs(werner_value(inst, t)) - 1.0, 0.0, 1.0, xtol=1e-14, rtol=1e-14)
        if abs(root - z) > 1e-9:
            raise ArithmeticError(f"bisection threshold {root} disagrees with 1/|q| = {z}")
    return z


def sweep(N, inst: QuasiBellInstance, grid):
    grid = np.asarray(grid, dtype=float)
    if grid.size and (grid.min() < 0 or grid.max() > 1):
        raise OutOfRange("z grid must lie in [0, 1]")
    q = abs(quantum_value(inst))
    values = grid * q
    try:
        thr = violation_threshold(N, inst, check=False)
    except NoViolation:
        thr = float("nan")
    return WernerSweep(N, inst, grid, values, thr)


def parse_grid(spec):
    """``"start:stop:step"`` (inclusive of stop, within rounding) -> array."""
    start, stop, step = (float(x) for x in spec.split(":"))
    if step <= 0:
        raise ValueError("grid step must be positive")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(count), 12)
