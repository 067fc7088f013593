"""Weak orthogonal greedy approximation in discrete sample space.

The Hilbert space is C^m with inner product (1/m) sum f_i conj(g_i), the
dictionary is the columns of a sampled system.  Each step selects a column
whose inner product with the residual is within the weakness factor t of
the best one, then re-projects the target onto everything selected so far.
The default selection is the exact argmax (valid for every t <= 1, lowest
index on ties); an adversarial mode picks the lowest-index column that
merely clears the t threshold, which exercises the weak guarantee.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .discretization import DEFAULT_SUBSET_CAP, SampledSystem

# Relative stopping tolerance: iteration halts once the best inner product
# falls below this multiple of the initial norm.
STOP_REL_TOL = 1e-13


@dataclass(frozen=True)
class DiscreteHilbert:
    """C^m with the (1/m)-weighted inner product and a column dictionary."""

    matrix: np.ndarray
    sampled: SampledSystem | None = None

    @classmethod
    def from_sampled(cls, sampled: SampledSystem) -> "DiscreteHilbert":
        return cls(sampled.matrix, sampled)

    @property
    def m(self) -> int:
        return self.matrix.shape[0]

    @property
    def size(self) -> int:
        return self.matrix.shape[1]

    def inner(self, f, g) -> complex:
        return complex(np.vdot(g, f) / self.m)

    def norm(self, f) -> float:
        return float(np.linalg.norm(f) / math.sqrt(self.m))


@dataclass(frozen=True)
class ProjectionResult:
    coefficients: np.ndarray
    residual: np.ndarray
    rank_deficient: bool


def project(h: DiscreteHilbert, target, support) -> ProjectionResult:
    """Orthogonal projection of target onto the span of support columns.

    Solved from scratch by least squares; a rank-deficient support is
    flagged and the minimum-norm solution returned.
    """
    support = list(support)
    if len(set(support)) != len(support):
        raise ValueError("support indices must be distinct")
    target = np.asarray(target, dtype=complex)
    if not support:
        return ProjectionResult(np.zeros(0, dtype=complex), target.copy(), False)
    cols = h.matrix[:, support]
    coeff, _, rank, _ = np.linalg.lstsq(cols, target, rcond=None)
    return ProjectionResult(coeff, target - cols @ coeff, rank < len(support))


@dataclass(frozen=True)
class WompTrace:
    """Per-step record of a greedy run.

    residual_norms has length steps+1 and starts at the norm of the
    target; coefficients are least-squares coefficients of the final
    selection with respect to the original (unnormalized) columns.
    """

    t: float
    selected: tuple
    residual_norms: tuple
    coefficients: np.ndarray
    chosen_ips: tuple
    max_ips: tuple
    rank_deficient: bool = False

    CSV_HEADER = "step,chosen_index,chosen_ip,max_ip,residual_norm"

    @property
    def steps(self) -> int:
        return len(self.selected)

    def csv_rows(self):
        for k in range(self.steps):
            yield (f"{k + 1},{self.selected[k]},{self.chosen_ips[k]:.12g},"
                   f"{self.max_ips[k]:.12g},{self.residual_norms[k + 1]:.12g}")


def write_trace_csv(trace: WompTrace, path) -> None:
    with open(path, "w") as fh:
        fh.write(WompTrace.CSV_HEADER + "\n")
        for row in trace.csv_rows():
            fh.write(row + "\n")


def womp(h: DiscreteHilbert, target, t: float = 1.0, steps: int | None = None,
         selection: str = "argmax") -> WompTrace:
    """Weak orthogonal matching pursuit on the sampled dictionary.

    Parameters
    ----------
    h : DiscreteHilbert
    target : array of m samples
    t : float
        Weakness threshold in (0, 1].
    steps : int
        Step budget K <= min(m, dictionary size).  Stops early once the
        best remaining inner product drops below the stopping tolerance
        relative to the initial norm.
    selection : str
        "argmax" picks the largest inner product (lowest index on ties);
        "adversarial-weak" picks the lowest index clearing t * max.

    Selection always happens against columns normalized in the discrete
    norm, so the weakness comparison is scale-free.
    """
    if not 0 < t <= 1:
        raise ValueError("t must lie in (0, 1]")
    if selection not in ("argmax", "adversarial-weak"):
        raise ValueError(f"unknown selection rule {selection!r}")
    if steps is None:
        steps = min(h.m, h.size)
    if steps > min(h.m, h.size):
        raise ValueError(f"step budget {steps} exceeds min(m, N) = {min(h.m, h.size)}")

    target = np.asarray(target, dtype=complex)
    col_norms = np.linalg.norm(h.matrix, axis=0) / math.sqrt(h.m)
    if np.any(col_norms < 1e-15):
        raise ValueError("dictionary contains a zero column")
    normalized = h.matrix / col_norms

    norm0 = h.norm(target)
    residual = target.copy()
    selected = []
    res_norms = [norm0]
    chosen_ips = []
    max_ips = []
    rank_flag = False

    for _ in range(steps):
        ips = normalized.conj().T @ residual / h.m
        abs_ips = np.abs(ips)
        max_ip = float(abs_ips.max())
        if max_ip <= STOP_REL_TOL * norm0:
            break
        if selection == "argmax":
            pick = int(np.argmax(abs_ips))
        else:
            pick = int(np.argmax(abs_ips >= t * max_ip))
        selected.append(pick)
        proj = project(h, target, selected)
        residual = proj.residual
        rank_flag = rank_flag or proj.rank_deficient
        res_norms.append(h.norm(residual))
        chosen_ips.append(float(abs_ips[pick]))
        max_ips.append(max_ip)

    final = project(h, target, selected)
    return WompTrace(t=t, selected=tuple(selected),
                     residual_norms=tuple(res_norms),
                     coefficients=final.coefficients,
                     chosen_ips=tuple(chosen_ips), max_ips=tuple(max_ips),
                     rank_deficient=rank_flag or final.rank_deficient)


@dataclass(frozen=True)
class BestTermResult:
    """Best v-term approximation from exhaustive support enumeration."""

    sigma: float
    support: tuple
    coefficients: np.ndarray
    tag: str  # "exact" for least squares, "approximate" for p != 2 descent


def best_vterm(h: DiscreteHilbert, target, v: int, p: float = 2.0,
               subset_cap: int = DEFAULT_SUBSET_CAP,
               descent_tol: float = 1e-8) -> BestTermResult:
    """sigma_v of the target over the sampled dictionary, by enumeration.

    Every support of size v is tried; p = 2 uses exact least squares, even
    p > 2 runs smooth convex descent per support (tagged approximate).
    Ties keep the lexicographically first support.  v = 0 returns the norm
    of the target itself.
    """
    target = np.asarray(target, dtype=complex)
    n = h.size
    if v < 0:
        raise ValueError("v must be >= 0")
    if v == 0:
        if p == 2.0:
            return BestTermResult(h.norm(target), (), np.zeros(0, complex), "exact")
        sigma = float(np.mean(np.abs(target) ** p) ** (1 / p))
        return BestTermResult(sigma, (), np.zeros(0, complex), "exact")
    if v > n:
        raise ValueError(f"v exceeds dictionary size {n}")
    count = math.comb(n, v)
    if count > subset_cap:
        raise ValueError(f"C({n},{v}) = {count} supports exceed cap {subset_cap}")
    if p != 2.0 and (p < 2 or p != int(p) or int(p) % 2):
        raise ValueError("only p = 2 or even integer p > 2 are supported")

    best = None
    for support in itertools.combinations(range(n), v):
        if p == 2.0:
            proj = project(h, target, support)
            err = h.norm(proj.residual)
            coeff = proj.coefficients
        else:
            err, coeff = _lp_fit(h, target, support, p, descent_tol)
        if best is None or err < best[0]:
            best = (err, support, coeff)
    tag = "exact" if p == 2.0 else "approximate"
    return BestTermResult(float(best[0]), tuple(best[1]), best[2], tag)


def _lp_fit(h, target, support, p, tol):
    """Minimize the discrete Lp error over coefficients on one support."""
    cols = h.matrix[:, list(support)]
    v = cols.shape[1]
    start = np.linalg.lstsq(cols, target, rcond=None)[0]

    def objective(x):
        c = x[:v] + 1j * x[v:]
        r = target - cols @ c
        a2 = (r * r.conj()).real
        val = float(np.mean(a2 ** (p / 2)))
        # gradient wrt conj(c) is -(p/2) cols^H (|r|^(p-2) r) / m
        g = -(p / 2) * (cols.conj().T @ (a2 ** (p / 2 - 1) * r)) / h.m
        grad = 2 * np.concatenate([g.real, g.imag])
        return val, grad

    x0 = np.concatenate([start.real, start.imag])
    res = scipy.optimize.minimize(objective, x0, jac=True, method="L-BFGS-B",
                                  options={"gtol": tol, "ftol": tol * 1e-2})
    c = res.x[:v] + 1j * res.x[v:]
    err = float(np.mean(np.abs(target - cols @ c) ** p) ** (1 / p))
    return err, c
