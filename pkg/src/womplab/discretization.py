"""Sampling discretization certificates for sparse trigonometric spans.

The central question: for which point sets does the empirical mean of
|f|^p reproduce the continuous Lp norm, uniformly over all u-sparse
combinations from a fixed dictionary?  For p = 2 this is decided exactly
by extreme eigenvalues of per-support Gram matrices, enumerated
exhaustively; for other p only randomized searches for violating
witnesses are offered, and their output is a pair of empirical bounds,
never a certificate.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .trig import TrigPolynomial, TrigSystem, lp_norm

# Two-sided comparison constants: the discrete p-th power must stay within
# [LOWER_CONST, UPPER_CONST] times the continuous one.
LOWER_CONST = 0.5
UPPER_CONST = 1.5

DEFAULT_SUBSET_CAP = 2_000_000


@dataclass(frozen=True)
class PointSet:
    """Sample points on the torus with a provenance tag.

    provenance is one of "grid", "random(<seed>)", or "explicit".  Empty
    point sets (m = 0) are legal; they only arise in adversarial
    constructions, every sampling routine produces m >= 1.
    """

    dim: int
    points: np.ndarray
    provenance: str = "explicit"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, self.dim)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def m(self) -> int:
        return self.points.shape[0]

    def seed(self):
        """Seed parsed from a random(...) provenance tag, else None."""
        match = re.fullmatch(r"random\((\d+)\)", self.provenance)
        return int(match.group(1)) if match else None


def draw_points(m: int, d: int, seed: int) -> PointSet:
    """Draw m independent uniform points on [0, 2 pi)^d."""
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = np.random.default_rng(seed)
    return PointSet(d, rng.uniform(0.0, 2.0 * np.pi, size=(m, d)), f"random({seed})")


def uniform_grid_points(n: int, d: int, max_points: int = DEFAULT_SUBSET_CAP) -> PointSet:
    """Tensor grid {2 pi t / n}^d with n points per dimension."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n ** d > max_points:
        raise ValueError(f"grid of {n ** d} points exceeds cap {max_points}")
    axis = 2.0 * np.pi * np.arange(n) / n
    if d == 1:
        pts = axis.reshape(-1, 1)
    else:
        grids = np.meshgrid(*([axis] * d), indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
    return PointSet(d, pts, "grid")


def write_pointset(ps: PointSet, path) -> None:
    """Write 'dim d m' then one whitespace-separated point per line."""
    with open(path, "w") as fh:
        fh.write(f"dim {ps.dim} {ps.m}\n")
        for row in ps.points:
            fh.write(" ".join(f"{x:.17g}" for x in row) + "\n")


def read_pointset(path) -> PointSet:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 3 or header[0] != "dim":
            raise ValueError("bad point set header")
        d, m = int(header[1]), int(header[2])
        rows = [[float(x) for x in fh.readline().split()] for _ in range(m)]
    pts = np.array(rows, dtype=float).reshape(m, d)
    return PointSet(d, pts, "explicit")


@dataclass(frozen=True)
class SampledSystem:
    """A dictionary evaluated at sample points.

    matrix[i, j] = (j-th exponential)(i-th point); the discrete Gram
    (1/m) * matrix^H matrix drives every p = 2 computation here.
    """

    system: TrigSystem
    pointset: PointSet
    matrix: np.ndarray

    @property
    def m(self) -> int:
        return self.pointset.m

    @property
    def size(self) -> int:
        return self.system.size

    def gram(self) -> np.ndarray:
        if self.m == 0:
            raise ValueError("empty point set has no discrete Gram")
        return (self.matrix.conj().T @ self.matrix) / self.m


def build_sampled(system: TrigSystem, pointset: PointSet) -> SampledSystem:
    if system.dim != pointset.dim:
        raise ValueError("system and point set dimensions differ")
    return SampledSystem(system, pointset, system.evaluate_at(pointset.points))


@dataclass(frozen=True)
class DiscretizationReport:
    """Outcome of a u-sparse discretization check.

    c_low and c_high are the extreme ratios of the discrete p-th power to
    the continuous one.  With an exhaustive p = 2 method they are exact
    over all supports of size u (smaller supports interlace, so they are
    covered); with a randomized method they are bounds from the witnesses
    found, and `holds` only means no violation was discovered.
    """

    m: int
    size: int
    u: int
    p: float
    mode: str
    holds: bool
    c_low: float
    c_high: float
    worst_support: tuple
    method: str
    seed: int | None = None

    CSV_HEADER = "m,N,u,p,mode,holds,c_low,c_high,method,seed"

    def csv_row(self) -> str:
        seed = "" if self.seed is None else str(self.seed)
        return (f"{self.m},{self.size},{self.u},{self.p:g},{self.mode},"
                f"{self.holds},{self.c_low:.12g},{self.c_high:.12g},"
                f"{self.method},{seed}")


def _support_iter(n, u, method, trials, rng):
    if method == "exhaustive":
        yield from itertools.combinations(range(n), u)
    else:
        for _ in range(trials):
            yield tuple(sorted(rng.choice(n, size=u, replace=False).tolist()))


def _holds(mode: str, c_low: float, c_high: float, p: float, d_constant) -> bool:
    if mode == "two-sided":
        return LOWER_CONST <= c_low and c_high <= UPPER_CONST
    # one-sided-lower: ||f||_p <= D * (discrete mean)^(1/p), i.e. the ratio
    # of p-th powers must stay above D^(-p)
    return c_low >= d_constant ** (-p)


def check_usd(sampled: SampledSystem, u: int, p: float = 2.0,
              mode: str = "two-sided", method: str = "exhaustive",
              trials: int = 500, seed: int = 0,
              subset_cap: int = DEFAULT_SUBSET_CAP,
              d_constant: float | None = None,
              oversample: int = 8) -> DiscretizationReport:
    """Check u-sparse universal discretization of the sampled dictionary.

    Parameters
    ----------
    sampled : SampledSystem
    u : int
        Sparsity level, 1 <= u <= dictionary size.
    p : float
        Norm exponent; p = 2 supports exhaustive certification, any other
        p requires a randomized method and yields empirical bounds only.
    mode : str
        "two-sided" compares against [1/2, 3/2]; "one-sided-lower" only
        requires the lower direction with the supplied constant D
        (default 2^(1/p), matching the two-sided lower constant).
    method : str
        "exhaustive" or "randomized"; exhaustive enumerates all C(N, u)
        supports and refuses to start past subset_cap.
    trials, seed
        Randomized budget: number of supports drawn and the draw seed.

    Returns
    -------
    DiscretizationReport
        worst_support is the first support (in lexicographic order of
        enumeration) attaining whichever extreme sits closer to violating
        its constraint.
    """
    n = sampled.size
    if not 1 <= u <= n:
        raise ValueError(f"u must lie in [1, {n}]")
    if mode not in ("two-sided", "one-sided-lower"):
        raise ValueError(f"unknown mode {mode!r}")
    if method not in ("exhaustive", "randomized"):
        raise ValueError(f"unknown method {method!r}")
    if d_constant is None:
        d_constant = 2.0 ** (1.0 / p)
    if p == 2.0:
        report = _check_usd_l2(sampled, u, mode, method, trials, seed,
                               subset_cap, d_constant)
    else:
        if method == "exhaustive":
            raise ValueError("p != 2 checks are randomized searches only")
        report = _check_usd_lp(sampled, u, p, mode, trials, seed, d_constant,
                               oversample)
    return report


def _check_usd_l2(sampled, u, mode, method, trials, seed, subset_cap, d_constant):
    n = sampled.size
    count = math.comb(n, u)
    if method == "exhaustive" and count > subset_cap:
        raise ValueError(
            f"C({n},{u}) = {count} supports exceed the subset cap {subset_cap}; "
            "use a randomized budget")
    gram = sampled.gram() if sampled.m else np.zeros((n, n), dtype=complex)
    rng = np.random.default_rng(seed)

    c_low, c_high = math.inf, -math.inf
    arg_low = arg_high = None
    batch = []
    chunk = 4096

    def flush(batch):
        nonlocal c_low, c_high, arg_low, arg_high
        if not batch:
            return
        idx = np.array(batch)
        sub = gram[idx[:, :, None], idx[:, None, :]]
        eig = np.linalg.eigvalsh(sub)
        lo, hi = eig[:, 0], eig[:, -1]
        i = int(np.argmin(lo))
        if lo[i] < c_low:
            c_low, arg_low = float(lo[i]), tuple(batch[i])
        i = int(np.argmax(hi))
        if hi[i] > c_high:
            c_high, arg_high = float(hi[i]), tuple(batch[i])

    for support in _support_iter(n, u, method, trials, rng):
        batch.append(support)
        if len(batch) >= chunk:
            flush(batch)
            batch = []
    flush(batch)

    method_tag = "exhaustive" if method == "exhaustive" else f"randomized({trials})"
    used_seed = sampled.pointset.seed()
    if method != "exhaustive" and used_seed is None:
        used_seed = seed
    worst = _pick_worst(mode, c_low, arg_low, c_high, arg_high)
    return DiscretizationReport(
        m=sampled.m, size=n, u=u, p=2.0, mode=mode,
        holds=_holds(mode, c_low, c_high, 2.0, d_constant),
        c_low=c_low, c_high=c_high, worst_support=worst,
        method=method_tag, seed=used_seed)


def _pick_worst(mode, c_low, arg_low, c_high, arg_high):
    if mode == "one-sided-lower":
        return arg_low
    # pick the side with the larger violation (or the nearer miss)
    if (LOWER_CONST - c_low) >= (c_high - UPPER_CONST):
        return arg_low
    return arg_high


def _check_usd_lp(sampled, u, p, mode, trials, seed, d_constant, oversample):
    """Randomized witness search for p != 2: random sparse combinations with
    coordinatewise polishing of the extreme ratio candidates."""
    n = sampled.size
    m = sampled.m
    rng = np.random.default_rng(seed)
    indices = sampled.system.indices()

    def ratio(support, coeff):
        vals = sampled.matrix[:, support] @ coeff
        disc = float(np.mean(np.abs(vals) ** p))
        poly = TrigPolynomial(sampled.system.dim,
                              {indices[c]: w for c, w in zip(support, coeff)})
        cont = lp_norm(poly, p, "mu", oversample=oversample) ** p
        return disc / cont

    candidates = []
    for _ in range(trials):
        support = tuple(sorted(rng.choice(n, size=u, replace=False).tolist()))
        coeff = rng.standard_normal(u) + 1j * rng.standard_normal(u)
        candidates.append((ratio(support, coeff), support, coeff))
    lows = sorted(candidates, key=lambda t: t[0])
    best_low, best_high = lows[0], lows[-1]

    def polish(cand, sign):
        r0, support, coeff = cand
        coeff = coeff.copy()
        step = 0.5
        for _ in range(6):
            improved = False
            for i in range(u):
                for delta in (step, -step, 1j * step, -1j * step):
                    trial = coeff.copy()
                    trial[i] = trial[i] + delta * max(1.0, abs(trial[i]))
                    r = ratio(support, trial)
                    if sign * r < sign * r0:
                        r0, coeff, improved = r, trial, True
            if not improved:
                step /= 2
        return r0, support

    c_low, arg_low = polish(best_low, +1)
    c_high, arg_high = polish(best_high, -1)
    worst = _pick_worst(mode, c_low, arg_low, c_high, arg_high)
    used_seed = sampled.pointset.seed()
    if used_seed is None:
        used_seed = seed
    return DiscretizationReport(
        m=m, size=n, u=u, p=float(p), mode=mode,
        holds=_holds(mode, c_low, c_high, p, d_constant),
        c_low=float(c_low), c_high=float(c_high), worst_support=worst,
        method=f"randomized({trials})", seed=used_seed)


def write_reports_csv(reports, path) -> None:
    with open(path, "w") as fh:
        fh.write(DiscretizationReport.CSV_HEADER + "\n")
        for rep in reports:
            fh.write(rep.csv_row() + "\n")


@dataclass(frozen=True)
class TaggedValue:
    """A numeric estimate with a provenance tag."""

    value: float
    tag: str  # "exact" | "empirical-lower-bound" | "theoretical-upper-bound"


@dataclass(frozen=True)
class UnconditionalityEstimate:
    value: float
    tag: str
    support: tuple = ()
    complement: tuple = ()


def riesz_constants(target) -> tuple:
    """(R1, R2, tag): frame-style bounds of the dictionary.

    For the exponential system under the continuous measure these are
    exactly (1, 1) by orthonormality.  For a sampled dictionary they are
    the square roots of the extreme eigenvalues of the full discrete Gram,
    exact for that finite sample space.
    """
    if isinstance(target, TrigSystem):
        return TaggedValue(1.0, "exact"), TaggedValue(1.0, "exact")
    eig = np.linalg.eigvalsh(target.gram())
    lo = math.sqrt(max(float(eig[0]), 0.0))
    hi = math.sqrt(float(eig[-1]))
    return TaggedValue(lo, "exact"), TaggedValue(hi, "exact")


def check_up(target, u: int, d_cap: int, method: str = "exhaustive",
             trials: int = 200, seed: int = 0,
             pair_cap: int = 200_000) -> UnconditionalityEstimate:
    """Estimate the unconditionality constant U at sparsity u and span cap D.

    U is the largest ratio of ||f_A|| to the distance from f_A to the span
    of a disjoint index set J, over |A| <= u and |A| + |J| <= d_cap.  Only
    maximal J are enumerated since shrinking J can only shrink the ratio.
    An orthonormal continuous dictionary gives exactly 1.
    """
    if not 1 <= u <= d_cap:
        raise ValueError("need 1 <= u <= d_cap")
    if isinstance(target, TrigSystem):
        return UnconditionalityEstimate(1.0, "exact")
    n = target.size
    gram = target.gram()
    rng = np.random.default_rng(seed)

    def pairs():
        for a in range(1, u + 1):
            jsize = min(d_cap - a, n - a)
            if jsize < 0:
                continue
            if method == "exhaustive":
                for A in itertools.combinations(range(n), a):
                    rest = [i for i in range(n) if i not in A]
                    for J in itertools.combinations(rest, jsize):
                        yield A, J
            else:
                for _ in range(trials):
                    perm = rng.permutation(n)
                    yield tuple(sorted(perm[:a])), tuple(sorted(perm[a:a + jsize]))

    if method == "exhaustive":
        total = sum(
            math.comb(n, a) * math.comb(n - a, min(d_cap - a, n - a))
            for a in range(1, u + 1))
        if total > pair_cap:
            raise ValueError(f"{total} support pairs exceed cap {pair_cap}; "
                             "use a randomized budget")

    best = UnconditionalityEstimate(0.0, "unset")
    for A, J in pairs():
        gaa = gram[np.ix_(A, A)]
        if J:
            gaj = gram[np.ix_(A, J)]
            gjj = gram[np.ix_(J, J)]
            schur = gaa - gaj @ np.linalg.pinv(gjj) @ gaj.conj().T
        else:
            schur = gaa
        schur = 0.5 * (schur + schur.conj().T)
        floor = 1e-12 * max(1.0, float(np.abs(gaa).max()))
        if float(np.linalg.eigvalsh(schur)[0]) <= floor:
            value = math.inf
        else:
            value = math.sqrt(float(scipy.linalg.eigh(
                gaa, schur, eigvals_only=True)[-1]))
        if value > best.value:
            tag = "exact" if method == "exhaustive" else "empirical-lower-bound"
            best = UnconditionalityEstimate(value, tag, tuple(A), tuple(J))
            if value is math.inf:
                break
    return best


@dataclass(frozen=True)
class NikolskiiEstimate:
    theory: float
    empirical: float
    u: int
    p: float


def nikolskii_constant(system: TrigSystem, u: int, p: float,
                       trials: int = 200, seed: int = 0,
                       oversample: int = 8, tol: float = 1e-9) -> NikolskiiEstimate:
    """Sparse Nikolskii constant H with ||f||_p <= H ||f||_2 for u-sparse f.

    The theoretical value u^(1/2 - 1/p) follows from Cauchy-Schwarz through
    the sup norm (the unimodular system has R2 = 1).  The empirical value
    is the largest ratio over random u-sparse draws; exceeding the theory
    by more than the tolerance indicates a quadrature bug and raises.
    """
    if p < 2:
        raise ValueError("p must be >= 2")
    if not 1 <= u <= system.size:
        raise ValueError("u out of range")
    theory = float(u ** (0.5 - 1.0 / p))
    rng = np.random.default_rng(seed)
    indices = system.indices()
    worst = 0.0
    for _ in range(trials):
        support = rng.choice(system.size, size=u, replace=False)
        coeff = rng.standard_normal(u) + 1j * rng.standard_normal(u)
        poly = TrigPolynomial(system.dim,
                              {indices[c]: w for c, w in zip(support, coeff)})
        ratio = lp_norm(poly, p, "mu", oversample=oversample) / poly.l2_norm()
        worst = max(worst, float(ratio))
    if worst > theory * (1 + tol):
        raise RuntimeError(
            f"empirical Nikolskii ratio {worst} exceeds theory {theory}")
    return NikolskiiEstimate(theory, worst, u, float(p))


@dataclass(frozen=True)
class ConstantsReport:
    """Bundle of dictionary constants with provenance tags.

    Invariants enforced: R1 <= R2, the Bessel-type constant is at least
    R1^(-2), and the Nikolskii constant is at least 1.
    """

    r1: TaggedValue
    r2: TaggedValue
    bessel: TaggedValue
    up: UnconditionalityEstimate
    nikolskii: NikolskiiEstimate

    def __post_init__(self):
        if self.r1.value > self.r2.value * (1 + 1e-12):
            raise ValueError("R1 must not exceed R2")
        if self.r1.value > 0 and self.bessel.value < self.r1.value ** (-2) * (1 - 1e-12):
            raise ValueError("Bessel constant below R1^(-2)")
        if self.nikolskii.theory < 1:
            raise ValueError("Nikolskii constant below 1")


def constants_report(system: TrigSystem, sampled: SampledSystem | None,
                     u: int, p: float, d_cap: int | None = None,
                     trials: int = 200, seed: int = 0) -> ConstantsReport:
    """Assemble the constants the recovery guarantees depend on."""
    r1, r2 = riesz_constants(system)
    bessel = TaggedValue(r1.value ** (-2), "exact")
    if sampled is not None:
        up = check_up(sampled, u, d_cap if d_cap is not None else 2 * u,
                      method="randomized", trials=trials, seed=seed)
    else:
        up = check_up(system, u, d_cap if d_cap is not None else 2 * u)
    nik = nikolskii_constant(system, u, max(p, 2.0), trials=trials, seed=seed)
    return ConstantsReport(r1, r2, bessel, up, nik)
