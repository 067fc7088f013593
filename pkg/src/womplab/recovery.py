"""End-to-end sampling recovery and the fooling lower-bound construction.

recover() runs the full pipeline: certify the point set (optional), sample
the target, run the weak orthogonal greedy for c*v steps, rebuild a
continuous polynomial, and measure its Lp error against best-v-term
references.  make_fooling() builds the adversarial pair: a polynomial that
vanishes on every sample point yet has sup norm comparable to its degree
budget, so no sample-based method can distinguish it from its negative.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .discretization import (DEFAULT_SUBSET_CAP, DiscretizationReport, PointSet,
                             SampledSystem, build_sampled, check_usd)
from .greedy import DiscreteHilbert, WompTrace, best_vterm, womp
from .trig import TrigPolynomial, TrigSystem, fejer_kernel, lp_norm

# A discrete sigma_v below this multiple of the target norm counts as exact
# recovery; ratios against it are reported as flags, not numbers.
EXACT_RECOVERY_REL_TOL = 1e-12


def reconstruct(system: TrigSystem, columns, coefficients) -> TrigPolynomial:
    """Polynomial with the given coefficients on the system's columns."""
    coeffs = {}
    for col, c in zip(columns, coefficients):
        coeffs[system.index_at(int(col))] = complex(c)
    return TrigPolynomial(system.dim, coeffs)


def best_vterm_l2_muxi(f0: TrigPolynomial, sampled: SampledSystem, v: int,
                       subset_cap: int = DEFAULT_SUBSET_CAP):
    """Best v-term approximation in the mixture norm L2(mu_xi), exhaustive.

    The mixture Gram is (I + discrete Gram)/2, so each support admits an
    exact normal-equations solve.  Returns (error, support, approximant).
    Ties keep the lexicographically first support.
    """
    n = sampled.size
    if v < 0:
        raise ValueError("v must be >= 0")
    count = math.comb(n, v)
    if count > subset_cap:
        raise ValueError(f"C({n},{v}) = {count} supports exceed cap {subset_cap}")
    indices = sampled.system.indices()
    y = f0.eval(sampled.pointset.points)
    a_box = np.array([f0.coeffs.get(k, 0.0) for k in indices])
    norm2_sq = 0.5 * (f0.l2_norm() ** 2 + float(np.mean(np.abs(y) ** 2)))
    if v == 0:
        return math.sqrt(norm2_sq), (), TrigPolynomial(f0.dim, {})
    gram = 0.5 * (np.eye(n) + sampled.gram())
    rhs_disc = sampled.matrix.conj().T @ y / sampled.m
    rhs = 0.5 * (a_box + rhs_disc)

    best = None
    for support in itertools.combinations(range(n), v):
        idx = list(support)
        g = gram[np.ix_(idx, idx)]
        b = rhs[idx]
        c = np.linalg.solve(g, b)
        err_sq = max(norm2_sq - float(np.real(np.vdot(c, b))), 0.0)
        if best is None or err_sq < best[0]:
            best = (err_sq, support, c)
    err_sq, support, c = best
    approx = reconstruct(sampled.system, support, c)
    return math.sqrt(err_sq), tuple(support), approx


@dataclass(frozen=True)
class RecoveryReport:
    """Everything one recovery run produced, plus the config echo."""

    d: int
    size: int
    m: int
    v: int
    u: int
    p: float
    t: float
    c_emp: float
    seed: int | None
    certificate: DiscretizationReport | None
    cert_warning: str | None
    error_lp_mu: float
    sigma_discrete: float | None
    sigma_ref: float | None
    ratio_discrete: float | None
    ratio_pipeline: float | None
    exact_recovery: bool
    trace: WompTrace | None
    approximant: TrigPolynomial | None = field(repr=False, default=None)
    oversample: int = 8

    CSV_HEADER = ("seed,d,N,m,v,u,p,t,c_emp,cert_holds,c_low,c_high,"
                  "error_Lp_mu,sigma_ref,ratio,steps_used")

    def csv_row(self) -> str:
        cert = self.certificate
        holds = "" if cert is None else str(cert.holds)
        c_low = "" if cert is None else f"{cert.c_low:.12g}"
        c_high = "" if cert is None else f"{cert.c_high:.12g}"
        sigma = "" if self.sigma_ref is None else f"{self.sigma_ref:.12g}"
        ratio = "" if self.ratio_pipeline is None else f"{self.ratio_pipeline:.12g}"
        seed = "" if self.seed is None else str(self.seed)
        steps = 0 if self.trace is None else self.trace.steps
        return (f"{seed},{self.d},{self.size},{self.m},{self.v},{self.u},"
                f"{self.p:g},{self.t:g},{self.c_emp:g},{holds},{c_low},{c_high},"
                f"{self.error_lp_mu:.12g},{sigma},{ratio},{steps}")


def write_recovery_csv(reports, path) -> None:
    with open(path, "w") as fh:
        fh.write(RecoveryReport.CSV_HEADER + "\n")
        for rep in reports:
            fh.write(rep.csv_row() + "\n")


def _ratio(err, sigma, scale):
    """(err/sigma, exact_flag); sigma near zero means exact recovery."""
    if sigma is None:
        return None, False
    if sigma <= EXACT_RECOVERY_REL_TOL * max(1.0, scale):
        return None, True
    return err / sigma, False


def recover(f0: TrigPolynomial, system: TrigSystem, xi: PointSet,
            v: int, p: float = 2.0, t: float = 1.0, c_emp: float = 2.0,
            certificate: DiscretizationReport | None = None,
            certify: bool = True, compute_sigma: bool = True,
            selection: str = "argmax", oversample: int = 8,
            subset_cap: int = DEFAULT_SUBSET_CAP,
            seed: int | None = None) -> RecoveryReport:
    """Sample f0 at xi, greedily recover with c_emp * v steps, measure in Lp.

    The u-sparse two-sided L2 certificate with u = ceil((1 + c_emp) v) is
    computed when not supplied (and skipped with a warning when the
    exhaustive budget would blow past the subset cap).  A failed or
    missing certificate never aborts the run; it is recorded and the
    recovery proceeds, since the guarantee, not the algorithm, needs it.

    sigma references: the discrete-norm sigma_v over the sampled
    dictionary (exact oracle), and the conservative Lp(mu_xi) reference,
    namely the L2(mu_xi)-best v-term fit evaluated in Lp(mu_xi).  For
    p = 2 the latter is the exact sigma_v in L2(mu_xi); for p > 2 it is an
    upper bound.
    """
    if p != math.inf and p < 2:
        raise ValueError("recovery guarantees need p >= 2")
    if v < 1:
        raise ValueError("v must be >= 1")
    u = int(math.ceil((1 + c_emp) * v))
    steps = int(math.ceil(c_emp * v))
    if u > system.size:
        raise ValueError(f"u = {u} exceeds the dictionary size {system.size}")

    sampled = build_sampled(system, xi)
    warning = None
    if certificate is None and certify:
        try:
            certificate = check_usd(sampled, u, 2.0, "two-sided", "exhaustive",
                                    subset_cap=subset_cap)
        except ValueError as exc:
            warning = f"certificate skipped: {exc}"
    elif certificate is None:
        warning = "certificate skipped by caller"
    if certificate is not None and not certificate.holds:
        warning = "certificate failed; recovery proceeded without a guarantee"

    h = DiscreteHilbert.from_sampled(sampled)
    y = f0.eval(xi.points)
    trace = womp(h, y, t=t, steps=min(steps, min(h.m, h.size)),
                 selection=selection)
    approx = reconstruct(system, trace.selected, trace.coefficients)
    diff = f0 - approx
    error = lp_norm(diff, p, "mu", oversample=oversample)

    sigma_disc = sigma_ref = None
    if compute_sigma and math.comb(system.size, v) <= subset_cap:
        sigma_disc = best_vterm(h, y, v, subset_cap=subset_cap).sigma
        _, _, ref_poly = best_vterm_l2_muxi(f0, sampled, v, subset_cap)
        sigma_ref = lp_norm(f0 - ref_poly, p, "mu_xi", pointset=xi,
                            oversample=oversample)
    scale = trace.residual_norms[0]
    ratio_disc, exact1 = _ratio(trace.residual_norms[-1], sigma_disc, scale)
    ratio_pipe, exact2 = _ratio(error, sigma_ref, scale)

    return RecoveryReport(
        d=system.dim, size=system.size, m=xi.m, v=v, u=u, p=float(p), t=t,
        c_emp=c_emp, seed=seed if seed is not None else xi.seed(),
        certificate=certificate, cert_warning=warning,
        error_lp_mu=error, sigma_discrete=sigma_disc, sigma_ref=sigma_ref,
        ratio_discrete=ratio_disc, ratio_pipeline=ratio_pipe,
        exact_recovery=exact1 or exact2, trace=trace, approximant=approx,
        oversample=oversample)


def recover_best_vterm(f0: TrigPolynomial, system: TrigSystem, xi: PointSet,
                       v: int, p: float = 2.0, norm_p: float | None = None,
                       certificate: DiscretizationReport | None = None,
                       certify: bool = True, oversample: int = 8,
                       subset_cap: int = DEFAULT_SUBSET_CAP,
                       seed: int | None = None) -> RecoveryReport:
    """Recover by the exhaustive best-v-term oracle on the sampled data.

    The oracle minimizes the discrete L2 norm by default; passing an even
    norm_p > 2 switches the per-support fit to that discrete Lp norm
    (approximate convex descent).  The error is measured in Lp(mu) and the
    conservative Lp(mu_xi) reference is attached, mirroring recover().
    v = 0 returns the zero approximant.
    """
    if v < 0:
        raise ValueError("v must be >= 0")
    u = 2 * v if v else 0
    sampled = build_sampled(system, xi)
    warning = None
    if certificate is None and certify and v:
        try:
            certificate = check_usd(sampled, max(u, 1), 2.0, "one-sided-lower",
                                    "exhaustive", subset_cap=subset_cap)
        except ValueError as exc:
            warning = f"certificate skipped: {exc}"
    if certificate is not None and not certificate.holds:
        warning = "certificate failed; oracle recovery reported anyway"

    h = DiscreteHilbert.from_sampled(sampled)
    y = f0.eval(xi.points)
    fit = best_vterm(h, y, v, p=(norm_p if norm_p else 2.0),
                     subset_cap=subset_cap)
    approx = reconstruct(system, fit.support, fit.coefficients)
    error = lp_norm(f0 - approx, p, "mu", oversample=oversample)

    sigma_ref = None
    if math.comb(system.size, v) <= subset_cap:
        _, _, ref_poly = best_vterm_l2_muxi(f0, sampled, v, subset_cap)
        sigma_ref = lp_norm(f0 - ref_poly, p, "mu_xi", pointset=xi,
                            oversample=oversample)
    norm0 = float(np.mean(np.abs(y) ** 2) ** 0.5) if xi.m else 0.0
    ratio_pipe, exact = _ratio(error, sigma_ref, norm0)
    return RecoveryReport(
        d=system.dim, size=system.size, m=xi.m, v=v, u=u, p=float(p), t=1.0,
        c_emp=0.0, seed=seed if seed is not None else xi.seed(),
        certificate=certificate, cert_warning=warning, error_lp_mu=error,
        sigma_discrete=fit.sigma, sigma_ref=sigma_ref, ratio_discrete=None,
        ratio_pipeline=ratio_pipe, exact_recovery=exact, trace=None,
        approximant=approx, oversample=oversample)


@dataclass(frozen=True)
class FoolingInstance:
    """A sample-annihilating polynomial and its extremal data.

    f vanishes on the point set, lives in the doubled frequency box, and
    attains |f(x_star)| equal to the product of the box orders times the
    grid sup of the null-space factor (which is normalized to 1).
    """

    pointset: PointSet
    box: tuple
    g_xi: TrigPolynomial
    x_star: np.ndarray
    f: TrigPolynomial
    q: float
    p: float
    norm_q: float
    norm_p: float
    value_at_xstar: float
    sup_grid: float
    samples_max: float
    null_dim: int

    @property
    def vanishing_defect(self) -> float:
        """max |f| on the samples relative to the grid sup norm."""
        return self.samples_max / self.sup_grid if self.sup_grid else 0.0


# SVD singular values below this multiple of the largest are null space.
NULL_SPACE_TOL = 1e-10


def make_fooling(xi: PointSet, box, d: int | None = None, oversample: int = 8,
                 p: float = 4.0, q: float = 2.0) -> FoolingInstance:
    """Build the fooling polynomial for a point set and frequency box.

    The null space of the m x theta evaluation matrix of the box system is
    nonempty whenever m < theta.  Among a basis of it, the element with
    the largest grid sup-to-L2 ratio is kept, normalized to grid sup 1,
    and multiplied by the Fejer kernel centered at its grid argmax.  The
    product vanishes at every sample, has degree at most twice the box,
    and its value at the center is exactly the product of the box orders.
    """
    box = (int(box),) * (d or 1) if np.isscalar(box) else tuple(int(b) for b in box)
    dim = len(box)
    if xi.dim != dim:
        raise ValueError("point set and box dimensions differ")
    system = TrigSystem(dim, box)
    theta = system.size
    if xi.m >= theta:
        raise ValueError(f"need m < {theta} points for a nonzero null space")

    if xi.m == 0:
        null_basis = np.eye(theta, dtype=complex)
    else:
        matrix = system.evaluate_at(xi.points)
        _, svals, vh = np.linalg.svd(matrix, full_matrices=True)
        rank = int(np.sum(svals > NULL_SPACE_TOL * svals[0])) if svals.size else 0
        null_basis = vh[rank:].conj().T
    null_dim = null_basis.shape[1]
    assert null_dim >= theta - xi.m >= 1

    # evaluate the whole null basis on an oversampled grid in one pass
    n_grid = oversample * (max(box) + 1) + 1
    axis = 2 * np.pi * np.arange(n_grid) / n_grid
    if dim == 1:
        grid = axis.reshape(-1, 1)
    else:
        mesh = np.meshgrid(*([axis] * dim), indexing="ij")
        grid = np.stack([g.ravel() for g in mesh], axis=1)
    grid_vals = system.evaluate_at(grid) @ null_basis
    sups = np.abs(grid_vals).max(axis=0)
    l2s = np.sqrt(np.mean(np.abs(grid_vals) ** 2, axis=0))
    best = int(np.argmax(sups / l2s))
    column = null_basis[:, best]
    sup = float(sups[best])
    x_star = grid[int(np.argmax(np.abs(grid_vals[:, best])))]

    indices = system.indices()
    g_xi = TrigPolynomial(dim, {indices[i]: column[i] / sup for i in range(theta)})
    kernel = fejer_kernel(box).translate(x_star)
    f = g_xi * kernel

    samples_max = float(np.abs(f.eval(xi.points)).max()) if xi.m else 0.0
    return FoolingInstance(
        pointset=xi, box=box, g_xi=g_xi, x_star=np.asarray(x_star, float),
        f=f, q=float(q), p=float(p),
        norm_q=lp_norm(f, q, "mu", oversample=oversample),
        norm_p=lp_norm(f, p, "mu", oversample=oversample),
        value_at_xstar=float(abs(f.eval(x_star.reshape(1, -1))[0])),
        sup_grid=lp_norm(f, math.inf, "mu", oversample=oversample),
        samples_max=samples_max, null_dim=null_dim)


@dataclass(frozen=True)
class GapRecord:
    """Certified lower bound on worst-case recovery error for a pair +/- f."""

    instance: FoolingInstance
    guaranteed_error: float
    recovery_errors: tuple | None
    recovery_fooled: bool | None


def adversary_gap(xi: PointSet, box, p: float = 4.0, q: float = 2.0,
                  recovery=None, oversample: int = 8,
                  d: int | None = None) -> GapRecord:
    """Lower-bound the error of any sample-based recovery map at xi.

    Both f and -f produce the all-zero sample vector, so any map must err
    by at least ||f||_p on one of them.  Requires m <= theta/2, the regime
    the guarantee targets.  When a recovery callable (samples -> candidate
    polynomial) is supplied, it is fed the zero samples and its worst
    error over the pair is recorded; it can never beat the bound.
    """
    box_t = (int(box),) * (d or 1) if np.isscalar(box) else tuple(int(b) for b in box)
    theta = TrigSystem(len(box_t), box_t).size
    if xi.m > theta / 2:
        raise ValueError(f"adversary argument needs m <= theta/2 = {theta / 2}")
    inst = make_fooling(xi, box_t, oversample=oversample, p=p, q=q)
    errors = None
    fooled = None
    if recovery is not None:
        candidate = recovery(np.zeros(xi.m, dtype=complex))
        errors = (lp_norm(inst.f - candidate, p, "mu", oversample=oversample),
                  lp_norm(-inst.f - candidate, p, "mu", oversample=oversample))
        fooled = max(errors) >= inst.norm_p * (1 - 1e-12)
    return GapRecord(inst, inst.norm_p, errors, fooled)


def write_fooling(inst: FoolingInstance, path) -> None:
    """Serialize the fooling polynomial with a metadata header."""
    from .trig import write_polynomial

    box = " ".join(str(b) for b in inst.box)
    xs = " ".join(f"{x:.17g}" for x in inst.x_star)
    header = [
        f"m {inst.pointset.m}",
        f"box {box}",
        f"x_star {xs}",
        f"norm_q {inst.q:g} {inst.norm_q:.17g}",
        f"norm_p {inst.p:g} {inst.norm_p:.17g}",
        f"value_at_xstar {inst.value_at_xstar:.17g}",
    ]
    write_polynomial(inst.f, path, header_lines=header)
