"""Sparse trigonometric polynomials on the d-torus.

A polynomial is a finite sum  f(x) = sum_k c_k exp(i<k, x>)  with integer
frequency vectors k.  Everything here is desk scale: polynomials are stored
as sparse coefficient maps and evaluated directly, without fast transforms.
The torus carries the normalized Lebesgue measure, so the exponentials form
an orthonormal system and l2 norms come straight from Parseval.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

# Coefficients whose magnitude falls below this after arithmetic are dropped,
# keeping the sparse representation canonical.
COEFF_DROP_TOL = 1e-14

# Cap on entries of any single evaluation block (points x coefficients).
_EVAL_CHUNK_ENTRIES = 1 << 22


def _as_points(points, dim):
    """Coerce input to an (m, dim) float array of sample points."""
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    if pts.ndim == 1:
        if dim == 1:
            pts = pts.reshape(-1, 1)
        else:
            pts = pts.reshape(1, -1)
    if pts.ndim != 2 or pts.shape[1] != dim:
        raise ValueError(f"expected points of dimension {dim}, got shape {pts.shape}")
    return pts


@dataclass(frozen=True)
class TrigPolynomial:
    """Immutable sparse trigonometric polynomial.

    Parameters
    ----------
    dim : int
        Dimension d of the torus.
    coeffs : dict
        Map from integer multi-indices (length-d tuples) to complex
        coefficients.  Exact zeros are removed on construction.
    """

    dim: int
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")
        clean = {}
        for k, c in self.coeffs.items():
            key = (int(k),) if np.isscalar(k) else tuple(int(ki) for ki in k)
            if len(key) != self.dim:
                raise ValueError(f"index {key} does not match dimension {self.dim}")
            c = complex(c)
            if c != 0:
                clean[key] = clean.get(key, 0) + c
        object.__setattr__(self, "coeffs", clean)

    @property
    def degree(self) -> int:
        """Max sup-norm of the stored frequencies (0 for the zero polynomial)."""
        if not self.coeffs:
            return 0
        return max(max(abs(ki) for ki in k) for k in self.coeffs)

    def eval(self, points) -> np.ndarray:
        """Evaluate at an (m, d) array of points, returning complex values."""
        pts = _as_points(points, self.dim)
        out = np.zeros(pts.shape[0], dtype=complex)
        if not self.coeffs:
            return out
        K = np.array(sorted(self.coeffs), dtype=float)
        c = np.array([self.coeffs[tuple(int(v) for v in k)] for k in K])
        chunk = max(1, _EVAL_CHUNK_ENTRIES // max(1, len(c)))
        for lo in range(0, pts.shape[0], chunk):
            block = pts[lo:lo + chunk]
            out[lo:lo + chunk] = np.exp(1j * (block @ K.T)) @ c
        return out

    def l2_norm(self) -> float:
        """Exact L2 norm under the normalized measure (Parseval)."""
        if not self.coeffs:
            return 0.0
        return float(np.sqrt(sum(abs(c) ** 2 for c in self.coeffs.values())))

    def translate(self, shift) -> "TrigPolynomial":
        """Return x -> f(x - shift); coefficients pick up phases exp(-i<k, shift>)."""
        s = np.asarray(shift, dtype=float).reshape(-1)
        if s.size != self.dim:
            raise ValueError("shift dimension mismatch")
        return TrigPolynomial(
            self.dim,
            {k: c * np.exp(-1j * float(np.dot(k, s))) for k, c in self.coeffs.items()},
        )

    def __add__(self, other):
        self._check_same_dim(other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0) + c
        return TrigPolynomial(self.dim, _drop_small(out))

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return TrigPolynomial(self.dim, {k: -c for k, c in self.coeffs.items()})

    def __mul__(self, other):
        if np.isscalar(other):
            return TrigPolynomial(self.dim, {k: c * other for k, c in self.coeffs.items()})
        return multiply(self, other)

    __rmul__ = __mul__

    def _check_same_dim(self, other):
        if not isinstance(other, TrigPolynomial) or other.dim != self.dim:
            raise ValueError("operands must be TrigPolynomial of equal dimension")


def _drop_small(coeffs, tol=COEFF_DROP_TOL):
    return {k: c for k, c in coeffs.items() if abs(c) >= tol}


def multiply(f: TrigPolynomial, g: TrigPolynomial) -> TrigPolynomial:
    """Pointwise product via coefficient convolution."""
    f._check_same_dim(g)
    out = {}
    for kf, cf in f.coeffs.items():
        for kg, cg in g.coeffs.items():
            k = tuple(a + b for a, b in zip(kf, kg))
            out[k] = out.get(k, 0) + cf * cg
    return TrigPolynomial(f.dim, _drop_small(out))


def fejer_kernel(j, d: int | None = None) -> TrigPolynomial:
    """Tensor-product Fejer kernel with per-coordinate orders j.

    The univariate factor of order j has coefficients (1 - |k|/j) for
    |k| <= j - 1.  It is nonnegative on the torus, its mean is 1, and its
    sup norm j is attained at 0; the tensor product inherits all three
    properties coordinatewise.

    Parameters
    ----------
    j : int or sequence of int
        Positive order, one per coordinate.  A scalar with ``d`` given is
        broadcast to all coordinates.
    d : int, optional
        Dimension when ``j`` is a scalar (default 1).
    """
    if np.isscalar(j):
        orders = (int(j),) * (1 if d is None else int(d))
    else:
        orders = tuple(int(v) for v in j)
        if d is not None and d != len(orders):
            raise ValueError("d does not match len(j)")
    if any(v < 1 for v in orders):
        raise ValueError("Fejer orders must be positive integers")
    axes = [[(k, 1.0 - abs(k) / v) for k in range(-(v - 1), v)] for v in orders]
    coeffs = {}
    for combo in itertools.product(*axes):
        k = tuple(kw[0] for kw in combo)
        w = 1.0
        for kw in combo:
            w *= kw[1]
        coeffs[k] = w
    return TrigPolynomial(len(orders), coeffs)


def block_index(k) -> int:
    """Index j of the dyadic sup-norm block containing frequency k."""
    n = max(abs(int(ki)) for ki in np.atleast_1d(k))
    if n == 0:
        return 0
    return int(math.floor(math.log2(n))) + 1


def dyadic_block(j: int, d: int) -> frozenset:
    """Frequencies k with floor(2^(j-1)) <= |k|_inf < 2^j.

    Block 0 is the singleton {0}; blocks partition the integer lattice.
    """
    if j < 0:
        raise ValueError("block index must be >= 0")
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if j == 0:
        return frozenset({(0,) * d})
    lo, hi = 2 ** (j - 1), 2 ** j
    rng = range(-(hi - 1), hi)
    return frozenset(
        k for k in itertools.product(rng, repeat=d) if max(abs(v) for v in k) >= lo
    )


@dataclass(frozen=True)
class BlockFamily:
    """Family of frequency blocks used by smoothness-class budgets.

    Only the dyadic sup-norm family is shipped; the kind tag keeps the
    door open for other partitions.
    """

    kind: str = "dyadic-sup"

    def __post_init__(self):
        if self.kind != "dyadic-sup":
            raise ValueError(f"unknown block family: {self.kind}")

    def block(self, j: int, d: int) -> frozenset:
        return dyadic_block(j, d)

    def index_of(self, k) -> int:
        return block_index(k)


@dataclass(frozen=True)
class TrigSystem:
    """The exponentials exp(i<k, x>) with |k_i| <= box[i], in lexicographic order.

    The ordering fixes the dictionary column order everywhere downstream,
    so the same (system, column) pair always names the same frequency.
    """

    dim: int
    box: tuple

    def __post_init__(self):
        box = (int(self.box),) if np.isscalar(self.box) else tuple(int(v) for v in self.box)
        if len(box) != self.dim:
            raise ValueError("box length must equal dim")
        if any(v < 0 for v in box):
            raise ValueError("box entries must be >= 0")
        object.__setattr__(self, "box", box)

    @property
    def size(self) -> int:
        """Number of exponentials, prod_i (2*box[i] + 1)."""
        n = 1
        for v in self.box:
            n *= 2 * v + 1
        return n

    def indices(self) -> list:
        """All frequency tuples in lexicographic order."""
        ranges = [range(-v, v + 1) for v in self.box]
        return list(itertools.product(*ranges))

    def index_at(self, col: int) -> tuple:
        """Frequency tuple of a dictionary column."""
        if not 0 <= col < self.size:
            raise IndexError("column out of range")
        k = []
        rem = col
        for v in reversed(self.box):
            w = 2 * v + 1
            k.append(rem % w - v)
            rem //= w
        return tuple(reversed(k))

    def column_of(self, k) -> int:
        """Dictionary column of a frequency tuple."""
        key = (int(k),) if np.isscalar(k) else tuple(int(v) for v in k)
        col = 0
        for ki, v in zip(key, self.box):
            if abs(ki) > v:
                raise ValueError(f"index {key} outside box {self.box}")
            col = col * (2 * v + 1) + (ki + v)
        return col

    def member(self, k) -> TrigPolynomial:
        key = (int(k),) if np.isscalar(k) else tuple(int(v) for v in k)
        return TrigPolynomial(self.dim, {key: 1.0})

    def evaluate_at(self, points) -> np.ndarray:
        """Evaluation matrix with entry [i, j] = exp(i <k_j, x_i>)."""
        pts = _as_points(points, self.dim)
        K = np.array(self.indices(), dtype=float)
        out = np.empty((pts.shape[0], self.size), dtype=complex)
        chunk = max(1, _EVAL_CHUNK_ENTRIES // max(1, self.size))
        for lo in range(0, pts.shape[0], chunk):
            out[lo:lo + chunk] = np.exp(1j * (pts[lo:lo + chunk] @ K.T))
        return out


def quadrature_grid_size(degree: int, p, oversample: int) -> int:
    """Per-dimension grid size used by lp_norm for the continuous measure.

    Always larger than oversample*(degree+1); for even integer p it also
    exceeds p*degree, which makes the quadrature of |f|^p exact.
    """
    n = oversample * (degree + 1) + 1
    if p != math.inf and float(p) == int(p) and int(p) % 2 == 0:
        n = max(n, int(p) * degree + 1)
    return n


def _grid_values(poly: TrigPolynomial, n: int) -> np.ndarray:
    """|f| on the tensor grid {2 pi t / n : t = 0..n-1}^d, flattened."""
    axis = 2 * np.pi * np.arange(n) / n
    if poly.dim == 1:
        pts = axis.reshape(-1, 1)
    else:
        grids = np.meshgrid(*([axis] * poly.dim), indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
    return np.abs(poly.eval(pts))


def lp_norm(poly: TrigPolynomial, p, measure: str = "mu", pointset=None,
            oversample: int = 8) -> float:
    """Lp norm of a trigonometric polynomial under one of three measures.

    Parameters
    ----------
    poly : TrigPolynomial
    p : float or math.inf
        Exponent, p >= 1.  For even integer p the continuous quadrature is
        exact to roundoff; p = inf returns the grid (or sample) maximum,
        which is a lower estimate of the true sup norm.
    measure : str
        "mu"    normalized Lebesgue measure, tensor-grid quadrature;
        "mu_m"  empirical measure of a point set (pointset required);
        "mu_xi" the half/half mixture of the two (pointset required).
    pointset : PointSet, optional
        Sample points for the discrete measures.
    oversample : int
        Grid refinement factor for the continuous part, >= 2.

    Returns
    -------
    float
        Nonnegative norm value.
    """
    if p != math.inf and not float(p) >= 1:
        raise ValueError("p must be >= 1 or inf")
    if oversample < 2:
        raise ValueError("oversample must be >= 2")
    if measure not in ("mu", "mu_m", "mu_xi"):
        raise ValueError(f"unknown measure: {measure}")
    if measure in ("mu_m", "mu_xi"):
        if pointset is None:
            raise ValueError(f"measure {measure} requires a point set")
        if pointset.dim != poly.dim:
            raise ValueError("point set dimension mismatch")
        sample_abs = np.abs(poly.eval(pointset.points)) if pointset.m else np.zeros(0)

    if measure == "mu_m":
        if pointset.m == 0:
            raise ValueError("empirical measure of an empty point set")
        if p == math.inf:
            return float(sample_abs.max())
        return float(np.mean(sample_abs ** p) ** (1.0 / p))

    n = quadrature_grid_size(poly.degree, p, oversample)
    grid_abs = _grid_values(poly, n)
    if measure == "mu":
        if p == math.inf:
            return float(grid_abs.max())
        return float(np.mean(grid_abs ** p) ** (1.0 / p))

    # mu_xi: mean of the p-th powers of the two sides
    if pointset.m == 0:
        raise ValueError("mixture measure of an empty point set")
    if p == math.inf:
        return float(max(grid_abs.max(), sample_abs.max()))
    val = 0.5 * (np.mean(grid_abs ** p) + np.mean(sample_abs ** p))
    return float(val ** (1.0 / p))


def write_polynomial(poly: TrigPolynomial, path, header_lines=()) -> None:
    """Write the text form: 'dim d' then one 'k_1 .. k_d re im' row per term."""
    with open(path, "w") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(f"dim {poly.dim}\n")
        for k in sorted(poly.coeffs):
            c = poly.coeffs[k]
            ks = " ".join(str(v) for v in k)
            fh.write(f"{ks} {c.real:.17g} {c.imag:.17g}\n")


def read_polynomial(path) -> TrigPolynomial:
    """Read the text form written by write_polynomial; '#' lines are skipped."""
    dim = None
    coeffs = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if dim is None:
                parts = line.split()
                if len(parts) != 2 or parts[0] != "dim":
                    raise ValueError(f"bad polynomial header: {line!r}")
                dim = int(parts[1])
                continue
            parts = line.split()
            if len(parts) != dim + 2:
                raise ValueError(f"bad coefficient row: {line!r}")
            k = tuple(int(v) for v in parts[:dim])
            coeffs[k] = complex(float(parts[dim]), float(parts[dim + 1]))
    if dim is None:
        raise ValueError("empty polynomial file")
    return TrigPolynomial(dim, coeffs)
