"""Special functions, root finding and complex vector sampling.

Complex vectors are plain 1-D ``numpy`` arrays of dtype ``complex128``;
batched variants put the vector index on the last axis.
"""

import math

import numpy as np

from .errors import BracketError, ConvergenceError, DomainError, InfeasibleError

EULER_GAMMA = 0.57721566490153286061
_SERIES_SWITCH = 1.0
_EPS = 1e-16
_TINY = 1e-300

BISECT_MAX_ITER = 200
DEGENERATE_TOL = 1e-10


def make_rng(seed=None):
    """Return a ``numpy.random.Generator``; generators pass through unchanged."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _e1_series(x):
    # -gamma - ln x + sum_{k>=1} (-1)^(k+1) x^k / (k k!)
    total = 0.0
    term = 1.0
    for k in range(1, 200):
        term *= -x / k
        contrib = -term / k
        total += contrib
        if abs(contrib) < _EPS * abs(total):
            break
    return -EULER_GAMMA - math.log(x) + total


def _e1_scaled_cfrac(x):
    # modified Lentz evaluation of exp(x) * E1(x) for x > 1
    b = x + 1.0
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ConvergenceError(f"E1 continued fraction did not converge at x={x}")


def exp_integral_e1(x):
    """Exponential integral E1(x) = int_x^inf exp(-t)/t dt for x > 0.

    Returns 0.0 once the value underflows double precision.
    """
    x = float(x)
    if not x > 0.0:
        raise DomainError(f"E1 requires x > 0, got {x!r}")
    if x <= _SERIES_SWITCH:
        return _e1_series(x)
    return _e1_scaled_cfrac(x) * math.exp(-x)


def scaled_exp_integral_e1(x):
    """exp(x) * E1(x), evaluated without overflow for large x."""
    x = float(x)
    if not x > 0.0:
        raise DomainError(f"E1 requires x > 0, got {x!r}")
    if x <= _SERIES_SWITCH:
        return math.exp(x) * _e1_series(x)
    return _e1_scaled_cfrac(x)


def bisect_increasing(f, target, lo, hi, tol, max_iter=BISECT_MAX_ITER):
    """Invert a nondecreasing ``f`` on ``[lo, hi]``.

    Stops when ``|f(x) - target| <= tol`` or the bracket is narrower than
    ``tol * max(1, |x|)``.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    if not lo <= hi:
        raise DomainError(f"empty bracket [{lo}, {hi}]")
    f_lo, f_hi = f(lo), f(hi)
    if not f_lo <= target <= f_hi:
        raise BracketError(
            f"target {target!r} outside [f(lo), f(hi)] = [{f_lo!r}, {f_hi!r}]"
        )
    if abs(f_lo - target) <= tol:
        return lo
    if abs(f_hi - target) <= tol:
        return hi
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if abs(f_mid - target) <= tol:
            return mid
        if f_mid < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, abs(mid)):
            return 0.5 * (lo + hi)
    raise ConvergenceError(f"bisection exceeded {max_iter} iterations")


def sample_complex_gaussian(dim, variance, rng, size=None):
    """Circularly-symmetric complex Gaussian vector(s) with per-entry variance ``variance``.

    ``size`` prepends a batch axis.
    """
    if dim < 1:
        raise DomainError("dim must be >= 1")
    if not variance > 0:
        raise DomainError(f"variance must be positive, got {variance!r}")
    shape = (dim,) if size is None else (size, dim)
    scale = math.sqrt(variance / 2.0)
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return scale * (re + 1j * im)


def sample_isotropic_unit(dim, rng, size=None):
    """Unit vector(s) uniformly distributed on the complex unit sphere."""
    v = sample_complex_gaussian(dim, 1.0, rng, size=size)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def orthonormal_basis(vectors, tol=DEGENERATE_TOL):
    """Gram-Schmidt basis (rows) of ``span(vectors)``.

    Vectors whose residual norm falls below ``tol`` are dropped as redundant.
    """
    basis = []
    for v in vectors:
        u = np.array(v, dtype=complex)
        norm0 = np.linalg.norm(u)
        if norm0 == 0.0:
            continue
        u = u / norm0
        # two passes keep the residual orthogonal to ~machine precision
        for _ in range(2):
            for q in basis:
                u = u - np.vdot(q, u) * q
        r = np.linalg.norm(u)
        if r < tol:
            continue
        basis.append(u / r)
    return basis


def null_space_unit_vector(constraints, rng, dim=None):
    """Isotropic unit vector ``w`` with ``c^H w = 0`` for every constraint ``c``.

    ``dim`` is required only when ``constraints`` is empty.
    """
    constraints = [np.asarray(c, dtype=complex) for c in constraints]
    if dim is None:
        if not constraints:
            raise DomainError("dim is required when there are no constraints")
        dim = constraints[0].shape[0]
    for c in constraints:
        if c.shape != (dim,):
            raise DomainError(f"constraint has shape {c.shape}, expected ({dim},)")
    basis = orthonormal_basis(constraints)
    if len(basis) >= dim:
        raise InfeasibleError(
            f"constraints span all {dim} dimensions; null space is empty",
            reason="null_space_empty",
        )
    v = sample_complex_gaussian(dim, 1.0, rng)
    for _ in range(2):
        for q in basis:
            v = v - np.vdot(q, v) * q
    return v / np.linalg.norm(v)


def batch_null_space_unit_vectors(constraints, rng):
    """Vectorised ``null_space_unit_vector``.

    ``constraints`` has shape ``(n, m, dim)``: ``m`` constraints for each of
    ``n`` independent draws. Returns an ``(n, dim)`` array of unit vectors.
    """
    constraints = np.asarray(constraints, dtype=complex)
    n, m, dim = constraints.shape
    if m >= dim:
        raise InfeasibleError(
            f"{m} constraints leave no null space in {dim} dimensions",
            reason="null_space_empty",
        )
    basis = []
    for j in range(m):
        u = constraints[:, j, :]
        u = u / np.linalg.norm(u, axis=-1, keepdims=True)
        for _ in range(2):
            for q in basis:
                u = u - np.sum(q.conj() * u, axis=-1, keepdims=True) * q
        r = np.linalg.norm(u, axis=-1)
        ok = r >= DEGENERATE_TOL
        # dropped (degenerate) rows become zero and project out nothing
        basis.append(np.where(ok[:, None], u / np.where(ok, r, 1.0)[:, None], 0.0))
    v = sample_complex_gaussian(dim, 1.0, rng, size=n)
    for _ in range(2):
        for q in basis:
            v = v - np.sum(q.conj() * v, axis=-1, keepdims=True) * q
    return v / np.linalg.norm(v, axis=-1, keepdims=True)
