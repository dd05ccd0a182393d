"""Weight function and the bilinear/trilinear forms of the scheme.

All forms act on the periodic cubic Hermite space.  The Hilbert stiffness

    K[i, j] = < H v_j', (phi v_i)' >

uses the 2L-periodic kernel ``cot(pi y / 2L) / 2L``.  The kernel is split
into ``1/(pi y)`` plus a smooth remainder.  For element pairs within
``near_range`` elements of each other the ``1/(pi y)`` part is integrated
in closed form (polynomial times log moments), which keeps the operator
skew-symmetric to rounding for ``phi = 1``.  Farther pairs use the inner
and outer Gauss-Legendre rules directly on the full kernel.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import numpy.polynomial.polynomial as npoly
import scipy.linalg

from .errors import ConfigurationError
from .mesh_basis import (
    LOCAL_SHAPES,
    LOCAL_SHAPES_D1,
    HermiteField,
    element_coeffs,
    local_shapes,
)
from .quadrature import gauss_legendre, pv_integrate_breaks

DEFAULT_INNER_ORDER = 7
DEFAULT_OUTER_ORDER = 8
NEAR_RANGE = 3


# -- weight function ---------------------------------------------------------


def _smoothstep(t):
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t))


def _smoothstep_integral(t):
    return t**4 * (2.5 + t * (-3.0 + t))


@dataclass(frozen=True)
class WeightFunction:
    """The weight ``phi`` multiplying test functions in the scheme.

    kind is one of ``"unit"``, ``"linear"`` (``intercept + slope * x``) or
    ``"smooth_cutoff"`` (``phi' = 1`` on ``|x| < R``, zero for
    ``|x| >= R + 1``, quintic smoothstep in between, ``1 <= phi <= 2 + 2R``).
    """

    kind: str = "unit"
    intercept: float = 1.0
    slope: float = 0.0
    radius: float = 1.0

    def __post_init__(self):
        if self.kind not in ("unit", "linear", "smooth_cutoff"):
            raise ConfigurationError(f"unknown weight kind {self.kind!r}")
        if self.kind == "smooth_cutoff" and not self.radius > 0:
            raise ConfigurationError("cut-off radius must be positive")

    @classmethod
    def unit(cls):
        return cls("unit")

    @classmethod
    def linear(cls, intercept, slope):
        return cls("linear", intercept=float(intercept), slope=float(slope))

    @classmethod
    def smooth_cutoff(cls, radius):
        return cls("smooth_cutoff", radius=float(radius))

    @property
    def is_unit(self):
        return self.kind == "unit"

    def validate(self, mesh):
        """Raise if ``phi`` is not strictly positive on the mesh interval."""
        if self.kind == "linear":
            ends = self.intercept + self.slope * np.array([mesh.left, mesh.right])
            if np.min(ends) <= 0.0:
                raise ConfigurationError(
                    "linear weight must be positive on "
                    f"[{mesh.left}, {mesh.right}], got endpoint values {ends}"
                )

    def __call__(self, x):
        return weight_eval(self, x)

    def describe(self):
        if self.kind == "unit":
            return "unit"
        if self.kind == "linear":
            return f"linear:{self.intercept:g},{self.slope:g}"
        return f"cutoff:{self.radius:g}"


def weight_eval(w, x):
    """Return ``(phi(x), phi'(x))``."""
    x = np.asarray(x, dtype=float)
    if w.kind == "unit":
        phi, dphi = np.ones_like(x), np.zeros_like(x)
    elif w.kind == "linear":
        phi = w.intercept + w.slope * x
        if np.any(phi <= 0.0):
            raise ConfigurationError("linear weight is not positive at the given points")
        dphi = np.full_like(x, w.slope)
    else:
        R = w.radius
        a = np.abs(x)
        t = np.clip(a - R, 0.0, 1.0)
        dphi = np.where(a < R, 1.0, 1.0 - _smoothstep(t))
        # integral of phi' from 0 to |x|, odd extension
        ramp = np.where(a < R, a, R + t - _smoothstep_integral(t))
        phi = 1.5 + R + np.sign(x) * ramp
    if phi.ndim == 0:
        return float(phi), float(dphi)
    return phi, dphi


def weighted_test_derivatives(mesh, w, unit_nodes):
    """Values of ``(phi v_k)'`` at local points, shape ``(N, q, 4)``."""
    x = mesh.element_points(unit_nodes)
    phi, dphi = weight_eval(w, x)
    n0 = local_shapes(unit_nodes, 0).T
    n1 = local_shapes(unit_nodes, 1).T / mesh.dx
    return phi[:, :, None] * n1[None] + dphi[:, :, None] * n0[None]


# -- mass and nonlinear forms -------------------------------------------------


def assemble_weighted_mass(mesh, w, outer_rule=None):
    """Gram matrix ``M[i, j] = int v_j v_i phi dx`` (dense)."""
    rule = outer_rule or gauss_legendre(DEFAULT_OUTER_ORDER)
    w.validate(mesh)
    xi, wq = rule.on_unit()
    phi, _ = weight_eval(w, mesh.element_points(xi))
    shapes = local_shapes(xi, 0)  # (4, q)
    local = np.einsum("mq,q,kq,lq->mkl", phi, wq * mesh.dx, shapes, shapes)
    return _scatter(mesh, local)


def _scatter(mesh, local):
    dofs = mesh.element_dofs()
    n = mesh.ndofs
    out = np.zeros((n, n))
    rows = np.repeat(dofs, 4, axis=1)
    cols = np.tile(dofs, (1, 4))
    np.add.at(out, (rows.ravel(), cols.ravel()), local.reshape(len(dofs), 16).ravel())
    return out


def nonlinear_form(field, w, outer_rule=None):
    """Vector ``b[i] = int u^2 (phi v_i)' dx`` for the field ``u``."""
    rule = outer_rule or gauss_legendre(DEFAULT_OUTER_ORDER)
    mesh = field.mesh
    xi, wq = rule.on_unit()
    return _nonlinear_from_tables(
        field.coeffs, mesh, local_shapes(xi, 0), wq * mesh.dx,
        weighted_test_derivatives(mesh, w, xi),
    )


def _nonlinear_from_tables(coeffs, mesh, shapes, wdx, test):
    c = coeffs[mesh.element_dofs()]  # (N, 4)
    u = c @ shapes  # (N, q)
    local = np.einsum("mq,q,mqk->mk", u * u, wdx, test)
    out = np.zeros(mesh.ndofs)
    np.add.at(out, mesh.element_dofs().ravel(), local.ravel())
    return out


def l2_inner(mesh, a, b, w, mass=None):
    """Weighted inner product ``<a, phi b>`` as the Gram quadratic form."""
    if a.mesh != mesh or b.mesh != mesh:
        raise ValueError("fields live on different meshes")
    if mass is None:
        mass = assemble_weighted_mass(mesh, w)
    return float(a.coeffs @ mass @ b.coeffs)


# -- Hilbert kernel -----------------------------------------------------------

_COT_SERIES = np.array(
    [-1.0 / 3.0, -1.0 / 45.0, -2.0 / 945.0, -1.0 / 4725.0, -2.0 / 93555.0,
     -1382.0 / 638512875.0]
)


def _cot_minus_inverse(z):
    """``cot(z) - 1/z``, accurate near ``z = 0``."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 0.2
    zs = np.where(small, z, 0.0)
    z2 = zs * zs
    series = zs * npoly.polyval(z2, _COT_SERIES)
    zl = np.where(small, 1.0, z)
    direct = 1.0 / np.tan(zl) - 1.0 / zl
    return np.where(small, series, direct)


def periodic_kernel(y, half_period):
    """``cot(pi y / 2L) / 2L``."""
    return 1.0 / (2.0 * half_period * np.tan(np.pi * y / (2.0 * half_period)))


def kernel_remainder(y, half_period):
    """``cot(pi y / 2L) / 2L - 1/(pi y)``, smooth for ``|y| < 2L``."""
    z = np.pi * np.asarray(y, dtype=float) / (2.0 * half_period)
    return _cot_minus_inverse(z) / (2.0 * half_period)


def _log_moment(t_coeffs, e, smooth_rule):
    """``int_0^1 T(xi) ln|xi + e| dxi`` for a polynomial ``T``."""
    if e == 0:
        m = np.arange(len(t_coeffs))
        return -float(np.sum(t_coeffs / (m + 1.0) ** 2))
    if e == -1:
        flipped = npoly.Polynomial(t_coeffs)(npoly.Polynomial([1.0, -1.0])).coef
        m = np.arange(len(flipped))
        return -float(np.sum(flipped / (m + 1.0) ** 2))
    xi, wq = smooth_rule.on_unit()
    return float(np.dot(wq, npoly.polyval(xi, t_coeffs) * np.log(np.abs(xi + e))))


def _divided_integral(q_coeffs):
    """Coefficients in ``c`` of ``int_0^1 (Q(eta) - Q(c)) / (eta - c) deta``."""
    deg = len(q_coeffs) - 1
    out = np.zeros(max(deg, 1))
    for m in range(1, deg + 1):
        for p in range(m):
            out[m - 1 - p] += q_coeffs[m] / (p + 1.0)
    return out


def _lagrange_coeffs(nodes):
    """Monomial coefficients of the Lagrange basis on ``nodes`` (rows)."""
    n = len(nodes)
    vander = nodes[:, None] ** np.arange(n)
    return np.linalg.solve(vander, np.eye(n)).T


@lru_cache(maxsize=64)
def _singular_moments(outer_order, near_range):
    """Closed-form ``(1/pi) int int l_a(xi) N_k'(eta) / (xi - eta + d)``.

    Returns an array ``(2*near_range + 1, q, 4)`` indexed by ``d + near_range``.
    The inner integral is a principal value when ``d = 0``.
    """
    xi, _ = gauss_legendre(outer_order).on_unit()
    lag = _lagrange_coeffs(xi)
    smooth_rule = gauss_legendre(32)
    out = np.zeros((2 * near_range + 1, outer_order, 4))
    for di, d in enumerate(range(-near_range, near_range + 1)):
        shift = npoly.Polynomial([float(d), 1.0])
        for k in range(4):
            qk = LOCAL_SHAPES_D1[k]
            q_shift = npoly.Polynomial(qk)(shift).coef
            div_shift = npoly.Polynomial(_divided_integral(qk))(shift).coef
            for a in range(outer_order):
                t = npoly.polymul(lag[a], q_shift)
                logs = _log_moment(t, d, smooth_rule) - _log_moment(t, d - 1, smooth_rule)
                poly = npoly.polyint(npoly.polymul(lag[a], div_shift))
                val = logs - (npoly.polyval(1.0, poly) - npoly.polyval(0.0, poly))
                out[di, a, k] = val / np.pi
    return out


KERNELS = ("periodic", "line")


def default_kernel(w):
    """Periodic cot kernel for the unit weight, truncated line kernel otherwise.

    A weight such as ``120 + x`` jumps at the periodic seam; with the cot
    kernel that jump produces a grid-scale growing mode at the seam, while
    the line kernel restricted to the interval keeps the scheme dissipative.
    """
    return "periodic" if w.is_unit else "line"


def hilbert_moments(mesh, inner_rule=None, outer_rule=None, near_range=NEAR_RANGE,
                    kernel="periodic"):
    """Moments ``W[d, a, k] = int l_a(x) (H q_k)(x) dx``.

    ``l_a`` is the Lagrange polynomial of outer node ``a`` on an element and
    ``q_k`` is the derivative of local shape ``k`` on the element ``d``
    positions to the left.  Returns ``(offsets, W)`` with ``offsets`` running
    over ``-(N-1) .. N-1``; for the periodic kernel ``W`` depends only on
    ``d mod N``.
    """
    if kernel not in KERNELS:
        raise ConfigurationError(f"unknown kernel {kernel!r}")
    inner_rule = inner_rule or gauss_legendre(DEFAULT_INNER_ORDER)
    outer_rule = outer_rule or gauss_legendre(DEFAULT_OUTER_ORDER)
    n = mesh.num_elements
    dx = mesh.dx
    half = mesh.half_period
    periodic = kernel == "periodic"
    near = min(near_range, (n - 1) // 2) if periodic else min(near_range, n - 1)

    xo, wo = outer_rule.on_unit()
    xin, win = inner_rule.on_unit()
    dq = local_shapes(xin, 1)  # (4, p)

    offsets = np.arange(-(n - 1), n)
    if periodic:
        eff = np.mod(offsets, n)
        eff = np.where(eff > n // 2, eff - n, eff)
    else:
        eff = offsets
    # far field: full kernel, inner x outer Gauss
    y = dx * (xo[None, :, None] - xin[None, None, :] + eff[:, None, None])
    is_near = (np.abs(eff) <= near)[:, None, None]
    y_far = np.where(is_near, 1.0, y)
    kern = periodic_kernel(y_far, half) if periodic else 1.0 / (np.pi * y_far)
    kern = np.where(is_near, 0.0, kern)
    moments = dx * wo[None, :, None] * np.einsum("dap,p,kp->dak", kern, win, dq)

    # near field: closed-form 1/(pi y) part, plus Gauss on the smooth
    # remainder of the cot kernel
    sing = _singular_moments(outer_rule.order, near)
    smooth_rule = gauss_legendre(max(inner_rule.order, 12))
    xs, ws = smooth_rule.on_unit()
    dqs = local_shapes(xs, 1)
    for d in range(-near, near + 1):
        value = sing[d + near]
        if periodic:
            yy = dx * (xo[:, None] - xs[None, :] + d)
            rem = kernel_remainder(yy, half)
            value = value + dx * wo[:, None] * np.einsum("ap,p,kp->ak", rem, ws, dqs)
        moments[eff == d] = value
    return offsets, moments


def hilbert_stiffness_from_moments(mesh, w, moments, outer_rule=None):
    """Assemble ``K`` from the offset table of :func:`hilbert_moments`."""
    outer_rule = outer_rule or gauss_legendre(DEFAULT_OUTER_ORDER)
    n = mesh.num_elements
    nodes = np.arange(n)
    left_elem = (nodes - 1) % n  # element whose right node is ``n``
    xo, _ = outer_rule.on_unit()
    test = weighted_test_derivatives(mesh, w, xo)  # (N, q, 4)
    dofs = mesh.element_dofs()
    stiff = np.zeros((mesh.ndofs, mesh.ndofs))
    g = np.empty((outer_rule.order, mesh.ndofs))
    shift = n - 1
    for m in range(n):
        own = moments[m - nodes + shift]  # (N, q, 4), element n sits left of node n
        prev = moments[m - left_elem + shift]
        g[:, 0::2] = (own[:, :, 0] + prev[:, :, 2]).T
        g[:, 1::2] = (own[:, :, 1] + prev[:, :, 3]).T
        stiff[dofs[m]] += test[m].T @ g
    return stiff


def assemble_hilbert_stiffness(mesh, w, inner_rule=None, outer_rule=None,
                               near_range=NEAR_RANGE, kernel=None):
    """Dense matrix ``K[i, j] = < H v_j', (phi v_i)' >``.

    ``kernel`` is ``"periodic"`` (cot kernel over one period) or ``"line"``
    (``1/(pi y)`` truncated to the mesh interval); ``None`` picks
    :func:`default_kernel`.
    """
    w.validate(mesh)
    kernel = kernel or default_kernel(w)
    _, moments = hilbert_moments(mesh, inner_rule, outer_rule, near_range, kernel)
    return hilbert_stiffness_from_moments(mesh, w, moments, outer_rule)


def hilbert_derivative(field, x, rule=None, kernel="periodic"):
    """Pointwise ``(H u')(x)`` by folded principal-value quadrature.

    The integrand is folded about ``x`` into
    ``[u'(x - y) - u'(x + y)] K(y)`` so the pole cancels, and the panels
    are split wherever ``x - y`` or ``x + y`` meets a mesh node.  For the
    line kernel the part of the interval beyond the symmetric window is
    integrated one-sidedly.
    """
    rule = rule or gauss_legendre(DEFAULT_INNER_ORDER)
    mesh = field.mesh
    half = mesh.half_period
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(xs)
    for i, xv in enumerate(xs):
        if kernel == "periodic":
            delta = np.mod(xv - mesh.nodes, 2.0 * half)
            cand = np.concatenate([delta, 2.0 * half - delta])
            reach = half
            kern = lambda y: periodic_kernel(y, half)  # noqa: E731
        else:
            cand = np.abs(xv - mesh.sample_grid())
            reach = min(xv - mesh.left, mesh.right - xv)
            kern = lambda y: 1.0 / (np.pi * y)  # noqa: E731
        cand = cand[(cand > 1e-14 * half) & (cand < reach)]
        breaks = np.unique(np.concatenate([[0.0, reach], cand]))

        def paired(y, xv=xv, kern=kern):
            return (field(xv - y, 1) - field(xv + y, 1)) * kern(y)

        total = pv_integrate_breaks(rule, breaks, paired) if reach > 0 else 0.0
        if kernel != "periodic":
            # one-sided remainder of the interval
            lo, hi = (mesh.left, xv - reach) if xv - mesh.left > reach else (xv + reach, mesh.right)
            if hi > lo:
                grid = mesh.sample_grid()
                sb = np.unique(np.concatenate([[lo, hi], grid[(grid > lo) & (grid < hi)]]))

                def one_sided(s, xv=xv):
                    return field(s, 1) / (np.pi * (xv - s))

                total += pv_integrate_breaks(rule, sb - sb[0], lambda t: one_sided(t + sb[0]))
        out[i] = total
    return float(out[0]) if np.ndim(x) == 0 else out


# -- assembled operator bundle -----------------------------------------------


@dataclass
class AssembledOperators:
    """Matrices of one (mesh, weight, dt) configuration.

    ``implicit_lu`` factorizes ``mass_w + dt/2 * hilbert_stiff`` once; solves
    against it are read-only and may be shared between threads.
    """

    mesh: object
    weight: WeightFunction
    dt: float
    mass_w: np.ndarray = field(repr=False)
    mass_unit: np.ndarray = field(repr=False)
    hilbert_stiff: np.ndarray = field(repr=False)
    implicit_lu: tuple = field(repr=False)
    outer_rule: object = field(repr=False)
    kernel: str = "periodic"
    _tables: dict = field(default_factory=dict, repr=False)

    @property
    def implicit_matrix(self):
        return self.mass_w + 0.5 * self.dt * self.hilbert_stiff

    def solve(self, rhs):
        return scipy.linalg.lu_solve(self.implicit_lu, rhs, check_finite=False)

    def nonlinear(self, coeffs):
        """``nonlinear_form`` on raw coefficients with cached tables."""
        if not self._tables:
            xi, wq = self.outer_rule.on_unit()
            self._tables.update(
                shapes=local_shapes(xi, 0),
                wdx=wq * self.mesh.dx,
                test=weighted_test_derivatives(self.mesh, self.weight, xi),
            )
        t = self._tables
        return _nonlinear_from_tables(coeffs, self.mesh, t["shapes"], t["wdx"], t["test"])

    def l2_norm(self, coeffs):
        return float(np.sqrt(max(coeffs @ self.mass_unit @ coeffs, 0.0)))

    def weighted_norm(self, coeffs):
        return float(np.sqrt(max(coeffs @ self.mass_w @ coeffs, 0.0)))

    def with_dt(self, dt):
        """Same matrices refactorized for another time step."""
        lu = scipy.linalg.lu_factor(self.mass_w + 0.5 * dt * self.hilbert_stiff)
        return AssembledOperators(
            self.mesh, self.weight, dt, self.mass_w, self.mass_unit,
            self.hilbert_stiff, lu, self.outer_rule, self.kernel,
        )


def assemble_operators(mesh, w, dt, inner_order=DEFAULT_INNER_ORDER,
                       outer_order=DEFAULT_OUTER_ORDER, near_range=NEAR_RANGE,
                       kernel=None):
    """Assemble and factorize everything one run needs."""
    if not dt > 0:
        raise ConfigurationError("time step must be positive")
    inner = gauss_legendre(inner_order)
    outer = gauss_legendre(outer_order)
    mass_w = assemble_weighted_mass(mesh, w, outer)
    mass_unit = mass_w if w.is_unit else assemble_weighted_mass(
        mesh, WeightFunction.unit(), outer)
    kernel = kernel or default_kernel(w)
    stiff = assemble_hilbert_stiffness(mesh, w, inner, outer, near_range, kernel)
    lu = scipy.linalg.lu_factor(mass_w + 0.5 * dt * stiff)
    return AssembledOperators(
        mesh, w, float(dt), mass_w, mass_unit, stiff, lu, outer, kernel
    )
