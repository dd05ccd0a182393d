"""Uniform periodic mesh and the C1 cubic Hermite space on it.

Basis functions are ``v_{2j}(x) = f((x - x_j)/dx)`` and
``v_{2j+1}(x) = g((x - x_j)/dx)`` with

    f(y) = 1 + y**2 (2|y| - 3),   g(y) = y (1 - |y|)**2,   |y| <= 1,

so coefficient ``2j`` is the nodal value and ``2j+1`` is ``dx`` times the
nodal derivative.  Node ``N`` is identified with node ``0``.
"""

from dataclasses import dataclass, field

import numpy as np

# Local shape functions on xi in [0, 1] for one element, ordered
# (value left, derivative left, value right, derivative right); ascending
# monomial coefficients.
LOCAL_SHAPES = np.array(
    [
        [1.0, 0.0, -3.0, 2.0],
        [0.0, 1.0, -2.0, 1.0],
        [0.0, 0.0, 3.0, -2.0],
        [0.0, 0.0, -1.0, 1.0],
    ]
)


def _poly_derivative(coeffs):
    n = coeffs.shape[-1]
    return coeffs[..., 1:] * np.arange(1, n)


LOCAL_SHAPES_D1 = _poly_derivative(LOCAL_SHAPES)
LOCAL_SHAPES_D2 = _poly_derivative(LOCAL_SHAPES_D1)


def local_shapes(xi, derivative_order=0):
    """Evaluate the four local shapes (or their xi-derivatives) at ``xi``.

    Returns an array of shape ``(4,) + xi.shape``.
    """
    table = (LOCAL_SHAPES, LOCAL_SHAPES_D1, LOCAL_SHAPES_D2)[derivative_order]
    xi = np.asarray(xi, dtype=float)
    powers = xi[..., None] ** np.arange(table.shape[1])
    return np.moveaxis(powers @ table.T, -1, 0)


def shape_value(kind, y, derivative_order=0):
    """Evaluate ``f`` or ``g`` (or a derivative) at reference coordinate ``y``.

    Outside ``[-1, 1]`` the value is zero.  At the kinks of ``|y|`` the
    second derivative uses the right-hand branch.
    """
    y = np.asarray(y, dtype=float)
    s = np.where(y >= 0.0, 1.0, -1.0)
    a = np.abs(y)
    if kind == "f":
        vals = (
            1.0 + y * y * (2.0 * a - 3.0),
            6.0 * y * (a - 1.0),
            12.0 * a - 6.0,
        )
    elif kind == "g":
        vals = (
            y * (1.0 - a) ** 2,
            (1.0 - a) * (1.0 - 3.0 * a),
            s * (6.0 * a - 4.0),
        )
    else:
        raise ValueError(f"unknown shape kind {kind!r}")
    out = np.where(a <= 1.0, vals[derivative_order], 0.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class UniformPeriodicMesh:
    left: float
    right: float
    num_elements: int

    def __post_init__(self):
        if not self.right > self.left:
            raise ValueError("mesh requires right > left")
        if int(self.num_elements) != self.num_elements or self.num_elements < 4:
            raise ValueError("mesh requires at least 4 elements")

    @property
    def dx(self):
        return (self.right - self.left) / self.num_elements

    @property
    def length(self):
        return self.right - self.left

    @property
    def half_period(self):
        return 0.5 * self.length

    @property
    def nodes(self):
        return self.left + self.dx * np.arange(self.num_elements)

    @property
    def ndofs(self):
        return 2 * self.num_elements

    def element_dofs(self):
        """Global dof indices of each element, shape ``(N, 4)``."""
        n = self.num_elements
        e = np.arange(n)
        nxt = (e + 1) % n
        return np.stack([2 * e, 2 * e + 1, 2 * nxt, 2 * nxt + 1], axis=1)

    def locate(self, x):
        """Element index and local coordinate in [0, 1) after periodic wrap."""
        x = np.asarray(x, dtype=float)
        s = np.mod(x - self.left, self.length) / self.dx
        m = np.floor(s).astype(int)
        xi = s - m
        # guard against round-up at the right end
        over = m >= self.num_elements
        m = np.where(over, self.num_elements - 1, m)
        xi = np.where(over, 1.0, xi)
        return m, xi

    def element_points(self, unit_nodes):
        """Physical coordinates of local points in every element, ``(N, q)``."""
        starts = self.left + self.dx * np.arange(self.num_elements)
        return starts[:, None] + self.dx * np.asarray(unit_nodes)[None, :]

    def sample_grid(self, closed=True):
        """Node coordinates, optionally including the right endpoint."""
        n = self.num_elements + (1 if closed else 0)
        return self.left + self.dx * np.arange(n)


@dataclass(frozen=True)
class HermiteField:
    mesh: UniformPeriodicMesh
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.shape != (self.mesh.ndofs,):
            raise ValueError(
                f"expected {self.mesh.ndofs} coefficients, got shape {c.shape}"
            )
        if not np.all(np.isfinite(c)):
            raise ValueError("field coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, mesh):
        return cls(mesh, np.zeros(mesh.ndofs))

    @property
    def values(self):
        return self.coeffs[0::2]

    @property
    def slopes(self):
        """Nodal first derivatives (unscaled)."""
        return self.coeffs[1::2] / self.mesh.dx

    def __call__(self, x, derivative_order=0):
        return evaluate(self, x, derivative_order)


def element_coeffs(field):
    """Coefficient array gathered per element, shape ``(N, 4)``."""
    return field.coeffs[field.mesh.element_dofs()]


def evaluate(field, x, derivative_order=0):
    """Evaluate a Hermite field (or its 1st/2nd derivative) at ``x``."""
    mesh = field.mesh
    scalar = np.ndim(x) == 0
    m, xi = mesh.locate(x)
    shapes = local_shapes(xi, derivative_order)
    c = element_coeffs(field)[m]
    out = np.einsum("k...,...k->...", shapes, c) / mesh.dx**derivative_order
    return float(out) if scalar else out


def interpolate(u, du, mesh):
    """Hermite interpolant matching ``u`` and ``du`` at every node."""
    x = mesh.nodes
    coeffs = np.empty(mesh.ndofs)
    coeffs[0::2] = np.broadcast_to(u(x), x.shape)
    coeffs[1::2] = mesh.dx * np.broadcast_to(du(x), x.shape)
    return HermiteField(mesh, coeffs)
