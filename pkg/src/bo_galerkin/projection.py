"""L2 and weighted L2 projections onto the Hermite space."""

import numpy as np
import scipy.linalg

from .mesh_basis import HermiteField, local_shapes
from .operators import WeightFunction, assemble_weighted_mass, weight_eval
from .quadrature import gauss_legendre

RHS_ORDER = 8
RHS_PANELS = 4


def load_vector(u, mesh, w, order=RHS_ORDER, panels=RHS_PANELS):
    """``b[i] = int u phi v_i dx`` with ``panels`` sub-panels per element."""
    xi, wq = gauss_legendre(order).on_unit()
    sub = (np.arange(panels)[:, None] + xi[None, :]).ravel() / panels
    wsub = np.tile(wq, panels) / panels
    pts = mesh.element_points(sub)
    phi, _ = weight_eval(w, pts)
    vals = np.asarray(u(pts), dtype=float) * phi
    local = np.einsum("mq,q,kq->mk", vals, wsub * mesh.dx, local_shapes(sub, 0))
    out = np.zeros(mesh.ndofs)
    np.add.at(out, mesh.element_dofs().ravel(), local.ravel())
    return out


def project(u, mesh, w=None, mass=None):
    """Best approximation of ``u`` in the ``<., phi .>`` inner product.

    With the unit weight this is the plain L2 projection used for the
    scheme's initial data.
    """
    w = w or WeightFunction.unit()
    if mass is None:
        mass = assemble_weighted_mass(mesh, w)
    b = load_vector(u, mesh, w)
    c = scipy.linalg.cho_solve(scipy.linalg.cho_factor(mass), b)
    return HermiteField(mesh, c)


def orthogonality_residual(u, field, w=None):
    """``max_i |int (field - u) phi v_i dx|``."""
    w = w or WeightFunction.unit()
    mesh = field.mesh
    mass = assemble_weighted_mass(mesh, w)
    return float(np.max(np.abs(mass @ field.coeffs - load_vector(u, mesh, w))))


def projection_error(u, field, seminorm_order=0, du=None, panels=8, order=8):
    """L2 norm (order 0) or H1 seminorm (order 1) of ``field - u``.

    Uses ``panels`` sub-panels of an ``order``-point rule per element.
    ``du`` is required for the seminorm.
    """
    mesh = field.mesh
    xi, wq = gauss_legendre(order).on_unit()
    sub = (np.arange(panels)[:, None] + xi[None, :]).ravel() / panels
    wsub = np.tile(wq, panels) / panels * mesh.dx
    pts = mesh.element_points(sub)
    if seminorm_order == 0:
        diff = field(pts) - np.asarray(u(pts), dtype=float)
    elif seminorm_order == 1:
        if du is None:
            raise ValueError("H1 seminorm needs the derivative du")
        diff = field(pts, 1) - np.asarray(du(pts), dtype=float)
    else:
        raise ValueError("seminorm_order must be 0 or 1")
    return float(np.sqrt(np.sum(diff * diff * wsub[None, :])))
