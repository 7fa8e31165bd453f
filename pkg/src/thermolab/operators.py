"""Discrete generator of the coupled wave/degenerate-heat system.

Continuous piecewise-linear elements on a graded mesh for all three fields
(displacement u, velocity v, temperature theta).  Boundary conditions are
imposed by index restriction:

* u, v vanish at both endpoints (interior nodes only);
* theta vanishes at both endpoints for weakly degenerate profiles, and only
  at x = 1 for strongly degenerate ones -- the node at x = 0 stays free and
  the zero-flux condition (a theta')(0) = 0 enters the weak form through the
  absent boundary term.

The generator action in coefficient space is

    (u, v, th) -> (v,  M_u^-1 (-S u - k C th),  M_th^-1 (-S_a th + k C^T v))

with S the Dirichlet stiffness, S_a the a-weighted stiffness on the
temperature space, M_* consistent mass matrices (no lumping: lumping would
break the exact adjoint and dissipation identities) and C the coupling form
C[i, j] = integral of phi_i * phi_j' (displacement test x temperature
trial).  The velocity coupling is integrated by parts so that the two
coupling blocks are exact transposes of each other; that makes the discrete
energy balance

    Re <A U, U>_G = - th^T S_a th

hold to rounding, not just to discretization error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import DimensionMismatch, QuadratureFailure, UnsupportedClass
from .meshes import Mesh
from .profiles import DegeneracyClass, DegeneracyProfile
from .quadrature import adaptive_simpson

__all__ = [
    "StateVector",
    "DiscreteOperator",
    "assemble",
    "apply_generator",
    "adjoint_apply",
    "energy",
    "dissipation_residual",
    "gram_inner",
    "gram_norm",
]


@dataclass
class StateVector:
    """Coefficient triple (u, v, theta) in the discrete energy space."""

    u: np.ndarray
    v: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        self.u = np.asarray(self.u)
        self.v = np.asarray(self.v)
        self.theta = np.asarray(self.theta)
        for name, arr in (("u", self.u), ("v", self.v), ("theta", self.theta)):
            if arr.ndim != 1:
                raise DimensionMismatch(f"{name} must be a 1-d coefficient vector")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"non-finite entries in {name}")

    def to_array(self) -> np.ndarray:
        return np.concatenate((self.u, self.v, self.theta))

    def __add__(self, other: "StateVector") -> "StateVector":
        return StateVector(self.u + other.u, self.v + other.v, self.theta + other.theta)

    def __sub__(self, other: "StateVector") -> "StateVector":
        return StateVector(self.u - other.u, self.v - other.v, self.theta - other.theta)

    def __rmul__(self, c) -> "StateVector":
        return StateVector(c * self.u, c * self.v, c * self.theta)


def _tridiag(diag, off_lo, off_hi) -> sp.csr_matrix:
    n = diag.size
    return sp.diags([off_lo, diag, off_hi], offsets=(-1, 0, 1), shape=(n, n)).tocsr()


def _element_coefficient_integrals(mesh: Mesh, profile: DegeneracyProfile, quad_tol: float):
    """Integral of a(x) over each element; exact for power laws."""
    xl, xr = mesh.nodes[:-1], mesh.nodes[1:]
    if profile.kind == "power_law":
        al = profile.alpha
        return (np.power(xr, al + 1.0) - np.power(xl, al + 1.0)) / (al + 1.0)
    out = np.empty(mesh.n)
    for k in range(mesh.n):
        try:
            out[k] = adaptive_simpson(lambda s: float(profile.a(s)), xl[k], xr[k], tol=quad_tol)
        except Exception as exc:  # noqa: BLE001 - rewrap with element context
            raise QuadratureFailure(f"coefficient integral failed on element {k}: {exc}") from exc
    return out


class DiscreteOperator:
    """Assembled matrices of the generator on one mesh/profile/kappa triple.

    Immutable after assembly apart from private solver caches; safe for
    concurrent read-only use.
    """

    def __init__(self, mesh, profile, kappa, stiffness, mass_u, mass_theta,
                 weighted_stiffness, coupling):
        self.mesh = mesh
        self.profile = profile
        self.kappa = float(kappa)
        self.klass = profile.klass
        self.stiffness = stiffness
        self.mass_u = mass_u
        self.mass_theta = mass_theta
        self.weighted_stiffness = weighted_stiffness
        self.coupling = coupling
        self.u_dim = stiffness.shape[0]
        self.theta_dim = mass_theta.shape[0]
        self.n_dof = 2 * self.u_dim + self.theta_dim
        self._cache: dict = {}

    # -- solver plumbing ----------------------------------------------------

    def _mass_factor(self, which: str):
        key = f"chol_{which}"
        if key not in self._cache:
            m = self.mass_u if which == "u" else self.mass_theta
            dense_bands = np.zeros((2, m.shape[0]))
            dense_bands[0] = m.diagonal()
            dense_bands[1, :-1] = m.diagonal(-1)
            self._cache[key] = sla.cholesky_banded(dense_bands, lower=True)
        return self._cache[key]

    def _mass_solve(self, which: str, b: np.ndarray) -> np.ndarray:
        fac = self._mass_factor(which)
        if np.iscomplexobj(b):
            return sla.cho_solve_banded((fac, True), b.real) + 1j * sla.cho_solve_banded(
                (fac, True), b.imag
            )
        return sla.cho_solve_banded((fac, True), b)

    def mass_solve_u(self, b):
        return self._mass_solve("u", b)

    def mass_solve_theta(self, b):
        return self._mass_solve("theta", b)

    # -- block views ----------------------------------------------------------

    def stiffness_block(self) -> sp.csr_matrix:
        """Block matrix of the weak-form right-hand sides (no mass inverses)."""
        nu, nth = self.u_dim, self.theta_dim
        k = self.kappa
        zero_uu = sp.csr_matrix((nu, nu))
        zero_ut = sp.csr_matrix((nu, nth))
        zero_tu = sp.csr_matrix((nth, nu))
        eye = sp.identity(nu, format="csr")
        return sp.bmat(
            [
                [zero_uu, eye, zero_ut],
                [-self.stiffness, zero_uu, -k * self.coupling],
                [zero_tu, k * self.coupling.T, -self.weighted_stiffness],
            ],
            format="csr",
        )

    def mass_block(self) -> sp.csr_matrix:
        """Block-diagonal mass pairing the stiffness block (identity on u)."""
        return sp.block_diag(
            (sp.identity(self.u_dim), self.mass_u, self.mass_theta), format="csr"
        )

    def gram_matrix(self) -> sp.csr_matrix:
        """Energy Gram matrix blockdiag(S, M_u, M_th)."""
        return sp.block_diag((self.stiffness, self.mass_u, self.mass_theta), format="csr")

    def reduced_matrix(self) -> np.ndarray:
        """Dense coefficient-space generator U -> A_h U (cached)."""
        if "reduced" not in self._cache:
            nu, nth = self.u_dim, self.theta_dim
            a = np.zeros((self.n_dof, self.n_dof))
            a[:nu, nu : 2 * nu] = np.eye(nu)
            a[nu : 2 * nu, :nu] = -self.mass_solve_u(self.stiffness.toarray())
            a[nu : 2 * nu, 2 * nu :] = -self.kappa * self.mass_solve_u(self.coupling.toarray())
            a[2 * nu :, nu : 2 * nu] = self.kappa * self.mass_solve_theta(
                self.coupling.T.toarray()
            )
            a[2 * nu :, 2 * nu :] = -self.mass_solve_theta(self.weighted_stiffness.toarray())
            self._cache["reduced"] = a
        return self._cache["reduced"]

    # -- state plumbing -------------------------------------------------------

    def check_state(self, state: StateVector) -> None:
        if state.u.size != self.u_dim or state.v.size != self.u_dim:
            raise DimensionMismatch(
                f"u/v must have {self.u_dim} coefficients, got {state.u.size}/{state.v.size}"
            )
        if state.theta.size != self.theta_dim:
            raise DimensionMismatch(
                f"theta must have {self.theta_dim} coefficients, got {state.theta.size}"
            )

    def state_from_array(self, arr: np.ndarray) -> StateVector:
        nu = self.u_dim
        return StateVector(arr[:nu], arr[nu : 2 * nu], arr[2 * nu :])

    def zero_state(self) -> StateVector:
        return StateVector(
            np.zeros(self.u_dim), np.zeros(self.u_dim), np.zeros(self.theta_dim)
        )

    def theta_nodes(self) -> np.ndarray:
        """Mesh nodes carrying temperature dofs."""
        if self.klass is DegeneracyClass.WDP:
            return self.mesh.nodes[1:-1]
        return self.mesh.nodes[:-1]


def assemble(mesh: Mesh, profile: DegeneracyProfile, kappa: float,
             quad_tol: float = 1e-10) -> DiscreteOperator:
    """Assemble the discrete generator for a degenerate profile.

    kappa >= 0; kappa = 0 decouples the wave and heat blocks and is kept as
    a control configuration.
    """
    if profile.klass not in (DegeneracyClass.WDP, DegeneracyClass.SDP):
        raise UnsupportedClass(
            f"assembly requires a weakly or strongly degenerate profile, got {profile.klass.value}"
        )
    if kappa < 0:
        raise ValueError("coupling constant must be >= 0")
    h = mesh.widths
    n = mesh.n

    # interior (Dirichlet) stiffness and mass for u, v
    diag_s = 1.0 / h[:-1] + 1.0 / h[1:]
    off_s = -1.0 / h[1:-1]
    stiffness = _tridiag(diag_s, off_s, off_s)
    diag_m = (h[:-1] + h[1:]) / 3.0
    off_m = h[1:-1] / 6.0
    mass_u = _tridiag(diag_m, off_m, off_m)

    coeff = _element_coefficient_integrals(mesh, profile, quad_tol)
    elem_sa = coeff / h**2  # common factor of the element stiffness [[1,-1],[-1,1]]

    if profile.klass is DegeneracyClass.WDP:
        # temperature dofs at interior nodes 1..n-1
        diag_a = elem_sa[:-1] + elem_sa[1:]
        off_a = -elem_sa[1:-1]
        weighted = _tridiag(diag_a, off_a, off_a)
        mass_theta = _tridiag(diag_m, off_m, off_m)
        # coupling integral phi_i * phi_j' on the shared node set: +1/2 above,
        # -1/2 below the diagonal, mesh-independent
        ones = 0.5 * np.ones(n - 2)
        coupling = _tridiag(np.zeros(n - 1), -ones, ones)
    else:
        # temperature dofs at nodes 0..n-1; zero-flux end at x = 0
        diag_a = np.concatenate(([elem_sa[0]], elem_sa[:-1] + elem_sa[1:]))
        off_a = -elem_sa[:-1]
        weighted = _tridiag(diag_a, off_a, off_a)
        diag_mt = np.concatenate(([h[0] / 3.0], (h[:-1] + h[1:]) / 3.0))
        off_mt = h[:-1] / 6.0
        mass_theta = _tridiag(diag_mt, off_mt, off_mt)
        # rows: interior u nodes 1..n-1, columns: theta nodes 0..n-1
        rows = np.concatenate((np.arange(n - 1), np.arange(n - 2)))
        cols = np.concatenate((np.arange(n - 1), np.arange(2, n)))
        vals = np.concatenate((-0.5 * np.ones(n - 1), 0.5 * np.ones(n - 2)))
        coupling = sp.csr_matrix((vals, (rows, cols)), shape=(n - 1, n))

    return DiscreteOperator(
        mesh, profile, kappa, stiffness, mass_u, mass_theta, weighted, coupling
    )


# -- generator actions -------------------------------------------------------


def apply_generator(op: DiscreteOperator, state: StateVector) -> StateVector:
    """Galerkin realization of (u, v, th) -> (v, u'' - k th', (a th')' - k v')."""
    op.check_state(state)
    w_v = op.mass_solve_u(-op.stiffness @ state.u - op.kappa * (op.coupling @ state.theta))
    w_th = op.mass_solve_theta(
        -op.weighted_stiffness @ state.theta + op.kappa * (op.coupling.T @ state.v)
    )
    return StateVector(state.v.copy(), w_v, w_th)


def adjoint_apply(op: DiscreteOperator, state: StateVector) -> StateVector:
    """Gram adjoint: (u, v, th) -> (-v, -(u'' - k th'), (a th')' + k v')."""
    op.check_state(state)
    w_v = op.mass_solve_u(op.stiffness @ state.u + op.kappa * (op.coupling @ state.theta))
    w_th = op.mass_solve_theta(
        -op.weighted_stiffness @ state.theta - op.kappa * (op.coupling.T @ state.v)
    )
    return StateVector(-state.v, w_v, w_th)


def gram_inner(op: DiscreteOperator, x: StateVector, y: StateVector):
    """Energy inner product <x, y>_G, conjugate-linear in y."""
    op.check_state(x)
    op.check_state(y)
    val = (
        np.vdot(y.u, op.stiffness @ x.u)
        + np.vdot(y.v, op.mass_u @ x.v)
        + np.vdot(y.theta, op.mass_theta @ x.theta)
    )
    complex_in = any(
        np.iscomplexobj(arr) for arr in (x.u, x.v, x.theta, y.u, y.v, y.theta)
    )
    return complex(val) if complex_in else float(np.real(val))


def gram_norm(op: DiscreteOperator, x: StateVector) -> float:
    return float(np.sqrt(max(np.real(gram_inner(op, x, x)), 0.0)))


def energy(op: DiscreteOperator, state: StateVector) -> float:
    """Discrete energy 0.5 * <U, U>_G >= 0."""
    return 0.5 * float(np.real(gram_inner(op, state, state)))


def dissipation_residual(op: DiscreteOperator, state: StateVector) -> float:
    """Re<A U, U>_G + th^T S_a th; zero up to rounding by construction."""
    op.check_state(state)
    au = apply_generator(op, state)
    damping = float(np.real(np.vdot(state.theta, op.weighted_stiffness @ state.theta)))
    return float(np.real(gram_inner(op, au, state))) + damping
