"""Concrete 1D models feeding the block-form machinery.

Two discretizations are bundled, both linear P1 finite elements on a
uniform mesh of [0, L]:

* a Dirichlet model of u'' = (alpha(x) u' + beta(x) u_t')' with clamped
  ends, eliminated boundary dofs, mass Gram for H and the *pure
  stiffness* Gram for V (a genuine norm on the clamped space, chosen so
  that alpha == 1 makes the elastic form literally equal to the V inner
  product);

* a dynamic-boundary variant with constant complex alpha and beta == 1
  on the full H^1 space, where the boundary values evolve by their own
  law. Its phase space carries an extra boundary block: the effective
  second-slot Gram is mass + trace^H trace, and the trace values ride
  along as slaved coordinates.

All coefficients are sampled at cell midpoints (one-point quadrature),
which keeps weighted stiffness matrices Hermitian for real weights and
is second-order consistent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import block
from .block import BlockForm
from .errors import CoefficientError
from .evolution import TrajectoryRecord
from .forms import InnerProductPair, SesquilinearForm
from .kernel import DEFAULT_TOL, Tolerances

__all__ = [
    "Mesh1D",
    "CoefficientField",
    "DynamicBCSystem",
    "assemble_dirichlet_model",
    "assemble_dirichlet_block",
    "assemble_dynamic_bc",
    "discrete_mode",
    "analytic_mode_oracle",
    "dynamic_bc_invariant_check",
]


@dataclass(frozen=True)
class Mesh1D:
    """Uniform mesh of [0, length] with ``cells`` elements."""

    length: float
    cells: int

    def __post_init__(self):
        if self.length <= 0.0:
            raise ValueError("length must be positive")
        if self.cells < 2:
            raise ValueError("need at least 2 cells")

    @property
    def h(self) -> float:
        return self.length / self.cells

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.length, self.cells + 1)

    @property
    def midpoints(self) -> np.ndarray:
        return (np.arange(self.cells) + 0.5) * self.h


@dataclass(frozen=True)
class CoefficientField:
    """Coefficient functions of the elastic (alpha) and damping (beta) terms.

    ``alpha`` may be complex-valued; ``beta`` must be real and strictly
    positive wherever it is sampled.
    """

    alpha: Callable[[np.ndarray], np.ndarray]
    beta: Callable[[np.ndarray], np.ndarray]

    @classmethod
    def constants(cls, alpha: complex, beta: float) -> "CoefficientField":
        a, b = complex(alpha), float(beta)
        return cls(alpha=lambda x: np.full_like(x, a, dtype=complex),
                   beta=lambda x: np.full_like(x, b, dtype=float))

    def sample(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        a = np.asarray(self.alpha(x), dtype=complex) * np.ones_like(x)
        b = np.asarray(self.beta(x)) * np.ones_like(x)
        if np.abs(np.asarray(b).imag).max(initial=0.0) > 0.0:
            raise CoefficientError("beta must be real-valued")
        b = b.real.astype(float)
        if b.min() <= 0.0:
            bad = x[int(np.argmin(b))]
            raise CoefficientError(
                f"beta must be positive; got {b.min():.6g} at x = {bad:.6g}"
            )
        return a, b


def _p1_matrices(mesh: Mesh1D, weight: np.ndarray) -> np.ndarray:
    """Weighted stiffness on all nodes; ``weight`` holds per-cell values."""
    n = mesh.cells
    k = np.zeros((n + 1, n + 1), dtype=complex)
    wh = weight / mesh.h
    for c in range(n):
        k[c, c] += wh[c]
        k[c + 1, c + 1] += wh[c]
        k[c, c + 1] -= wh[c]
        k[c + 1, c] -= wh[c]
    return k


def _p1_mass(mesh: Mesh1D) -> np.ndarray:
    n = mesh.cells
    m = np.zeros((n + 1, n + 1), dtype=complex)
    h6 = mesh.h / 6.0
    for c in range(n):
        m[c, c] += 2.0 * h6
        m[c + 1, c + 1] += 2.0 * h6
        m[c, c + 1] += h6
        m[c + 1, c] += h6
    return m


def assemble_dirichlet_model(
    mesh: Mesh1D, coeffs: CoefficientField
) -> tuple[InnerProductPair, SesquilinearForm, SesquilinearForm]:
    """P1 Dirichlet discretization on interior dofs.

    Returns (pair, a, b) with gram_h the mass matrix, gram_v the plain
    stiffness matrix, and the forms the alpha- and beta-weighted
    stiffness matrices.
    """
    mids = mesh.midpoints
    a_vals, b_vals = coeffs.sample(mids)
    sl = slice(1, mesh.cells)  # interior nodes
    gram_v = _p1_matrices(mesh, np.ones(mesh.cells))[sl, sl]
    gram_h = _p1_mass(mesh)[sl, sl]
    s_a = _p1_matrices(mesh, a_vals)[sl, sl]
    s_b = _p1_matrices(mesh, b_vals)[sl, sl]
    pair = InnerProductPair(gram_v=gram_v, gram_h=gram_h)
    return pair, SesquilinearForm(s_a), SesquilinearForm(s_b)


def assemble_dirichlet_block(
    mesh: Mesh1D, coeffs: CoefficientField, tol: Tolerances = DEFAULT_TOL
) -> BlockForm:
    pair, a, b = assemble_dirichlet_model(mesh, coeffs)
    return block.assemble_block_form(a, b, pair, tol)


def discrete_mode(mesh: Mesh1D, k: int) -> tuple[float, np.ndarray]:
    """Exact generalized eigenpair of (stiffness, mass) on interior dofs.

    On a uniform P1 mesh the sine vectors diagonalize the pencil:
    v_j = sin(k pi x_j / L) with
    lambda_k = (6/h^2) (1 - cos(k pi h / L)) / (2 + cos(k pi h / L)).
    Valid for mode indices 1 <= k <= cells - 1.
    """
    if not 1 <= k <= mesh.cells - 1:
        raise ValueError(f"mode index must be in [1, {mesh.cells - 1}]")
    x = mesh.nodes[1:-1]
    v = np.sin(k * np.pi * x / mesh.length)
    c = np.cos(k * np.pi * mesh.h / mesh.length)
    lam = (6.0 / mesh.h**2) * (1.0 - c) / (2.0 + c)
    return float(lam), v.astype(complex)


def analytic_mode_oracle(
    mesh: Mesh1D,
    alpha: complex,
    beta: float,
    k: int,
    t: float,
    eta0: complex = 1.0,
    etadot0: complex = 0.0,
):
    """Closed-form modal solution for constant coefficients.

    The sine mode reduces the system to the scalar equation
    eta'' + beta lambda eta' + alpha lambda eta = 0, solved exactly
    through the roots of mu^2 + beta lambda mu + alpha lambda = 0
    (including the double-root branch). Returns the pair
    (eta(t) v_k, eta'(t) v_k).
    """
    from .evolution import State

    lam, v = discrete_mode(mesh, k)
    bl = complex(beta) * lam
    al = complex(alpha) * lam
    disc = bl * bl - 4.0 * al
    scale = abs(bl) ** 2 + 4.0 * abs(al)
    if scale == 0.0 or abs(disc) <= 1e-12 * scale:
        mu = -bl / 2.0
        c1 = complex(eta0)
        c2 = complex(etadot0) - mu * c1
        eta = (c1 + c2 * t) * np.exp(mu * t)
        etadot = (c2 + mu * (c1 + c2 * t)) * np.exp(mu * t)
    else:
        root = np.sqrt(disc)
        mu_p = (-bl + root) / 2.0
        mu_m = (-bl - root) / 2.0
        c_p = (complex(etadot0) - mu_m * complex(eta0)) / (mu_p - mu_m)
        c_m = complex(eta0) - c_p
        eta = c_p * np.exp(mu_p * t) + c_m * np.exp(mu_m * t)
        etadot = c_p * mu_p * np.exp(mu_p * t) + c_m * mu_m * np.exp(mu_m * t)
    return State(u1=eta * v, u2=etadot * v)


@dataclass(frozen=True)
class DynamicBCSystem:
    """Dynamic-boundary-condition system on the full H^1 space.

    The evolving coordinates are (u1, u2) on all n+1 nodes; the boundary
    velocity values u3 = trace(u2) are slaved to the constraint. The
    effective phase-space Gram carries the boundary energy through the
    modified second-slot Gram mass + trace^H trace.
    """

    mesh: Mesh1D
    alpha: complex
    full_pair: InnerProductPair          # gram_v = H^1 Gram, gram_h = mass
    trace: np.ndarray                    # 2 x (n+1) endpoint selector
    constrained_pair: InnerProductPair   # second slot: mass + trace^H trace
    form: BlockForm = field(init=False)

    def __post_init__(self):
        s_a = SesquilinearForm(self.alpha * _p1_matrices(self.mesh, np.ones(self.mesh.cells)))
        s_b = SesquilinearForm(_p1_matrices(self.mesh, np.ones(self.mesh.cells)))
        bf = block.assemble_block_form(s_a, s_b, self.constrained_pair)
        object.__setattr__(self, "form", bf)

    @property
    def boundary_dim(self) -> int:
        return self.trace.shape[0]

    @property
    def coord_dim(self) -> int:
        """Dimension of the evolving coordinates (f1, f2)."""
        return 2 * (self.mesh.cells + 1)

    @property
    def ambient_dim(self) -> int:
        """Dimension of the enlarged space V x H x boundary."""
        return self.coord_dim + self.boundary_dim

    def embed_states(self, states: np.ndarray) -> np.ndarray:
        """Map coordinate states (u1, u2) to ambient states (u1, u2, L u2)."""
        states = np.atleast_2d(np.asarray(states, dtype=complex))
        n1 = self.mesh.cells + 1
        u2 = states[:, n1:]
        return np.hstack([states, u2 @ self.trace.T])


def assemble_dynamic_bc(
    mesh: Mesh1D, alpha: complex, tol: Tolerances = DEFAULT_TOL
) -> DynamicBCSystem:
    """Build the dynamic-boundary system for constant alpha and beta == 1.

    The V-Gram is the full H^1 Gram (stiffness + mass; plain stiffness is
    only a seminorm without essential boundary conditions). The trace map
    selects the endpoint values; the boundary space carries the identity
    Gram.
    """
    n1 = mesh.cells + 1
    stiff = _p1_matrices(mesh, np.ones(mesh.cells))
    mass = _p1_mass(mesh)
    trace = np.zeros((2, n1), dtype=complex)
    trace[0, 0] = 1.0
    trace[1, -1] = 1.0
    full_pair = InnerProductPair(gram_v=stiff + mass, gram_h=mass)
    constrained = InnerProductPair(
        gram_v=stiff + mass, gram_h=mass + trace.conj().T @ trace
    )
    if np.linalg.matrix_rank(trace) != 2:
        raise CoefficientError("trace map lost full row rank")
    return DynamicBCSystem(
        mesh=mesh,
        alpha=complex(alpha),
        full_pair=full_pair,
        trace=trace,
        constrained_pair=constrained,
    )


def dynamic_bc_invariant_check(
    system: DynamicBCSystem, source: TrajectoryRecord | np.ndarray
) -> float:
    """Max norm of trace(u2) - u3 over exported ambient states.

    Coordinate trajectories satisfy the constraint by construction, so a
    nonzero value measures export corruption, not dynamics error.
    """
    if isinstance(source, TrajectoryRecord):
        ambient = system.embed_states(source.states)
    else:
        ambient = np.atleast_2d(np.asarray(source, dtype=complex))
    n1 = system.mesh.cells + 1
    u2 = ambient[:, n1 : 2 * n1]
    u3 = ambient[:, 2 * n1 :]
    gap = u2 @ system.trace.T - u3
    return float(np.abs(gap).max()) if gap.size else 0.0
