"""First-order block reduction of u'' + A u + B u' = 0 at the form level.

The damped second-order problem is encoded as a single sesquilinear form
on the doubled space V x V with pivot V x H:

    q((u1,u2),(v1,v2)) = -(u2 | v1)_V + a(u1, v2) + b(u2, v2),

whose associated operator is the block generator of the first-order
system u1' = u2, gram_h u2' = -(Sa u1 + Sb u2).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import forms, kernel
from .errors import NumericalError
from .forms import EllipticityCertificate, InnerProductPair, SesquilinearForm
from .kernel import DEFAULT_TOL, Tolerances

__all__ = [
    "BlockForm",
    "BlockOperator",
    "BlockConstants",
    "assemble_block_form",
    "block_continuity_bound",
    "block_constants",
    "block_ellipticity",
    "extract_operator",
    "rho_characterization_check",
    "selfadjointness_check",
    "noncoercivity_witness",
]

_ASSEMBLY_SEED = 0x0DD5EED  # fixed: assembly self-checks must be reproducible


@dataclass(frozen=True)
class BlockForm:
    """The block form with its two constituent forms and doubled Grams."""

    a: SesquilinearForm
    b: SesquilinearForm
    pair: InnerProductPair
    matrix: np.ndarray = field(init=False)        # 2n x 2n form matrix
    block_gram_v: np.ndarray = field(init=False)  # diag(gram_v, gram_v)
    block_gram_h: np.ndarray = field(init=False)  # diag(gram_v, gram_h)

    def __post_init__(self):
        n = self.pair.dim
        if self.a.dim != n or self.b.dim != n:
            raise ValueError("constituent form dimensions do not match the pair")
        zero = np.zeros((n, n), dtype=complex)
        matrix = np.block([[zero, -self.pair.gram_v], [self.a.matrix, self.b.matrix]])
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(
            self, "block_gram_v", _block_diag(self.pair.gram_v, self.pair.gram_v)
        )
        object.__setattr__(
            self, "block_gram_h", _block_diag(self.pair.gram_v, self.pair.gram_h)
        )

    @property
    def n(self) -> int:
        return self.pair.dim

    @property
    def dim(self) -> int:
        return 2 * self.pair.dim

    def __call__(self, u, v) -> complex:
        u = np.asarray(u, dtype=complex).reshape(-1)
        v = np.asarray(v, dtype=complex).reshape(-1)
        return complex(v.conj() @ self.matrix @ u)

    def as_form(self) -> SesquilinearForm:
        return SesquilinearForm(self.matrix)

    def block_pair(self) -> InnerProductPair:
        """The doubled spaces as an inner-product pair (V-Gram over H-Gram)."""
        return InnerProductPair(gram_v=self.block_gram_v, gram_h=self.block_gram_h)

    def norm_state_h(self, u) -> float:
        return kernel.gram_norm(u, self.block_gram_h)


def _block_diag(top: np.ndarray, bottom: np.ndarray) -> np.ndarray:
    n, m = top.shape[0], bottom.shape[0]
    out = np.zeros((n + m, n + m), dtype=complex)
    out[:n, :n] = top
    out[n:, n:] = bottom
    return out


@dataclass(frozen=True)
class BlockOperator:
    """Generator matrix G of the first-order system u' = G u.

    When extracted from a :class:`BlockForm` the blocks are
    [[0, I], [-gram_h^{-1} Sa, -gram_h^{-1} Sb]] and G satisfies the
    pairing q(u, v) = -(G u | v) in the block H-metric. ``omega`` is a
    quasi-contractivity shift (Re of the spectrum of G is <= omega).
    """

    matrix: np.ndarray
    gram: np.ndarray
    omega: float = 0.0

    def __post_init__(self):
        m = kernel.as_square_matrix(self.matrix, "generator")
        g = kernel.require_hpd(self.gram, "gram")
        if m.shape != g.shape:
            raise ValueError("generator/gram shape mismatch")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "gram", g)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def norm_h(self, u) -> float:
        return kernel.gram_norm(u, self.gram)


def assemble_block_form(
    a: SesquilinearForm,
    b: SesquilinearForm,
    pair: InnerProductPair,
    tol: Tolerances = DEFAULT_TOL,
    check_samples: int = 100,
) -> BlockForm:
    """Assemble the block form and verify it reproduces the three-term sum.

    The verification evaluates the assembled 2n matrix against
    -(u2|v1)_V + a(u1,v2) + b(u2,v2) on ``check_samples`` random pairs
    drawn from a fixed seed.
    """
    bf = BlockForm(a=a, b=b, pair=pair)
    rng = np.random.default_rng(_ASSEMBLY_SEED)
    n = pair.dim
    scale = max(
        np.abs(bf.matrix).max(), np.abs(pair.gram_v).max(), 1.0
    )
    for _ in range(check_samples):
        u = rng.standard_normal(2 * n) + 1j * rng.standard_normal(2 * n)
        v = rng.standard_normal(2 * n) + 1j * rng.standard_normal(2 * n)
        direct = bf(u, v)
        u1, u2 = u[:n], u[n:]
        v1, v2 = v[:n], v[n:]
        three_term = (
            -complex(v1.conj() @ pair.gram_v @ u2) + a(u1, v2) + b(u2, v2)
        )
        norm2 = float(np.linalg.norm(u) * np.linalg.norm(v))
        if abs(direct - three_term) > tol.assembly_rel * scale * norm2:
            raise NumericalError(
                "assembled block form disagrees with its defining three-term sum"
            )
    return bf


def block_continuity_bound(ma: float, mb: float) -> float:
    """Continuity bound sqrt(Ma/2 + Ma Mb + max{Ma^2, 1, Mb^2}) for the block form."""
    if ma < 0.0 or mb < 0.0:
        raise ValueError("constants must be nonnegative")
    return float(np.sqrt(ma / 2.0 + ma * mb + max(ma**2, 1.0, mb**2)))


@dataclass(frozen=True)
class BlockConstants:
    """Directly computed block constants next to their a-priori bounds."""

    ma_direct: float
    mb_direct: float
    m_block_direct: float
    m_block_bound: float
    block_imag_direct: float
    block_imag_bound: float

    @property
    def continuity_bound_ok(self) -> bool:
        return self.m_block_direct <= self.m_block_bound + 1e-8

    @property
    def imag_bound_ok(self) -> bool:
        return self.block_imag_direct <= self.block_imag_bound + 1e-8


def block_constants(bf: BlockForm, tol: Tolerances = DEFAULT_TOL) -> BlockConstants:
    """All scalar constants of the block form, direct and bounded.

    The direct block continuity constant is measured against the doubled
    V-Gram, the direct mixed-norm imaginary bound against the
    (block V, block H) pair; the bounds are the closed-form expressions
    in the constituent constants Ma, Mb (1 + Ma + Mb for the skew part).
    """
    ma = forms.continuity_constant(bf.a, bf.pair, tol)
    mb = forms.continuity_constant(bf.b, bf.pair, tol)
    bpair = bf.block_pair()
    m_block = forms.continuity_constant(bf.as_form(), bpair, tol)
    imag_direct = forms.imag_bound_constant(bf.as_form(), bpair, tol=tol)
    return BlockConstants(
        ma_direct=ma,
        mb_direct=mb,
        m_block_direct=m_block,
        m_block_bound=block_continuity_bound(ma, mb),
        block_imag_direct=imag_direct,
        block_imag_bound=1.0 + ma + mb,
    )


def block_ellipticity(
    bf: BlockForm,
    omega_grid=None,
    alpha_min: float = forms.ALPHA_MIN_DEFAULT,
    tol: Tolerances = DEFAULT_TOL,
) -> EllipticityCertificate | None:
    """Ellipticity certificate of the block form in the block H-metric.

    Succeeds exactly when the damping form b is elliptic on the given
    grid: b's certificate is lifted through the perturbation argument
    (the coupling terms are continuous against the mixed block norms with
    constants 1 and Ma), which predicts a sufficient shift; the returned
    alpha/omega are then re-measured on the assembled block pencil at
    that shift. Returns None when b admits no certificate on the grid.
    """
    if omega_grid is None:
        omega_grid = forms.default_omega_grid()
    b_cert = forms.ellipticity_constants(bf.b, bf.pair, omega_grid, alpha_min, tol)
    if b_cert is None:
        return None
    ma = forms.continuity_constant(bf.a, bf.pair, tol)
    # b's certificate transfers to the b-only block form once omega >= alpha.
    base = EllipticityCertificate(
        alpha=b_cert.alpha, omega=max(b_cert.omega, b_cert.alpha)
    )
    scale0 = forms.InterpolationScale(alpha_exp=0.0, gram_alpha=bf.block_gram_h)
    predicted = forms.perturbed_ellipticity(base, 1.0, ma, scale0)
    bpair = bf.block_pair()
    margin = forms.ellipticity_margin(bf.as_form(), bpair, predicted.omega, tol)
    if margin < predicted.alpha - 1e-10:
        raise NumericalError(
            "predicted block shift failed direct verification; "
            f"alpha({predicted.omega}) = {margin:.3e} < {predicted.alpha:.3e}"
        )
    return EllipticityCertificate(alpha=margin, omega=predicted.omega)


def extract_operator(bf: BlockForm, omega: float = 0.0,
                     tol: Tolerances = DEFAULT_TOL) -> BlockOperator:
    """Generator G = [[0, I], [-gram_h^{-1} Sa, -gram_h^{-1} Sb]].

    Verifies the defining pairing q(u, v) = -(G u | v)_blockH on random
    coefficient pairs before returning.
    """
    n = bf.n
    bottom = -kernel.solve_linear(
        bf.pair.gram_h, np.hstack([bf.a.matrix, bf.b.matrix]), tol
    )
    g = np.zeros((2 * n, 2 * n), dtype=complex)
    g[:n, n:] = np.eye(n)
    g[n:, :] = bottom
    op = BlockOperator(matrix=g, gram=bf.block_gram_h, omega=omega)

    rng = np.random.default_rng(_ASSEMBLY_SEED)
    scale = max(np.abs(bf.matrix).max(), 1.0)
    for _ in range(20):
        u = rng.standard_normal(2 * n) + 1j * rng.standard_normal(2 * n)
        v = rng.standard_normal(2 * n) + 1j * rng.standard_normal(2 * n)
        lhs = bf(u, v)
        rhs = -complex(v.conj() @ bf.block_gram_h @ (g @ u))
        if abs(lhs - rhs) > tol.pairing_rel * scale * np.linalg.norm(u) * np.linalg.norm(v):
            raise NumericalError("extracted generator violates the form pairing")
    return op


def rho_characterization_check(
    bf: BlockForm, rho: complex, samples: int = 100, tol: Tolerances = DEFAULT_TOL
) -> float:
    """Residual of the proportional-damping domain identity.

    Requires Sa = rho Sb (entrywise, to 1e-12 relative); then the second
    component of the generator action must equal
    -gram_h^{-1} Sb (rho u1 + u2). Returns the maximal relative residual
    over ``samples`` random states.
    """
    scale = max(np.abs(bf.b.matrix).max(), np.abs(bf.a.matrix).max(), 1.0)
    if np.abs(bf.a.matrix - rho * bf.b.matrix).max() > 1e-12 * scale:
        raise ValueError("hypothesis Sa = rho * Sb violated")
    op = extract_operator(bf, tol=tol)
    n = bf.n
    rng = np.random.default_rng(_ASSEMBLY_SEED + 1)
    worst = 0.0
    for _ in range(samples):
        u = rng.standard_normal(2 * n) + 1j * rng.standard_normal(2 * n)
        full = op.matrix @ u
        direct = -kernel.solve_linear(
            bf.pair.gram_h, bf.b.matrix @ (rho * u[:n] + u[n:]), tol
        )
        denom = max(float(np.linalg.norm(full[n:])), 1e-300)
        worst = max(worst, float(np.linalg.norm(full[n:] - direct)) / denom)
    return worst


def selfadjointness_check(bf: BlockForm, rel: float = 1e-12) -> bool:
    """True iff the block form is self-adjoint.

    Happens exactly when Sb is Hermitian and Sa = -gram_v, equivalently
    when the assembled 2n form matrix is Hermitian.
    """
    sb_ok = kernel.is_hermitian(bf.b.matrix, rel)
    scale = max(np.abs(bf.pair.gram_v).max(), 1.0)
    sa_ok = np.abs(bf.a.matrix + bf.pair.gram_v).max() <= rel * scale
    result = bool(sb_ok and sa_ok)
    if result != kernel.is_hermitian(bf.matrix, rel):
        raise NumericalError("self-adjointness criteria disagree with the matrix")
    return result


def noncoercivity_witness(bf: BlockForm, u1=None) -> np.ndarray:
    """A nonzero state (u1, 0) on which the block form has zero real part.

    Any such state defeats coercivity: the block form's quadratic value
    vanishes there while the block V-norm does not. Defaults to the first
    coordinate vector; any nonzero ``u1`` works.
    """
    n = bf.n
    u = np.zeros(2 * n, dtype=complex)
    if u1 is None:
        u[0] = 1.0
    else:
        u1 = np.asarray(u1, dtype=complex).reshape(-1)
        if u1.shape[0] != n or not np.any(u1):
            raise ValueError("u1 must be a nonzero vector of length n")
        u[:n] = u1
    value = bf(u, u)
    v_norm2 = kernel.gram_norm(u, bf.block_gram_v) ** 2
    if v_norm2 <= 0.0:
        raise NumericalError("witness has zero block V-norm")
    if abs(value.real) > 1e-14 * v_norm2:
        raise NumericalError("witness state has nonzero real form value")
    return u
