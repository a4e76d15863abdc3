"""Sesquilinear forms on a discrete space pair (V, H) and their constants.

Conventions, used everywhere in the package:

* inner products are ``(u | v) = v^H G u`` for an HPD Gram matrix G,
  linear in the first slot and conjugate-linear in the second;
* a form is ``a(u, v) = v^H S u`` with the same slot convention.

The constants computed here are the continuity bound
``|a(u,v)| <= M ||u||_V ||v||_V``, ellipticity certificates
``Re a(u,u) >= alpha ||u||_V^2 - omega ||u||_H^2``, the mixed-norm
imaginary-part bound ``|Im a(u,u)| <= M ||u||_H ||u||_V``, and the
quadratic shift produced by the Young-type inequality that powers the
perturbation argument for sums of forms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import kernel
from .errors import NumericalError
from .kernel import DEFAULT_TOL, Tolerances

__all__ = [
    "InnerProductPair",
    "SesquilinearForm",
    "EllipticityCertificate",
    "InterpolationScale",
    "default_omega_grid",
    "continuity_constant",
    "ellipticity_constants",
    "accretivity_check",
    "re_equals_V_inner",
    "imag_bound_constant",
    "young_shift",
    "perturbed_ellipticity",
    "build_interpolation_scale",
    "mixed_continuity_constant",
]

ALPHA_MIN_DEFAULT = 1e-8


def default_omega_grid(doublings: int = 10) -> list[float]:
    """The shift grid {0, 1, 2, 4, ..., 2**doublings}."""
    return [0.0] + [float(2**k) for k in range(doublings + 1)]


@dataclass(frozen=True)
class InnerProductPair:
    """Gram matrices of the dense embedding V into H.

    ``embedding_constant`` is the smallest c with ||f||_H <= c ||f||_V,
    i.e. the square root of the largest eigenvalue of the pencil
    (gram_h, gram_v).
    """

    gram_v: np.ndarray
    gram_h: np.ndarray
    embedding_constant: float = field(init=False)

    def __post_init__(self):
        gv = kernel.require_hpd(self.gram_v, "gram_v")
        gh = kernel.require_hpd(self.gram_h, "gram_h")
        if gv.shape != gh.shape:
            raise ValueError(f"Gram shapes differ: {gv.shape} vs {gh.shape}")
        object.__setattr__(self, "gram_v", gv)
        object.__setattr__(self, "gram_h", gh)
        w, _ = kernel.hermitian_geig(gh, gv)
        object.__setattr__(self, "embedding_constant", float(np.sqrt(w[-1])))

    @property
    def dim(self) -> int:
        return self.gram_v.shape[0]

    def norm_v(self, u) -> float:
        return kernel.gram_norm(u, self.gram_v)

    def norm_h(self, u) -> float:
        return kernel.gram_norm(u, self.gram_h)


@dataclass(frozen=True)
class SesquilinearForm:
    """Matrix representation of a form, a(u, v) = v^H S u."""

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", kernel.as_square_matrix(self.matrix, "form"))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, u, v) -> complex:
        u = np.asarray(u, dtype=complex).reshape(-1)
        v = np.asarray(v, dtype=complex).reshape(-1)
        return complex(v.conj() @ self.matrix @ u)

    def hermitian_part(self) -> np.ndarray:
        return kernel.hermitian_part(self.matrix)

    def skew_part(self) -> np.ndarray:
        return kernel.skew_part(self.matrix)


@dataclass(frozen=True)
class EllipticityCertificate:
    """Witness of Re a(u,u) >= alpha ||u||_V^2 - omega ||u||_H^2."""

    alpha: float
    omega: float


@dataclass(frozen=True)
class InterpolationScale:
    """Spectrally realized intermediate space between V and H.

    Built on the generalized eigenbasis of (gram_v, gram_h), so the
    interpolation inequality
    ``||f||_alpha <= ||f||_V^alpha_exp ||f||_H^(1-alpha_exp)``
    holds with constant exactly 1 (Hoelder on the coefficient sequence).
    """

    alpha_exp: float
    gram_alpha: np.ndarray

    def norm(self, u) -> float:
        return kernel.gram_norm(u, self.gram_alpha)


def _v_whitened(form_matrix: np.ndarray, gram: np.ndarray, tol: Tolerances) -> np.ndarray:
    """L^{-1} S L^{-H} for gram = L L^H: the form in a Gram-orthonormal basis."""
    low = kernel.cholesky_factor(gram, "gram", tol)
    y = sla.solve_triangular(low, form_matrix, lower=True)
    return sla.solve_triangular(low, y.conj().T, lower=True).conj().T


def continuity_constant(
    form: SesquilinearForm,
    pair: InnerProductPair,
    tol: Tolerances = DEFAULT_TOL,
    return_witness: bool = False,
):
    """sup |a(u,v)| / (||u||_V ||v||_V), the V-continuity constant.

    Equals the largest singular value of the V-whitened form matrix.
    With ``return_witness`` also returns coefficient vectors (u, v)
    attaining the supremum.
    """
    if form.dim != pair.dim:
        raise ValueError("form/pair dimension mismatch")
    low = kernel.cholesky_factor(pair.gram_v, "gram_v", tol)
    y = sla.solve_triangular(low, form.matrix, lower=True)
    white = sla.solve_triangular(low, y.conj().T, lower=True).conj().T
    uw, sv, vh = np.linalg.svd(white)
    constant = float(sv[0]) if sv.size else 0.0
    if not return_witness:
        return constant
    # white = L^{-1} S L^{-H}; the maximizing pair in coefficients is
    # u = L^{-H} (right singular vector), v = L^{-H} (left singular vector).
    u = sla.solve_triangular(low.conj().T, vh[0].conj(), lower=False)
    v = sla.solve_triangular(low.conj().T, uw[:, 0], lower=False)
    return constant, u, v


def mixed_continuity_constant(
    form_matrix,
    gram_first,
    gram_second,
    tol: Tolerances = DEFAULT_TOL,
) -> float:
    """sup |v^H S u| / (||u||_first ||v||_second) for two different Grams."""
    s = kernel.as_square_matrix(form_matrix, "form")
    lf = kernel.cholesky_factor(gram_first, "gram_first", tol)
    ls = kernel.cholesky_factor(gram_second, "gram_second", tol)
    y = sla.solve_triangular(lf, s.conj().T, lower=True).conj().T
    white = sla.solve_triangular(ls, y, lower=True)
    return float(np.linalg.norm(white, 2))


def ellipticity_constants(
    form: SesquilinearForm,
    pair: InnerProductPair,
    omega_grid=None,
    alpha_min: float = ALPHA_MIN_DEFAULT,
    tol: Tolerances = DEFAULT_TOL,
) -> EllipticityCertificate | None:
    """Search the shift grid for an ellipticity certificate.

    For each omega computes alpha(omega), the smallest eigenvalue of the
    pencil (Herm(S) + omega gram_h, gram_v), and returns the certificate
    at the smallest omega with alpha(omega) >= alpha_min, or None.
    """
    if omega_grid is None:
        omega_grid = default_omega_grid()
    omegas = [float(w) for w in omega_grid]
    if not omegas or any(b < a for a, b in zip(omegas, omegas[1:])):
        raise ValueError("omega grid must be nonempty and ascending")
    herm = form.hermitian_part()
    for omega in omegas:
        w, _ = kernel.hermitian_geig(herm + omega * pair.gram_h, pair.gram_v, tol)
        alpha = float(w[0])
        if alpha >= alpha_min:
            return EllipticityCertificate(alpha=alpha, omega=omega)
    return None


def ellipticity_margin(
    form: SesquilinearForm,
    pair: InnerProductPair,
    omega: float,
    tol: Tolerances = DEFAULT_TOL,
) -> float:
    """alpha(omega): smallest eigenvalue of (Herm(S) + omega gram_h, gram_v)."""
    w, _ = kernel.hermitian_geig(
        form.hermitian_part() + omega * pair.gram_h, pair.gram_v, tol
    )
    return float(w[0])


def accretivity_check(form: SesquilinearForm, pair: InnerProductPair) -> bool:
    """True iff Re a(u,u) >= 0 for all u (up to a relative floor)."""
    if form.dim != pair.dim:
        raise ValueError("form/pair dimension mismatch")
    herm = form.hermitian_part()
    scale = np.linalg.norm(form.matrix, 2) if form.dim else 0.0
    smallest = float(sla.eigvalsh(herm)[0]) if form.dim else 0.0
    return smallest >= -1e-12 * scale


def re_equals_V_inner(
    form: SesquilinearForm, pair: InnerProductPair, rel: float = 1e-12
) -> bool:
    """True iff Herm(S) equals gram_v entrywise to relative tolerance.

    This compares Hermitian parts, which is exactly the diagonal statement
    Re a(u,u) = ||u||_V^2 for all u.
    """
    if form.dim != pair.dim:
        raise ValueError("form/pair dimension mismatch")
    scale = np.abs(pair.gram_v).max()
    return np.abs(form.hermitian_part() - pair.gram_v).max() <= rel * scale


def _imag_pencil_value(two_k: np.ndarray, pair: InnerProductPair, s: float,
                       tol: Tolerances) -> float:
    # one eigensolve covers both signs: the (-2K, W) eigenvalues are the
    # negated, reversed (2K, W) ones
    weight = s * pair.gram_h + pair.gram_v / s
    w_pos, _ = kernel.hermitian_geig(two_k, weight, tol)
    return float(max(w_pos[-1], -w_pos[0]))


def _golden_max(fn, lo: float, hi: float, iters: int = 60) -> float:
    """Golden-section maximization of fn over [lo, hi]; returns the max value."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    return max(fc, fd)


def imag_bound_constant(
    form: SesquilinearForm,
    pair: InnerProductPair,
    grid_points: int = 64,
    tol: Tolerances = DEFAULT_TOL,
) -> float:
    """sup |Im a(u,u)| / (||u||_H ||u||_V), the mixed-norm skew bound.

    Uses ||u||_H ||u||_V = inf_{s>0} (s ||u||_H^2 + ||u||_V^2 / s) / 2:
    the constant is the supremum over s of the largest eigenvalue of the
    pencils (+-2K, s gram_h + gram_v / s) with K the skew part of S.
    The supremum is located on a logarithmic s-grid and polished by
    golden-section search around each local grid maximum.
    """
    if form.dim != pair.dim:
        raise ValueError("form/pair dimension mismatch")
    two_k = 2.0 * form.skew_part()
    if np.abs(two_k).max() == 0.0:
        return 0.0
    lo = pair.embedding_constant ** (-2) * 1e-3
    hi = 1e3
    if lo >= hi:
        lo, hi = hi * 1e-6, hi
    log_s = np.linspace(np.log(lo), np.log(hi), grid_points)

    def value_at_log(ls: float) -> float:
        return _imag_pencil_value(two_k, pair, float(np.exp(ls)), tol)

    values = np.array([value_at_log(ls) for ls in log_s])
    best = float(values.max())
    # polish every local grid maximum; the global one is among them
    for i in range(grid_points):
        left = values[i - 1] if i > 0 else -np.inf
        right = values[i + 1] if i < grid_points - 1 else -np.inf
        if values[i] >= left and values[i] >= right:
            a = log_s[max(i - 1, 0)]
            b = log_s[min(i + 1, grid_points - 1)]
            if a < b:
                best = max(best, _golden_max(value_at_log, a, b))
    return best


def young_shift(m: float, m_alpha: float, alpha_exp: float, eps: float) -> float:
    """Smallest M(eps) with 2 m m_alpha r^(1+a) <= eps r^2 + M(eps) for r >= 0.

    Closed form from scalar calculus: the gap is maximal at
    r* = (m m_alpha (1+a) / eps)^(1/(1-a)).
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    if not 0.0 <= alpha_exp < 1.0:
        raise ValueError("alpha_exp must lie in [0, 1)")
    if m < 0.0 or m_alpha < 0.0:
        raise ValueError("constants must be nonnegative")
    c = m * m_alpha
    if c == 0.0:
        return 0.0
    r_star = (c * (1.0 + alpha_exp) / eps) ** (1.0 / (1.0 - alpha_exp))
    return float(2.0 * c * r_star ** (1.0 + alpha_exp) - eps * r_star**2)


def perturbed_ellipticity(
    a0_cert: EllipticityCertificate,
    m1: float,
    m2: float,
    scale: InterpolationScale,
) -> EllipticityCertificate:
    """Certificate for a0 + a1 + a2 given one for a0.

    m1, m2 are the continuity constants of the perturbations measured
    against V x H_alpha and H_alpha x V; the interpolation constant of the
    spectral scale is exactly 1. The epsilon split uses half of a0's
    coercivity, so the sum stays elliptic with half the alpha and a
    Young-shifted omega.
    """
    eps = a0_cert.alpha / 2.0
    shift = young_shift(m1 + m2, 1.0, scale.alpha_exp, eps)
    return EllipticityCertificate(alpha=a0_cert.alpha / 2.0, omega=a0_cert.omega + shift)


def build_interpolation_scale(
    pair: InnerProductPair, alpha_exp: float, tol: Tolerances = DEFAULT_TOL
) -> InterpolationScale:
    """Spectral intermediate Gram between gram_v and gram_h.

    Diagonalizes the pencil (gram_v, gram_h) into a gram_h-orthonormal
    basis X with eigenvalues mu_k and sets
    ``gram_alpha = gram_h X diag(mu^alpha_exp) X^H gram_h``,
    so in eigencoefficients ||f||_alpha^2 = sum mu_k^alpha_exp |c_k|^2.
    """
    if not 0.0 <= alpha_exp < 1.0:
        raise ValueError("alpha_exp must lie in [0, 1)")
    mu, x = kernel.hermitian_geig(pair.gram_v, pair.gram_h, tol)
    if mu[0] <= 0.0:
        raise NumericalError("V-Gram pencil produced a nonpositive eigenvalue")
    core = x @ np.diag(mu**alpha_exp) @ x.conj().T
    gram_alpha = pair.gram_h @ core @ pair.gram_h
    gram_alpha = kernel.hermitian_part(gram_alpha)
    return InterpolationScale(alpha_exp=float(alpha_exp), gram_alpha=gram_alpha)
