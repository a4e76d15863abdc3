"""The quantitative verification suite.

Each check re-derives one claim the laboratory rests on, against the
bundled 1D models or randomized instances, and reports the measured
quantities next to the bounds they must respect. All randomness flows
from a single seed, so a repeated run reproduces the report bit for bit.
"""

from __future__ import annotations

import numpy as np

from . import block as block_mod
from . import evolution, forms, kernel, models, spectral
from .block import BlockOperator
from .config import CoefficientSpec, ModelSpec
from .errors import BlowUpError
from .evolution import NonautonomousFamily, halving_order
from .forms import InnerProductPair, SesquilinearForm
from .runner import CheckResult, ModelBundle, VerificationReport, build_model

__all__ = ["run_all", "VERIFY_CHECK_NAMES"]

VERIFY_CHECK_NAMES = [
    "block-continuity-bound",
    "ellipticity-iff",
    "perturbation-shift",
    "noncoercivity-witness",
    "proportional-damping-identity",
    "contractivity",
    "mode-oracle",
    "reality-preservation",
    "frequency-response-stability",
    "imag-bound-parabola",
    "sector-containment",
    "dynamic-boundary",
    "semilinear-klein-gordon",
    "nonautonomous-equi-ellipticity",
]


def _dirichlet(n: int, alpha: complex, beta: float = 1.0) -> ModelBundle:
    spec = ModelSpec(
        model="dirichlet",
        n=n,
        length=1.0,
        alpha=CoefficientSpec("const", (complex(alpha),)),
        beta=CoefficientSpec("const", (complex(beta),)),
    )
    return build_model(spec)


def _dynamic(n: int, alpha: complex) -> ModelBundle:
    spec = ModelSpec(
        model="dynamic-bc",
        n=n,
        length=1.0,
        alpha=CoefficientSpec("const", (complex(alpha),)),
        beta=CoefficientSpec("const", (1.0 + 0.0j,)),
    )
    return build_model(spec)


def _random_pair(rng: np.random.Generator, n: int) -> InnerProductPair:
    gv = rng.standard_normal((n, n))
    gh = rng.standard_normal((n, n))
    return InnerProductPair(
        gram_v=gv @ gv.T + n * np.eye(n), gram_h=gh @ gh.T + n * np.eye(n)
    )


def _random_form(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    return scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))


def check_block_continuity(seed: int) -> CheckResult:
    slack = 1e-8
    per_n = {}
    passed = True
    for n in (16, 32, 64):
        bundle = _dirichlet(n, 1.0 + 0.5j)
        c = block_mod.block_constants(bundle.bf)
        ma, ua, va = forms.continuity_constant(bundle.a, bundle.pair,
                                               return_witness=True)
        mb, ub, vb = forms.continuity_constant(bundle.b, bundle.pair,
                                               return_witness=True)
        wit_a = abs(bundle.a(ua, va)) / (bundle.pair.norm_v(ua) * bundle.pair.norm_v(va))
        wit_b = abs(bundle.b(ub, vb)) / (bundle.pair.norm_v(ub) * bundle.pair.norm_v(vb))
        ok = (
            c.m_block_direct <= c.m_block_bound + slack
            and abs(wit_a - ma) <= 1e-8 * max(ma, 1.0)
            and abs(wit_b - mb) <= 1e-8 * max(mb, 1.0)
        )
        passed = passed and ok
        per_n[str(n)] = {
            "m_block_direct": c.m_block_direct,
            "m_block_bound": c.m_block_bound,
            "ma": ma,
            "mb": mb,
            "witness_ratio_a": wit_a,
            "witness_ratio_b": wit_b,
        }
    return CheckResult(
        name="block-continuity-bound",
        description="block continuity constant below its closed-form bound, "
                    "with the sub-constants attained by singular vectors",
        computed=per_n,
        bounds={"slack": slack},
        passed=passed,
    )


def check_ellipticity_iff(seed: int) -> CheckResult:
    rng = np.random.default_rng(seed + 1)
    n = 12
    grid = forms.default_omega_grid()
    mismatches = 0
    outcomes = []
    for idx in range(20):
        pair = _random_pair(rng, n)
        a = SesquilinearForm(_random_form(rng, n))
        if idx == 0:
            b_mat = np.zeros((n, n), dtype=complex)
        elif idx == 1:
            b_mat = pair.gram_v.astype(complex)
        elif idx in (2, 3):
            # Hermitian part far below what the grid's largest shift can lift
            b_mat = -4096.0 * pair.gram_h + 1j * (
                _random_form(rng, n) - _random_form(rng, n).conj().T
            ) / 2.0
        else:
            b_mat = _random_form(rng, n)
        b = SesquilinearForm(b_mat)
        bf = block_mod.assemble_block_form(a, b, pair)
        block_cert = block_mod.block_ellipticity(bf, grid)
        b_cert = forms.ellipticity_constants(b, pair, grid)
        if (block_cert is None) != (b_cert is None):
            mismatches += 1
        outcomes.append(block_cert is not None)
    return CheckResult(
        name="ellipticity-iff",
        description="block ellipticity succeeds exactly when the damping form "
                    "is elliptic on the same shift grid",
        computed={"mismatches": mismatches,
                  "successes": int(sum(outcomes)), "instances": len(outcomes)},
        bounds={"mismatches_allowed": 0},
        passed=mismatches == 0,
    )


def check_perturbation_shift(seed: int) -> CheckResult:
    rng = np.random.default_rng(seed + 2)
    n = 8
    worst_rel = 0.0
    worst_slack = np.inf
    passed = True
    rho_grid = np.logspace(-8.0, 8.0, 100001)
    for idx in range(10):
        alpha_exp = (0.0, 0.3, 0.7)[idx % 3]
        pair = _random_pair(rng, n)
        skew = _random_form(rng, n)
        a0 = SesquilinearForm(pair.gram_v + 1j * (skew + skew.conj().T) / 2.0)
        cert0 = forms.ellipticity_constants(a0, pair, [0.0])
        assert cert0 is not None
        scale = forms.build_interpolation_scale(pair, alpha_exp)
        s1 = _random_form(rng, n)
        s2 = _random_form(rng, n)
        m1 = forms.mixed_continuity_constant(s1, pair.gram_v, scale.gram_alpha)
        m2 = forms.mixed_continuity_constant(s2, scale.gram_alpha, pair.gram_v)
        eps = cert0.alpha / 2.0
        closed = forms.young_shift(m1 + m2, 1.0, alpha_exp, eps)
        brute = float(
            (2.0 * (m1 + m2) * rho_grid ** (1.0 + alpha_exp) - eps * rho_grid**2).max()
        )
        rel = abs(closed - brute) / max(closed, 1e-300)
        worst_rel = max(worst_rel, rel)
        cert = forms.perturbed_ellipticity(cert0, m1, m2, scale)
        summed = SesquilinearForm(a0.matrix + s1 + s2)
        margin = forms.ellipticity_margin(summed, pair, cert.omega)
        slack = margin - cert.alpha
        worst_slack = min(worst_slack, slack)
        passed = passed and rel <= 1e-6 and slack >= -1e-10
    return CheckResult(
        name="perturbation-shift",
        description="closed-form Young shift matches a brute-force 1D "
                    "maximization and the perturbed certificate re-verifies "
                    "on the assembled sum",
        computed={"worst_rel_error": worst_rel, "worst_margin_slack": worst_slack},
        bounds={"rel_cap": 1e-6, "slack_floor": -1e-10},
        passed=passed,
    )


def check_noncoercivity(seed: int) -> CheckResult:
    rng = np.random.default_rng(seed + 3)
    worst = 0.0
    for bundle in (
        _dirichlet(32, 1.0 + 0.5j),
        _dirichlet(16, 2.0),
        _dynamic(32, 1.0 + 0.5j),
    ):
        bf = bundle.bf
        for _ in range(100):
            u1 = rng.standard_normal(bf.n) + 1j * rng.standard_normal(bf.n)
            w = block_mod.noncoercivity_witness(bf, u1)
            ratio = abs(bf(w, w).real) / kernel.gram_norm(w, bf.block_gram_v) ** 2
            worst = max(worst, ratio)
    return CheckResult(
        name="noncoercivity-witness",
        description="the block form's real part vanishes on every state with "
                    "zero velocity component",
        computed={"worst_ratio": worst},
        bounds={"cap": 1e-14},
        passed=worst <= 1e-14,
    )


def check_proportional_damping(seed: int) -> CheckResult:
    rho = 2.0 + 1.0j
    bundle = _dirichlet(32, rho)
    residual = block_mod.rho_characterization_check(bundle.bf, rho, samples=100)
    return CheckResult(
        name="proportional-damping-identity",
        description="with elastic = rho * damping, the generator's second row "
                    "factors through rho*u1 + u2",
        computed={"max_residual": residual, "rho": {"re": rho.real, "im": rho.imag}},
        bounds={"cap": 1e-12},
        passed=residual <= 1e-12,
    )


def check_contractivity(seed: int) -> CheckResult:
    bundle = _dirichlet(32, 1.0)
    assert forms.re_equals_V_inner(bundle.a, bundle.pair)
    assert forms.accretivity_check(bundle.b, bundle.pair)
    op = block_mod.extract_operator(bundle.bf)
    times = np.linspace(0.0, 2.0, 21)
    curve = evolution.semigroup_norm_curve(op, times)
    max_norm = float(curve.max())
    max_increase = float(np.diff(curve).max())
    passed = max_norm <= 1.0 + 1e-10 and max_increase <= 1e-10
    return CheckResult(
        name="contractivity",
        description="matched elastic form and accretive damping give a "
                    "nonincreasing contraction semigroup",
        computed={"max_norm": max_norm, "max_increase": max_increase},
        bounds={"norm_cap": 1.0 + 1e-10, "increase_cap": 1e-10},
        passed=passed,
    )


def check_mode_oracle(seed: int) -> CheckResult:
    bundle = _dirichlet(64, 2.0)
    op = block_mod.extract_operator(bundle.bf)
    times = np.linspace(0.0, 1.0, 17)
    worst = 0.0
    for k in (1, 2, 4, 8):
        _, v = models.discrete_mode(bundle.mesh, k)
        s0 = np.concatenate([v, np.zeros_like(v)])
        record = evolution.propagate_linear(op, s0, times)
        oracle = models.analytic_mode_oracle(bundle.mesh, 2.0, 1.0, k, 1.0)
        rel = op.norm_h(record.final - oracle.stack()) / op.norm_h(oracle.stack())
        worst = max(worst, rel)
    return CheckResult(
        name="mode-oracle",
        description="stepped exact-exponential propagation matches the "
                    "closed-form modal solution",
        computed={"worst_rel_error": worst},
        bounds={"cap": 1e-8},
        passed=worst <= 1e-8,
    )


def check_reality(seed: int) -> CheckResult:
    bundle = _dirichlet(32, 2.0)
    op = block_mod.extract_operator(bundle.bf)
    real_op = BlockOperator(matrix=op.matrix.real.astype(complex), gram=op.gram)
    _, v = models.discrete_mode(bundle.mesh, 1)
    s0 = np.concatenate([v.real, np.zeros(v.shape[0])]).astype(complex)
    drift = evolution.reality_drift(real_op, s0, np.linspace(0.0, 2.0, 21))
    return CheckResult(
        name="reality-preservation",
        description="real coefficients and real data stay real along the flow",
        computed={"max_drift": drift},
        bounds={"cap": 1e-12},
        passed=drift <= 1e-12,
    )


def check_frequency_response(seed: int, threads: int = 1) -> CheckResult:
    sups = {}
    finite = True
    for n in (32, 64):
        bundle = _dirichlet(n, 1.0 + 0.5j)
        cert = block_mod.block_ellipticity(bundle.bf)
        op = block_mod.extract_operator(bundle.bf, omega=cert.omega)
        curve = spectral.frequency_response(op, threads=threads)
        finite = finite and bool(np.all(np.isfinite(curve.norms)))
        sups[str(n)] = curve.sup_norm
    ratio = max(sups.values()) / min(sups.values())
    passed = finite and ratio <= 1.15
    return CheckResult(
        name="frequency-response-stability",
        description="resolvent sweep finite, with mesh-stable supremum "
                    "between the two bundled resolutions",
        computed={"sup_norms": sups, "ratio": ratio},
        bounds={"ratio_cap": 1.15},
        passed=passed,
    )


def check_imag_parabola(seed: int) -> CheckResult:
    bundle = _dirichlet(32, 1.0 + 0.5j)
    consts = block_mod.block_constants(bundle.bf)
    cert = block_mod.block_ellipticity(bundle.bf)
    sample = spectral.numerical_range(bundle.bf, 256)
    parabola = spectral.parabola_check(bundle.bf, cert, sample,
                                       consts.block_imag_direct)
    chain_ok = consts.block_imag_direct <= consts.block_imag_bound + 1e-8
    return CheckResult(
        name="imag-bound-parabola",
        description="mixed-norm skew constant below 1 + Ma + Mb and every "
                    "range boundary point inside the certified parabola",
        computed={
            "imag_direct": consts.block_imag_direct,
            "imag_bound": consts.block_imag_bound,
            "worst_parabola_slack": parabola.worst_slack,
        },
        bounds={"slack": 1e-8},
        passed=bool(chain_ok and parabola.passed),
    )


def check_sector(seed: int) -> CheckResult:
    bundle = _dirichlet(32, 1.0 + 0.5j)
    consts = block_mod.block_constants(bundle.bf)
    cert = block_mod.block_ellipticity(bundle.bf)
    sample = spectral.numerical_range(bundle.bf, 256)
    shifted = sample.support_points + cert.omega
    gap = (consts.m_block_direct / cert.alpha) * shifted.real - np.abs(shifted.imag)
    worst = float(gap.min())
    return CheckResult(
        name="sector-containment",
        description="every shifted range boundary point satisfies "
                    "|Im z| <= (M/alpha) Re z",
        computed={"worst_slack": worst},
        bounds={"floor": -1e-8},
        passed=worst >= -1e-8,
    )


def check_dynamic_boundary(seed: int) -> CheckResult:
    per_n = {}
    passed = True
    for n in (32, 64):
        bundle = _dynamic(n, 1.0 + 0.5j)
        cert = block_mod.block_ellipticity(bundle.bf)
        ok_cert = cert is not None
        op = block_mod.extract_operator(bundle.bf, omega=cert.omega if cert else 0.0)
        ev = spectral.spectrum(op)
        spectrum_ok = bool(ev.real.max() <= (cert.omega if cert else 0.0) + 1e-8)
        x = bundle.mesh.nodes
        v = np.sin(np.pi * x / bundle.mesh.length).astype(complex)
        s0 = np.concatenate([v, 0.2 * v])
        record = evolution.propagate_linear(op, s0, np.linspace(0.0, 1.0, 11))
        violation = models.dynamic_bc_invariant_check(bundle.system, record)
        ok = ok_cert and spectrum_ok and violation <= 1e-8
        passed = passed and ok
        per_n[str(n)] = {
            "alpha": cert.alpha if cert else None,
            "omega": cert.omega if cert else None,
            "max_re_eig": float(ev.real.max()),
            "constraint_violation": violation,
        }
    return CheckResult(
        name="dynamic-boundary",
        description="dynamic-boundary system is elliptic, spectrally shifted "
                    "left, and keeps its trace constraint along trajectories",
        computed=per_n,
        bounds={"spectrum_slack": 1e-8, "violation_cap": 1e-8},
        passed=passed,
    )


def check_semilinear(seed: int) -> CheckResult:
    bundle = _dirichlet(64, 1.0)
    op = block_mod.extract_operator(bundle.bf)
    gram_h = bundle.pair.gram_h
    mass = 1.0

    def kg(t, u1, u2):
        return gram_h @ (-(mass**2) * u1 - u1**3)

    _, v = models.discrete_mode(bundle.mesh, 1)
    s0 = np.concatenate([0.1 * v, np.zeros_like(v)])
    finals = {}
    for dt in (0.02, 0.01, 0.005):
        finals[dt] = evolution.propagate_semilinear(op, kg, s0, dt, 1.0)
    bounded = float(np.sqrt(max(r.energies.max() for r in finals.values())))
    e1 = op.norm_h(finals[0.02].final - finals[0.01].final)
    e2 = op.norm_h(finals[0.01].final - finals[0.005].final)
    order = halving_order(e1, e2)
    guard = False
    try:
        evolution.propagate_semilinear(
            op, kg, np.concatenate([1e3 * v, np.zeros_like(v)]), 0.01, 1.0
        )
    except BlowUpError:
        guard = True
    passed = bounded < evolution.BLOWUP_CAP and 0.8 <= order <= 1.2 and guard
    return CheckResult(
        name="semilinear-klein-gordon",
        description="cubic load stays bounded at small amplitude, converges "
                    "at first order under dt halving, and trips the blow-up "
                    "guard at huge amplitude",
        computed={"max_norm": bounded, "order": order, "guard_triggered": guard},
        bounds={"order_window": [0.8, 1.2]},
        passed=passed,
    )


def check_nonautonomous(seed: int) -> CheckResult:
    bundle = _dirichlet(16, 1.0)
    sa, sb = bundle.a.matrix, bundle.b.matrix
    family = NonautonomousFamily(
        sampler=lambda t: (sa, (1.0 + t) * sb), pair=bundle.pair, t_final=1.0
    )
    cert = evolution.equi_ellipticity_check(family, np.linspace(0.0, 1.0, 11))
    _, v = models.discrete_mode(bundle.mesh, 1)
    s0 = np.concatenate([v, np.zeros_like(v)])
    op_like = BlockOperator(matrix=family.generator(0.0), gram=family.block_gram_h())
    finals = {}
    for steps in (20, 40, 80):
        rec = evolution.propagate_nonautonomous(
            family, s0, np.linspace(0.0, 1.0, steps + 1)
        )
        finals[steps] = rec.final
    e1 = op_like.norm_h(finals[20] - finals[40])
    e2 = op_like.norm_h(finals[40] - finals[80])
    order = halving_order(e1, e2)
    passed = cert is not None and 0.7 <= order <= 1.3
    return CheckResult(
        name="nonautonomous-equi-ellipticity",
        description="linearly strengthening damping family stays equi-elliptic "
                    "and the frozen-coefficient stepper converges at order one",
        computed={
            "alpha": cert.alpha if cert else None,
            "omega": cert.omega if cert else None,
            "order": order,
        },
        bounds={"order_window": [0.7, 1.3]},
        passed=passed,
    )


_CHECKS = {
    "block-continuity-bound": check_block_continuity,
    "ellipticity-iff": check_ellipticity_iff,
    "perturbation-shift": check_perturbation_shift,
    "noncoercivity-witness": check_noncoercivity,
    "proportional-damping-identity": check_proportional_damping,
    "contractivity": check_contractivity,
    "mode-oracle": check_mode_oracle,
    "reality-preservation": check_reality,
    "frequency-response-stability": check_frequency_response,
    "imag-bound-parabola": check_imag_parabola,
    "sector-containment": check_sector,
    "dynamic-boundary": check_dynamic_boundary,
    "semilinear-klein-gordon": check_semilinear,
    "nonautonomous-equi-ellipticity": check_nonautonomous,
}


def run_all(seed: int = 42, threads: int = 1,
            force_fail: str | None = None) -> VerificationReport:
    """Run every check; ``force_fail`` marks one check failed (negative control)."""
    if force_fail is not None and force_fail not in _CHECKS:
        raise ValueError(f"unknown check {force_fail!r}; "
                         f"known: {', '.join(VERIFY_CHECK_NAMES)}")
    results = []
    for name in VERIFY_CHECK_NAMES:
        fn = _CHECKS[name]
        if name == "frequency-response-stability":
            result = fn(seed, threads=threads)
        else:
            result = fn(seed)
        if name == force_fail:
            result = CheckResult(
                name=result.name,
                description=result.description + " [forced failure fixture]",
                computed={**result.computed, "forced_failure": True},
                bounds=result.bounds,
                passed=False,
            )
        results.append(result)
    return VerificationReport(checks=results)
