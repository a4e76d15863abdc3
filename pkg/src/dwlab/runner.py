"""Orchestration: build models from configs, run analyses, emit artifacts.

Every public entry point takes a :class:`~dwlab.config.RunConfig` and
returns a :class:`RunResult` holding a report plus named artifact texts;
writing files and mapping outcomes to exit codes is left to the callers
(CLI and HTTP service), so both stay thin.

The verification suite in :func:`run_verify` re-derives each quantitative
claim the package rests on — continuity and ellipticity bounds, sector
and parabola containment of the numerical range, contractivity, modal
oracles, reality preservation, mesh stability of the resolvent sweep,
and the semilinear/nonautonomous convergence orders — and fails loudly
when any of them drifts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import block as block_mod
from . import evolution, forms, io, kernel, models, spectral
from .block import BlockForm, BlockOperator
from .config import AnalysisSpec, ModelSpec, RunConfig
from .errors import ConfigError, NumericalError
from .evolution import NonautonomousFamily, halving_order
from .forms import InnerProductPair, SesquilinearForm

__all__ = [
    "CheckResult",
    "VerificationReport",
    "RunResult",
    "ModelBundle",
    "build_model",
    "run_analyze",
    "run_spectrum",
    "run_evolve",
    "run_verify",
]


@dataclass(frozen=True)
class CheckResult:
    """One verified claim with its measured and bounding quantities."""

    name: str
    description: str
    computed: dict
    bounds: dict
    passed: bool


@dataclass(frozen=True)
class VerificationReport:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failing(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [
                {
                    "name": c.name,
                    "description": c.description,
                    "computed": _plain(c.computed),
                    "bounds": _plain(c.bounds),
                    "passed": c.passed,
                }
                for c in self.checks
            ],
        }


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": float(obj.real), "im": float(obj.imag)}
    return obj


@dataclass(frozen=True)
class RunResult:
    report: VerificationReport
    artifacts: dict[str, str]
    exit_code: int
    summary: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ModelBundle:
    """Everything assembled for one configured model."""

    spec: ModelSpec
    mesh: models.Mesh1D
    coeffs: models.CoefficientField
    pair: InnerProductPair
    a: SesquilinearForm
    b: SesquilinearForm
    bf: BlockForm
    system: models.DynamicBCSystem | None = None

    def mode_state(self, k: int, amplitude: float) -> np.ndarray:
        if self.spec.model == "dirichlet":
            _, v = models.discrete_mode(self.mesh, k)
        else:
            x = self.mesh.nodes
            v = np.sin(k * np.pi * x / self.mesh.length).astype(complex)
        return np.concatenate([amplitude * v, np.zeros_like(v)])


def build_model(spec: ModelSpec) -> ModelBundle:
    mesh = models.Mesh1D(length=spec.length, cells=spec.n)
    coeffs = models.CoefficientField(
        alpha=spec.alpha.as_function(spec.length),
        beta=spec.beta.as_function(spec.length),
    )
    if spec.model == "dirichlet":
        pair, a, b = models.assemble_dirichlet_model(mesh, coeffs)
        bf = block_mod.assemble_block_form(a, b, pair)
        return ModelBundle(spec=spec, mesh=mesh, coeffs=coeffs, pair=pair, a=a, b=b,
                           bf=bf)
    system = models.assemble_dynamic_bc(mesh, spec.alpha.constant_value)
    bf = system.form
    return ModelBundle(
        spec=spec, mesh=mesh, coeffs=coeffs, pair=system.constrained_pair,
        a=bf.a, b=bf.b, bf=bf, system=system,
    )


def _omega_grid(analysis: AnalysisSpec) -> list[float]:
    return forms.default_omega_grid(analysis.omega_doublings)


def _lambda_grid(analysis: AnalysisSpec) -> np.ndarray:
    return spectral.default_lambda_grid(
        analysis.lambda_min, analysis.lambda_max, analysis.lambda_count
    )


def _certified(bundle: ModelBundle, analysis: AnalysisSpec):
    cert = block_mod.block_ellipticity(
        bundle.bf, _omega_grid(analysis), analysis.alpha_min
    )
    if cert is None:
        raise NumericalError("damping form admits no ellipticity certificate "
                             "on the configured shift grid")
    return cert


def run_analyze(cfg: RunConfig) -> RunResult:
    """Constants, ellipticity, numerical-range containment and structure checks."""
    bundle = build_model(cfg.model)
    analysis = cfg.analysis
    bf = bundle.bf
    consts = block_mod.block_constants(bf)
    cert = _certified(bundle, analysis)
    sample = spectral.numerical_range(bf, analysis.angle_count)
    sector = spectral.sector_check(bf, cert, sample, consts.m_block_direct,
                                   analysis.slack)
    parabola = spectral.parabola_check(bf, cert, sample, consts.block_imag_direct,
                                       analysis.slack)
    self_adjoint = block_mod.selfadjointness_check(bf)
    rng = np.random.default_rng(cfg.seed)
    witness_worst = 0.0
    for _ in range(100):
        u1 = rng.standard_normal(bf.n) + 1j * rng.standard_normal(bf.n)
        w = block_mod.noncoercivity_witness(bf, u1)
        witness_worst = max(
            witness_worst,
            abs(bf(w, w).real) / kernel.gram_norm(w, bf.block_gram_v) ** 2,
        )

    checks = [
        CheckResult(
            name="continuity-bound",
            description="directly computed block continuity constant stays below "
                        "sqrt(Ma/2 + Ma*Mb + max(Ma^2, 1, Mb^2))",
            computed={"ma": consts.ma_direct, "mb": consts.mb_direct,
                      "m_block": consts.m_block_direct},
            bounds={"m_block_bound": consts.m_block_bound, "slack": 1e-8},
            passed=consts.continuity_bound_ok,
        ),
        CheckResult(
            name="imag-bound",
            description="mixed-norm skew bound of the block form stays below "
                        "1 + Ma + Mb",
            computed={"imag_direct": consts.block_imag_direct},
            bounds={"imag_bound": consts.block_imag_bound, "slack": 1e-8},
            passed=consts.imag_bound_ok,
        ),
        CheckResult(
            name="ellipticity",
            description="block form is elliptic in the phase-space metric",
            computed={"alpha": cert.alpha, "omega": cert.omega},
            bounds={"alpha_min": analysis.alpha_min},
            passed=cert.alpha >= analysis.alpha_min,
        ),
        CheckResult(
            name="sector-containment",
            description="omega-shifted numerical range lies in the sector of "
                        "half-angle arctan(M/alpha)",
            computed={"max_angle": sector.max_angle},
            bounds={"bound_angle": sector.bound_angle, "slack": analysis.slack},
            passed=sector.passed,
        ),
        CheckResult(
            name="parabola-containment",
            description="(Im z)^2 <= (C^2/alpha)(Re z + omega) on all sampled "
                        "numerical-range boundary points",
            computed={"constant": parabola.constant,
                      "worst_slack": parabola.worst_slack},
            bounds={"slack": analysis.slack},
            passed=parabola.passed,
        ),
        CheckResult(
            name="self-adjointness",
            description="block form self-adjoint iff damping Hermitian and "
                        "elastic form equals minus the V product",
            computed={"self_adjoint": self_adjoint},
            bounds={},
            passed=True,
        ),
        CheckResult(
            name="noncoercivity-witness",
            description="states with vanishing velocity annihilate the real "
                        "part of the block form",
            computed={"worst_ratio": witness_worst},
            bounds={"cap": 1e-14},
            passed=witness_worst <= 1e-14,
        ),
    ]
    if cfg.model.rho is not None:
        residual = block_mod.rho_characterization_check(bf, cfg.model.rho)
        checks.append(
            CheckResult(
                name="proportional-damping-identity",
                description="with the elastic form proportional to the damping "
                            "form, the generator acts through rho*u1 + u2",
                computed={"max_residual": residual,
                          "rho": _plain(cfg.model.rho)},
                bounds={"cap": 1e-12},
                passed=residual <= 1e-12,
            )
        )
    report = VerificationReport(checks=checks)
    op = block_mod.extract_operator(bf, omega=cert.omega)
    artifacts = {
        "report.json": io.json_dumps_stable(report.to_dict()),
        "numerical_range.csv": io.curve_to_csv(
            ("theta", "re_z", "im_z"),
            (sample.angles, sample.support_points.real, sample.support_points.imag),
        ),
        "generator.csv": io.complex_matrix_to_csv(op.matrix),
        "generator.json": io.json_dumps_stable(
            {"n": bf.n, "omega": cert.omega, "convention": "generator=-A"}
        ),
    }
    return RunResult(report=report, artifacts=artifacts,
                     exit_code=0 if report.passed else 1)


def run_spectrum(cfg: RunConfig) -> RunResult:
    """Generator spectrum plus the frequency-response sweep."""
    bundle = build_model(cfg.model)
    analysis = cfg.analysis
    cert = _certified(bundle, analysis)
    op = block_mod.extract_operator(bundle.bf, omega=cert.omega)
    ev = spectral.spectrum(op)
    curve = spectral.frequency_response(op, _lambda_grid(analysis),
                                        threads=cfg.threads)
    consts = block_mod.block_constants(bundle.bf)
    sample = spectral.numerical_range(bundle.bf, analysis.angle_count)
    sector = spectral.sector_check(bundle.bf, cert, sample, consts.m_block_direct,
                                   analysis.slack)
    parabola = spectral.parabola_check(bundle.bf, cert, sample,
                                       consts.block_imag_direct, analysis.slack)
    checks = [
        CheckResult(
            name="spectrum-shifted-left",
            description="generator spectrum sits left of the certified shift",
            computed={"max_re": float(ev.real.max())},
            bounds={"omega": cert.omega, "slack": 1e-8},
            passed=bool(ev.real.max() <= cert.omega + 1e-8),
        ),
        CheckResult(
            name="frequency-response-finite",
            description="weighted resolvent norms stay finite on the lambda grid",
            computed={"sup_norm": curve.sup_norm, "shift": curve.shift},
            bounds={},
            passed=bool(np.all(np.isfinite(curve.norms))),
        ),
    ]
    report = VerificationReport(checks=checks)
    summary = {
        "sup_norm": curve.sup_norm,
        "max_angle": sector.max_angle,
        "bound_angle": sector.bound_angle,
        "parabola_constant": parabola.constant,
        "sector_pass": sector.passed,
        "parabola_pass": parabola.passed,
        "shift": curve.shift,
    }
    artifacts = {
        "eigenvalues.csv": io.curve_to_csv(("re", "im"), (ev.real, ev.imag)),
        "frequency_response.csv": io.curve_to_csv(("lambda", "norm"),
                                                  (curve.lambdas, curve.norms)),
        "spectrum_summary.json": io.json_dumps_stable(_plain(summary)),
    }
    return RunResult(report=report, artifacts=artifacts,
                     exit_code=0 if report.passed else 1, summary=summary)


def _initial_state(bundle: ModelBundle, spec, cfg: RunConfig) -> np.ndarray:
    kind = spec.initial[0]
    dim = bundle.bf.dim
    if kind == "zero":
        return np.zeros(dim, dtype=complex)
    if kind == "mode":
        _, k, amp = spec.initial
        max_k = bundle.mesh.cells - 1
        if not 1 <= k <= max_k:
            raise ConfigError(f"mode index {k} out of range [1, {max_k}]",
                              key="evolve.initial")
        return bundle.mode_state(k, amp)
    path = spec.initial[1]
    try:
        with open(path, "r", encoding="utf-8") as handle:
            mat = io.complex_matrix_from_csv(handle.read())
    except OSError as exc:
        raise ConfigError(f"cannot read initial state file {path!r}: {exc}",
                          key="evolve.initial") from exc
    state = mat.reshape(-1)
    if state.shape[0] != dim:
        raise ConfigError(
            f"initial state has {state.shape[0]} entries, expected {dim}",
            key="evolve.initial",
        )
    return state


def run_evolve(cfg: RunConfig) -> RunResult:
    """Propagate per the evolve section; raises BlowUpError when the guard trips."""
    if cfg.evolve is None:
        raise ConfigError("missing [evolve] section", key="evolve")
    spec = cfg.evolve
    bundle = build_model(cfg.model)
    bf = bundle.bf
    op = block_mod.extract_operator(bf)
    s0 = _initial_state(bundle, spec, cfg)
    steps = max(1, int(np.ceil(spec.t_final / spec.dt - 1e-12)))
    times = spec.dt * np.arange(steps + 1)

    oracle_rel = None
    if spec.method in ("exact-exponential", "crank-nicolson"):
        record = evolution.propagate_linear(op, s0, times, spec.method)
        if (
            bundle.spec.model == "dirichlet"
            and spec.initial[0] == "mode"
            and bundle.spec.alpha.is_constant
            and bundle.spec.beta.is_constant
        ):
            _, k, amp = spec.initial
            oracle = models.analytic_mode_oracle(
                bundle.mesh,
                bundle.spec.alpha.constant_value,
                bundle.spec.beta.constant_value.real,
                k,
                float(times[-1]),
                eta0=amp,
            )
            ref = op.norm_h(oracle.stack())
            if ref > 0:
                oracle_rel = op.norm_h(record.final - oracle.stack()) / ref
    elif spec.method == "exponential-euler":
        nl = _nonlinearity(bundle, spec)
        record = evolution.propagate_semilinear(op, nl, s0, spec.dt, float(times[-1]))
    else:  # implicit-euler with frozen coefficients
        family = _family(bundle, spec)
        cert = evolution.equi_ellipticity_check(
            family, np.linspace(0.0, family.t_final, 9), _omega_grid(cfg.analysis),
            cfg.analysis.alpha_min,
        )
        if cert is None:
            raise NumericalError("time-dependent damping family is not "
                                 "equi-elliptic on the configured grid")
        record = evolution.propagate_nonautonomous(family, s0, times)

    summary = {
        "t_final": float(times[-1]),
        "steps": steps,
        "final_energy": float(record.energies[-1]),
        "final_norm": float(np.sqrt(record.energies[-1])),
        "max_reality_drift": record.max_reality_drift,
        "method": spec.method,
    }
    if oracle_rel is not None:
        summary["mode_oracle_rel_error"] = float(oracle_rel)
    if bundle.system is not None:
        summary["constraint_violation"] = models.dynamic_bc_invariant_check(
            bundle.system, record
        )
    artifacts = {
        "trajectory.csv": io.trajectory_to_csv(
            record.times, record.states, record.energies, record.reality_drift
        ),
        "evolve_summary.json": io.json_dumps_stable(_plain(summary)),
    }
    report = VerificationReport(checks=[])
    return RunResult(report=report, artifacts=artifacts, exit_code=0, summary=summary)


def _nonlinearity(bundle: ModelBundle, spec):
    if spec.nonlinearity is None:
        n = bundle.bf.n
        zero = np.zeros(n, dtype=complex)
        return lambda t, u1, u2: zero
    _, mass = spec.nonlinearity
    gram_h = bundle.pair.gram_h

    def klein_gordon(t, u1, u2):
        nodal = -(mass**2) * u1 - u1**3
        return gram_h @ nodal

    return klein_gordon


def _family(bundle: ModelBundle, spec) -> NonautonomousFamily:
    sa0 = bundle.a.matrix
    sb0 = bundle.b.matrix

    def sampler(t: float):
        return (1.0 + spec.at_rate * t) * sa0, (1.0 + spec.bt_rate * t) * sb0

    return NonautonomousFamily(sampler=sampler, pair=bundle.pair,
                               t_final=spec.t_final)


def run_verify(cfg: RunConfig | None = None,
               force_fail: str | None = None) -> RunResult:
    """Execute the full verification suite with a deterministic report."""
    from . import checks

    seed = 42 if cfg is None else cfg.seed
    threads = 1 if cfg is None else cfg.threads
    report = checks.run_all(seed=seed, threads=threads, force_fail=force_fail)
    artifacts = {"verify.json": io.json_dumps_stable(
        {"seed": seed, **report.to_dict()}
    )}
    return RunResult(report=report, artifacts=artifacts,
                     exit_code=0 if report.passed else 1)
