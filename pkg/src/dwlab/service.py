"""HTTP service exposing the laboratory as stateless compute endpoints.

Each request carries the same structured sections as the on-disk config
format; responses return the verification report and the artifact files
inline, so clients can persist them wherever they like. Every endpoint
is a pure function of the request (plus the seed it carries), so the
service scales horizontally and never holds run state.
"""

from __future__ import annotations

from typing import Literal

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .config import RunConfig, config_from_mapping
from .errors import BlowUpError, ConfigError, DwlabError
from .runner import RunResult, run_analyze, run_evolve, run_spectrum, run_verify

__all__ = ["app", "create_app"]


class ModelSection(BaseModel):
    model: Literal["dirichlet", "dynamic-bc"] = "dirichlet"
    n: int = 32
    L: float = 1.0
    alpha: str = "const 1"
    beta: str = "const 1"
    rho: str | None = None


class AnalysisSection(BaseModel):
    angle_count: int = 256
    lambda_min: float = 1e-2
    lambda_max: float = 1e4
    lambda_count: int = 200
    omega_doublings: int = 10
    alpha_min: float = 1e-8
    slack: float = 1e-8


class EvolveSection(BaseModel):
    method: str = "exact-exponential"
    dt: float = 0.01
    t_final: float = 1.0
    initial: str = "mode 1 1.0"
    nonlinearity: str = "none"
    bt_rate: float = 0.0
    at_rate: float = 0.0


class RunRequest(BaseModel):
    model_section: ModelSection = Field(default_factory=ModelSection, alias="model")
    analysis: AnalysisSection | None = None
    evolve: EvolveSection | None = None
    seed: int = 42
    threads: int = 1

    model_config = {"populate_by_name": True}

    def to_config(self) -> RunConfig:
        mapping: dict = {"model": self.model_section.model_dump()}
        if self.analysis is not None:
            mapping["analysis"] = self.analysis.model_dump()
        if self.evolve is not None:
            mapping["evolve"] = self.evolve.model_dump()
        try:
            cfg = config_from_mapping(mapping)
        except ConfigError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return cfg.with_overrides(seed=self.seed, threads=self.threads)


class VerifyRequest(BaseModel):
    seed: int = 42
    threads: int = 1
    force_fail: str | None = None


class CheckModel(BaseModel):
    name: str
    description: str
    computed: dict
    bounds: dict
    passed: bool


class ReportResponse(BaseModel):
    passed: bool
    checks: list[CheckModel]
    artifacts: dict[str, str]
    summary: dict = Field(default_factory=dict)


class EvolveResponse(BaseModel):
    status: Literal["ok", "blow-up"]
    summary: dict = Field(default_factory=dict)
    artifacts: dict[str, str] = Field(default_factory=dict)
    last_time: float | None = None


class HealthResponse(BaseModel):
    status: str
    version: str


def _report_response(result: RunResult) -> ReportResponse:
    payload = result.report.to_dict()
    return ReportResponse(
        passed=payload["passed"],
        checks=[CheckModel(**c) for c in payload["checks"]],
        artifacts=result.artifacts,
        summary=result.summary,
    )


def create_app() -> FastAPI:
    app = FastAPI(
        title="dwlab",
        description="Numerical laboratory for strongly damped wave systems",
        version=__version__,
    )

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/analyze", response_model=ReportResponse)
    def analyze(request: RunRequest) -> ReportResponse:
        return _report_response(_guarded(run_analyze, request.to_config()))

    @app.post("/spectrum", response_model=ReportResponse)
    def spectrum(request: RunRequest) -> ReportResponse:
        return _report_response(_guarded(run_spectrum, request.to_config()))

    @app.post("/evolve", response_model=EvolveResponse)
    def evolve(request: RunRequest) -> EvolveResponse:
        cfg = request.to_config()
        try:
            result = _guarded(run_evolve, cfg)
        except BlowUpError as exc:
            return EvolveResponse(status="blow-up", last_time=exc.last_time)
        return EvolveResponse(status="ok", summary=result.summary,
                              artifacts=result.artifacts)

    @app.post("/verify", response_model=ReportResponse)
    def verify(request: VerifyRequest) -> ReportResponse:
        cfg = RunConfig().with_overrides(seed=request.seed, threads=request.threads)
        try:
            result = run_verify(cfg, force_fail=request.force_fail)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return _report_response(result)

    return app


def _guarded(fn, cfg: RunConfig) -> RunResult:
    try:
        return fn(cfg)
    except ConfigError as exc:
        raise HTTPException(status_code=422, detail=f"config: {exc}") from exc
    except BlowUpError:
        raise
    except DwlabError as exc:
        raise HTTPException(status_code=422, detail=f"numerical: {exc}") from exc


app = create_app()
