"""FastAPI application wrapping the core lab.

All endpoints are synchronous and stateless: every request carries its own
seed, so identical requests return identical payloads.  Long experiment runs
execute within the request (desk-scale tool, in-process or trusted-network
use); clients set their timeouts accordingly.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__
from ..cadlag.m1 import m1_dist_interval, m1_dist_whole
from ..cadlag.j1 import j1_dist_interval
from ..cadlag.stepfun import Polyline, StepFunction, uniform_dist
from ..experiments import ConfigInvalid, ExperimentConfig, RunResult, run_experiment, select_band
from ..measures import MeasuresError, eta_nstep_dist, rho_minus, rho_zero
from ..ray_knight import coupled_profile, profile_via_eta
from ..rng import replicate_rng
from ..walk import LocalTimeProfile, WalkParams, WalkError, simulate_to_T
from ..weights import WeightError
from .schemas import (
    BandRequest,
    BandResponse,
    CoupledProfileResponse,
    DistributionResponse,
    FunctionPayload,
    MetricRequest,
    MetricResponse,
    ProfileResponse,
    RhoRequest,
    SimulateRequest,
)

_ERRORS = (WeightError, MeasuresError, WalkError, ConfigInvalid, ValueError)


def _profile_payload(prof: LocalTimeProfile) -> dict:
    return {
        "lo": prof.lo, "hi": prof.hi,
        "ell_minus": prof.ell_minus.tolist(), "ell_plus": prof.ell_plus.tolist(),
        "chi": prof.chi, "T": prof.T,
        "I_minus": prof.I_minus, "I_plus": prof.I_plus, "meta": prof.meta,
    }


def _to_function(payload: FunctionPayload):
    if payload.us is not None:
        return Polyline(np.asarray(payload.us), np.asarray(payload.rs))
    if payload.breakpoints is None:
        raise ValueError("function payload needs breakpoints/values or us/rs")
    return StepFunction(np.asarray(payload.breakpoints), np.asarray(payload.values),
                        payload.left_value)


def create_app() -> FastAPI:
    app = FastAPI(title="srwde lab", version=__version__,
                  description="Self-repelling walk simulation and verification service")

    @app.exception_handler(Exception)
    async def _domain_error(request, exc):  # pragma: no cover - passthrough
        raise exc

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/simulate", response_model=ProfileResponse)
    def simulate(req: SimulateRequest):
        try:
            w = req.weight.build()
            p = WalkParams(N=req.N, x=req.x, theta=req.theta, iota=req.iota)
            rng = replicate_rng(req.seed, req.replicate)
            if req.backend == "walk":
                prof = simulate_to_T(w, p, rng)
            elif req.backend == "eta":
                prof = profile_via_eta(w, p, rng)
            else:
                raise ValueError(f"backend must be walk or eta, got {req.backend!r}")
        except _ERRORS as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return _profile_payload(prof)

    @app.post("/profile", response_model=CoupledProfileResponse)
    def profile(req: SimulateRequest):
        try:
            w = req.weight.build()
            p = WalkParams(N=req.N, x=req.x, theta=req.theta, iota=req.iota)
            cs = coupled_profile(w, p, replicate_rng(req.seed, req.replicate))
        except _ERRORS as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        out = _profile_payload(cs.profile)
        out.update(zeta=cs.zeta.tolist(), matched=cs.match_flags.tolist(),
                   n_threshold=cs.n_threshold)
        return out

    @app.post("/rho", response_model=DistributionResponse)
    def rho(req: RhoRequest):
        try:
            w = req.weight.build()
            if req.which == "rho_minus":
                d = rho_minus(w, req.tail_tol)
            elif req.which == "rho_zero":
                d = rho_zero(w, req.tail_tol)
            elif req.which == "nstep":
                d = eta_nstep_dist(w, req.n, req.tail_tol)
            else:
                raise ValueError(f"unknown distribution {req.which!r}")
        except _ERRORS as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return DistributionResponse(offset=d.offset, min_index=d.min_index,
                                    probs=d.probs.tolist(), mean=d.mean(),
                                    variance=d.variance())

    @app.post("/metric", response_model=MetricResponse)
    def metric(req: MetricRequest):
        try:
            f = _to_function(req.f)
            g = _to_function(req.g)
            if req.which == "uniform":
                if req.interval is None:
                    raise ValueError("uniform distance needs an interval")
                v = uniform_dist(f, g, req.interval)
                return MetricResponse(lower=v, upper=v, tolerance=0.0)
            if req.which == "m1":
                if req.interval is None:
                    raise ValueError("interval M1 distance needs an interval")
                v = m1_dist_interval(f, g, req.interval, tol=req.tol)
                return MetricResponse(lower=v - req.tol, upper=v + req.tol, tolerance=req.tol)
            if req.which == "m1_whole":
                v = m1_dist_whole(f, g, tol=max(req.tol, 1e-4))
                t = max(req.tol, 1e-4)
                return MetricResponse(lower=v - t, upper=v + t, tolerance=t)
            if req.which == "j1":
                if req.interval is None:
                    raise ValueError("J1 distance needs an interval")
                lo, hi = j1_dist_interval(f, g, req.interval[0], req.interval[1])
                return MetricResponse(lower=lo, upper=hi, tolerance=hi - lo)
            raise ValueError(f"unknown metric {req.which!r}")
        except _ERRORS as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.post("/experiment", response_model=RunResult)
    def experiment(cfg: ExperimentConfig):
        try:
            return run_experiment(cfg)
        except _ERRORS as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.post("/band", response_model=BandResponse)
    def band(req: BandRequest):
        try:
            cfg = ExperimentConfig(experiment_id="E6", weight=req.weight, x=req.x,
                                   theta=req.theta, master_seed=req.seed)
            spec = select_band(cfg, replicate_rng(req.seed, 999_999_999))
        except _ERRORS as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return BandResponse(delta1=spec.delta1, delta2=spec.delta2, center=spec.center)

    return app
