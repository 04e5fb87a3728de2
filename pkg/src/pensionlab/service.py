"""Stateless HTTP JSON API for single-member projection.

Endpoints
---------
POST /api/project   Old-vs-new projection with loss metrics and a 21-point
                    retirement income trajectory per rule set.
GET  /api/presets   The bundled rule-set registry.
GET  /api/erosion   Compounded hard-cap erosion curve for a devaluation d.

Every response is a pure function of the request; there is no server
state beyond the immutable preset registry, so responses are cacheable
and the service scales horizontally.  Errors carry structured bodies
``{"errors": [{"field": ..., "message": ...}]}``; out-of-range values
return 400 and an unsupported DC option returns 422.
"""

from __future__ import annotations

import dataclasses
import math
from datetime import date

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .projection import (
    Interpolation,
    MemberScenario,
    ProjectionResult,
    future_loss,
    project_comparison,
)
from .scheme import CapKind, EconomicAssumptions, erosion_factor, load_presets

app = FastAPI(title="pensionlab", version="0.1.0",
              description="USS pension projection API")
app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                   allow_headers=["*"])

PRESETS = load_presets()


def _error(status: int, field: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"errors": [{"field": field,
                                             "message": message}]})


@app.exception_handler(RequestValidationError)
async def _validation_handler(request: Request,
                              exc: RequestValidationError) -> JSONResponse:
    errors = [{"field": ".".join(str(p) for p in err["loc"]
                                 if p not in ("body", "query")),
               "message": err["msg"]}
              for err in exc.errors()]
    return JSONResponse(status_code=400, content={"errors": errors})


class ProjectRequest(BaseModel):
    dob: date
    salary: float
    cpi: float
    rules_old: str = "uss2021"
    rules_new: str = "uuk2021"
    retirement_age: float = 66.0
    salary_growth: float | None = None
    annuity_factor: float | None = None
    devaluation: str = "uss"
    dc_option: str = "annuity"
    modeller_rounding: bool = False


def _trajectory(result: ProjectionResult) -> list[dict]:
    return [{"age": 66 + k, "income": round(result.income_at(66.0 + k), 2)}
            for k in range(21)]


def _result_payload(result: ProjectionResult) -> dict:
    return {
        "rules": result.rules_id,
        "income_66": round(result.income_66, 2),
        "income_86": round(result.income_86, 2),
        "db_66": round(result.db_66, 2),
        "dc_66": round(result.dc_66, 2),
        "trajectory": _trajectory(result),
    }


def _loss_payload(old: ProjectionResult, new: ProjectionResult) -> dict:
    out = {}
    for method in Interpolation:
        metrics = future_loss(old, new, method)
        out[method.value] = {
            "percent_loss": round(metrics.percent_loss, 6),
            "monetary_loss": round(metrics.monetary_loss, 2),
            "geometric_fallback": metrics.geometric_fallback,
        }
    return out


def _round_to_10(result: ProjectionResult) -> ProjectionResult:
    def r10(x: float) -> float:
        return round(x / 10.0) * 10.0

    return dataclasses.replace(result, income_66=r10(result.income_66),
                               income_86=r10(result.income_86))


@app.post("/api/project")
def project(req: ProjectRequest):
    if req.dc_option != "annuity":
        return _error(422, "dc_option",
                      f"dc_option {req.dc_option!r} is not supported; "
                      "only 'annuity' is implemented")
    if not 0.0 <= req.cpi <= 0.05:
        return _error(400, "cpi",
                      "cpi outside the modeller's supported range [0, 0.05]")
    if req.salary < 0 or not math.isfinite(req.salary):
        return _error(400, "salary", "salary must be a finite value >= 0")
    if req.devaluation not in ("uuk", "uss"):
        return _error(400, "devaluation", "devaluation must be 'uuk' or 'uss'")
    for field_name in ("rules_old", "rules_new"):
        if getattr(req, field_name) not in PRESETS:
            return _error(400, field_name,
                          f"unknown rule set {getattr(req, field_name)!r}; "
                          f"available: {', '.join(sorted(PRESETS))}")
    overrides = {}
    if req.salary_growth is not None:
        overrides["salary_growth"] = req.salary_growth
    if req.annuity_factor is not None:
        overrides["annuity_factor"] = req.annuity_factor
    try:
        assumptions = EconomicAssumptions.modeller(req.cpi,
                                                   devaluation=req.devaluation,
                                                   **overrides)
        scenario = MemberScenario(req.dob, req.salary,
                                  retirement_age=req.retirement_age)
    except ValueError as exc:
        return _error(400, "request", str(exc))
    old, new = project_comparison(scenario, PRESETS[req.rules_old],
                                  PRESETS[req.rules_new], assumptions)
    if req.modeller_rounding:
        old, new = _round_to_10(old), _round_to_10(new)
    return {
        "request": req.model_dump(mode="json"),
        "old": _result_payload(old),
        "new": _result_payload(new),
        "loss": _loss_payload(old, new),
    }


@app.get("/api/presets")
def presets():
    out = []
    for name, rules in PRESETS.items():
        cap = rules.cap_rule
        if cap.kind is CapKind.HARD:
            cap_payload = {"kind": "hard", "cap": cap.cap,
                           "delay_years": cap.delay_years}
        else:
            cap_payload = {"kind": "soft", "full_match_to": cap.full_match_to,
                           "half_match_to": cap.half_match_to,
                           "max_uplift": cap.max_uplift}
        out.append({
            "id": name,
            "accrual_denominator": rules.accrual_denominator,
            "db_dc_threshold": rules.db_dc_threshold,
            "threshold_indexation": rules.threshold_indexation,
            "cap": cap_payload,
            "member_rate": rules.member_rate,
            "employer_rate": rules.employer_rate,
        })
    return {"presets": out}


@app.get("/api/erosion")
def erosion(d: float = Query(...), years: int = Query(40, ge=0, le=200)):
    if not math.isfinite(d) or d >= 1.0:
        return _error(400, "d", "d must be a finite value < 1")
    points = [{"n": n, "factor": round(erosion_factor(d, n), 6)}
              for n in range(years + 1)]
    return {"d": d, "years": years, "points": points}
