"""Job-oriented HTTP API for interactive design exploration.

Long computations run as background jobs with polled progress; request
payloads share the CLI config schemas, and results come from the same
run functions, so a service job reproduces the matching batch run
exactly.  Uploaded score files become in-memory cohorts addressable by
handle from job configs.
"""

from __future__ import annotations

import io
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse
from pydantic import ValidationError

from . import runs
from .configs import (
    CompareRunConfig,
    PowerRunConfig,
    SurfaceRunConfig,
    register_uploaded_cohort,
)
from .datagen import load_cohort_csv
from .sampling import InfeasibleDesignError

JOB_KINDS = {
    "SURFACE": (SurfaceRunConfig, runs.run_surface),
    "POWER": (PowerRunConfig, runs.run_power),
    "COMPARE": (CompareRunConfig, runs.run_compare),
}


class JobCancelled(Exception):
    pass


class Job:
    def __init__(self, kind: str, config):
        self.id = uuid.uuid4().hex
        self.kind = kind
        self.config = config
        self.status = "queued"
        self.progress = 0.0
        self.result = None
        self.error = None
        self.cancel_event = threading.Event()


class JobStore:
    """Thread-safe registry; handlers never run computations inline."""

    def __init__(self, max_workers: int = 4):
        self._jobs: dict[str, Job] = {}
        self._lock = threading.Lock()
        self._pool = ThreadPoolExecutor(max_workers=max_workers)

    def submit(self, kind: str, config) -> Job:
        job = Job(kind, config)
        with self._lock:
            self._jobs[job.id] = job
        self._pool.submit(self._run, job)
        return job

    def get(self, job_id: str) -> Job:
        with self._lock:
            job = self._jobs.get(job_id)
        if job is None:
            raise KeyError(job_id)
        return job

    def cancel(self, job_id: str) -> Job:
        job = self.get(job_id)
        job.cancel_event.set()
        with self._lock:
            if job.status == "queued":
                job.status = "failed"
                job.error = "cancelled"
        return job

    def _run(self, job: Job):
        with self._lock:
            if job.status != "queued":
                return
            job.status = "running"
        _, runner = JOB_KINDS[job.kind]

        def progress(fraction: float):
            if job.cancel_event.is_set():
                raise JobCancelled()
            job.progress = float(fraction)

        try:
            result = runner(job.config, progress=progress)
        except JobCancelled:
            with self._lock:
                job.status = "failed"
                job.error = "cancelled"
            return
        except InfeasibleDesignError as exc:
            with self._lock:
                job.status = "failed"
                job.error = f"infeasible design: {exc}"
            return
        except Exception as exc:  # surfaced to the client, job isolation kept
            with self._lock:
                job.status = "failed"
                job.error = str(exc)
            return
        with self._lock:
            if job.cancel_event.is_set():
                job.status = "failed"
                job.error = "cancelled"
                return
            job.result = result
            job.progress = 1.0
            job.status = "done"


def _cohort_summary(cohort, cohort_id: str) -> dict:
    scores = cohort.scores
    qs = [0.02, 0.1, 0.25, 0.5, 0.75, 0.9, 0.98]
    hist, edges = np.histogram(scores, bins=30)
    return {
        "cohort_id": cohort_id,
        "n": cohort.n,
        "p": cohort.p,
        "has_labels": cohort.labels is not None,
        "score_quantiles": {str(q): float(np.quantile(scores, q)) for q in qs},
        "histogram": {"counts": hist.tolist(), "edges": edges.tolist()},
    }


def create_app() -> FastAPI:
    app = FastAPI(title="pccdesign service")
    store = JobStore()
    cohorts = {}
    cohorts_lock = threading.Lock()

    @app.post("/cohorts")
    async def upload_cohort(request: Request):
        body = await request.body()
        if not body:
            raise HTTPException(status_code=400, detail="empty upload")
        try:
            cohort = load_cohort_csv(io.StringIO(body.decode("utf-8", errors="strict")))
        except (ValueError, UnicodeDecodeError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        cohort_id = uuid.uuid4().hex
        with cohorts_lock:
            cohorts[cohort_id] = cohort
            register_uploaded_cohort(cohort_id, cohort)
        return _cohort_summary(cohort, cohort_id)

    @app.get("/cohorts/{cohort_id}")
    def get_cohort(cohort_id: str):
        with cohorts_lock:
            cohort = cohorts.get(cohort_id)
        if cohort is None:
            raise HTTPException(status_code=404, detail="unknown cohort")
        return _cohort_summary(cohort, cohort_id)

    def _resolve_cohort(config_payload: dict, cohort_id: str | None):
        """Point a job config at an uploaded cohort via the registry path."""
        if cohort_id is None:
            return config_payload
        with cohorts_lock:
            if cohort_id not in cohorts:
                raise HTTPException(status_code=404, detail="unknown cohort")
        payload = dict(config_payload)
        payload["cohort"] = {"kind": "file", "path": f"__uploaded__/{cohort_id}"}
        return payload

    @app.post("/jobs", status_code=201)
    def submit_job(body: dict):
        kind = body.get("kind", "").upper()
        if kind not in JOB_KINDS:
            raise HTTPException(
                status_code=400,
                detail=[{"loc": ["kind"], "msg": f"must be one of {sorted(JOB_KINDS)}"}],
            )
        model, _ = JOB_KINDS[kind]
        payload = body.get("config", {})
        cohort_id = body.get("cohort_id")
        payload = _resolve_cohort(payload, cohort_id)
        if "seed" not in payload or payload["seed"] is None:
            payload["seed"] = int(np.random.SeedSequence().generate_state(1)[0] >> 1)
        try:
            config = model.model_validate(payload)
        except ValidationError as exc:
            errors = [
                {"loc": [str(p) for p in e["loc"]], "msg": e["msg"]} for e in exc.errors()
            ]
            return JSONResponse(status_code=400, content={"detail": errors})
        job = store.submit(kind, config)
        return {"id": job.id, "kind": kind, "status": job.status, "seed": payload["seed"]}

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        try:
            job = store.get(job_id)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown job")
        out = {
            "id": job.id,
            "kind": job.kind,
            "status": job.status,
            "progress": round(job.progress, 6),
            "seed": getattr(job.config, "seed", None),
        }
        if job.error:
            out["error"] = job.error
        return out

    @app.get("/jobs/{job_id}/result")
    def get_result(job_id: str):
        try:
            job = store.get(job_id)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown job")
        if job.status == "failed":
            raise HTTPException(status_code=409, detail=job.error or "job failed")
        if job.status != "done":
            raise HTTPException(status_code=409, detail=f"job is {job.status}")
        return {"id": job.id, "kind": job.kind, "seed": getattr(job.config, "seed", None),
                "result": job.result}

    @app.delete("/jobs/{job_id}")
    def cancel_job(job_id: str):
        try:
            job = store.cancel(job_id)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown job")
        return {"id": job.id, "status": job.status, "cancel_requested": True}

    return app
