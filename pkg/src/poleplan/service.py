"""Long-running-job planning API.

Optimizer runs take a while on real regions, so plans are asynchronous: POST
a request, poll per-generation progress, fetch the red/green GeoJSON when
done, or cancel. Jobs live in an in-memory store guarded by one lock; a
bounded worker pool executes runs; cancellation is cooperative at generation
boundaries. Detections arrive inline or as a synthetic scenario; the service
never fetches imagery or calls a detector.
"""

from __future__ import annotations

import json
import queue
import threading
import uuid
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .coverage import DEFAULT_GRID_SPACING_M, DEFAULT_RADIUS_M
from .geo import BBoxLTRD, GeoPoint
from .immune import ImmuneParams
from .ingest import (
    DEFAULT_MERGE_RADIUS_M,
    DetectionFormatError,
    DetectionRecord,
    synth_scenario,
    zones_from_geojson,
)
from .pipeline import PlanSpec, execute_plan
from .report import geojson_dumps

QUEUED = "queued"
RUNNING = "running"
DONE = "done"
FAILED = "failed"
CANCELLED = "cancelled"
TERMINAL = {DONE, FAILED, CANCELLED}

_IMMUNE_FIELDS = {f.name for f in ImmuneParams.__dataclass_fields__.values()}
_REQUEST_KEYS = {
    "bbox", "radius_m", "grid_spacing_m", "r_merge_m", "seed",
    "immune", "exclusions", "detections", "scenario",
}
_SCENARIO_KEYS = {"seed", "n_poles", "dup_rate", "jitter_m"}


@dataclass(frozen=True)
class ServiceSettings:
    workers: int = 1
    max_queue: int = 16
    results_dir: str | None = None


class RequestError(ValueError):
    """Invalid plan request; carries the HTTP status to answer with."""

    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


@dataclass
class Job:
    id: str
    request: dict
    spec: PlanSpec
    detections: list[DetectionRecord]
    state: str = QUEUED
    progress: dict = field(default_factory=lambda: {"generation": 0, "best_cov": 0.0, "best_size": 0})
    submitted_at: str = ""
    finished_at: str | None = None
    geojson_text: str | None = None
    error: str | None = None
    cancel_event: threading.Event = field(default_factory=threading.Event)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class JobStore:
    """Thread-safe job registry with atomic state transitions."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._jobs: dict[str, Job] = {}

    def add(self, job: Job) -> None:
        with self._lock:
            self._jobs[job.id] = job

    def get(self, job_id: str) -> Job | None:
        with self._lock:
            return self._jobs.get(job_id)

    def try_start(self, job_id: str) -> Job | None:
        """queued -> running; None if the job was cancelled before starting."""
        with self._lock:
            job = self._jobs.get(job_id)
            if job is None or job.state != QUEUED:
                return None
            job.state = RUNNING
            return job

    def update_progress(self, job_id: str, generation: int, best_cov: float, best_size: int) -> None:
        with self._lock:
            job = self._jobs.get(job_id)
            if job is None or job.state != RUNNING:
                return
            if generation >= job.progress["generation"]:
                job.progress = {"generation": generation, "best_cov": best_cov, "best_size": best_size}

    def finish(self, job_id: str, state: str, geojson_text: str | None = None, error: str | None = None) -> None:
        with self._lock:
            job = self._jobs.get(job_id)
            if job is None or job.state in TERMINAL:
                return
            job.state = state
            job.finished_at = _now()
            job.geojson_text = geojson_text
            job.error = error

    def cancel(self, job_id: str) -> Job | None:
        """Flag cancellation; queued jobs flip to cancelled immediately,
        running jobs stop at the next generation boundary, terminal jobs
        are left untouched."""
        with self._lock:
            job = self._jobs.get(job_id)
            if job is None:
                return None
            job.cancel_event.set()
            if job.state == QUEUED:
                job.state = CANCELLED
                job.finished_at = _now()
            return job

    def status_doc(self, job_id: str) -> dict | None:
        with self._lock:
            job = self._jobs.get(job_id)
            if job is None:
                return None
            doc = {
                "job_id": job.id,
                "state": job.state,
                "progress": dict(job.progress),
                "submitted_at": job.submitted_at,
            }
            if job.finished_at is not None:
                doc["finished_at"] = job.finished_at
            if job.error is not None:
                doc["error"] = job.error
            return doc


def _require_number(doc: dict, key: str, default):
    value = doc.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise RequestError(400, f"{key} must be a number")
    return value


def parse_plan_request(doc) -> tuple[PlanSpec, list[DetectionRecord]]:
    """Validate a plan request synchronously; raises RequestError with the
    HTTP status (400 for invariant violations, 422 for the detections/scenario
    exclusivity rule)."""
    if not isinstance(doc, dict):
        raise RequestError(400, "request body must be a JSON object")
    unknown = set(doc) - _REQUEST_KEYS
    if unknown:
        raise RequestError(400, f"unknown request keys: {', '.join(sorted(unknown))}")

    has_detections = "detections" in doc
    has_scenario = "scenario" in doc
    if has_detections == has_scenario:
        raise RequestError(422, "provide exactly one of 'detections' or 'scenario'")

    bbox_doc = doc.get("bbox")
    if not isinstance(bbox_doc, dict) or not isinstance(bbox_doc.get("lt"), dict) or not isinstance(bbox_doc.get("rd"), dict):
        raise RequestError(400, "bbox must be {lt: {lat, lon}, rd: {lat, lon}}")
    try:
        bbox = BBoxLTRD(
            GeoPoint(float(bbox_doc["lt"]["lat"]), float(bbox_doc["lt"]["lon"])),
            GeoPoint(float(bbox_doc["rd"]["lat"]), float(bbox_doc["rd"]["lon"])),
        )
    except (KeyError, TypeError) as e:
        raise RequestError(400, f"bbox is missing fields: {e!r}") from None
    except ValueError as e:
        raise RequestError(400, f"invalid bbox: {e}") from None

    radius_m = float(_require_number(doc, "radius_m", DEFAULT_RADIUS_M))
    grid_spacing_m = float(_require_number(doc, "grid_spacing_m", DEFAULT_GRID_SPACING_M))
    r_merge_m = float(_require_number(doc, "r_merge_m", DEFAULT_MERGE_RADIUS_M))
    seed = _require_number(doc, "seed", 0)
    if radius_m <= 0 or grid_spacing_m <= 0 or r_merge_m <= 0:
        raise RequestError(400, "radius_m, grid_spacing_m and r_merge_m must be positive")
    if not isinstance(seed, int):
        raise RequestError(400, "seed must be an integer")

    immune_doc = doc.get("immune", {})
    if not isinstance(immune_doc, dict):
        raise RequestError(400, "immune must be an object")
    bad = set(immune_doc) - _IMMUNE_FIELDS
    if bad:
        raise RequestError(400, f"unknown immune keys: {', '.join(sorted(bad))}")
    try:
        params = ImmuneParams(**immune_doc)
    except (TypeError, ValueError) as e:
        raise RequestError(400, f"invalid immune params: {e}") from None

    zones = ()
    if "exclusions" in doc:
        try:
            zones = tuple(zones_from_geojson(doc["exclusions"]))
        except (DetectionFormatError, ValueError, KeyError, TypeError) as e:
            raise RequestError(400, f"invalid exclusions: {e}") from None

    if has_detections:
        raw = doc["detections"]
        if not isinstance(raw, list):
            raise RequestError(400, "detections must be an array")
        detections = []
        for i, item in enumerate(raw):
            if not isinstance(item, dict):
                raise RequestError(400, f"detections[{i}] must be an object")
            try:
                detections.append(
                    DetectionRecord(
                        GeoPoint(float(item["lat"]), float(item["lon"])),
                        float(item["confidence"]),
                        str(item.get("source_id", f"inline{i}")),
                    )
                )
            except (KeyError, TypeError) as e:
                raise RequestError(400, f"detections[{i}] is missing fields: {e!r}") from None
            except ValueError as e:
                raise RequestError(400, f"detections[{i}]: {e}") from None
    else:
        sc = doc["scenario"]
        if not isinstance(sc, dict):
            raise RequestError(400, "scenario must be an object")
        bad = set(sc) - _SCENARIO_KEYS
        if bad:
            raise RequestError(400, f"unknown scenario keys: {', '.join(sorted(bad))}")
        sc_seed = _require_number(sc, "seed", 0)
        n_poles = _require_number(sc, "n_poles", 0)
        if not isinstance(sc_seed, int) or not isinstance(n_poles, int) or n_poles < 0:
            raise RequestError(400, "scenario seed and n_poles must be integers (n_poles >= 0)")
        dup_rate = float(_require_number(sc, "dup_rate", 0.0))
        jitter_m = float(_require_number(sc, "jitter_m", 0.0))
        if dup_rate < 0 or jitter_m < 0:
            raise RequestError(400, "scenario dup_rate and jitter_m must be non-negative")
        try:
            detections = synth_scenario(sc_seed, bbox, n_poles, dup_rate, jitter_m)
        except ValueError as e:
            raise RequestError(400, f"invalid scenario: {e}") from None

    spec = PlanSpec(
        bbox=bbox,
        radius_m=radius_m,
        grid_spacing_m=grid_spacing_m,
        r_merge_m=r_merge_m,
        zones=zones,
        params=params,
        seed=seed,
    )
    return spec, detections


class PlanService:
    """Worker pool + store behind the HTTP surface."""

    def __init__(self, settings: ServiceSettings):
        self.settings = settings
        self.store = JobStore()
        self.queue: queue.Queue = queue.Queue(maxsize=settings.max_queue)
        self.workers: list[threading.Thread] = []
        self._stop = object()  # sentinel

    def start(self) -> None:
        for i in range(self.settings.workers):
            t = threading.Thread(target=self._worker_loop, name=f"plan-worker-{i}", daemon=True)
            t.start()
            self.workers.append(t)

    def stop(self) -> None:
        for _ in self.workers:
            self.queue.put(self._stop)

    def alive(self) -> bool:
        return bool(self.workers) and all(t.is_alive() for t in self.workers)

    def submit(self, request_doc: dict) -> Job:
        spec, detections = parse_plan_request(request_doc)
        job = Job(
            id=uuid.uuid4().hex,
            request=request_doc,
            spec=spec,
            detections=detections,
            submitted_at=_now(),
        )
        self.store.add(job)
        try:
            self.queue.put_nowait(job.id)
        except queue.Full:
            self.store.finish(job.id, FAILED, error="queue full")
            raise RequestError(503, f"job queue is full (max {self.settings.max_queue})") from None
        return job

    def _worker_loop(self) -> None:
        while True:
            item = self.queue.get()
            if item is self._stop:
                return
            job = self.store.try_start(item)
            if job is None:
                continue  # cancelled while queued
            try:
                outcome = execute_plan(
                    job.detections,
                    job.spec,
                    progress_callback=lambda gen, cov, size: self.store.update_progress(
                        job.id, gen, cov, size
                    ),
                    should_stop=job.cancel_event.is_set,
                )
            except Exception as e:
                self.store.finish(job.id, FAILED, error=str(e))
                continue
            if job.cancel_event.is_set():
                self.store.finish(job.id, CANCELLED)
                continue
            text = geojson_dumps(outcome.geojson)
            self.store.finish(job.id, DONE, geojson_text=text)
            if self.settings.results_dir:
                try:
                    out_dir = Path(self.settings.results_dir)
                    out_dir.mkdir(parents=True, exist_ok=True)
                    (out_dir / f"{job.id}.json").write_text(text)
                except OSError:
                    pass  # durability is best-effort; the in-memory result stands


def create_app(settings: ServiceSettings | None = None) -> FastAPI:
    settings = settings or ServiceSettings()
    service = PlanService(settings)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        service.start()
        yield
        service.stop()

    app = FastAPI(title="poleplan service", version="0.1.0", lifespan=lifespan)
    app.state.service = service
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/healthz")
    def healthz():
        if not service.alive():
            return JSONResponse(status_code=503, content={"status": "workers down"})
        return {"status": "ok"}

    @app.post("/api/plans", status_code=202)
    async def submit_plan(request: Request):
        try:
            doc = await request.json()
        except json.JSONDecodeError:
            return JSONResponse(status_code=400, content={"error": "body must be valid JSON"})
        try:
            job = service.submit(doc)
        except RequestError as e:
            return JSONResponse(status_code=e.status, content={"error": str(e)})
        return {"job_id": job.id}

    @app.get("/api/plans/{job_id}")
    def get_status(job_id: str):
        doc = service.store.status_doc(job_id)
        if doc is None:
            return JSONResponse(status_code=404, content={"error": f"unknown job {job_id}"})
        return doc

    @app.get("/api/plans/{job_id}/result")
    def get_result(job_id: str):
        job = service.store.get(job_id)
        if job is None:
            return JSONResponse(status_code=404, content={"error": f"unknown job {job_id}"})
        if job.state != DONE:
            return JSONResponse(
                status_code=409,
                content={"error": f"job is {job.state}, not done", "state": job.state},
            )
        return Response(content=job.geojson_text, media_type="application/geo+json")

    @app.delete("/api/plans/{job_id}", status_code=202)
    def cancel(job_id: str):
        job = service.store.cancel(job_id)
        if job is None:
            return JSONResponse(status_code=404, content={"error": f"unknown job {job_id}"})
        return {"job_id": job.id, "state": job.state}

    return app
