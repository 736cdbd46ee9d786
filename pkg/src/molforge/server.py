"""HTTP steering interface: start runs, watch progress, score molecules.

One run at a time. The run itself executes on a worker thread; when an
interaction falls due the worker parks on the control condition until scores
arrive over HTTP, the round is skipped, the configured timeout lapses, or the
run is stopped.
"""

from __future__ import annotations

import dataclasses
import logging
import threading
import time
from pathlib import Path

from fastapi import Body, FastAPI
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .archive import ArchiveQuery, ArchiveStore, IOFailureError, MalformedQueryError
from .conductor import (
    CONTROL_COMMANDS,
    ConfigError,
    RunControl,
    RunStatus,
    STATE_IDLE,
    parse_config,
    run,
)
from .exsmiles import parse
from .fitness import InteractionSession

logger = logging.getLogger(__name__)


class ConflictingRunError(Exception):
    """A run is already active; finish or stop it first."""


class NoActiveRunError(Exception):
    pass


class NoPendingInteractionError(Exception):
    def __init__(self, generation: int):
        super().__init__(f"no interaction awaiting scores at generation {generation}")
        self.generation = generation


class ScoreRejectedError(Exception):
    """A submitted score had an unknown id or an off-scale value."""


class ScoreItem(BaseModel):
    chromosome_id: int
    value: float


class ScoresBody(BaseModel):
    scores: list[ScoreItem]


class RunController:
    """Owns the worker thread, archive store, and score handoff for one run."""

    def __init__(self):
        self._start_lock = threading.Lock()
        self._thread: threading.Thread | None = None
        self._control: RunControl | None = None
        self._status: RunStatus | None = None
        self._store: ArchiveStore | None = None
        self._config = None
        self._session: InteractionSession | None = None
        self._scores: dict[int, float] | None = None

    # -- lifecycle -------------------------------------------------------

    def is_active(self) -> bool:
        thread = self._thread
        return thread is not None and thread.is_alive()

    def start(self, config_obj: dict) -> str:
        with self._start_lock:
            if self.is_active():
                raise ConflictingRunError("a run is already active")
            config = parse_config(config_obj)
            store = ArchiveStore.create(config.archive_path)
            if self._store is not None:
                self._store.close()
            control = RunControl()
            self._config = config
            self._store = store
            self._control = control
            self._session = None
            self._scores = None
            self._status = RunStatus(run_id=config.run_id)

            def capture(status: RunStatus) -> None:
                self._status = status

            thread = threading.Thread(
                target=run,
                kwargs=dict(
                    config=config,
                    interaction_handler=self._interaction_handler,
                    control=control,
                    store=store,
                    status_cb=capture,
                ),
                name=f"molforge-{config.run_id}",
                daemon=True,
            )
            self._thread = thread
            thread.start()
            logger.info("started %s -> %s", config.run_id, config.archive_path)
            return config.run_id

    def status_dict(self) -> dict:
        status = self._status
        if status is None:
            return {
                "run_id": None,
                "state": STATE_IDLE,
                "generation": 0,
                "population_size": None,
                "best": None,
            }
        return status.as_dict()

    def post_control(self, command: str) -> dict:
        control = self._control
        if control is None or not self.is_active():
            raise NoActiveRunError("no active run to control")
        control.post(command)
        return self.status_dict()

    # -- interaction handoff ----------------------------------------------

    def _interaction_handler(self, session: InteractionSession) -> dict[int, float] | None:
        control = self._control
        assert control is not None
        timeout = self._config.interaction.timeout_s if self._config.interaction else None
        deadline = time.monotonic() + timeout if timeout is not None else None
        with control.cond:
            self._session = session
            self._scores = None
            scores: dict[int, float] | None = None
            while True:
                if self._scores is not None:
                    scores = self._scores
                    break
                if control.stopped:
                    break
                if control.consume_skip():
                    logger.info("generation %d: scoring skipped", session.generation)
                    break
                if deadline is not None:
                    remaining = deadline - time.monotonic()
                    if remaining <= 0:
                        logger.info(
                            "generation %d: scoring timed out after %.1fs",
                            session.generation,
                            timeout,
                        )
                        break
                    control.cond.wait(remaining)
                else:
                    control.cond.wait()
            self._session = None
            self._scores = None
            return scores

    def submit_scores(self, generation: int, items: list[ScoreItem]) -> int:
        control = self._control
        if control is None or not self.is_active():
            raise NoActiveRunError("no active run")
        with control.cond:
            session = self._session
            if session is None or session.generation != generation:
                raise NoPendingInteractionError(generation)
            displayed = set(session.displayed_ids())
            values = self._config.interaction.scale_values()
            accepted: dict[int, float] = {}
            for item in items:
                if item.chromosome_id not in displayed:
                    raise ScoreRejectedError(
                        f"UnknownChromosomeId: {item.chromosome_id} was not displayed"
                    )
                if not any(abs(item.value - v) < 1e-9 for v in values):
                    raise ScoreRejectedError(
                        f"ScoreOffScale: {item.value} is not on the configured scale"
                    )
                accepted[item.chromosome_id] = item.value
            self._scores = accepted
            control.cond.notify_all()
        return len(accepted)

    # -- reading ----------------------------------------------------------

    def displayed_payloads(self, generation: int) -> list[dict]:
        control = self._control
        if control is None:
            raise NoActiveRunError("no active run")
        with control.cond:
            session = self._session
            if session is None or session.generation != generation:
                raise NoPendingInteractionError(generation)
            return list(session.displayed)

    def generation_payloads(self, generation: int) -> list[dict]:
        store, config = self._store, self._config
        if store is None or config is None:
            raise NoActiveRunError("no run has produced an archive yet")
        payloads = []
        for record in store.records():
            if record.generation != generation:
                continue
            g = parse(config.table, record.genome)
            payloads.append(
                {
                    "chromosome_id": record.chromosome_id,
                    "genome": record.genome,
                    "standard_smiles": record.standard_smiles,
                    "fitness": record.fitness,
                    "user_score": record.user_score,
                    "heavy_atoms": record.heavy_atoms,
                    "weight": record.weight,
                    "graph": {
                        "nodes": [{"element": a.element, "h_count": a.h_count} for a in g.atoms],
                        "edges": [{"a": b.a, "b": b.b, "order": b.order} for b in g.bonds],
                    },
                }
            )
        payloads.sort(key=lambda p: p["chromosome_id"])
        return payloads

    def search(self, query: ArchiveQuery) -> list[dict]:
        store = self._store
        if store is None:
            raise NoActiveRunError("no run has produced an archive yet")
        return [dataclasses.asdict(r) for r in store.search(query)]


def _error(status_code: int, name: str, detail: str) -> JSONResponse:
    return JSONResponse({"error": name, "detail": detail}, status_code=status_code)


def create_app(static_dir: str | Path | None = None) -> FastAPI:
    controller = RunController()
    app = FastAPI(title="molforge", docs_url=None, redoc_url=None)
    app.state.controller = controller

    @app.get("/api/status")
    def get_status():
        return controller.status_dict()

    @app.post("/api/run", status_code=202)
    def post_run(config: dict = Body(...)):
        try:
            run_id = controller.start(config)
        except ConflictingRunError as e:
            return _error(409, "ConflictingRun", str(e))
        except ConfigError as e:
            return _error(422, "ConfigError", str(e))
        except IOFailureError as e:
            return _error(500, "IOFailure", str(e))
        return {"run_id": run_id}

    @app.post("/api/control/{command}")
    def post_control(command: str):
        if command not in CONTROL_COMMANDS:
            return _error(404, "UnknownCommand", f"no such control command: {command}")
        try:
            return controller.post_control(command)
        except NoActiveRunError as e:
            return _error(409, "NoActiveRun", str(e))

    @app.get("/api/generations/{generation}/molecules")
    def get_molecules(generation: int, displayed: bool = False):
        try:
            if displayed:
                payloads = controller.displayed_payloads(generation)
            else:
                payloads = controller.generation_payloads(generation)
                if not payloads:
                    return _error(
                        404, "UnknownGeneration", f"generation {generation} is not archived"
                    )
        except NoPendingInteractionError as e:
            return _error(404, "NoPendingInteraction", str(e))
        except NoActiveRunError as e:
            return _error(404, "NoArchive", str(e))
        return {"generation": generation, "molecules": payloads}

    @app.post("/api/generations/{generation}/scores")
    def post_scores(generation: int, body: ScoresBody):
        try:
            accepted = controller.submit_scores(generation, body.scores)
        except NoActiveRunError as e:
            return _error(409, "NoActiveRun", str(e))
        except NoPendingInteractionError as e:
            return _error(404, "NoPendingInteraction", str(e))
        except ScoreRejectedError as e:
            name = "ScoreOffScale" if "ScoreOffScale" in str(e) else "UnknownChromosomeId"
            return _error(422, name, str(e))
        return {"accepted": accepted}

    @app.get("/api/history/search")
    def get_search(
        gen_min: int | None = None,
        gen_max: int | None = None,
        fit_min: float | None = None,
        fit_max: float | None = None,
        wt_min: float | None = None,
        wt_max: float | None = None,
        atoms_min: int | None = None,
        atoms_max: int | None = None,
        substr: str | None = None,
        limit: int | None = None,
        order_by: str = "generation-asc",
    ):
        try:
            query = ArchiveQuery(
                gen_min=gen_min, gen_max=gen_max,
                fit_min=fit_min, fit_max=fit_max,
                wt_min=wt_min, wt_max=wt_max,
                atoms_min=atoms_min, atoms_max=atoms_max,
                substr=substr, limit=limit, order_by=order_by,
            )
        except MalformedQueryError as e:
            return _error(422, "MalformedQuery", str(e))
        try:
            return {"records": controller.search(query)}
        except NoActiveRunError as e:
            return _error(404, "NoArchive", str(e))

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")
    else:

        @app.get("/")
        def root():
            return {"service": "molforge", "api": "/api/status"}

    return app
