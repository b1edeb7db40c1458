"""FastAPI shell around persisted QA sessions.

Every state transition goes through QaSession.apply_answer followed by an
atomic commit to disk; if either step fails the in-memory session is reloaded
from the last committed document, so clients never observe a half-applied
answer. The service adds no logic of its own.
"""

from __future__ import annotations

import threading
from contextlib import asynccontextmanager
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import FileResponse
from fastapi.staticfiles import StaticFiles

from ..aog.model import graph_to_dict
from ..errors import AnnotationError, DatasetError, SessionStateError
from ..features.io import VolumeStore, load_manifest
from ..qa.persistence import SessionStore
from ..qa.state import Answer, QaConfig, QaSession, Question
from .schemas import (
    AnswerIn,
    AnswerOut,
    AogSummary,
    HeatmapOut,
    NextQuestionOut,
    ProgressOut,
    QuestionOut,
    TemplateSummary,
)


class SessionHandle:
    """One live session: in-memory state, its on-disk store, and a write lock."""

    def __init__(self, name: str, path, manifest_path=None, config: QaConfig | None = None):
        self.name = name
        self.disk = SessionStore(path)
        if self.disk.exists():
            self.session = self.disk.load()
        else:
            if manifest_path is None:
                raise SessionStateError(
                    "session file %s does not exist; pass a manifest to create it" % path
                )
            store = VolumeStore(load_manifest(Path(manifest_path)))
            self.session = QaSession(store, config if config is not None else QaConfig())
            self.disk.commit(self.session)
        self.lock = threading.Lock()
        self._proposed: tuple[int, Question] | None = None

    def close(self) -> None:
        self.disk.close()

    def next_question(self) -> Question | None:
        with self.lock:
            s = self.session
            if self._proposed is not None and self._proposed[0] == s.revision:
                return self._proposed[1]
            if not s.unasked_ids():
                return None
            question = s.select_question()
            self._proposed = (s.revision, question)
            return question

    def question_for(self, image_id: str, step: int) -> Question:
        s = self.session
        if step != s.revision:
            raise SessionStateError(
                "stale answer (step %d, session at %d)" % (step, s.revision)
            )
        if self._proposed is not None:
            rev, question = self._proposed
            if rev == s.revision and question.image_id == image_id:
                return question
        return s.make_question(image_id)

    def apply(self, payload: AnswerIn) -> QaSession:
        with self.lock:
            question = self.question_for(payload.image_id, payload.step)
            answer = _answer_from_payload(payload)
            try:
                self.session.apply_answer(question, answer)
            except Exception:
                # apply_answer may have touched state before failing; fall
                # back to the last committed document
                self.session = self.disk.load(self.session.store)
                raise
            self.disk.commit(self.session)
            return self.session


def _answer_from_payload(payload: AnswerIn) -> Answer:
    from ..geometry import Box

    box = None if payload.box is None else Box.from_list(payload.box)
    return Answer(
        kind=payload.kind,
        box=box,
        template_label=payload.template_label,
        flipped=payload.flipped,
    )


def _question_out(handle: SessionHandle, question: Question) -> QuestionOut:
    entry = handle.session.store.manifest.entry(question.image_id)
    image_url = None
    if entry.image_path is not None:
        image_url = "/v1/image/%s" % question.image_id
    return QuestionOut(
        image_id=question.image_id,
        image_url=image_url,
        heatmap_url="/v1/heatmap/%s" % question.image_id,
        proposed_template_id=question.proposed_template_id,
        proposed_template_label=question.proposed_template_label,
        proposed_box=None if question.proposed_box is None else question.proposed_box.to_list(),
        predicted_gain=question.predicted_gain,
        step=question.step,
    )


def _aog_summary(session: QaSession) -> AogSummary:
    return AogSummary(
        part_name=session.aog.part_name,
        template_count=len(session.aog),
        templates=[
            TemplateSummary(
                template_id=t.template_id,
                label=t.label,
                support_count=t.support_count,
                num_patterns=len(t.patterns),
            )
            for t in session.aog.templates
        ],
    )


def create_app(
    session_path,
    manifest_path=None,
    config: QaConfig | None = None,
    frontend_dir=None,
    session_name: str = "default",
) -> FastAPI:
    handles: dict[str, SessionHandle] = {}

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        for handle in handles.values():
            handle.close()

    app = FastAPI(title="partaog session service", lifespan=lifespan)
    handles[session_name] = SessionHandle(
        session_name, session_path, manifest_path=manifest_path, config=config
    )
    app.state.handles = handles

    def get_handle(session: str) -> SessionHandle:
        try:
            return handles[session]
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown session %r" % session)

    @app.exception_handler(SessionStateError)
    async def _conflict(request, exc):
        from fastapi.responses import JSONResponse

        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.exception_handler(AnnotationError)
    async def _invalid(request, exc):
        from fastapi.responses import JSONResponse

        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/v1/next-question", response_model=NextQuestionOut)
    def next_question(session: str = Query("default")):
        handle = get_handle(session)
        question = handle.next_question()
        if question is None:
            return NextQuestionOut(exhausted=True, question=None)
        return NextQuestionOut(exhausted=False, question=_question_out(handle, question))

    @app.post("/v1/answer", response_model=AnswerOut)
    def post_answer(payload: AnswerIn, session: str = Query("default")):
        handle = get_handle(session)
        s = handle.apply(payload)
        return AnswerOut(
            loss=s.loss_history[-1],
            revision=s.revision,
            annotation_count=len(s.annotations),
            aog=_aog_summary(s),
        )

    @app.get("/v1/aog")
    def get_aog(session: str = Query("default")):
        return graph_to_dict(get_handle(session).session.aog)

    @app.get("/v1/progress", response_model=ProgressOut)
    def get_progress(session: str = Query("default")):
        handle = get_handle(session)
        s = handle.session
        return ProgressOut(
            session=handle.name,
            dataset_size=len(s.ids),
            asked_count=len(s.asked),
            questions_asked=len(s.answer_log),
            annotation_count=len(s.annotations),
            revision=s.revision,
            labels=s.aog.labels(),
            loss_history=list(s.loss_history),
        )

    @app.get("/v1/image/{image_id}")
    def get_image(image_id: str, session: str = Query("default")):
        handle = get_handle(session)
        try:
            entry = handle.session.store.manifest.entry(image_id)
        except DatasetError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        if entry.image_path is None:
            raise HTTPException(status_code=404, detail="no raw image for %r" % image_id)
        path = handle.session.store.manifest.resolve(entry.image_path)
        if not path.exists():
            raise HTTPException(status_code=404, detail="image file %s missing" % path)
        return FileResponse(path)

    @app.get("/v1/heatmap/{image_id}", response_model=HeatmapOut)
    def get_heatmap(image_id: str, session: str = Query("default")):
        handle = get_handle(session)
        try:
            v = handle.session.store.get(image_id)
        except DatasetError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        slices = v.top_layer_slices()
        grids = np.stack([grid for _, grid in slices])
        meta = slices[0][0]
        return HeatmapOut(
            image_id=image_id,
            image_w=v.image_w,
            image_h=v.image_h,
            layer_index=meta.layer_index,
            grid_h=meta.grid_h,
            grid_w=meta.grid_w,
            stride_px=meta.stride_px,
            offset_px=meta.offset_px,
            values=grids.mean(axis=0).tolist(),
        )

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=frontend_dir, html=True), name="ui")

    return app
