"""Session serialization: one schema-versioned JSON document per session.

Feature volumes are not embedded; the document references the dataset by
manifest path (relative to the session file when possible). Commits are
atomic: write to a temp file in the same directory, fsync, rename.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np
from filelock import FileLock, Timeout

from ..annotations import PartAnnotation
from ..aog.model import graph_from_dict, graph_to_dict
from ..errors import SessionStateError
from ..features.io import VolumeStore, load_manifest
from .state import AnswerRecord, QaConfig, QaSession

SESSION_SCHEMA_VERSION = 1


def session_to_dict(session: QaSession, manifest_path: str | None = None) -> dict:
    if manifest_path is None:
        source = session.store.manifest.source
        if source is None:
            raise SessionStateError(
                "session is backed by an in-memory dataset; pass manifest_path to persist"
            )
        manifest_path = str(source)
    return {
        "schema_version": SESSION_SCHEMA_VERSION,
        "manifest_path": manifest_path,
        "config": session.config.to_dict(),
        "aog": graph_to_dict(session.aog),
        "asked_priors": {i: session.asked_priors[i] for i in sorted(session.asked_priors)},
        "annotations": [a.to_record() for a in session.annotations],
        "answer_log": [r.to_dict() for r in session.answer_log],
        "loss_history": session.loss_history,
        "revision": session.revision,
        "rng_state": _rng_state_to_jsonable(session.rng.bit_generator.state),
    }


def session_from_dict(doc: dict, store: VolumeStore) -> QaSession:
    version = doc.get("schema_version")
    if version != SESSION_SCHEMA_VERSION:
        raise SessionStateError("unsupported session schema version %r" % version)
    graph = graph_from_dict(doc["aog"])
    config = QaConfig.from_dict(doc["config"])
    session = QaSession(store, config, stats=graph.normalization)
    session.aog = graph
    session.asked_priors = {k: float(v) for k, v in doc["asked_priors"].items()}
    session.asked = set(session.asked_priors)
    session.annotations = [PartAnnotation.from_record(r) for r in doc["annotations"]]
    session.answer_log = [AnswerRecord.from_dict(r) for r in doc["answer_log"]]
    session.loss_history = [float(x) for x in doc["loss_history"]]
    session.revision = int(doc["revision"])
    session.rng.bit_generator.state = _rng_state_from_jsonable(doc["rng_state"])
    session._update_priors()
    session.estimate_q()
    return session


def _rng_state_to_jsonable(state):
    if isinstance(state, dict):
        return {k: _rng_state_to_jsonable(v) for k, v in state.items()}
    if isinstance(state, np.integer):
        return int(state)
    if isinstance(state, np.ndarray):
        return {"__ndarray__": state.tolist(), "dtype": str(state.dtype)}
    return state


def _rng_state_from_jsonable(state):
    if isinstance(state, dict):
        if "__ndarray__" in state:
            return np.array(state["__ndarray__"], dtype=state["dtype"])
        return {k: _rng_state_from_jsonable(v) for k, v in state.items()}
    return state


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w") as fh:
        fh.write(text)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def save_session(session: QaSession, path) -> None:
    path = Path(path)
    source = session.store.manifest.source
    manifest_path = None
    if source is not None:
        try:
            manifest_path = os.path.relpath(source, path.parent)
        except ValueError:  # different drive on windows
            manifest_path = str(source)
    doc = session_to_dict(session, manifest_path=manifest_path)
    _atomic_write(path, json.dumps(doc, sort_keys=True))


def load_session(path, store: VolumeStore | None = None) -> QaSession:
    path = Path(path)
    doc = json.loads(path.read_text())
    if store is None:
        manifest_path = Path(doc["manifest_path"])
        if not manifest_path.is_absolute():
            manifest_path = path.parent / manifest_path
        store = VolumeStore(load_manifest(manifest_path))
    return session_from_dict(doc, store)


class SessionStore:
    """Single-writer handle on a session file.

    Holds an advisory file lock for its lifetime so two processes cannot both
    commit to the same session.
    """

    def __init__(self, path):
        self.path = Path(path)
        # the lock guards against concurrent writer processes, so it must be
        # releasable from any thread (service shutdown runs off-thread)
        self._lock = FileLock(str(self.path) + ".lock", thread_local=False)
        try:
            self._lock.acquire(timeout=0)
        except Timeout:
            raise SessionStateError(
                "session %s already has a live writer" % self.path
            ) from None

    def exists(self) -> bool:
        return self.path.exists()

    def commit(self, session: QaSession) -> None:
        save_session(session, self.path)

    def load(self, store: VolumeStore | None = None) -> QaSession:
        return load_session(self.path, store=store)

    def close(self) -> None:
        self._lock.release()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
