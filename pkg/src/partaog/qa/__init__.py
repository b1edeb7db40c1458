from .state import Answer, QaConfig, QaSession, Question, kl_loss
from .selection import appearance_dist, descriptor_weights, image_descriptor
from .oracle import SimulatedOracle
from .loop import RunTrace, random_selector, run_loop, write_trace
from .persistence import SessionStore, load_session, save_session

__all__ = [
    "Answer",
    "QaConfig",
    "QaSession",
    "Question",
    "RunTrace",
    "SessionStore",
    "SimulatedOracle",
    "appearance_dist",
    "descriptor_weights",
    "image_descriptor",
    "kl_loss",
    "load_session",
    "random_selector",
    "run_loop",
    "save_session",
    "write_trace",
]
