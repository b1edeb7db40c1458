from .app import SessionHandle, create_app

__all__ = ["SessionHandle", "create_app"]
