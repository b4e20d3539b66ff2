"""HTTP service and CLI entrypoints over the engine modules."""

from .app import AppState, Session, TraceEvent, build_app

__all__ = ["AppState", "Session", "TraceEvent", "build_app"]
