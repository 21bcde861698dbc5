"""HTTP service exposing the simulation lab."""

from .app import create_app

__all__ = ["create_app"]
