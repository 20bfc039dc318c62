"""HTTP service around the knowledge base."""

from .app import create_app, default_app

__all__ = ["create_app", "default_app"]
