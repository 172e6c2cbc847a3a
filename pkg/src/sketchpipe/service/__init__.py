"""HTTP service wrapping the library; the CLI is its main consumer."""

from sketchpipe.service.app import build_transport, create_app

__all__ = ["build_transport", "create_app"]
