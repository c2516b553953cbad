"""Reference denoiser server for the ctrack wire protocol (v1)."""

from .app import ServerConfig, create_app

__version__ = "0.1.0"
