"""HTTP + WebSocket service."""

from sketchlink.server.app import BindError, SessionManager, build_app, serve
from sketchlink.server.config import ConfigError, ServerConfig, load_config
from sketchlink.server.core import Event, ProtocolError, ServiceCore

__all__ = [
    "BindError",
    "ConfigError",
    "Event",
    "ProtocolError",
    "ServerConfig",
    "ServiceCore",
    "SessionManager",
    "build_app",
    "load_config",
    "serve",
]
