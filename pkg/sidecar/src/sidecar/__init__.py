"""Reference inference service for the morphcheck wire protocol.

Serves POST /v1/score and GET /v1/capabilities over either a transformer
checkpoint (sentiment, NLI or lexical-relation classifiers) or a
deterministic echo backend used for protocol-conformance testing.
"""
from .config import ServiceConfig
from .service import create_app

__version__ = "0.1.0"
__all__ = ["ServiceConfig", "create_app", "__version__"]
