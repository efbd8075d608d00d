"""HTTP microservice serving sentence embeddings from a transformer encoder."""

from .app import create_app
from .encoder import SentenceEncoder

__version__ = "0.1.0"
