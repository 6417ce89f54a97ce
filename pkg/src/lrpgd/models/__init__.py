"""Statistical models exposing loss, gradient, projection and initializers."""

from .base import ModelInstance

__all__ = ["ModelInstance"]
