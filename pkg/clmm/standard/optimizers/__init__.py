"""
optimizers - a module for optimization optimizers
"""

from .sgd import SGD

__all__ = [
    "SGD",
]
