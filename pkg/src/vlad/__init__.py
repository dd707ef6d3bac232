"""Interpreter for a small pure functional language with built-in forward,
reverse and checkpointed-reverse automatic differentiation."""

__version__ = "0.1.0"
