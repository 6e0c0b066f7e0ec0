"""Generative hull design: parametric hulls, mixture-model sampling and thin-ship resistance."""

__version__ = "0.1.0"
