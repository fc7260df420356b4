"""Controlled-unitary synthesis with one tunable c-phase gate, plus linear-optics,
qudit-circuit and process-tomography tooling around it."""

from . import errors, multictrl, optics, qmat, synth, tomo

__version__ = "0.1.0"

__all__ = ["errors", "multictrl", "optics", "qmat", "synth", "tomo"]
