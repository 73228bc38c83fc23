"""Symbolic toolkit for residually free towers: word problems over
graphs of groups, tower construction with A/Q/T blocks, finite-ball
embedding certificates, cover cores, and isolated-flats bookkeeping."""

__version__ = "0.1.0"
