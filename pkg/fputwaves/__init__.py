"""
fputwaves

Nanopteron traveling waves in diatomic FPUT lattices with a small mass ratio:
the monatomic solitary core, the micro-periodic tails, the Jost analysis of the
light operator, and the fixed-point assembly of the full wave.
"""

import logging as _logging

__version__ = "1.0.0"

_logger = _logging.getLogger("fputwaves")
if not _logger.handlers:
    _handler = _logging.StreamHandler()
    _handler.setFormatter(_logging.Formatter("[%(levelname)s] %(name)s: %(message)s"))
    _logger.addHandler(_handler)
    _logger.setLevel(_logging.WARNING)
