"""Floquet X-cube code laboratory.

Exact stabilizer simulation of a period-6 measurement schedule on stacked
4.8.8 lattice layers, with tooling to audit the instantaneous stabilizer
groups, the logical content, the detector structure, and the excitation
algebra the schedule produces.
"""

from .symplectic import GeneratorSet, PauliOp

__all__ = ["GeneratorSet", "PauliOp"]
__version__ = "0.1.0"
