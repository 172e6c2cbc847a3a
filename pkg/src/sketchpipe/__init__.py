"""Toolchain for programmatic sketch guidance.

Compiles a small TikZ dialect into an AST, rasterizes it deterministically,
builds polygon-sketch training triplets from COCO/LVIS-style annotations,
assembles grounding and control tokens as a verifiable numeric reference, and
scores generated images with spatial-relation and position/size metrics.
"""

__version__ = "0.1.0"
