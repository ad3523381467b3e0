"""Shear deformations of hyperbolic annuli and their length derivatives."""
