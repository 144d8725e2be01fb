"""pentalab: an exact-arithmetic laboratory for pentagram maps on twisted polygons.

The package computes pentagram-type maps (short-diagonal, dented, deep-dented,
generalized, skew, universal, corrugated, and mixed complementary-dimension
variants) on twisted polygons and vertex strips in P^d with exact rational
arithmetic, verifies the duality identities satisfied by these maps, builds
arbitrary-precision spectral invariants from scaled difference-equation lifts,
and measures height growth along orbits to separate polynomial from
super-exponential behavior.
"""

__version__ = "0.1.0"
