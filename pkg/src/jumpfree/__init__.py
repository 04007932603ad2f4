"""Growth-and-merge ball constructions, exceptional-set approximation of
functions with small jump sets, and an anisotropic dimension-reduction
pipeline, all with numerically verified energy bounds."""

__version__ = "0.1.0"
