"""Local isometric embeddability of Riemannian 3-manifolds into 4-dimensional space forms."""

__version__ = "0.1.0"
