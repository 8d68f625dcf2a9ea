"""Detection of totally geodesic surfaces in cusped hyperbolic 3-manifolds."""
__version__ = "0.1.0"
