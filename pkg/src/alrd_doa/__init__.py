"""Low-rank RLS subspace direction-of-arrival estimators and benchmarks."""
__version__ = "0.1.0"
