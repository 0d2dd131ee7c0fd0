"""Free-energy wells and Metropolis dynamics for sparse PCA in the spiked Wigner model."""

__version__ = "0.1.0"
