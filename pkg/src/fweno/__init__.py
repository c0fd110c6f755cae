"""Fast WENO reconstructions and a finite-difference solver for conservation laws."""

__version__ = "0.1.0"
