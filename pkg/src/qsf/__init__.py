"""q-special functions, q-Borel resummation, and q-Stokes data."""

__version__ = "0.1.0"
