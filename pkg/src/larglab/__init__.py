"""Random graphs on function spaces: exact PL geometry, sampling, LARG graphs and matching."""

__version__ = "0.1.0"
