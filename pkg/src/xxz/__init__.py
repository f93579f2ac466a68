"""Ferromagnetic XXZ spin systems: exact ground states, sector spectra and gap bounds."""

__version__ = "0.1.0"
