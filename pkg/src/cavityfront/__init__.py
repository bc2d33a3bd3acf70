"""Three two-level atoms in a one-dimensional cavity, single excitation sector.

Units throughout: cavity length L = 1, light crossing time L/c = 1, hbar = 1.
Mode n has frequency n*pi and profile sin(n*pi*x).
"""

__version__ = "0.1.0"
