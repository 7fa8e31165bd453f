"""thermolab: numerical laboratory for a 1-D degenerate thermoelastic rod.

The package discretizes the coupled wave/degenerate-heat system on (0, 1)
with weighted linear finite elements, implements the closed-form inverse of
the generator through its integral kernels, and certifies the stability
theory numerically: exact discrete dissipativity, absence of imaginary-axis
spectrum, uniform resolvent bounds along the imaginary axis and exponential
energy decay.
"""

__version__ = "0.1.0"
