"""
ThreshScatter: threshold scattering toolkit for Schrodinger operators.
"""
# Makes 'threshscatter' a package
__version__ = "1.0.0"
