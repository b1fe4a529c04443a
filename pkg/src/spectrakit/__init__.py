"""spectrakit: standardized spectrum text formats and evaluation metrics for molecule/spectrum models."""

__version__ = "0.1.0"
