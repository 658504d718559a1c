"""Steady states and stability of Kerr frequency combs near cnoidal waves.

Small-pump steady states of the driven, damped Kerr equation
``i u_t + u_xx - u + 2|u|^2 u = -i alpha u - h`` on a periodic domain,
together with their linearized spectra and time-stepping checks.
"""

from .errors import KerrcombError, NumericalError, ValidationError
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "KerrcombError", "NumericalError", "ValidationError", "__version__"]
