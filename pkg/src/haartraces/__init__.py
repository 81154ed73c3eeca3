"""Traces of powers of Haar orthogonal and symplectic matrices.

Exact characteristic functions (Toeplitz+Hankel and Fredholm forms), exact
moments, Haar sampling, and the explicit Gaussian-approximation bounds.
"""
from .detform import char_fn_det, char_fn_det_many
from .fredholm import ConvergenceError, char_fn_fredholm, verify_basor_ehrhardt
from .groups import GroupKind, GroupSpec, group_spec, mean_trace
from .moments import gaussian_side_moment, group_moment_exact, moment_identity_check, moment_range
from .sampling import SampleBatch, empirical_stats, sample_batch
from .symbols import FourierTable, build_test_function, fourier_coeffs

__version__ = "0.1.0"

__all__ = [
    "GroupKind", "GroupSpec", "group_spec", "mean_trace",
    "FourierTable", "build_test_function", "fourier_coeffs",
    "char_fn_det", "char_fn_det_many",
    "ConvergenceError", "char_fn_fredholm", "verify_basor_ehrhardt",
    "gaussian_side_moment", "group_moment_exact", "moment_identity_check", "moment_range",
    "SampleBatch", "empirical_stats", "sample_batch",
    "__version__",
]
