"""Kernel backend selection.

Prefers the compiled extension when it imported cleanly, otherwise the
NumPy implementation.  Either way ``kernels`` exposes `h_profile`,
`h_inverse`, and `d0` over contiguous float64 arrays.  Results are
bitwise-reproducible within a backend; across backends they agree to a
few ulp (libm vs NumPy transcendentals), which the benchmark suite
checks explicitly.
"""

try:
    from . import _kernels as kernels

    BACKEND = "compiled"
except ImportError:  # extension not built: pure NumPy fallback
    from . import _kernels_py as kernels

    BACKEND = "python"

__all__ = ["kernels", "BACKEND"]
