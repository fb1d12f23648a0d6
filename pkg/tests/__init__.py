"""Test package; installs the warning policy before any test module runs."""

import os
import warnings

from numpy.exceptions import ComplexWarning

# Leaked file handles (log files, report writers) fail the test
warnings.simplefilter("error", ResourceWarning)
# Silent complex -> real casts would drop the imaginary part of a trace
warnings.simplefilter("error", ComplexWarning)


def load_tests(loader, tests, pattern):  # noqa: ANN001, ANN201
    # python -m unittest -v tests
    return loader.discover(start_dir=os.path.dirname(__file__), pattern=pattern or "test_*.py")
