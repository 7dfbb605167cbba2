"""Material-transfer augmentation for tabletop manipulation demonstrations.

Subpackages cover the full loop: demonstration storage, photometric
shading, a toy top-down simulator with scripted experts, mask and depth
backends, a procedural material bank, the per-frame transfer engine, a
DDPM action policy, and the three-variant evaluation harness.
"""

__version__ = "0.1.0"

from matshift.errors import ConfigError, DataError, MatshiftError, TargetNotFoundError

__all__ = [
    "ConfigError",
    "DataError",
    "MatshiftError",
    "TargetNotFoundError",
    "__version__",
]
