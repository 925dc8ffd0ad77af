"""factorgen: controllable face-sprite generation with a renderer-factorized latent space."""

__version__ = "0.1.0"

from .factorization import (
    FactorSpec,
    Factorization,
    FactorizationError,
    LatentCode,
    ThetaVector,
    load_factorization,
    pack_theta,
    project_theta,
    slice_z,
    unpack_theta,
)
