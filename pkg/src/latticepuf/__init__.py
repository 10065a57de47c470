"""Desk-scale behavioral model of an LWE-decryption strong PUF.

Subpackages cover the arithmetic and sampling core, the stream expander, the
concatenated-code fuzzy extractor, the device/verifier pair, population
statistics, the active-attack demonstration, and CRP serialization.
"""

from .lwe import LweParams, SecretKey, PublicKey, Ciphertext, decryption_error_rate
from .device import CompactChallenge, Device
from .fe import CONFIGS as FE_CONFIGS, FeConfig, ReconstructFailure
from .server import Server, verify

__version__ = "0.1.0"

__all__ = [
    "LweParams",
    "SecretKey",
    "PublicKey",
    "Ciphertext",
    "decryption_error_rate",
    "CompactChallenge",
    "Device",
    "FE_CONFIGS",
    "FeConfig",
    "ReconstructFailure",
    "Server",
    "verify",
    "__version__",
]
