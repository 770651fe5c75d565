"""Spectral Barron spaces: special functions, spectra, gate networks and
Monte-Carlo constructions with error audits."""

from . import analysis, construct, gates, network, specfn, spectra
from .analysis import QuadratureSpec, l2_error, rate_fit, sandwich_check
from .construct import ConstructConfig, construct_deep, construct_deep_high, construct_shallow, hard_instance
from .network import LNNetwork, assemble_gate_block, deserialize, serialize
from .spectra import AtomicSpectrum, NormFlavor, Variant, load_spectrum, sample_mu, spectral_norm

__version__ = "0.1.0"

__all__ = [
    "analysis", "construct", "gates", "network", "specfn", "spectra",
    "QuadratureSpec", "l2_error", "rate_fit", "sandwich_check",
    "ConstructConfig", "construct_deep", "construct_deep_high", "construct_shallow", "hard_instance",
    "LNNetwork", "assemble_gate_block", "deserialize", "serialize",
    "AtomicSpectrum", "NormFlavor", "Variant", "load_spectrum", "sample_mu", "spectral_norm",
]
