"""Signal-recovery primitives: FIR design, wavelet shrinkage, mode
decomposition, adaptive cancellation, and co-modulation artifact flagging."""

from .fir import FirDesignSpec, apply_fir, design_equiripple, frequency_response
from .meyer import WaveletSpec, meyer_filter, wavedec, waverec, wavelet_denoise
from .emd import EmdSpec, emd, emd_baseline_remove
from .nlms import AdaptiveSpec, adaptive_cancel
from .comodulation import detect_common_mode

__all__ = [
    "FirDesignSpec", "design_equiripple", "apply_fir", "frequency_response",
    "WaveletSpec", "meyer_filter", "wavedec", "waverec", "wavelet_denoise",
    "EmdSpec", "emd", "emd_baseline_remove",
    "AdaptiveSpec", "adaptive_cancel",
    "detect_common_mode",
]
