"""ecgforge: synthesize, corrupt, and recover 12-lead ECG at desk scale.

Ground truth comes from a dipole-loop generator projected through the
standard lead geometry; corruption runs through electrode/wire/amplifier and
interference models with full ground-truth logging; recovery composes
equiripple filtering, discrete-Meyer wavelet shrinkage, mode-decomposition
baseline removal, accelerometer-referenced adaptive cancellation, and
co-modulation artifact flagging, feeding threshold R-peak detection and
artifact-aware HRV.
"""

from .channel import (
    AmplifierSpec, ChannelSpec, ElectrodeSpec, WireSpec, apply_channel,
    dc_range, wire_resistance,
)
from .container import RecordContainer, read_record, write_record
from .dsp import (
    AdaptiveSpec, EmdSpec, FirDesignSpec, WaveletSpec, adaptive_cancel,
    apply_fir, design_equiripple, detect_common_mode, emd,
    emd_baseline_remove, wavelet_denoise,
)
from .errors import (
    ConfigError, DataIntegrityError, EcgForgeError, FilterDesignError,
    NumericError, SiftingError, UnsupportedVersionError,
)
from .experiment import ExperimentConfig, run_experiment
from .leads import (
    LeadSystem, LimbPotentials, augmented_from_potentials,
    einthoven_residual, limb_leads_from_potentials, project_dipole,
)
from .noise import (
    MotionEvent, NoiseSpec, add_baseline_wander, add_emg, add_motion_event,
    add_powerline, apply_noise, snr_db,
)
from .pipeline import (
    BandpassFilter, BaselineWanderRemover, CountsToMillivolts,
    MotionArtifactCanceller, NotchFilter, RecordPipeline,
    TemplateReconstructor, WaveletDenoiser,
)
from .record import AccelStream, Event, EventLog, MultiLeadRecord
from .rhythm import (
    DetectionParams, HrvSummary, RPeakAnnotations, RrSeries, build_rr,
    detect_r_peaks, detection_scores, ground_truth_annotations, hrv_metrics,
    mask_and_interpolate, match_peaks,
)
from .synth import (
    BeatParams, DipoleTrajectory, PqrstTemplate, WaveComponent,
    generate_dipole_trajectory, ideal_pqrst_template, synthesize_record,
)

__version__ = "0.1.0"
