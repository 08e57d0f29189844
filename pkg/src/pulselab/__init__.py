"""pulselab: camera-pulse biometrics from per-frame skin RGB traces.

Pipeline: an RGB trace becomes a pulse wave (GREEN, CHROM or POS
extraction), pulse peaks become corrected inter-beat intervals, and
intervals become heart rate, SDNN heart-rate variability and the
Baevsky stress index over sliding windows. A streaming session runs the
same pipeline incrementally under a fixed per-frame budget, and the
evaluation harness scores predictions against reference protocols.
"""

from .biometrics import (
    BiometricReading,
    HistogramMode,
    baevsky_si,
    heart_rate_bpm,
    hr_from_fft,
    ibi_histogram_mode,
    ibis_ms_to_s,
    ibis_s_to_ms,
    reading_for_window,
    sdnn_ms,
    windowed_readings,
)
from .errors import FormatError, PreconditionError, PulseLabError
from .evaluate import (
    GROUND_TRUTH_BAND,
    EvalReport,
    GroundTruthProtocol,
    Recording,
    RecordingReading,
    evaluate_corpus,
    ground_truth_readings,
    load_recording,
    predict_recording,
    write_report_csv,
)
from .extract import (
    DEFAULT_BAND,
    ExtractorId,
    PulseWave,
    RgbTrace,
    extract,
    extract_chrom,
    extract_green,
    extract_pos,
)
from .metrics import MetricSet, mae, mape, metric_set, pearson, rmse
from .monitor import (
    FrameStats,
    MonitorConfig,
    MonitorSession,
    per_frame_budget_check,
    process_recording,
)
from .peaks import (
    IBI_MAX_S,
    IBI_MIN_S,
    DetectorState,
    IbiSeries,
    PeakDetectorConfig,
    PeakList,
    correct_ibis,
    detect_peaks,
    detect_peaks_streaming,
    peaks_to_ibis,
)
from .signals import (
    BandpassSpec,
    FilterCoefficients,
    UniformSignal,
    design_butterworth_bandpass,
    detrend_moving_mean,
    filter_causal,
    filter_zero_phase,
    resample_uniform,
)
from .synth import SynthSpec, SynthTruth, synth_ibis, synth_trace

__version__ = "0.1.0"
