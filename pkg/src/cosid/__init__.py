"""Co-channel speaker identification toolkit: usable-speech detection by
multi-scale periodicity analysis, segment assignment by joint pair and
labeling search over speaker models, and end-to-end evaluation."""

from .assignment import (
    AssignmentResult,
    ScoreTable,
    assignment_accuracy,
    best_labeling_for_pair,
    brute_force_search,
    build_score_table,
    exhaustive_pair_search,
)
from .audio import Frame, Waveform, frame_signal, load_wav, save_wav, signal_energy
from .detection import (
    DetectionConfig,
    FrameVerdict,
    UsableSegment,
    autocorrelation,
    classify_frame,
    extract_usable_segments,
    find_three_maxima,
    periodicity_decision,
)
from .features import FeatureConfig, mfcc_frame, segment_features, waveform_features
from .gmm import (
    GmmModel,
    SpeakerSet,
    load_model,
    log_density,
    save_model,
    sequence_log_likelihood,
    sid_decide,
    train_gmm,
)
from .harness import (
    EvalReport,
    ExperimentConfig,
    emit_report,
    run_assignment_eval,
    run_sid_eval,
    train_speaker_models,
)
from .mixer import MixtureSpec, MixtureTruth, measured_tir_db, mix_at_tir, truncate_align
from .synth import SpeakerProfile, load_manifest, random_profile, render_utterance, synth_corpus
from .wavelet import WaveletFilters, approximation_at_scale, daubechies4, dwt_step, haar

__version__ = "0.1.0"
