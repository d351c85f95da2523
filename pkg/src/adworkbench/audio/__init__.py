"""AdblockRadio-style audio pipeline: MFCC features, 4-second window
classification (music/speech/ad), run-length post-processing, waveform-space
PGD evasion, and SNR measurement."""

from adworkbench.audio.stream import (
    SAMPLE_RATE,
    AudioStream,
    load_wav,
    save_wav,
    snr,
)
from adworkbench.audio.mfcc import (
    FRAME_LEN,
    HOP,
    N_COEFF,
    N_MELS,
    MfccFrames,
    mfcc,
    mfcc_window_grad,
    window_features,
)
from adworkbench.audio.classify import (
    CLASSES,
    WINDOW_SECONDS,
    SegmentLabels,
    build_audio_classifier,
    classify_segments,
    merge_and_strip,
)
from adworkbench.audio.attack import audio_attack
from adworkbench.audio import synth

__all__ = [
    "SAMPLE_RATE",
    "AudioStream",
    "load_wav",
    "save_wav",
    "snr",
    "FRAME_LEN",
    "HOP",
    "N_COEFF",
    "N_MELS",
    "MfccFrames",
    "mfcc",
    "mfcc_window_grad",
    "window_features",
    "CLASSES",
    "WINDOW_SECONDS",
    "SegmentLabels",
    "build_audio_classifier",
    "classify_segments",
    "merge_and_strip",
    "audio_attack",
    "synth",
]
