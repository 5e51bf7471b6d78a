"""Input validation shared by the estimator, engine and CLI."""

import numpy as np
from sklearn.utils.validation import check_array

from .bitstream import N_CEPSTRUM, PITCH_VOCAB, FeatureFrame, frames_to_matrix


def check_features(features, n_cepstrum=N_CEPSTRUM, pitch_vocab=PITCH_VOCAB):
    """Return a validated ``[n][n_cepstrum + 2]`` float32 feature matrix.

    Accepts a sequence of :class:`FeatureFrame` or anything array-like with one
    row per frame: cepstrum, pitch lag index, pitch correlation.
    """
    if len(features) and isinstance(features[0], FeatureFrame):
        features = frames_to_matrix(features)
    feats = check_array(features, dtype=np.float32, ensure_2d=False)
    if feats.ndim == 1:
        feats = feats[None, :]
    if feats.shape[1] != n_cepstrum + 2:
        raise ValueError(f"feature rows must have {n_cepstrum + 2} columns, got {feats.shape[1]}")
    lag = feats[:, n_cepstrum]
    if np.any(lag != np.rint(lag)) or lag.min() < 0 or lag.max() >= pitch_vocab:
        raise ValueError(f"pitch lag indices must be integers in [0, {pitch_vocab - 1}]")
    corr = feats[:, n_cepstrum + 1]
    if corr.min() < 0 or corr.max() > 1:
        raise ValueError("pitch correlation must lie in [0, 1]")
    return feats


def matrix_to_frames(feats):
    return [FeatureFrame.from_array(row) for row in feats]
