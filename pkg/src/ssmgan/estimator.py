"""scikit-learn style front end for the decoder."""

from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .bitstream import dequantize_stream, frames_to_matrix
from .engine import Session, latency_report
from .model import (
    DEFAULT_RATES,
    GeneratorConfig,
    WeightStore,
    build_generator,
    mac_count,
    param_count,
    random_weights,
)
from .validation import check_features, matrix_to_frames


class StreamwiseVocoder(TransformerMixin, BaseEstimator):
    """Frame-by-frame speech decoder with a fit/transform interface.

    ``fit`` builds the generator, from ``weights`` when given (a
    :class:`WeightStore` or a path to a weight container) or from seeded random
    weights otherwise. There is nothing to learn from ``X``.

    Feature matrices have one row per 10 ms frame: 18 cepstral coefficients,
    the pitch lag index and the pitch correlation. ``transform`` returns one
    row of 160 PCM samples per input row.

    Parameters
    ----------
    hidden_channels, kernel_size, cond_channels : int
        Channel width, convolution kernel size and conditioning width.
    rate_schedule : tuple of int
        Output rate of each residual block in Hz.
    n_bands : int
        Filter-bank bands produced by the network.
    sample_rate, frame_ms : int
    weights : WeightStore, str, Path or None
        Trained weights. A loaded file's embedded config wins over the
        architecture parameters above.
    random_state : int
        Seed for random weights when ``weights`` is None.

    Examples
    --------
    >>> import numpy as np
    >>> voc = StreamwiseVocoder(random_state=0).fit()
    >>> X = np.zeros((3, 20), np.float32)
    >>> voc.transform(X).shape
    (3, 160)
    """

    def __init__(self, hidden_channels=64, kernel_size=9, cond_channels=80,
                 rate_schedule=DEFAULT_RATES, n_bands=4, sample_rate=16000, frame_ms=10,
                 weights=None, random_state=0):
        self.hidden_channels = hidden_channels
        self.kernel_size = kernel_size
        self.cond_channels = cond_channels
        self.rate_schedule = rate_schedule
        self.n_bands = n_bands
        self.sample_rate = sample_rate
        self.frame_ms = frame_ms
        self.weights = weights
        self.random_state = random_state

    def _config(self):
        return GeneratorConfig(
            hidden_channels=self.hidden_channels,
            kernel_size=self.kernel_size,
            cond_channels=self.cond_channels,
            rate_schedule=tuple(self.rate_schedule),
            n_bands=self.n_bands,
            sample_rate=self.sample_rate,
            frame_ms=self.frame_ms,
            prior_channels=self.hidden_channels,
        )

    def fit(self, X=None, y=None):
        if self.weights is None:
            config = self._config()
            store = random_weights(config, self.random_state)
        elif isinstance(self.weights, WeightStore):
            store = self.weights
        elif isinstance(self.weights, (str, Path)):
            store = WeightStore.load(self.weights)
        else:
            raise TypeError(f"unsupported weights object {type(self.weights).__name__}")
        self.config_ = store.config
        self.generator_ = build_generator(store.config, store)
        self.session_ = Session(self.generator_)
        self.n_features_in_ = self.config_.n_cepstrum + 2
        if X is not None:
            self._check(X)
        return self

    def _check(self, X):
        cfg = self.config_
        return check_features(X, cfg.n_cepstrum, cfg.pitch_vocab)

    def transform(self, X):
        """Offline decode; ``[n][20]`` features to ``[n][160]`` PCM."""
        check_is_fitted(self, "generator_")
        feats = self._check(X)
        pcm = self.generator_.decode_offline(feats)
        return pcm.reshape(feats.shape[0], self.config_.frame_samples)

    def partial_transform(self, X):
        """Streaming decode that continues from the previous call's state."""
        check_is_fitted(self, "session_")
        feats = self._check(X)
        pcm = self.session_.decode_frames(matrix_to_frames(feats))
        return pcm.reshape(feats.shape[0], self.config_.frame_samples)

    def decode_packets(self, packets, books, streaming=True):
        """Decode coded packets to a flat PCM array."""
        check_is_fitted(self, "session_")
        if not len(packets):
            return np.zeros(0, np.float32)
        if streaming:
            return np.concatenate([self.session_.decode_packet(p, books) for p in packets])
        frames = dequantize_stream(packets, books)
        return self.generator_.decode_offline(frames_to_matrix(frames))

    def reset(self):
        check_is_fitted(self, "session_")
        self.session_.reset()
        return self

    def mac_report(self):
        check_is_fitted(self, "config_")
        return mac_count(self.config_)

    def param_report(self):
        check_is_fitted(self, "generator_")
        return param_count(self.config_, self.generator_.weights)

    def latency_report(self):
        check_is_fitted(self, "generator_")
        return latency_report(self.generator_)
