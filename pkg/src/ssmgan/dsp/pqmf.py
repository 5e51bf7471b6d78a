"""Pseudo-QMF cosine-modulated filter bank.

The prototype is a Kaiser-windowed sinc of order ``taps`` (``taps + 1``
coefficients). Everything is causal: analysis filters then keeps every
``N``-th sample, synthesis zero-stuffs, filters and sums. An
analysis/synthesis cascade therefore reproduces its input delayed by ``taps``
samples.
"""

from dataclasses import dataclass

import numpy as np
from scipy.signal.windows import kaiser
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ..errors import StateMismatchError
from .conv import ConvSpec, ConvState

DEFAULT_BANDS = 4
DEFAULT_TAPS = 62
DEFAULT_BETA = 9.0
# Chosen once by a grid search maximizing cascade SNR on white noise for
# N=4, taps=62, beta=9 (see tests/test_pqmf.py::test_frozen_cutoff_is_grid_optimum).
DEFAULT_CUTOFF = 0.142


@dataclass(frozen=True, eq=False)
class PqmfBank:
    n_bands: int
    prototype: np.ndarray
    analysis: np.ndarray
    synthesis: np.ndarray
    declared_delay: int
    beta: float
    cutoff_ratio: float

    @property
    def taps(self):
        return self.prototype.size - 1


def design_prototype(taps, beta, cutoff_ratio):
    n = np.arange(taps + 1) - 0.5 * taps
    h = cutoff_ratio * np.sinc(cutoff_ratio * n)
    return h * kaiser(taps + 1, beta)


def design_pqmf(n_bands=DEFAULT_BANDS, taps=DEFAULT_TAPS, beta=DEFAULT_BETA,
                cutoff_ratio=DEFAULT_CUTOFF):
    """Build an ``n_bands`` PQMF bank.

    Band ``k`` analysis filter is ``2 p[n] cos((2k+1) pi/(2N) (n - taps/2) + (-1)^k pi/4)``;
    its synthesis filter is the time reverse of that, scaled by ``N`` to undo
    the power lost when zero-stuffing.
    """
    n_bands, taps = int(n_bands), int(taps)
    if n_bands < 2:
        raise ValueError("a filter bank needs at least 2 bands")
    if taps < 2 * n_bands:
        raise ValueError(f"taps={taps} must be at least 2*N={2 * n_bands}")
    if taps % 2:
        raise ValueError("taps must be even so the prototype has a centre tap")
    if not 0.0 < cutoff_ratio < 1.0:
        raise ValueError("cutoff_ratio must lie in (0, 1)")
    if beta < 0:
        raise ValueError("Kaiser beta must be non-negative")
    proto = design_prototype(taps, beta, cutoff_ratio)
    k = np.arange(n_bands)[:, None]
    n = np.arange(taps + 1)[None, :] - 0.5 * taps
    arg = (2 * k + 1) * np.pi / (2 * n_bands) * n
    phase = (-1.0) ** k * np.pi / 4
    analysis = 2 * proto * np.cos(arg + phase)
    synthesis = n_bands * analysis[:, ::-1]
    return PqmfBank(
        n_bands=n_bands,
        prototype=proto,
        analysis=analysis,
        synthesis=synthesis,
        declared_delay=taps,
        beta=float(beta),
        cutoff_ratio=float(cutoff_ratio),
    )


def pqmf_analysis(x, bank):
    """Split ``[T]`` into ``[T/N][N]`` critically sampled bands."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size % bank.n_bands:
        raise ValueError(f"signal length {x.size} is not a multiple of N={bank.n_bands}")
    bands = np.stack([np.convolve(x, h)[:x.size] for h in bank.analysis], axis=1)
    return bands[::bank.n_bands]


def pqmf_synthesis(bands, bank):
    """Offline synthesis of ``[t][N]`` bands into ``[t*N]`` samples."""
    bands = np.asarray(bands, dtype=np.float64)
    n = bank.n_bands
    if bands.ndim != 2 or bands.shape[1] != n:
        raise ValueError(f"expected bands [t][{n}], got {bands.shape}")
    length = bands.shape[0] * n
    up = np.zeros((length, n))
    up[::n] = bands
    return sum(np.convolve(up[:, k], bank.synthesis[k])[:length] for k in range(n))


def polyphase_spec(bank):
    """Synthesis as a causal conv on band-rate input: N bands in, N phases out.

    Output phase ``r`` at band step ``m`` is sample ``m*N + r`` of the full-rate
    signal.
    """
    n = bank.n_bands
    length = bank.synthesis.shape[1]
    n_taps = -(-length // n)
    g = np.zeros((n, n_taps * n))
    g[:, :length] = bank.synthesis
    # weights[r][k][i] = g_k[i*N + r]
    weights = g.reshape(n, n_taps, n).transpose(2, 0, 1)
    return ConvSpec(weights.astype(np.float32), np.zeros(n, np.float32))


class PqmfSynthesisState:
    """Streaming synthesis history for one :class:`PqmfBank`."""

    def __init__(self, bank, max_frame=1):
        self.bank = bank
        self.spec = polyphase_spec(bank)
        self.conv = ConvState(self.spec, max_frame)

    def reset(self):
        self.conv.reset()

    def step(self, bands):
        """``[t][N]`` bands to a ``[t*N]`` view that the next call overwrites."""
        return self.conv.step(bands).reshape(-1)


def pqmf_synthesis_step(state, bands, bank):
    if state.bank is not bank:
        raise StateMismatchError("synthesis state belongs to a different filter bank")
    bands = np.asarray(bands, dtype=np.float32)
    if bands.ndim != 2 or bands.shape[1] != bank.n_bands:
        raise ValueError(f"expected bands [t][{bank.n_bands}], got {bands.shape}")
    return state.step(bands).copy()


def measure_delay(bank, length=1024):
    """Delay of the analysis/synthesis cascade, located by an impulse."""
    x = np.zeros(length)
    x[0] = 1.0
    y = pqmf_synthesis(pqmf_analysis(x, bank), bank)
    return int(np.argmax(np.abs(y)))


def cascade_snr(bank, x):
    """Reconstruction SNR in dB of ``x`` through analysis then synthesis."""
    d = bank.declared_delay
    y = pqmf_synthesis(pqmf_analysis(x, bank), bank)
    ref = x[:x.size - d]
    err = y[d:] - ref
    return 10.0 * np.log10(np.sum(ref ** 2) / np.sum(err ** 2))


class PQMF(TransformerMixin, BaseEstimator):
    """Estimator wrapper: ``transform`` splits, ``inverse_transform`` merges.

    Parameters
    ----------
    n_bands : int
    taps : int
        Prototype order; the filters have ``taps + 1`` coefficients.
    beta : float
        Kaiser window shape.
    cutoff_ratio : float
        Prototype cutoff as a fraction of Nyquist.
    """

    def __init__(self, n_bands=DEFAULT_BANDS, taps=DEFAULT_TAPS, beta=DEFAULT_BETA,
                 cutoff_ratio=DEFAULT_CUTOFF):
        self.n_bands = n_bands
        self.taps = taps
        self.beta = beta
        self.cutoff_ratio = cutoff_ratio

    def fit(self, X=None, y=None):
        self.bank_ = design_pqmf(self.n_bands, self.taps, self.beta, self.cutoff_ratio)
        self.delay_ = self.bank_.declared_delay
        return self

    def transform(self, X):
        check_is_fitted(self, "bank_")
        return pqmf_analysis(np.ravel(X), self.bank_)

    def inverse_transform(self, X):
        check_is_fitted(self, "bank_")
        return pqmf_synthesis(X, self.bank_)
