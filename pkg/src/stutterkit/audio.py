"""WAV ingestion and MFCC extraction (20 x T frame sequences)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

from .embio import EmbeddingSequence
from .errors import ChannelCount, MalformedWav, TooShort

TARGET_RATE = 16000


@dataclass(frozen=True)
class Waveform:
    samples: np.ndarray  # mono, float64 in [-1, 1]
    sample_rate: int


@dataclass(frozen=True)
class MfccConfig:
    n_coeffs: int = 20
    n_mels: int = 40
    window_ms: float = 25.0
    hop_ms: float = 10.0
    fft_size: int = 512
    fmin: float = 20.0
    fmax: float = 7600.0
    log_floor: float = 1e-10

    def __post_init__(self):
        if self.n_coeffs > self.n_mels:
            raise ValueError("n_coeffs must not exceed n_mels")

    def window_length(self, sample_rate: int) -> int:
        return int(round(self.window_ms * sample_rate / 1000.0))

    def hop_length(self, sample_rate: int) -> int:
        return int(round(self.hop_ms * sample_rate / 1000.0))


def read_wav(path: str) -> Waveform:
    """Read a mono PCM16 / float32 RIFF file, resampled to 16 kHz.

    PCM16 is normalized by 1/32768.  Non-16 kHz input is resampled with
    scipy's polyphase resampler (Kaiser-windowed sinc FIR).  Multi-channel
    audio is rejected, not downmixed.
    """
    try:
        rate, data = wavfile.read(path)
    except Exception as err:
        raise MalformedWav(f"{path}: {err}") from None
    if data.ndim > 1:
        raise ChannelCount(data.shape[1])
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype == np.float32:
        samples = data.astype(np.float64)
    else:
        raise MalformedWav(f"{path}: unsupported sample format {data.dtype}")
    if rate != TARGET_RATE:
        g = math.gcd(TARGET_RATE, rate)
        samples = resample_poly(samples, TARGET_RATE // g, rate // g)
    return Waveform(samples=samples, sample_rate=TARGET_RATE)


def write_wav(path: str, wave: Waveform) -> None:
    pcm = np.clip(np.round(wave.samples * 32768.0), -32768, 32767).astype(np.int16)
    wavfile.write(path, wave.sample_rate, pcm)


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_mels, fft_size, sample_rate, fmin, fmax) -> np.ndarray:
    """Triangular HTK-mel filters, peak 1, shape (n_mels, fft_size//2 + 1)."""
    n_bins = fft_size // 2 + 1
    freqs = np.arange(n_bins) * sample_rate / fft_size
    edges = mel_to_hz(np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_mels + 2))
    bank = np.zeros((n_mels, n_bins))
    for m in range(n_mels):
        lo, center, hi = edges[m], edges[m + 1], edges[m + 2]
        up = (freqs - lo) / (center - lo)
        down = (hi - freqs) / (hi - center)
        bank[m] = np.clip(np.minimum(up, down), 0.0, None)
    return bank


def dct_matrix(n_out, n_in) -> np.ndarray:
    """Orthonormal DCT-II matrix (n_out x n_in); rows satisfy M M^T = I for n_out = n_in."""
    k = np.arange(n_out)[:, None]
    i = np.arange(n_in)[None, :]
    mat = np.cos(np.pi * k * (2 * i + 1) / (2 * n_in)) * np.sqrt(2.0 / n_in)
    mat[0] *= 1.0 / np.sqrt(2.0)
    return mat


def frame_count(n_samples, win, hop) -> int:
    if n_samples < win:
        raise TooShort(f"{n_samples} samples < window of {win}")
    return (n_samples - win) // hop + 1


def mfcc(wave: Waveform, config: MfccConfig = MfccConfig()) -> EmbeddingSequence:
    """MFCC sequence of shape (n_coeffs, T).

    Pipeline: framing -> Hann -> |FFT|^2 -> triangular mel filterbank (HTK
    scale) -> log with floor -> orthonormal DCT-II -> first n_coeffs rows.
    Deterministic: identical input bits give identical output bits.
    """
    sr = wave.sample_rate
    win = config.window_length(sr)
    hop = config.hop_length(sr)
    n_frames = frame_count(len(wave.samples), win, hop)
    idx = np.arange(win)[None, :] + hop * np.arange(n_frames)[:, None]
    frames = wave.samples[idx] * np.hanning(win)[None, :]
    power = np.abs(np.fft.rfft(frames, n=config.fft_size, axis=1)) ** 2
    bank = mel_filterbank(config.n_mels, config.fft_size, sr, config.fmin, config.fmax)
    mel_energy = power @ bank.T
    log_mel = np.log(np.maximum(mel_energy, config.log_floor))
    coeffs = log_mel @ dct_matrix(config.n_coeffs, config.n_mels).T
    return EmbeddingSequence(np.ascontiguousarray(coeffs.T))
