#!/usr/bin/env python3
"""Render the bundled 48 kHz speech-like test clip.

A source-filter formant synthesizer: a Rosenberg glottal pulse train with
jitter/shimmer and aspiration noise drives a cascade of time-varying formant
resonators; fricatives and bursts are shaped noise. The output is
deterministic for a given seed.

    python3 tools/synth_speech.py tests/data/speech_48k.wav
"""

import sys

import numpy as np
from scipy.io import wavfile
from scipy.signal import butter, lfilter, sosfilt

FS = 48000
BLOCK = 240  # 5 ms coefficient update

# Formant targets F1..F5 in Hz.
VOWELS = {
    "a": [730, 1090, 2440, 3400, 4500],
    "i": [270, 2290, 3010, 3700, 4700],
    "u": [300, 870, 2240, 3300, 4400],
    "e": [530, 1840, 2480, 3500, 4600],
    "o": [570, 840, 2410, 3400, 4500],
    "m": [250, 1100, 2100, 3300, 4300],
}
BANDWIDTHS = [80, 100, 140, 200, 260]

SCRIPT = [
    ("sil", 0.15),
    ("a", 0.32), ("s", 0.14), ("i", 0.28), ("m", 0.10), ("u", 0.26),
    ("sh", 0.15), ("e", 0.30), ("t", 0.05), ("o", 0.32),
    ("sil", 0.10),
    ("f", 0.12), ("a", 0.36), ("s", 0.12), ("e", 0.26), ("i", 0.22),
    ("sil", 0.20),
]

NOISE_BANDS = {"s": (4500, 11000, 0.22), "sh": (2200, 7000, 0.25), "f": (1500, 16000, 0.08), "t": (2500, 14000, 0.35)}


def rosenberg(n_open, n_close):
    t1 = np.arange(n_open) / max(n_open, 1)
    rise = 0.5 * (1 - np.cos(np.pi * t1))
    t2 = np.arange(n_close) / max(n_close, 1)
    fall = np.cos(0.5 * np.pi * t2)
    return np.concatenate([rise, fall])


def glottal_source(n, f0, rng):
    src = np.zeros(n)
    pos = 0.0
    while pos < n:
        i = int(pos)
        period = FS / f0[min(i, n - 1)] * (1 + 0.01 * rng.standard_normal())
        pulse = rosenberg(int(0.4 * period), int(0.16 * period)) * (1 + 0.05 * rng.standard_normal())
        end = min(n, i + len(pulse))
        src[i:end] += pulse[: end - i]
        pos += period
    d = np.diff(src, prepend=0.0)  # lip radiation
    return d / (np.max(np.abs(d)) + 1e-12)


def resonator_coeffs(f, bw):
    r = np.exp(-np.pi * bw / FS)
    theta = 2 * np.pi * f / FS
    a = [1.0, -2 * r * np.cos(theta), r * r]
    b = [1 - 2 * r * np.cos(theta) + r * r]
    return b, a


def main(path, seed=20240611):
    rng = np.random.default_rng(seed)
    total = int(sum(d for _, d in SCRIPT) * FS)
    t = np.arange(total) / FS
    f0 = 135 - 25 * t / t[-1] + 12 * np.sin(2 * np.pi * 1.3 * t)

    # Per-sample targets, smoothed so formants glide between segments.
    formants = np.zeros((total, 5))
    voiced = np.zeros(total)
    noise_env = {k: np.zeros(total) for k in NOISE_BANDS}
    pos = 0
    last = VOWELS["a"]
    for kind, dur in SCRIPT:
        n = int(dur * FS)
        if kind in VOWELS:
            last = VOWELS[kind]
            voiced[pos : pos + n] = 0.6 if kind == "m" else 1.0
        elif kind in NOISE_BANDS:
            noise_env[kind][pos : pos + n] = 1.0
        formants[pos : pos + n] = last
        pos += n
    formants[pos:] = last
    smooth = np.hanning(int(0.03 * FS))
    smooth /= smooth.sum()
    for k in range(5):
        formants[:, k] = np.convolve(formants[:, k], smooth, mode="same")
    env_smooth = np.hanning(int(0.015 * FS))
    env_smooth /= env_smooth.sum()
    voiced = np.convolve(voiced, env_smooth, mode="same")

    src = glottal_source(total, f0, rng)
    src = src * voiced + 0.02 * rng.standard_normal(total) * voiced  # aspiration

    out = np.zeros(total)
    zi = [np.zeros(2) for _ in range(5)]
    for start in range(0, total, BLOCK):
        seg = src[start : start + BLOCK]
        for k in range(5):
            b, a = resonator_coeffs(formants[start, k], BANDWIDTHS[k])
            seg, zi[k] = lfilter(b, a, seg, zi=zi[k])
        out[start : start + BLOCK] = seg
    out /= np.max(np.abs(out)) + 1e-12

    # Breathy high band above the formants keeps voiced frames full-band.
    hb = sosfilt(butter(4, [5000, 18000], btype="band", fs=FS, output="sos"), rng.standard_normal(total))
    out += 0.015 * hb * voiced

    for kind, (lo, hi, level) in NOISE_BANDS.items():
        env = np.convolve(noise_env[kind], env_smooth, mode="same")
        if not env.any():
            continue
        sos = butter(4, [lo, hi], btype="band", fs=FS, output="sos")
        out += level * sosfilt(sos, rng.standard_normal(total)) * env

    out *= 0.8 / np.max(np.abs(out))
    wavfile.write(path, FS, np.round(out * 32767).astype(np.int16))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "speech_48k.wav")
