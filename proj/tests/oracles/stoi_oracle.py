#!/usr/bin/env python3
"""Reference STOI values for test_metrics.cpp (pystoi, fs = 10 kHz).

The signals are closed-form so the C++ test rebuilds them sample for sample.
"""

import numpy as np
from pystoi import stoi

FS = 10000
N = 12000
t = np.arange(N) / FS
gate = np.where((t > 0.5) & (t < 0.7), 0.0, 1.0)

ref = gate * (np.sin(2 * np.pi * 440 * t) * (0.6 + 0.4 * np.sin(2 * np.pi * 3 * t))
              + 0.5 * np.sin(2 * np.pi * 1250 * t + 0.3) * (0.5 + 0.5 * np.cos(2 * np.pi * 5 * t))
              + 0.3 * np.sin(2 * np.pi * 2900 * t) * np.sin(2 * np.pi * 2 * t))
hum = np.sin(2 * np.pi * 1700 * t) * np.sin(2 * np.pi * 7 * t)
buzz = np.sin(2 * np.pi * (200 * t + 900 * t * t))

cases = {
    "identity": ref,
    "hum": ref + 0.3 * hum,
    "buzz": 0.5 * ref + 0.4 * buzz,
}
for name, est in cases.items():
    print(f"{name} {stoi(ref, est, FS, extended=False):.12f}")
