"""
Seeded Rayleigh channel draws and channel-file I/O.
"""

import json
import logging
from pathlib import Path

import numpy as np

from problem.exceptions import ContractViolation
from problem.instance import TWO_PI, ChannelSet

from .serializers import ChannelFileSerializer

logger = logging.getLogger('beamforming')


def channel_stream(seed: int, trial: int, K: int, N: int) -> np.random.Generator:
    """Counter-based Philox stream keyed on (seed, trial, K, N)."""
    sequence = np.random.SeedSequence(int(seed), spawn_key=(int(trial), int(K), int(N)))
    return np.random.Generator(np.random.Philox(sequence))


def generate_channels(seed: int, trial: int, K: int, N: int, sigma2: float = 1.0) -> ChannelSet:
    """
    i.i.d. CN(0, 1) channels via Box-Muller on the Philox stream.

    Real and imaginary parts are independent N(0, 1/2); the same
    (seed, trial, K, N) always yields the same ChannelSet.
    """
    if K < 1 or N < 1 or trial < 0:
        raise ContractViolation(f"Channel draws need K, N >= 1 and trial >= 0 (got K={K}, N={N}, trial={trial})")
    rng = channel_stream(seed, trial, K, N)
    u1 = 1.0 - rng.random((K, N))
    u2 = rng.random((K, N))
    radius = np.sqrt(-np.log(u1))
    h = radius * np.exp(1j * TWO_PI * u2)
    return ChannelSet(h, sigma2)


def load_channels(path) -> ChannelSet:
    with open(path, 'r', encoding='utf-8') as handle:
        payload = json.load(handle)
    serializer = ChannelFileSerializer(data=payload)
    if not serializer.is_valid():
        raise ContractViolation(f"Invalid channel file {path}: {serializer.errors}")
    return serializer.save()


def save_channels(ch: ChannelSet, path) -> None:
    write_json(ChannelFileSerializer(ch).data, path)
    logger.info(f"Wrote K={ch.K} x N={ch.N} channels to {path}")


def write_json(payload, path) -> None:
    """Deterministic JSON: sorted keys, fixed indent, trailing newline."""
    target = Path(path)
    if target.parent and not target.parent.exists():
        target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, 'w', encoding='utf-8') as handle:
        json.dump(payload, handle, indent=2, sort_keys=True, allow_nan=False)
        handle.write('\n')
