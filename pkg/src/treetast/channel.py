"""Flat Rayleigh fading MIMO channel: sampling, composite matrices, SNR.

The model is quasi-static: H is constant over the T channel uses of one
codeword and redrawn per codeword.  Vectorizing the received block Y = H S + W
column by column turns the code into the linear system

    y = (I_T kron H) G u + w

whose system matrix ("composite") inherits the structural zeros of G
block-row-wise.  Randomness is counter-based: every (master_seed, trial, role)
triple owns an independent Philox stream, so Monte Carlo trials are
reproducible and order-independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .encoder import CodeParams, encode, equivalent_matrix
from .errors import ShapeError

ROLE_CHANNEL = 0
ROLE_NOISE = 1
ROLE_DATA = 2


def trial_rng(master_seed: int, trial: int, role: int) -> np.random.Generator:
    """Independent generator for one role within one Monte Carlo trial."""
    seq = np.random.SeedSequence((master_seed, trial, role))
    return np.random.Generator(np.random.Philox(seq))


def _as_rng(rng_seed) -> np.random.Generator:
    if isinstance(rng_seed, np.random.Generator):
        return rng_seed
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(rng_seed)))


@dataclass(frozen=True)
class ChannelRealization:
    """Fading matrix plus the noise variance the receiver operates at.

    noise_var is the variance of each complex noise entry (real and
    imaginary parts each N(0, noise_var/2)).
    """

    H: np.ndarray
    noise_var: float


@dataclass(frozen=True)
class ReceivedBlock:
    Y: np.ndarray   # N x T
    y: np.ndarray   # NT, column-major stacking of Y


def sample_channel(rng_seed, N: int, M: int, noise_var: float = 0.0) -> ChannelRealization:
    """Draw an N x M matrix of i.i.d. CN(0,1) entries, deterministic per seed."""
    rng = _as_rng(rng_seed)
    H = (rng.standard_normal((N, M)) + 1j * rng.standard_normal((N, M))) / math.sqrt(2)
    return ChannelRealization(H=H, noise_var=float(noise_var))


def complex_noise(rng_seed, shape, noise_var: float) -> np.ndarray:
    rng = _as_rng(rng_seed)
    scale = math.sqrt(noise_var / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def composite_matrix(H, G) -> np.ndarray:
    """(I_T kron H) @ G without forming the Kronecker product.

    Block-row t of the result is H times rows [tM, (t+1)M) of G, so columns
    that are structurally zero over a whole time slot stay exactly zero.
    """
    H = np.asarray(H, dtype=complex)
    G = np.asarray(G, dtype=complex)
    if H.ndim != 2 or G.ndim != 2:
        raise ShapeError("composite_matrix expects 2-d H and G")
    N, M = H.shape
    MT, K = G.shape
    if MT % M != 0:
        raise ShapeError(f"G has {MT} rows, not a multiple of M={M}")
    T = MT // M
    return np.matmul(H, G.reshape(T, M, K)).reshape(T * N, K)


def composite_structure(structure, M: int, N: int) -> np.ndarray:
    """Structural mask of the composite matrix.

    A composite block-row t is nonzero in column k wherever any of G's rows
    for time slot t is, since H mixes only within a slot.
    """
    structure = np.asarray(structure, dtype=bool)
    MT, K = structure.shape
    if MT % M != 0:
        raise ShapeError(f"structure has {MT} rows, not a multiple of M={M}")
    T = MT // M
    slot_nonzero = structure.reshape(T, M, K).any(axis=1)   # T x K
    return np.repeat(slot_nonzero, N, axis=0)


def transmit(params: CodeParams, H, u, noise_var: float, rng_seed) -> ReceivedBlock:
    """Send one codeword through Y = H S(u) + W."""
    H = np.asarray(H, dtype=complex)
    S = encode(params, u).entries
    if H.shape[1] != S.shape[0]:
        raise ShapeError(f"H has {H.shape[1]} columns but the code uses {S.shape[0]} antennas")
    Y = H @ S
    if noise_var > 0:
        Y = Y + complex_noise(rng_seed, Y.shape, noise_var)
    return ReceivedBlock(Y=Y, y=Y.flatten(order="F"))


def snr_to_noise_var(params: CodeParams, snr_db: float) -> float:
    """Noise variance for a target SNR in dB.

    SNR is defined per receive antenna per channel use against the code's
    actual average energy: with unit-power symbols and E|h|^2 = 1, the mean
    received signal energy per receive antenna per channel use is
    E_s = ||G||_F^2 / T, and noise_var = E_s / 10^(snr_db/10).
    """
    G = equivalent_matrix(params).G
    e_s = float(np.linalg.norm(G) ** 2) / params.T
    return e_s / (10.0 ** (snr_db / 10.0))
