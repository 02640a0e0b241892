"""Codeword encoders and equivalent code matrices.

Three related codes live here, all built on the cyclic thread layout:

* the constituent full-rate M x M code (Golden code for M = 2, a circulant
  generator otherwise), which is the building block of the tree code;
* the tree code proper: T = 2M+L-1 channel uses carry K = M(M+L) symbols,
  each appearing M times on one thread in M consecutive columns, so each
  thread behaves like an ISI channel with taps (1, theta, ..., theta^(M-1))
  and the equivalent matrix is column-echelon triangular;
* the "original" full-rate baseline: block length T = M+L, K = M*T, every
  symbol spread over all T columns of its thread by a unitary Vandermonde
  rotation.  Its equivalent matrix is dense, which is exactly what the
  complexity experiments compare against.

Symbols are numbered in entry order: at entry column c the threads
1, ..., M contribute symbols cM+1, ..., cM+M.  Under this ordering the
first structural nonzero of column k of the tree code's equivalent matrix
sits at row k, which is the triangularity the QR stage exploits.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .algebra import (
    Constellation,
    DiophantineParams,
    GoldenParams,
    default_diophantine,
    make_constellation,
    vandermonde_rotation,
)
from .errors import EncodeError, InvalidInput
from .layering import ThreadLayout, thread_layout

TREE = "tree"
ORIGINAL = "original"


@dataclass(frozen=True)
class CodeParams:
    """Everything that determines a code; hashable so matrices can be cached."""

    M: int
    N: int
    L: int
    family: str = TREE
    constellation_name: str = "bpsk"
    theta: complex = 1 + 0j
    phi: complex = 1 + 0j
    tail_cut: bool = False

    @property
    def T(self) -> int:
        if self.family == ORIGINAL or self.tail_cut:
            return self.M + self.L
        return 2 * self.M + self.L - 1

    @property
    def K(self) -> int:
        return self.M * (self.M + self.L)

    @property
    def dioph(self) -> DiophantineParams:
        return DiophantineParams(M=self.M, theta=self.theta, phi=self.phi)

    @property
    def constellation(self) -> Constellation:
        return make_constellation(self.constellation_name)

    @property
    def is_golden(self) -> bool:
        return self.family == TREE and self.M == 2

    @property
    def layout(self) -> ThreadLayout:
        return thread_layout(self.M, self.T)


def make_code_params(M, L, N=None, family=TREE, constellation="bpsk",
                     theta=None, phi=None, tail_cut=False) -> CodeParams:
    """Resolve defaults and validate a parameter set."""
    if family not in (TREE, ORIGINAL):
        raise InvalidInput(f"unknown code family {family!r}")
    if M < 1:
        raise InvalidInput(f"M must be >= 1, got {M}")
    if L < 0:
        raise InvalidInput(f"L must be >= 0, got {L}")
    if family == ORIGINAL and tail_cut:
        raise InvalidInput("tail_cut applies to the tree family only")
    if N is None:
        N = M
    if N < 1:
        raise InvalidInput(f"N must be >= 1, got {N}")
    dioph = default_diophantine(M, theta=theta, phi=phi)
    make_constellation(constellation)   # validate the name eagerly
    return CodeParams(M=M, N=N, L=L, family=family,
                      constellation_name=constellation,
                      theta=dioph.theta, phi=dioph.phi, tail_cut=bool(tail_cut))


def code_rate(params: CodeParams) -> Fraction:
    """Exact rate K/T in symbols per channel use."""
    return Fraction(params.K, params.T)


@dataclass(frozen=True)
class Codeword:
    """M x T complex array actually sent over the antennas."""

    entries: np.ndarray
    params: CodeParams


@dataclass(frozen=True)
class SymbolAppearance:
    row: int        # antenna, 1-based
    t: int          # time slot, 0-based
    tap: complex    # generator tap (thread scale not included)


@dataclass(frozen=True)
class SymbolSchedule:
    """Where each information symbol lands in the array.

    thread[k-1], stream_pos[k-1] and appearances[k-1] describe symbol
    u_k (1-based).  Taps exclude the per-thread scale phi^((j-1)/M).
    """

    params: CodeParams
    thread: tuple[int, ...]
    stream_pos: tuple[int, ...]
    appearances: tuple[tuple[SymbolAppearance, ...], ...]

    def entry_column(self, k: int) -> int:
        return self.appearances[k - 1][0].t


def _golden_window(t: int, L: int) -> int:
    # first stream position covered by the Golden slot window at column t
    return min(max(t - 1, 0), L)


def _thread_streams(params: CodeParams) -> list[list[int]]:
    """stream[j-1][p] = 1-based symbol index carried by thread j at position p."""
    M = params.M
    positions = params.M + params.L if params.family == TREE else params.T
    layout = thread_layout(M, max(positions, 1))
    return [
        [p * M + layout.row(j, p) for p in range(positions)]
        for j in range(1, M + 1)
    ]


def symbol_schedule(params: CodeParams) -> SymbolSchedule:
    return _symbol_schedule_cached(params)


@lru_cache(maxsize=None)
def _symbol_schedule_cached(params: CodeParams) -> SymbolSchedule:
    M, L, T, K = params.M, params.L, params.T, params.K
    layout = params.layout
    streams = _thread_streams(params)
    thread = [0] * K
    stream_pos = [0] * K
    appearances: list[tuple[SymbolAppearance, ...]] = [()] * K

    if params.family == ORIGINAL:
        U = vandermonde_rotation(T)
        for j in range(1, M + 1):
            for s, k in enumerate(streams[j - 1]):
                thread[k - 1] = j
                stream_pos[k - 1] = s
                appearances[k - 1] = tuple(
                    SymbolAppearance(row=layout.row(j, t), t=t, tap=complex(U[t, s]))
                    for t in range(T)
                )
        return SymbolSchedule(params, tuple(thread), tuple(stream_pos),
                              tuple(appearances))

    golden = params.is_golden
    W = GoldenParams(theta=params.theta, phi=params.phi).rotation() if golden else None
    gen = params.dioph.generator
    for j in range(1, M + 1):
        for c, k in enumerate(streams[j - 1]):
            thread[k - 1] = j
            stream_pos[k - 1] = c
            apps = []
            for t in range(c, min(c + M, T)):
                if golden:
                    tap = complex(W[t % 2, c - _golden_window(t, L)])
                else:
                    tap = gen[t - c]
                apps.append(SymbolAppearance(row=layout.row(j, t), t=t, tap=tap))
            appearances[k - 1] = tuple(apps)
    return SymbolSchedule(params, tuple(thread), tuple(stream_pos),
                          tuple(appearances))


def _check_symbols(params: CodeParams, u, expected: int) -> np.ndarray:
    u = np.asarray(u, dtype=complex).reshape(-1)
    if u.shape[0] != expected:
        raise EncodeError(
            f"expected {expected} symbols for {params.family} code with "
            f"M={params.M}, L={params.L}, got {u.shape[0]}"
        )
    return u


def encode_constituent(params: CodeParams, u) -> Codeword:
    """Full-rate M x M constituent codeword on M^2 symbols.

    Thread j's slot s carries u[s*M + row(j, s)]; its cell in column q mixes
    the slots through the generator row q (Golden rows for M = 2, circulant
    theta powers otherwise), scaled by the thread separator.
    """
    M = params.M
    u = _check_symbols(params, u, M * M)
    layout = thread_layout(M, M)
    scales = params.dioph.thread_scales
    if M == 2:
        W = GoldenParams(theta=params.theta, phi=params.phi).rotation()
    else:
        gen = np.asarray(params.dioph.generator)
        W = np.empty((M, M), dtype=complex)
        for q in range(M):
            for s in range(M):
                W[q, s] = gen[(q - s) % M]
    S = np.zeros((M, M), dtype=complex)
    for j in range(1, M + 1):
        slots = np.array([u[s * M + layout.row(j, s) - 1] for s in range(M)])
        cells = W @ slots
        for q in range(M):
            S[layout.row(j, q) - 1, q] = scales[j - 1] * cells[q]
    return Codeword(entries=S, params=params)


def encode_tree_tast(params: CodeParams, u) -> Codeword:
    """Tree codeword: each thread is its symbol stream convolved with the
    generator taps (Golden slot windows for M = 2), zero-terminated unless
    tail_cut drops the last M-1 columns."""
    if params.family != TREE:
        raise InvalidInput("encode_tree_tast requires a tree-family CodeParams")
    M, L, T = params.M, params.L, params.T
    u = _check_symbols(params, u, params.K)
    layout = params.layout
    scales = params.dioph.thread_scales
    streams = _thread_streams(params)
    golden = params.is_golden
    W = GoldenParams(theta=params.theta, phi=params.phi).rotation() if golden else None
    gen = params.dioph.generator
    S = np.zeros((M, T), dtype=complex)
    n_pos = M + L
    for j in range(1, M + 1):
        x = u[np.asarray(streams[j - 1]) - 1]
        for t in range(T):
            if golden:
                w = _golden_window(t, L)
                val = 0j
                for s in (0, 1):
                    c = w + s
                    if t - 1 <= c <= t and c < n_pos:
                        val += W[t % 2, s] * x[c]
            else:
                val = 0j
                for i in range(M):
                    c = t - i
                    if 0 <= c < n_pos:
                        val += gen[i] * x[c]
            S[layout.row(j, t) - 1, t] = scales[j - 1] * val
    return Codeword(entries=S, params=params)


def encode_tail_cut(params: CodeParams, u) -> Codeword:
    """Tail-cut tree codeword (first M+L columns only)."""
    if not params.tail_cut:
        raise InvalidInput("encode_tail_cut requires tail_cut CodeParams")
    return encode_tree_tast(params, u)


def encode_original(params: CodeParams, u) -> Codeword:
    """Full-rate baseline codeword: thread j sends phi^((j-1)/M) * U @ x_j
    along its cells, U the unitary Vandermonde rotation."""
    if params.family != ORIGINAL:
        raise InvalidInput("encode_original requires an original-family CodeParams")
    M, T = params.M, params.T
    u = _check_symbols(params, u, params.K)
    layout = params.layout
    scales = params.dioph.thread_scales
    streams = _thread_streams(params)
    U = vandermonde_rotation(T)
    S = np.zeros((M, T), dtype=complex)
    for j in range(1, M + 1):
        x = u[np.asarray(streams[j - 1]) - 1]
        cells = U @ x
        for t in range(T):
            S[layout.row(j, t) - 1, t] = scales[j - 1] * cells[t]
    return Codeword(entries=S, params=params)


def encode(params: CodeParams, u) -> Codeword:
    """Encode with whatever family params selects."""
    if params.family == ORIGINAL:
        return encode_original(params, u)
    return encode_tree_tast(params, u)


@dataclass(frozen=True, eq=False)
class EquivCodeMatrix:
    """G with G @ u = vec(codeword(u)), plus the exact structural-zero mask.

    structure[r, k] is True iff entry (r, k) is a structural nonzero; zeros
    are never written, so triangularity checks are exact, not float tests.
    """

    G: np.ndarray          # MT x K, read-only
    structure: np.ndarray  # bool, same shape, read-only
    params: CodeParams

    def column_rows(self, k: int) -> np.ndarray:
        """Structural nonzero row indices of 0-based column k."""
        return np.flatnonzero(self.structure[:, k])

    def leading_rows(self) -> np.ndarray:
        """First structural nonzero row of each column (MT for empty columns)."""
        MT, K = self.structure.shape
        out = np.full(K, MT, dtype=int)
        for k in range(K):
            rows = np.flatnonzero(self.structure[:, k])
            if rows.size:
                out[k] = rows[0]
        return out


def equivalent_matrix(params: CodeParams) -> EquivCodeMatrix:
    return _equivalent_matrix_cached(params)


@lru_cache(maxsize=None)
def _equivalent_matrix_cached(params: CodeParams) -> EquivCodeMatrix:
    M, T, K = params.M, params.T, params.K
    schedule = symbol_schedule(params)
    scales = params.dioph.thread_scales
    G = np.zeros((M * T, K), dtype=complex)
    mask = np.zeros((M * T, K), dtype=bool)
    for k in range(1, K + 1):
        scale = scales[schedule.thread[k - 1] - 1]
        for app in schedule.appearances[k - 1]:
            r = app.t * M + app.row - 1
            G[r, k - 1] = scale * app.tap
            mask[r, k - 1] = True
    G.flags.writeable = False
    mask.flags.writeable = False
    return EquivCodeMatrix(G=G, structure=mask, params=params)
