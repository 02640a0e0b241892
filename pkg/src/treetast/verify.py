"""Brute-force certification of the code's algebraic properties.

Full diversity means every nonzero codeword difference has rank M.  Since
the map from symbols to codewords is linear, differences of codewords are
codewords of symbol differences, so certification enumerates the finite
difference alphabet raised to the K symbol positions and rank-checks each
matrix.  Certificates carry receipts (the exact number of matrices checked)
and ranks at three thresholds so a borderline singular value cannot silently
certify.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import Constellation
from .encoder import CodeParams, encode, encode_constituent, equivalent_matrix, symbol_schedule
from .errors import InvalidInput, Refused, ShapeError

SEARCH_GUARD = 2 ** 22
RANK_THRESHOLDS = (1e-6, 1e-9, 1e-12)
PRIMARY_THRESHOLD = 1e-9


def difference_alphabet(constellation: Constellation) -> np.ndarray:
    """All distinct pairwise differences p - q of constellation points,
    zero included, sorted by (real, imag)."""
    pts = constellation.points_array()
    diffs = (pts[:, None] - pts[None, :]).ravel()
    # dedup on rounded keys; float noise between equal-by-construction
    # differences sits far below any rank threshold
    keys = np.round(diffs, 9)
    _, first = np.unique(keys, return_index=True)
    return np.sort(diffs[np.sort(first)])


def numerical_rank(singular_values: np.ndarray, threshold_scale: float) -> np.ndarray:
    """Rank = count of singular values above threshold_scale times the largest.
    Works on a batch: input (..., M), output (...)."""
    s = np.asarray(singular_values)
    smax = s.max(axis=-1, keepdims=True)
    cut = threshold_scale * np.where(smax > 0, smax, 1.0)
    return (s > cut).sum(axis=-1)


@dataclass(frozen=True)
class DiversityCertificate:
    min_rank: int
    argmin: tuple
    receipts: int
    exhaustive: bool
    rank_by_threshold: tuple       # ((threshold, min rank), ...) over RANK_THRESHOLDS
    min_det: float
    alphabet_size: int


def _difference_sweep(params: CodeParams, constellation: Constellation | None,
                      sample: int | None, seed: int, chunk: int = 8192):
    const = constellation if constellation is not None else params.constellation
    alphabet = difference_alphabet(const)
    B = alphabet.size
    K = params.K
    total = B ** K
    G = equivalent_matrix(params).G
    M, T = params.M, params.T

    min_ranks = {thr: M + 1 for thr in RANK_THRESHOLDS}
    argmin = None
    min_det = np.inf
    receipts = 0

    def consume(diff_vectors):
        nonlocal argmin, min_det, receipts
        if diff_vectors.shape[0] == 0:
            return
        words = (diff_vectors @ G.T).reshape(-1, T, M)
        words = np.transpose(words, (0, 2, 1))          # batch of M x T codewords
        svals = np.linalg.svd(words, compute_uv=False)
        for thr in RANK_THRESHOLDS:
            ranks = numerical_rank(svals, thr)
            r = int(ranks.min())
            if r < min_ranks[thr]:
                min_ranks[thr] = r
                if thr == PRIMARY_THRESHOLD:
                    argmin = diff_vectors[int(ranks.argmin())].copy()
        dets = np.prod(svals, axis=1)
        j = int(dets.argmin())
        if dets[j] < min_det:
            min_det = float(dets[j])
        receipts += diff_vectors.shape[0]

    zero_idx = _zero_digit(alphabet)
    if sample is None:
        if total > SEARCH_GUARD:
            raise Refused(
                f"{B}^{K} = {total} difference vectors exceeds the certification guard "
                f"{SEARCH_GUARD}; pass sample= to run a randomized non-exhaustive check"
            )
        powers = B ** np.arange(K - 1, -1, -1, dtype=np.int64)
        for start in range(0, total, chunk):
            idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
            digits = (idx[:, None] // powers[None, :]) % B
            keep = np.any(digits != zero_idx, axis=1)
            consume(alphabet[digits[keep]])
        exhaustive = True
    else:
        if sample <= 0:
            raise InvalidInput(f"sample must be positive, got {sample}")
        rng = np.random.default_rng(seed)
        done = 0
        while done < sample:
            n = min(chunk, sample - done)
            digits = rng.integers(0, B, size=(n, K))
            keep = np.any(digits != zero_idx, axis=1)
            consume(alphabet[digits[keep]])
            done += n
        exhaustive = False

    ranks_tuple = tuple((thr, min_ranks[thr]) for thr in RANK_THRESHOLDS)
    cert = DiversityCertificate(
        min_rank=min_ranks[PRIMARY_THRESHOLD],
        argmin=tuple(complex(x) for x in argmin) if argmin is not None else (),
        receipts=receipts,
        exhaustive=exhaustive,
        rank_by_threshold=ranks_tuple,
        min_det=float(min_det),
        alphabet_size=B,
    )
    return cert


def _zero_digit(alphabet: np.ndarray) -> int:
    """Index of the zero difference inside the sorted alphabet."""
    j = int(np.argmin(np.abs(alphabet)))
    if abs(alphabet[j]) > 1e-12:
        raise ShapeError("difference alphabet is missing zero")
    return j


def min_rank_over_differences(params: CodeParams, constellation: Constellation | None = None,
                              sample: int | None = None, seed: int = 0) -> DiversityCertificate:
    """Certify diversity: minimum numerical rank of the codeword of every
    nonzero symbol-difference vector.  Full diversity holds iff the result
    equals M.  Exhaustive unless sample is given; Refused when the exhaustive
    space exceeds SEARCH_GUARD."""
    return _difference_sweep(params, constellation, sample, seed)


def min_det_over_differences(params: CodeParams, constellation: Constellation | None = None,
                             sample: int | None = None, seed: int = 0) -> float:
    """Minimum over nonzero differences of the Gram-determinant surrogate
    det(T T^H)^(1/2), i.e. the product of all M singular values.  Strictly
    positive exactly when full diversity holds at this constellation.  The
    value is specific to the constellation's difference alphabet; nothing is
    claimed about unscaled integer inputs."""
    return _difference_sweep(params, constellation, sample, seed).min_det


@dataclass(frozen=True)
class SubmatrixReport:
    symbol_index: int
    thread: int
    stream_pos: int
    columns: tuple
    rank: int
    literal_identity: bool
    matched_slot: int | None


def thread_submatrix_rank(params: CodeParams, u) -> SubmatrixReport:
    """Extract the M x M submatrix spanned by the appearance columns of the
    first nonzero symbol and rank it.

    Also checks the structural identity behind the diversity proof: the
    submatrix should equal a column permutation of the constituent codeword
    of the window symbols.  Columns map by their appearance order d to
    constituent column (c + d) mod M, where c is the symbol's stream
    position; the window input places each thread's stream-c symbol at
    constituent slot c mod M.  literal_identity reports whether some slot
    assignment makes the identity exact; the rank is returned regardless.
    """
    u = np.asarray(u, dtype=complex).reshape(-1)
    if u.shape[0] != params.K:
        raise ShapeError(f"u must have length {params.K}, got {u.shape[0]}")
    nz = np.flatnonzero(u)
    if nz.size == 0:
        raise InvalidInput("u must be nonzero")
    k0 = int(nz[0])
    sched = symbol_schedule(params)
    j, c = sched.thread[k0], sched.stream_pos[k0]
    cols = tuple(sorted({app.t for app in sched.appearances[k0]}))
    if len(cols) != params.M:
        raise ShapeError(
            f"symbol {k0 + 1} appears in {len(cols)} columns, need M={params.M} "
            "(tail-cut codes drop tail appearances)"
        )
    word = encode(params, u)
    sub = word.entries[:, list(cols)]

    M = params.M
    rank = int(numerical_rank(np.linalg.svd(sub, compute_uv=False), PRIMARY_THRESHOLD))

    # the row alignment of the appearance columns forces the permutation
    # d -> (c + d) mod M; the constituent slot carrying the window symbols is
    # not fixed by it, so try each
    perm = [(c + d) % M for d in range(M)]
    literal = False
    matched = None
    for s0 in range(M):
        window = np.zeros(M * M, dtype=complex)
        for k in range(params.K):
            if sched.stream_pos[k] == c and u[k] != 0:
                row = ((s0 + sched.thread[k] - 1) % M) + 1
                window[s0 * M + row - 1] = u[k]
        if not np.any(window != 0):
            continue
        const_word = encode_constituent(params, window)
        if np.allclose(sub, const_word.entries[:, perm], rtol=1e-9, atol=1e-12):
            literal = True
            matched = s0
            break
    return SubmatrixReport(symbol_index=k0 + 1, thread=j, stream_pos=c, columns=cols,
                           rank=rank, literal_identity=literal, matched_slot=matched)


def check_triangular(equiv) -> tuple:
    """Verify the column-echelon property: each column's leading structural
    nonzero sits strictly below the previous column's.  Accepts an
    EquivCodeMatrix (exact structural mask) or a plain array (nonzero
    entries).  Returns (True, None) or (False, (leading_row, column)) at the
    first violation; an all-zero column reports leading_row -1."""
    structure = getattr(equiv, "structure", None)
    if structure is None:
        structure = np.asarray(equiv) != 0
    if structure.ndim != 2:
        raise ShapeError(f"need a matrix, got shape {structure.shape}")
    prev = -1
    for k in range(structure.shape[1]):
        rows = np.flatnonzero(structure[:, k])
        if rows.size == 0:
            return False, (-1, k)
        lead = int(rows[0])
        if lead <= prev:
            return False, (lead, k)
        prev = lead
    return True, None
