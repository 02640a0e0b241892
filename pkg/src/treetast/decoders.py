"""Tree-search detection on the triangular system R u ~= z.

All decoders walk the same K-level tree: level d fixes the symbol with
index K-d (bottom row of R first, back-substitution order), and each node
has one child per constellation point.  The squared partial distance of a
node is the exact contribution of the rows its path has fixed, so leaf
metrics equal ||z - R u||^2.

Node accounting is uniform across decoders: every computation of a node's
child-metric list adds |constellation| to nodes_visited (the Babai decoder
adds one per level since it only ever evaluates the sliced child).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import Constellation
from .errors import InvalidInput, Refused, ShapeError

ML_GUARD = 2 ** 20


@dataclass(frozen=True)
class DetectionProblem:
    """Upper triangular R, rotated observation z (first K entries of Q^H y),
    and the symbol alphabet searched at every level."""

    R: np.ndarray
    z: np.ndarray
    constellation: Constellation

    def __post_init__(self):
        R = np.asarray(self.R, dtype=complex)
        z = np.asarray(self.z, dtype=complex).reshape(-1)
        if R.ndim != 2 or R.shape[0] != R.shape[1]:
            raise ShapeError(f"R must be square, got {R.shape}")
        if z.shape[0] != R.shape[0]:
            raise ShapeError("z length must match R")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "z", z)

    @property
    def K(self) -> int:
        return self.R.shape[0]


@dataclass(frozen=True)
class DecoderReport:
    u_hat: np.ndarray
    metric: float
    nodes_visited: int
    is_ml: bool


def _residual(problem: DetectionProblem, i: int, u: np.ndarray) -> complex:
    """z_i minus the contribution of the already-fixed symbols u[i+1:]."""
    R, z = problem.R, problem.z
    K = problem.K
    if i + 1 < K:
        return z[i] - R[i, i + 1:] @ u[i + 1:]
    return z[i]


def ml_exhaustive(problem: DetectionProblem) -> DecoderReport:
    """Brute-force maximum likelihood over every constellation vector.

    Ties break toward the lexicographically first candidate, ordering
    symbols u_1, u_2, ... by the constellation's canonical point order.
    """
    pts = problem.constellation.points_array()
    A = pts.shape[0]
    K = problem.K
    total = A ** K
    if total > ML_GUARD:
        raise Refused(
            f"{A}^{K} = {total} candidates exceeds the exhaustive-search guard {ML_GUARD}"
        )
    R, z = problem.R, problem.z
    powers = A ** np.arange(K - 1, -1, -1, dtype=np.int64)   # u_1 varies slowest
    best_metric = math.inf
    best = None
    chunk = 1 << 14
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        digits = (idx[:, None] // powers[None, :]) % A
        cands = pts[digits]
        metrics = np.abs(z[None, :] - cands @ R.T) ** 2
        metrics = metrics.sum(axis=1)
        j = int(np.argmin(metrics))
        if metrics[j] < best_metric:
            best_metric = float(metrics[j])
            best = cands[j].copy()
    return DecoderReport(u_hat=best, metric=best_metric, nodes_visited=total, is_ml=True)


def sphere_decode(problem: DetectionProblem) -> DecoderReport:
    """Depth-first sphere decoder with Schnorr-Euchner enumeration.

    Children are visited in increasing partial-metric order; the radius
    shrinks to each new best leaf; a branch is pruned only when its partial
    metric strictly exceeds the best metric found so far.  Starts with an
    infinite radius, so it always terminates with the exact ML answer.
    """
    pts = problem.constellation.points_array()
    A = pts.shape[0]
    K = problem.K
    R = problem.R
    u = np.zeros(K, dtype=complex)
    order = np.zeros((K, A), dtype=np.int64)
    child = np.zeros((K, A))
    ptr = np.zeros(K, dtype=np.int64)
    pdist = np.zeros(K)          # partial distance of the prefix above level i
    nodes = 0
    best_metric = math.inf
    best = None

    def expand(i):
        nonlocal nodes
        b = _residual(problem, i, u)
        m = np.abs(b - pts * R[i, i]) ** 2
        order[i] = np.argsort(m, kind="stable")
        child[i] = m[order[i]]
        ptr[i] = 0
        nodes += A

    i = K - 1
    pdist[K - 1] = 0.0
    expand(K - 1)
    while True:
        advanced = False
        while ptr[i] < A:
            j = ptr[i]
            ptr[i] += 1
            cand = pdist[i] + child[i, j]
            if cand > best_metric:
                ptr[i] = A          # children are sorted; the rest are no better
                break
            u[i] = pts[order[i, j]]
            if i == 0:
                if cand < best_metric:
                    best_metric = float(cand)
                    best = u.copy()
            else:
                pdist[i - 1] = cand
                i -= 1
                expand(i)
                advanced = True
                break
        if advanced:
            continue
        if i == K - 1:
            break
        i += 1
    return DecoderReport(u_hat=best, metric=best_metric, nodes_visited=nodes, is_ml=True)


def fano_decode(problem: DetectionProblem, bias: float, step_delta: float) -> DecoderReport:
    """Fano sequential decoder on the biased metric mu = dist - bias * depth.

    Single-path search with a moving threshold: move forward to the best
    child whenever its metric stays within the threshold, tighten the
    threshold on first visits, back up while the parent allows it, loosen by
    step_delta at dead ends.  Returns the first leaf reached (no ML
    guarantee, hence is_ml False).
    """
    if not bias > 0:
        raise InvalidInput(f"bias must be > 0, got {bias}")
    if not step_delta > 0:
        raise InvalidInput(f"step_delta must be > 0, got {step_delta}")
    pts = problem.constellation.points_array()
    A = pts.shape[0]
    K = problem.K
    R = problem.R
    u = np.zeros(K, dtype=complex)
    child_idx = np.zeros((K, A), dtype=np.int64)
    child_mu = np.zeros((K, A))
    child_dist = np.zeros((K, A))
    rank = np.zeros(K, dtype=np.int64)
    mu_path = np.zeros(K + 1)
    dist_path = np.zeros(K + 1)
    nodes = 0
    thr = 0.0

    def expand(d):
        nonlocal nodes
        i = K - 1 - d
        b = _residual(problem, i, u)
        m = dist_path[d] + np.abs(b - pts * R[i, i]) ** 2
        mu = m - bias * (d + 1)
        ordv = np.argsort(mu, kind="stable")
        child_idx[d] = ordv
        child_mu[d] = mu[ordv]
        child_dist[d] = m[ordv]
        rank[d] = 0
        nodes += A

    d = 0
    expand(0)
    while True:
        rk = rank[d]
        mu_f = child_mu[d, rk] if rk < A else math.inf
        if mu_f <= thr:
            u[K - 1 - d] = pts[child_idx[d, rk]]
            mu_prev = mu_path[d]
            dist_path[d + 1] = child_dist[d, rk]
            mu_path[d + 1] = mu_f
            d += 1
            if d == K:
                return DecoderReport(u_hat=u.copy(), metric=float(dist_path[K]),
                                     nodes_visited=nodes, is_ml=False)
            expand(d)
            if mu_prev > thr - step_delta:   # first visit to the new node
                thr -= step_delta * math.floor((thr - mu_f) / step_delta)
        else:
            mu_back = mu_path[d - 1] if d > 0 else math.inf
            if mu_back <= thr:
                d -= 1
                rank[d] += 1
            else:
                thr += step_delta
                rank[d] = 0


def babai_decode(problem: DetectionProblem) -> DecoderReport:
    """Decision-feedback back-substitution: slice each level to the nearest
    point given the decisions below it.  One child per level, nodes = K."""
    pts = problem.constellation.points_array()
    K = problem.K
    R = problem.R
    u = np.zeros(K, dtype=complex)
    metric = 0.0
    for i in range(K - 1, -1, -1):
        b = _residual(problem, i, u)
        m = np.abs(b - pts * R[i, i]) ** 2
        j = int(np.argmin(m))
        u[i] = pts[j]
        metric += float(m[j])
    return DecoderReport(u_hat=u, metric=metric, nodes_visited=K, is_ml=False)
