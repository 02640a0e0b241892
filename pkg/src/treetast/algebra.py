"""Complex constellations and the algebraic constants that parameterize the codes.

Every code in this package is determined by a constellation plus a set of
"Diophantine" numbers: a degree-M element theta whose powers (1, theta, ...,
theta^(M-1)) form the per-thread generator, and a unit-modulus phi whose
fractional powers phi^(j/M) separate the M threads.  For two transmit
antennas the constants are the Golden-code numbers; for other M we ship
documented defaults that are certified empirically by the rank oracle in
:mod:`treetast.verify` rather than taken on faith.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConstellation, InvalidInput

GOLDEN_THETA = (1.0 + math.sqrt(5.0)) / 2.0


def principal_power(z: complex, exponent: float) -> complex:
    """z**exponent on the principal branch (argument taken in [0, 2*pi))."""
    if z == 0:
        return 0j
    r = abs(z)
    arg = cmath.phase(z) % (2.0 * math.pi)
    return cmath.rect(r**exponent, arg * exponent)


@dataclass(frozen=True)
class Constellation:
    """A finite unit-average-energy symbol alphabet.

    ``points`` is the canonical ordering (increasing real part, then
    increasing imaginary part) used for deterministic tie-breaking in the
    decoders.
    """

    kind: str            # "bpsk" or "qam"
    order: int
    points: tuple[complex, ...]

    @property
    def name(self) -> str:
        return "bpsk" if self.kind == "bpsk" else f"qam{self.order}"

    def points_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=complex)


def make_constellation(name: str) -> Constellation:
    """Build a constellation from its name: "bpsk", "qam4", "qam16", ...

    QAM orders must be perfect squares >= 4; points sit on the square
    Gaussian-integer grid, shifted to zero mean and scaled to unit average
    power.
    """
    key = name.strip().lower()
    if key == "bpsk":
        return Constellation(kind="bpsk", order=2, points=(-1 + 0j, 1 + 0j))
    if key.startswith("qam"):
        try:
            order = int(key[3:])
        except ValueError:
            raise InvalidConstellation(f"cannot parse QAM order from {name!r}")
        side = math.isqrt(order)
        if order < 4 or side * side != order:
            raise InvalidConstellation(
                f"QAM order must be a perfect square >= 4, got {order}"
            )
        # Odd-integer grid {-(side-1), ..., side-1}^2 per axis, zero mean.
        axis = np.arange(side) * 2.0 - (side - 1)
        grid = axis[:, None] + 1j * axis[None, :]   # real varies slowest
        pts = grid.reshape(-1)
        scale = math.sqrt(float(np.mean(np.abs(pts) ** 2)))
        pts = pts / scale
        return Constellation(kind="qam", order=order, points=tuple(pts.tolist()))
    raise InvalidConstellation(f"unknown constellation {name!r}")


@dataclass(frozen=True)
class GoldenParams:
    """Constants of the 2x2 Golden code.

    theta and sigma_theta are the two roots of x^2 - x - 1; alpha is the
    shaping coefficient that makes the symbol-to-codeword map unitary.
    """

    theta: complex = GOLDEN_THETA
    phi: complex = 1j
    scale: float = 1.0 / math.sqrt(5.0)
    sigma_theta: complex = field(init=False)
    alpha: complex = field(init=False)
    sigma_alpha: complex = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "sigma_theta", 1.0 - self.theta)
        object.__setattr__(self, "alpha", 1.0 + 1j * (1.0 - self.theta))
        object.__setattr__(self, "sigma_alpha", 1.0 + 1j * self.theta)

    def rotation(self) -> np.ndarray:
        """2x2 per-thread generator: row q gives the taps used in the q-th
        cell of a thread; columns index the thread's two symbol slots.
        Includes the 1/sqrt(5) codeword scale."""
        a, sa = self.alpha, self.sigma_alpha
        th, sth = self.theta, self.sigma_theta
        return self.scale * np.array([[a, a * th], [sa, sa * sth]], dtype=complex)


@dataclass(frozen=True)
class DiophantineParams:
    """Thread generator (powers of theta) and thread separators (roots of phi)."""

    M: int
    theta: complex
    phi: complex
    generator: tuple[complex, ...] = field(init=False)
    thread_scales: tuple[complex, ...] = field(init=False)

    def __post_init__(self):
        gen = tuple(self.theta**k for k in range(self.M))
        scales = tuple(principal_power(self.phi, j / self.M) for j in range(self.M))
        object.__setattr__(self, "generator", gen)
        object.__setattr__(self, "thread_scales", scales)

    @property
    def is_golden(self) -> bool:
        return self.M == 2


def default_diophantine(M: int, theta: complex | None = None,
                        phi: complex | None = None) -> DiophantineParams:
    """Default (theta, phi) per number of transmit antennas.

    M=1 degenerates to (1, 1); M=2 uses the Golden-code numbers.  For
    M >= 3 we default to theta = exp(i*pi/(3M)), phi = exp(i*pi/(4M+1));
    these are defaults certified per configuration by the diversity oracle,
    not canonical values.  Either number can be overridden.
    """
    if M < 1:
        raise InvalidInput(f"M must be >= 1, got {M}")
    if theta is None:
        if M == 1:
            theta = 1 + 0j
        elif M == 2:
            theta = complex(GOLDEN_THETA)
        else:
            theta = cmath.exp(1j * math.pi / (3 * M))
    if phi is None:
        if M == 1:
            phi = 1 + 0j
        elif M == 2:
            phi = 1j
        else:
            phi = cmath.exp(1j * math.pi / (4 * M + 1))
    return DiophantineParams(M=M, theta=complex(theta), phi=complex(phi))


def vandermonde_rotation(T: int) -> np.ndarray:
    """T x T unitary rotation used by the full-rate baseline threads.

    Column s is the normalized power sequence of the s-th T-th root of i:
    U[t, s] = w_s^t / sqrt(T) with w_s = exp(i*(pi/2 + 2*pi*s)/T).  Columns
    are orthonormal for any T.
    """
    if T < 1:
        raise InvalidInput(f"rotation size must be >= 1, got {T}")
    roots = np.exp(1j * (math.pi / 2 + 2.0 * math.pi * np.arange(T)) / T)
    return roots[None, :] ** np.arange(T)[:, None] / math.sqrt(T)


def golden_generator(dioph: DiophantineParams | None = None) -> np.ndarray:
    """4x4 matrix Gamma with Gamma @ (u1..u4) = vec(Golden codeword), vec
    stacking columns.  Columns are orthonormal for the Golden constants."""
    theta = dioph.theta if dioph is not None else complex(GOLDEN_THETA)
    phi = dioph.phi if dioph is not None else 1j
    gp = GoldenParams(theta=theta, phi=phi)
    W = gp.rotation()
    sphi = principal_power(phi, 0.5)
    gamma = np.zeros((4, 4), dtype=complex)
    # Thread 1 (cells (1,0) and (2,1), vec rows 0 and 3) carries u1, u4.
    gamma[0, 0], gamma[0, 3] = W[0, 0], W[0, 1]
    gamma[3, 0], gamma[3, 3] = W[1, 0], W[1, 1]
    # Thread 2 (cells (2,0) and (1,1), vec rows 1 and 2) carries u2, u3.
    gamma[1, 1], gamma[1, 2] = sphi * W[0, 0], sphi * W[0, 1]
    gamma[2, 1], gamma[2, 2] = sphi * W[1, 0], sphi * W[1, 1]
    return gamma
