"""Foundational numerics shared by all other modules.

Contains the 2x2 quaternion algebra used to represent regularized
resolvent arguments, numerical Wirtinger derivatives, a mergeable
2D-binned pair accumulator and the deterministic RNG stream contract
used by the samplers.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Quaternion22",
    "PairHistogram",
    "RngStream",
    "SingularQuaternionError",
    "quaternion_inverse",
    "wirtinger_mixed_derivative",
]


class SingularQuaternionError(ValueError):
    """Raised when a 2x2 quaternion is not invertible within tolerance."""


@dataclass(frozen=True)
class Quaternion22:
    """A quaternion q = x + iy + ju + kv in its 2x2 complex matrix form.

    The matrix layout is ``[[q11, q1b], [qb1, qbb]]``.  Physical
    (on-shell) arguments satisfy ``qbb == conj(q11)`` and
    ``qb1 == -conj(q1b)``; intermediate solver values need not.
    """

    q11: complex
    q1b: complex
    qb1: complex
    qbb: complex

    @classmethod
    def from_zw(cls, z, w=0.0):
        """On-shell quaternion ``[[z, i conj(w)], [i w, conj(z)]]``."""
        z = complex(z)
        w = complex(w)
        return cls(z, 1j * np.conj(w), 1j * w, np.conj(z))

    @classmethod
    def diag(cls, a, b):
        return cls(complex(a), 0.0 + 0.0j, 0.0 + 0.0j, complex(b))

    @classmethod
    def from_matrix(cls, m):
        m = np.asarray(m)
        return cls(complex(m[0, 0]), complex(m[0, 1]),
                   complex(m[1, 0]), complex(m[1, 1]))

    def as_matrix(self):
        return np.array([[self.q11, self.q1b], [self.qb1, self.qbb]],
                        dtype=complex)

    @property
    def det(self):
        return self.q11 * self.qbb - self.q1b * self.qb1

    def norm_sq(self):
        return (abs(self.q11) ** 2 + abs(self.q1b) ** 2
                + abs(self.qb1) ** 2 + abs(self.qbb) ** 2)

    def is_on_shell(self, tol=1e-10):
        return (abs(self.qbb - np.conj(self.q11)) <= tol
                and abs(self.qb1 + np.conj(self.q1b)) <= tol)

    def __matmul__(self, other):
        return Quaternion22.from_matrix(self.as_matrix() @ other.as_matrix())

    def __add__(self, other):
        return Quaternion22(self.q11 + other.q11, self.q1b + other.q1b,
                            self.qb1 + other.qb1, self.qbb + other.qbb)

    def __sub__(self, other):
        return Quaternion22(self.q11 - other.q11, self.q1b - other.q1b,
                            self.qb1 - other.qb1, self.qbb - other.qbb)

    def scale(self, c):
        c = complex(c)
        return Quaternion22(c * self.q11, c * self.q1b,
                            c * self.qb1, c * self.qbb)


IDENTITY = Quaternion22(1.0, 0.0, 0.0, 1.0)


def quaternion_inverse(q, eps_rel=1e-12):
    """Invert a 2x2 quaternion.

    Raises :class:`SingularQuaternionError` when ``|det q|`` falls below
    ``eps_rel * ||q||^2``.  Green's functions legitimately approach the
    singular set at spectrum edges, hence the relative (not absolute)
    threshold.
    """
    d = q.det
    if abs(d) <= eps_rel * max(q.norm_sq(), np.finfo(float).tiny):
        raise SingularQuaternionError(
            f"quaternion determinant {d!r} below tolerance")
    return Quaternion22(q.qbb / d, -q.q1b / d, -q.qb1 / d, q.q11 / d)


def _mixed_second(f, z1, z2, h):
    """Raw O(h^2) estimate of d/dzbar1 d/dz2 f on a 16-point stencil."""
    dx1 = h
    dy1 = 1j * h
    # cross second derivatives in the four real-coordinate pairs
    def cross(d1, d2):
        return (f(z1 + d1, z2 + d2) - f(z1 + d1, z2 - d2)
                - f(z1 - d1, z2 + d2) + f(z1 - d1, z2 - d2)) / (4.0 * h * h)

    dxx = cross(dx1, h)
    dxy = cross(dx1, 1j * h)
    dyx = cross(dy1, h)
    dyy = cross(dy1, 1j * h)
    # d_zbar1 = (d_x1 + i d_y1)/2,  d_z2 = (d_x2 - i d_y2)/2
    return 0.25 * (dxx + dyy + 1j * (dyx - dxy))


def wirtinger_mixed_derivative(f, z1, z2, h=1e-3, richardson=True):
    """Mixed Wirtinger derivative d/dzbar1 d/dz2 of ``f(z1, z2)``.

    ``f`` must be evaluable on the central-difference stencil around
    ``(z1, z2)``; it may depend on ``conj(z1)``, ``conj(z2)`` (the
    derivative is taken in the four real coordinates).  The raw stencil
    is O(h^2) accurate; with ``richardson`` the h and h/2 results are
    combined to O(h^4).
    """
    z1 = complex(z1)
    z2 = complex(z2)
    coarse = _mixed_second(f, z1, z2, h)
    if not richardson:
        return coarse
    fine = _mixed_second(f, z1, z2, 0.5 * h)
    return (4.0 * fine - coarse) / 3.0


class PairHistogram:
    """2D-binned accumulator over coordinate pairs with complex weights.

    Bin edges are fixed at construction; per-bin complex weight sums and
    pair counts are accumulated.  Two histograms with identical edges
    merge associatively, which supports per-thread accumulation.
    """

    def __init__(self, edges1, edges2):
        self.edges1 = np.asarray(edges1, dtype=float)
        self.edges2 = np.asarray(edges2, dtype=float)
        if self.edges1.ndim != 1 or self.edges2.ndim != 1:
            raise ValueError("bin edges must be 1D arrays")
        if (np.diff(self.edges1) <= 0).any() or (np.diff(self.edges2) <= 0).any():
            raise ValueError("bin edges must be strictly increasing")
        shape = (len(self.edges1) - 1, len(self.edges2) - 1)
        self.weight = np.zeros(shape, dtype=complex)
        self.count = np.zeros(shape, dtype=np.int64)
        self.n_matrices = 0

    def accumulate(self, x, y, weights, n_matrices=1):
        """Add pairs with coordinates ``(x, y)`` and complex weights."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        weights = np.asarray(weights, dtype=complex)
        w_sum, _, _ = np.histogram2d(x, y, bins=(self.edges1, self.edges2),
                                     weights=weights.real)
        w_imag, _, _ = np.histogram2d(x, y, bins=(self.edges1, self.edges2),
                                      weights=weights.imag)
        cnt, _, _ = np.histogram2d(x, y, bins=(self.edges1, self.edges2))
        self.weight += w_sum + 1j * w_imag
        self.count += cnt.astype(np.int64)
        self.n_matrices += n_matrices

    def merge(self, other):
        """Return a new histogram with the combined content of both."""
        if (not np.array_equal(self.edges1, other.edges1)
                or not np.array_equal(self.edges2, other.edges2)):
            raise ValueError("cannot merge histograms with different edges")
        out = PairHistogram(self.edges1, self.edges2)
        out.weight = self.weight + other.weight
        out.count = self.count + other.count
        out.n_matrices = self.n_matrices + other.n_matrices
        return out

    def bin_areas(self):
        d1 = np.diff(self.edges1)
        d2 = np.diff(self.edges2)
        return np.outer(d1, d2)


@dataclass(frozen=True)
class RngStream:
    """Deterministic, parallel-safe RNG substream.

    A counter-based Philox generator keyed by ``(seed, stream)``:
    identical pairs reproduce identical draws bit-exactly on one
    platform, distinct stream indices are statistically independent.
    """

    seed: int
    stream: int = 0

    def generator(self):
        key = (int(self.seed) & ((1 << 64) - 1)) << 64 | (int(self.stream) & ((1 << 64) - 1))
        return np.random.Generator(np.random.Philox(key=key))

    def substream(self, index):
        """Derived stream, used e.g. for resampling rejected draws."""
        return RngStream(self.seed, (int(self.stream) << 20) ^ int(index))
