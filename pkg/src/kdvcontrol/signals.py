"""Sampled time signals and oscillation-exact quadrature.

Controls and boundary traces are uniformly sampled functions of t on
[0, T].  Moment integrals pair such signals against exponentials
exp(i*lam*t) whose frequency can vastly exceed the sample rate of the
signal itself, so plain Newton-Cotes rules are useless there.  The
quadrature below interpolates the *signal* by piecewise cubics and
integrates the oscillatory factor exactly per interval, which keeps the
error tied to the signal bandwidth only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import RealificationError

# Cubic Lagrange interpolation coefficients (rows: node, cols: powers of s)
# for one interval s in [0, 1], nodes at s = -1, 0, 1, 2.
_INTERIOR = np.array(
    [
        [0.0, -1.0 / 3.0, 0.5, -1.0 / 6.0],
        [1.0, -0.5, -1.0, 0.5],
        [0.0, 1.0, 0.5, -0.5],
        [0.0, -1.0 / 6.0, 0.0, 1.0 / 6.0],
    ]
)
# First interval, nodes at s = 0, 1, 2, 3.
_LEFT = np.array(
    [
        [1.0, -11.0 / 6.0, 1.0, -1.0 / 6.0],
        [0.0, 3.0, -2.5, 0.5],
        [0.0, -1.5, 2.0, -0.5],
        [0.0, 1.0 / 3.0, -0.5, 1.0 / 6.0],
    ]
)
# Last interval, nodes at s = -2, -1, 0, 1.
_RIGHT = np.array(
    [
        [0.0, 1.0 / 6.0, 0.0, -1.0 / 6.0],
        [0.0, -1.0, 0.5, 0.5],
        [1.0, 0.5, -1.0, -0.5],
        [0.0, 1.0 / 3.0, 0.5, 1.0 / 6.0],
    ]
)


def _power_integrals(theta: complex) -> np.ndarray:
    """I_p = int_0^1 s^p exp(i*theta*s) ds for p = 0..3 (theta may be complex)."""
    out = np.empty(4, dtype=complex)
    if abs(theta) < 0.5:
        # Taylor series: I_p = sum_m (i theta)^m / (m! (p + m + 1)).
        for p in range(4):
            term = 1.0 + 0.0j
            total = term / (p + 1)
            m = 0
            while abs(term) > 1e-18 * max(1.0, abs(total)):
                m += 1
                term *= 1j * theta / m
                total += term / (p + m + 1)
            out[p] = total
        return out
    e = np.exp(1j * theta)
    it = 1j * theta
    out[0] = (e - 1.0) / it
    for p in range(1, 4):
        out[p] = (e - p * out[p - 1]) / it
    return out


def _filon_weights(theta: complex) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-node weights of the three Lagrange stencils for one frequency."""
    ip = _power_integrals(theta)
    return _INTERIOR @ ip, _LEFT @ ip, _RIGHT @ ip


def filon_integrate(
    times: np.ndarray, values: np.ndarray, lambdas: Sequence[complex] | np.ndarray
) -> np.ndarray:
    """Compute int v(t) exp(i*lam*t) dt for each lam.

    ``values`` is interpolated by piecewise cubics through its uniform
    samples; the exponential factor is integrated in closed form, so
    arbitrarily large lam are handled without resolving the oscillation.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values)
    n = times.size - 1
    if n < 3:
        raise ValueError("filon_integrate needs at least 4 samples")
    h = (times[-1] - times[0]) / n
    lambdas = np.atleast_1d(np.asarray(lambdas))
    out = np.empty(lambdas.size, dtype=complex)
    idx = np.arange(n + 1)
    for i, lam in enumerate(lambdas):
        theta = lam * h
        w_int, w_left, w_right = _filon_weights(theta)
        phase = np.exp(1j * (lam * times[0] + theta * idx))
        pv = phase * values
        # Each interval's integral is anchored at its left endpoint t_j;
        # pv carries exp(i*lam*t_node), so node weights absorb the offset
        # between node time and anchor time.
        acc = 0.0 + 0.0j
        # interior intervals j = 1 .. n-2, node offsets -1..2 relative to j
        for m in range(4):
            off = m - 1
            acc += w_int[m] * np.exp(-1j * theta * off) * pv[1 + off : n - 1 + off].sum()
        # first interval (j = 0), nodes at offsets 0..3
        w0 = w_left * np.exp(-1j * theta * np.arange(4))
        acc += np.dot(w0, pv[0:4])
        # last interval (j = n-1), nodes at offsets -2..1
        wn = w_right * np.exp(-1j * theta * np.arange(-2, 2))
        acc += np.dot(wn, pv[n - 3 : n + 1])
        out[i] = h * acc
    return out


def suggest_sample_count(
    horizon: float, bandwidth: float, samples_per_period: int = 96, minimum: int = 4096
) -> int:
    """Sample count resolving frequencies up to ``bandwidth`` rad/time."""
    need = int(np.ceil(samples_per_period * bandwidth * horizon / (2.0 * np.pi)))
    return max(minimum, need)


@dataclass
class TimeSignal:
    """A complex-valued sampled function of t on a uniform grid over [0, T].

    ``bandwidth`` records the largest angular frequency the signal is
    known to contain; resampling and solver consumers use it to decide
    whether their own grids are adequate.
    """

    horizon: float
    times: np.ndarray
    values: np.ndarray
    bandwidth: float = 0.0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.times.shape != self.values.shape:
            raise ValueError("times and values must have matching shapes")

    # -- constructors ---------------------------------------------------
    @classmethod
    def zeros(cls, horizon: float, n_samples: int = 4096) -> "TimeSignal":
        t = np.linspace(0.0, horizon, n_samples + 1)
        return cls(horizon, t, np.zeros_like(t, dtype=complex))

    @classmethod
    def from_callable(cls, fn, horizon: float, n_samples: int, bandwidth: float = 0.0) -> "TimeSignal":
        t = np.linspace(0.0, horizon, n_samples + 1)
        return cls(horizon, t, np.asarray(fn(t), dtype=complex), bandwidth=bandwidth)

    # -- basic queries ---------------------------------------------------
    @property
    def dt(self) -> float:
        return (self.times[-1] - self.times[0]) / (self.times.size - 1)

    @property
    def max_imag_ratio(self) -> float:
        re = np.max(np.abs(self.values.real))
        im = np.max(np.abs(self.values.imag))
        if re == 0.0:
            return 0.0 if im == 0.0 else np.inf
        return im / re

    def l2_norm(self) -> float:
        return float(np.sqrt(np.trapezoid(np.abs(self.values) ** 2, self.times)))

    def moments(self, lambdas) -> np.ndarray:
        """int_0^T v(t) exp(i*lam*t) dt for each lam."""
        return filon_integrate(self.times, self.values, lambdas)

    # -- algebra ----------------------------------------------------------
    def _check_aligned(self, other: "TimeSignal") -> None:
        if self.times.size != other.times.size or abs(self.horizon - other.horizon) > 1e-12:
            raise ValueError("signals are sampled on different grids")

    def __add__(self, other: "TimeSignal") -> "TimeSignal":
        self._check_aligned(other)
        return TimeSignal(
            self.horizon,
            self.times,
            self.values + other.values,
            bandwidth=max(self.bandwidth, other.bandwidth),
        )

    def __sub__(self, other: "TimeSignal") -> "TimeSignal":
        self._check_aligned(other)
        return TimeSignal(
            self.horizon,
            self.times,
            self.values - other.values,
            bandwidth=max(self.bandwidth, other.bandwidth),
        )

    def __mul__(self, scalar: complex) -> "TimeSignal":
        return TimeSignal(self.horizon, self.times, self.values * scalar, bandwidth=self.bandwidth)

    __rmul__ = __mul__

    # -- transformations --------------------------------------------------
    def realified(self, bound: float = 1e-6) -> "TimeSignal":
        """Drop the imaginary part after auditing it against ``bound``.

        The audit fails loudly: a large imaginary residue indicates a
        spectrum-symmetry bug upstream, not something to project away.
        """
        ratio = self.max_imag_ratio
        if ratio > bound:
            raise RealificationError(
                f"imaginary residue ratio {ratio:.3e} exceeds audit bound {bound:.1e}"
            )
        sig = TimeSignal(
            self.horizon,
            self.times,
            self.values.real.astype(complex),
            bandwidth=self.bandwidth,
            metadata=dict(self.metadata),
        )
        sig.metadata["imag_ratio_before_realification"] = ratio
        return sig

    def resample(self, times: np.ndarray) -> np.ndarray:
        """Linear interpolation onto arbitrary times (clamped at the ends)."""
        re = np.interp(times, self.times, self.values.real)
        im = np.interp(times, self.times, self.values.imag)
        return re + 1j * im

    # -- serialization ----------------------------------------------------
    def to_csv(self, path) -> None:
        data = np.column_stack([self.times, self.values.real, self.values.imag])
        np.savetxt(path, data, delimiter=",", header="t,re,im", comments="")

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "n_samples": int(self.times.size - 1),
            "bandwidth": self.bandwidth,
            "max_imag_ratio": self.max_imag_ratio,
            "metadata": {k: _jsonable(v) for k, v in self.metadata.items()},
        }


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    return v
