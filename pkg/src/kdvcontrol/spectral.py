"""Spectrum of the modified third-order boundary operator.

The operator w -> -w''' - w' on (0, L) with w(0) = w(L) = 0 and
w'(0) = w'(L) is skew-adjoint with compact resolvent; its eigenvalues
are i*lam_k with real lam_k indexed by k in Z \\ {0}, lam_{-k} = -lam_k.
Eigenfunctions are combinations of three exponentials exp(r_j x) where
the r_j solve r^3 + r + i*lam = 0.  This module finds the lam_k as zeros
of a scaled 3x3 boundary determinant, normalizes the eigenfunctions, and
provides finite-difference discretizations as independent oracles.

The same file handles the critical-length set: interval lengths of the
form 2*pi*sqrt((k^2 + k*l + l^2)/3) at which the right-slope of some
eigenfunction degenerates and boundary controllability fails.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.optimize import brentq

from .errors import (
    CriticalLengthError,
    DegenerateCubicError,
    DuplicateFrequencyError,
    MissedModeError,
    RootFindingError,
)

__all__ = [
    "EigenMode",
    "Spectrum",
    "GapReport",
    "CriticalityReport",
    "SlopeReport",
    "critical_lengths",
    "is_critical",
    "char_determinant",
    "solve_modes",
    "asymptotic_mode",
    "boundary_slope_check",
    "gap_report",
    "modified_fd_matrix",
    "original_fd_matrix",
    "fd_eigenvalues_modified",
    "solve_modes_original",
]


# ----------------------------------------------------------------------
# critical lengths
# ----------------------------------------------------------------------

def _loeschian_values(m_max: int) -> list[int]:
    """Distinct k^2 + k*l + l^2 <= m_max with k, l >= 1 (exact integers)."""
    vals = set()
    k = 1
    while k * k + k + 1 <= m_max:
        l = k
        while k * k + k * l + l * l <= m_max:
            vals.add(k * k + k * l + l * l)
            l += 1
        k += 1
    return sorted(vals)


def critical_lengths(l_max: float) -> list[float]:
    """All critical lengths 2*pi*sqrt(m/3) <= l_max, sorted ascending.

    Membership is decided on the integer m = k^2 + k*l + l^2, so no
    member is missed or duplicated through floating-point drift.
    """
    if l_max <= 0:
        raise ValueError("l_max must be positive")
    m_max = int(math.floor(3.0 * (l_max / (2.0 * math.pi)) ** 2 + 1e-9))
    out = []
    for m in _loeschian_values(m_max):
        val = 2.0 * math.pi * math.sqrt(m / 3.0)
        if val <= l_max * (1.0 + 1e-15):
            out.append(val)
    return out


@dataclass
class CriticalityReport:
    critical: bool
    nearest: float
    distance: float


def is_critical(L: float, tol: float = 1e-9) -> CriticalityReport:
    """Distance from L to the critical set, with a tolerance verdict."""
    if L <= 0 or tol <= 0:
        raise ValueError("L and tol must be positive")
    # The set has a member in every window of width ~2*pi above its minimum,
    # so scanning up to L + 2*pi + 1 always captures the nearest one.
    candidates = critical_lengths(L + 2.0 * math.pi + 1.0)
    nearest = min(candidates, key=lambda c: abs(c - L))
    distance = abs(nearest - L)
    return CriticalityReport(critical=distance <= tol, nearest=nearest, distance=distance)


# ----------------------------------------------------------------------
# exponent cubic and characteristic determinant
# ----------------------------------------------------------------------

_DEGENERATE_LAMBDA = 2.0 / (3.0 * math.sqrt(3.0))  # |lam| where the cubic degenerates
_DEGENERATE_PAD = 1e-5 * (1.0 + _DEGENERATE_LAMBDA)  # guard zone half-width


def _cubic_roots(lam: float) -> np.ndarray:
    """Deterministically ordered roots of r^3 + r + i*lam = 0."""
    disc = 27.0 * lam * lam - 4.0
    if abs(disc) <= 1e-12 * (27.0 * lam * lam + 4.0):
        raise DegenerateCubicError(
            f"repeated exponent root at lam={lam!r}; perturb lam and retry"
        )
    roots = np.roots([1.0, 0.0, 1.0, 1j * lam])
    # round the real part before sorting: noise-level real parts of the
    # nearly imaginary roots must not flip the column order along a scan
    re_key = np.round(roots.real / 1e-9) * 1e-9
    order = np.lexsort((roots.imag, re_key))
    return roots[order]


def _boundary_matrix(lam: float, L: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Scaled 3x3 matrix imposing w(0)=0, w(L)=0, w'(0)=w'(L).

    Works in the rescaled basis exp(r_j x - m_j) with m_j = max(0, Re r_j L),
    which keeps every entry bounded however large lam*L gets and, crucially,
    lets the null vector resolve the exponentially small amplitude of the
    growing root to full relative precision.  Rows are additionally scaled
    to unit maximum magnitude so determinant values are comparable across
    lam.  Returns (matrix, roots, m_j).
    """
    r = _cubic_roots(lam)
    rl = r * L
    m = np.maximum(rl.real, 0.0)
    # basis values at 0 and L, and slope difference row, all in scaled basis
    row0 = np.exp(-m)
    row1 = np.exp(rl - m)
    row2 = r * (np.exp(-m) - np.exp(rl - m))
    mat = np.vstack([row0, row1, row2])
    scale = np.max(np.abs(mat), axis=1)
    return mat / scale[:, None], r, m


def char_determinant(lam: float, L: float) -> complex:
    """Determinant of the scaled boundary matrix; zero at eigen-frequencies."""
    if L <= 0:
        raise ValueError("L must be positive")
    mat, _, _ = _boundary_matrix(lam, L)
    return complex(np.linalg.det(mat))


# ----------------------------------------------------------------------
# eigenmodes
# ----------------------------------------------------------------------

@dataclass
class EigenMode:
    """One spectral pair of the modified operator.

    ``exp_coeffs`` are the amplitudes c_j of phi(x) = sum_j c_j exp(r_j x);
    the eigenfunction is normalized to unit L2 norm with the phase fixed by
    making the amplitude on the first (deterministically ordered) root real
    and positive.
    """

    k: int
    lam: float
    exp_roots: np.ndarray
    exp_coeffs: np.ndarray
    slope_at_0: complex
    slope_at_L: complex
    l2_norm: float

    def conjugate(self, k: int) -> "EigenMode":
        return EigenMode(
            k=k,
            lam=-self.lam,
            exp_roots=np.conj(self.exp_roots),
            exp_coeffs=np.conj(self.exp_coeffs),
            slope_at_0=np.conj(self.slope_at_0),
            slope_at_L=np.conj(self.slope_at_L),
            l2_norm=self.l2_norm,
        )

    def eval(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.exp(np.multiply.outer(x, self.exp_roots)) @ self.exp_coeffs

    def eval_derivative(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.exp(np.multiply.outer(x, self.exp_roots)) @ (
            self.exp_coeffs * self.exp_roots
        )


def _exp_integral(s: complex, L: float) -> complex:
    """int_0^L exp(s x) dx with a series fallback near s = 0."""
    sl = s * L
    if abs(sl) < 1e-6:
        return L * (1.0 + sl / 2.0 + sl * sl / 6.0 + sl**3 / 24.0)
    return (np.exp(sl) - 1.0) / s


def _pair_integrals(mode_a: EigenMode, mode_b: EigenMode, L: float) -> complex:
    """int_0^L phi_a conj(phi_b) dx in closed form."""
    total = 0.0 + 0.0j
    for ca, ra in zip(mode_a.exp_coeffs, mode_a.exp_roots):
        for cb, rb in zip(mode_b.exp_coeffs, mode_b.exp_roots):
            total += ca * np.conj(cb) * _exp_integral(ra + np.conj(rb), L)
    return total


def asymptotic_mode(k: int, L: float) -> dict:
    """Large-k frequency, phase constant, and closed-form eigenfunction shape.

    Returns lambda_hat = 8 pi^3 k^3 / L^3, a_k = 5 pi/(6 L) + k pi / L, and
    a callable evaluating the limiting eigenfunction with amplitude 1/sqrt(L).
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    lam_hat = 8.0 * math.pi**3 * k**3 / L**3
    a_k = 5.0 * math.pi / (6.0 * L) + k * math.pi / L
    alpha = 1.0 / math.sqrt(L)
    s = math.sqrt(3.0 * a_k * a_k - 1.0)

    def phi_hat(x):
        x = np.asarray(x, dtype=float)
        q = (np.exp(3j * a_k * L) - np.cosh(s * L)) / np.sinh(s * L)
        return alpha * (
            np.exp(-1j * a_k * x) * (np.cosh(s * x) + q * np.sinh(s * x))
            - np.exp(2j * a_k * x)
        )

    return {"lambda_hat": lam_hat, "a_k": a_k, "phi_hat": phi_hat}


@dataclass
class Spectrum:
    """Modes k = -K..-1, 1..K of the modified operator, sorted by k."""

    L: float
    K: int
    modes: list[EigenMode]
    diagnostics: dict = field(default_factory=dict)

    def mode(self, k: int) -> EigenMode:
        for m in self.modes:
            if m.k == k:
                return m
        raise KeyError(f"mode {k} not in spectrum")

    @property
    def ks(self) -> np.ndarray:
        return np.array([m.k for m in self.modes])

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([m.lam for m in self.modes])

    @property
    def positive_frequencies(self) -> np.ndarray:
        return np.array([m.lam for m in self.modes if m.k > 0])

    def slopes_at_L(self) -> np.ndarray:
        return np.array([m.slope_at_L for m in self.modes])

    def eval_matrix(self, x) -> np.ndarray:
        """Matrix of phi_k(x_i), columns ordered like self.modes."""
        x = np.asarray(x, dtype=float)
        return np.column_stack([m.eval(x) for m in self.modes])

    def project(self, x: np.ndarray, values: np.ndarray) -> np.ndarray:
        """Unconjugated pairings p_k = int phi_k y dx by Simpson quadrature."""
        from scipy.integrate import simpson

        phi = self.eval_matrix(x)
        return np.array(
            [simpson(phi[:, j] * values, x=x) for j in range(phi.shape[1])]
        )

    def to_json(self) -> str:
        def c2(z):
            return [float(np.real(z)), float(np.imag(z))]

        payload = {
            "L": self.L,
            "K": self.K,
            "modes": [
                {
                    "k": int(m.k),
                    "lambda": float(m.lam),
                    "roots": [c2(r) for r in m.exp_roots],
                    "coeffs": [c2(c) for c in m.exp_coeffs],
                    "slope0": c2(m.slope_at_0),
                    "slopeL": c2(m.slope_at_L),
                }
                for m in self.modes
            ],
        }
        return json.dumps(payload, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Spectrum":
        data = json.loads(text)

        def carr(pairs):
            return np.array([complex(a, b) for a, b in pairs])

        modes = [
            EigenMode(
                k=m["k"],
                lam=m["lambda"],
                exp_roots=carr(m["roots"]),
                exp_coeffs=carr(m["coeffs"]),
                slope_at_0=complex(*m["slope0"]),
                slope_at_L=complex(*m["slopeL"]),
                l2_norm=1.0,
            )
            for m in data["modes"]
        ]
        return cls(L=data["L"], K=data["K"], modes=modes)


def _anchored_real_det(L: float):
    """Real-valued characteristic function with a lazily anchored phase.

    Along real lam the scaled determinant stays on a fixed complex ray
    (up to sign) between degenerate-cubic points, so projecting onto the
    ray through the first nonzero evaluation yields a sign-changing real
    function with the same zeros.
    """
    state = {"phase": None}

    def g(lam: float) -> float:
        d = char_determinant(lam, L)
        if state["phase"] is None:
            if abs(d) == 0.0:
                return 0.0
            state["phase"] = d / abs(d)
        return float(np.real(d / state["phase"]))

    return g


def _scan_segments(lo: float, hi: float) -> list[tuple[float, float]]:
    """Split (lo, hi) at the degenerate-cubic frequency, with a guard gap.

    The determinant changes its complex ray (and has a spurious basis
    zero) where the exponent cubic has a repeated root, so each scan
    segment must stay on one side of that point.
    """
    pad = _DEGENERATE_PAD
    cuts = [c for c in (-_DEGENERATE_LAMBDA, _DEGENERATE_LAMBDA) if lo < c < hi]
    points = [lo] + sorted(cuts) + [hi]
    segs = []
    for a, b in zip(points[:-1], points[1:]):
        a2 = a + (pad if a in cuts else 0.0)
        b2 = b - (pad if b in cuts else 0.0)
        if b2 > a2:
            segs.append((a2, b2))
    return segs


def _roots_in(L: float, lo: float, hi: float, n_scan: int = 80) -> list[float]:
    """All determinant zeros inside (lo, hi) by scan + Brent per segment.

    Zeros landing inside the guard zone around the degenerate-cubic
    frequency are discarded: the determinant vanishes there because two
    basis columns coalesce, not because of an eigenvalue.
    """
    roots = []
    for a, b in _scan_segments(lo, hi):
        g = _anchored_real_det(L)
        grid = np.linspace(a, b, n_scan + 1)
        vals = np.array([g(x) for x in grid])
        hits = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
        for i in hits:
            r = brentq(g, grid[i], grid[i + 1], xtol=1e-300, rtol=8.9e-16, maxiter=200)
            roots.append(float(r))
        for i in np.nonzero(vals == 0.0)[0]:
            roots.append(float(grid[i]))
    keep = [
        r
        for r in roots
        if abs(abs(r) - _DEGENERATE_LAMBDA) > _DEGENERATE_PAD
    ]
    return sorted(keep)


def _root_near(L: float, seed: float, lo: float, hi: float) -> float:
    """Zero found by expanding a bracket around ``seed`` within (lo, hi)."""
    if not (lo < seed < hi):
        seed = 0.5 * (lo + hi)
    delta = (hi - lo) / 256.0
    while True:
        a, b = max(lo, seed - delta), min(hi, seed + delta)
        found = _roots_in(L, a, b, n_scan=32)
        if found:
            return min(found, key=lambda r: abs(r - seed))
        if a == lo and b == hi:
            raise RootFindingError(
                f"no determinant zero in [{lo:.6g}, {hi:.6g}] at L={L}"
            )
        delta *= 2.0


def _mode_from_lambda(k: int, lam: float, L: float) -> EigenMode:
    mat, roots, col_log = _boundary_matrix(lam, L)
    _, svals, vh = np.linalg.svd(mat)
    # null vector lives in the scaled basis exp(r_j x - m_j); unscale it
    coeffs = np.conj(vh[-1]) * np.exp(-col_log)
    mode = EigenMode(
        k=k,
        lam=lam,
        exp_roots=roots,
        exp_coeffs=coeffs,
        slope_at_0=0.0,
        slope_at_L=0.0,
        l2_norm=0.0,
    )
    norm = math.sqrt(abs(_pair_integrals(mode, mode, L)))
    coeffs = coeffs / norm
    # deterministic phase: amplitude on the first ordered root real positive
    anchor = coeffs[0]
    if abs(anchor) < 1e-8 * np.max(np.abs(coeffs)):
        anchor = coeffs[int(np.argmax(np.abs(coeffs)))]
    coeffs = coeffs * (np.conj(anchor) / abs(anchor))
    if coeffs[0].real < 0 and abs(coeffs[0]) > 1e-8 * np.max(np.abs(coeffs)):
        coeffs = -coeffs
    mode.exp_coeffs = coeffs
    mode.slope_at_0 = complex(np.sum(coeffs * roots))
    mode.slope_at_L = complex(np.sum(coeffs * roots * np.exp(roots * L)))
    mode.l2_norm = math.sqrt(abs(_pair_integrals(mode, mode, L)))
    return mode


def _lambda_of_a(a: float) -> float:
    """Frequency of the exponent pattern {2ia, -ia +- sqrt(3a^2-1)}."""
    return 8.0 * a**3 - 2.0 * a


def positive_frequencies(L: float, K: int) -> np.ndarray:
    """The first K positive frequencies only (no eigenfunction work).

    Same bracketing as solve_modes but skips the SVD/normalization, so
    it stays cheap for the long frequency tables the product machinery
    consumes.
    """
    q = math.pi / L
    lam_floor = 1e-9
    out = []
    prev = lam_floor
    for k in range(1, K + 1):
        a_c = (5.0 / 6.0 + (k - 1)) * q
        lo = max(lam_floor, _lambda_of_a(max(a_c - 0.5 * q, 0.0)), prev * (1 + 1e-9))
        hi = _lambda_of_a(a_c + 0.5 * q)
        if hi <= lo:
            hi = _lambda_of_a(a_c + 1.5 * q)
        roots = _roots_in(L, lo, hi)
        if not roots:
            raise RootFindingError(f"frequency k={k}: no zero in [{lo:.6g}, {hi:.6g}]")
        lam_pred = _lambda_of_a(a_c)
        root = min(roots, key=lambda r: abs(r - lam_pred))
        out.append(root)
        prev = root
    return np.array(out)


def solve_modes(
    L: float,
    K: int,
    critical_tol: float = 1e-9,
    seed_agreement_rtol: float = 1e-9,
) -> Spectrum:
    """Compute the K positive-frequency modes (negatives by conjugation).

    The k-th positive frequency sits in the image under a -> 8a^3 - 2a of
    the window a in (5 pi/6 + (k-1) pi -+ pi/2)/L; it is bracketed there by
    a sign scan of the phase-anchored determinant and polished by Brent's
    method.  A second search seeded at the crude cubic law 8 pi^3 k^3/L^3
    must land on the identical root, otherwise a mode was missed.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    crit = is_critical(L, critical_tol)
    if crit.critical:
        raise CriticalLengthError(
            f"L={L} is within {critical_tol} of critical length {crit.nearest}"
        )
    q = math.pi / L
    lam_floor = 1e-9

    def window(k: int) -> tuple[float, float]:
        a_c = (5.0 / 6.0 + (k - 1)) * q
        lo = max(lam_floor, _lambda_of_a(max(a_c - 0.5 * q, 0.0)))
        hi = _lambda_of_a(a_c + 0.5 * q)
        if hi <= lo:  # large-L small-k corner: fall back to everything below
            lo = lam_floor
            hi = max(hi, _lambda_of_a(a_c + 0.5 * q + q))
        return lo, hi

    modes_pos: list[EigenMode] = []
    for k in range(1, K + 1):
        lo, hi = window(k)
        if modes_pos:
            lo = max(lo, modes_pos[-1].lam * (1.0 + 1e-9))
        roots = _roots_in(L, lo, hi)
        if not roots:
            raise RootFindingError(
                f"mode k={k}: no determinant zero in [{lo:.6g}, {hi:.6g}] at L={L}"
            )
        a_c = (5.0 / 6.0 + (k - 1)) * q
        lam_pred = _lambda_of_a(a_c)
        root = min(roots, key=lambda r: abs(r - lam_pred))
        # independent seed at the crude cubic law must agree
        lam_hat = 8.0 * q**3 * k**3
        root_b = _root_near(L, lam_hat, lo, hi)
        if abs(root_b - root) > seed_agreement_rtol * max(abs(root), 1.0):
            raise MissedModeError(
                f"mode k={k}: window root {root!r} and cubic-seeded root "
                f"{root_b!r} disagree"
            )
        modes_pos.append(_mode_from_lambda(k, root, L))

    lams = np.array([m.lam for m in modes_pos])
    if np.any(np.diff(lams) <= 0):
        raise MissedModeError("positive frequencies not strictly increasing")
    if np.any(np.diff(lams) / lams[1:] < 1e-9):
        raise MissedModeError("two searches converged to the same root")

    modes = [m.conjugate(-m.k) for m in reversed(modes_pos)] + modes_pos
    diagnostics = {"critical_distance": crit.distance, "nearest_critical": crit.nearest}
    # report (never consume) any determinant zero below the first window
    lo1, _ = window(1)
    low = _roots_in(L, lam_floor, max(lo1, lam_floor * 2), n_scan=40)
    low = [r for r in low if r < lams[0] * (1 - 1e-9)]
    if low:
        diagnostics["near_zero_roots"] = low
    return Spectrum(L=L, K=K, modes=modes, diagnostics=diagnostics)


# ----------------------------------------------------------------------
# reports
# ----------------------------------------------------------------------

@dataclass
class SlopeReport:
    slopes: np.ndarray
    ratios: np.ndarray
    min_abs_slope: float
    min_ratio: float
    flagged: list[int]


def boundary_slope_check(spec: Spectrum, threshold: float = 1e-6) -> SlopeReport:
    """Right-boundary slopes |phi_k'(L)| and their growth ratios |.|/|k|."""
    ks = spec.ks
    slopes = np.abs(spec.slopes_at_L())
    ratios = slopes / np.abs(ks)
    flagged = [int(k) for k, s in zip(ks, slopes) if s < threshold]
    return SlopeReport(
        slopes=slopes,
        ratios=ratios,
        min_abs_slope=float(slopes.min()),
        min_ratio=float(ratios.min()),
        flagged=flagged,
    )


@dataclass
class GapReport:
    alpha: int
    a: float
    b: float
    gamma: float
    Gamma1: float
    Gamma2: float


def gap_report(spec_or_freqs, negative_freqs: np.ndarray | None = None) -> GapReport:
    """Gap and cubic-growth certificates for the two frequency branches.

    gamma is the smallest pairwise spacing within either branch; a and b
    are least-squares fits of lam_k against k^3; Gamma1 and Gamma2 bound
    the deviation from and the inverse of the cubic law over the range.
    """
    if isinstance(spec_or_freqs, Spectrum):
        pos = spec_or_freqs.positive_frequencies
        neg = np.array(
            [-m.lam for m in spec_or_freqs.modes if m.k < 0]
        )  # lam_{2,k} = -lam_{-k}
        neg = np.sort(neg)
    else:
        pos = np.sort(np.asarray(spec_or_freqs, dtype=float))
        neg = np.sort(np.asarray(negative_freqs, dtype=float)) if negative_freqs is not None else pos
    if pos.size < 2:
        raise ValueError("need K >= 2 for a gap report")

    def branch_gap(v):
        return float(np.min(np.abs(np.diff(np.sort(v)))))

    gamma = min(branch_gap(pos), branch_gap(neg))
    if gamma <= 0.0:
        raise DuplicateFrequencyError("spectrum contains a duplicated frequency")
    k = np.arange(1, pos.size + 1, dtype=float)

    def fit(v):
        return float(np.dot(v, k**3) / np.dot(k**3, k**3))

    a, b = fit(pos), fit(neg)
    g1 = max(
        float(np.max(np.abs(pos - a * k**3) / k**2)),
        float(np.max(np.abs(neg - b * k**3) / k**2)),
    )
    g2 = max(float(np.max(k**3 / pos)), float(np.max(k**3 / neg)))
    return GapReport(alpha=3, a=a, b=b, gamma=gamma, Gamma1=g1, Gamma2=g2)


# ----------------------------------------------------------------------
# finite-difference oracles
# ----------------------------------------------------------------------

def modified_fd_matrix(L: float, n: int) -> sp.csr_matrix:
    """Exactly antisymmetric FD matrix of the modified operator.

    Interior stencils are the centered second-order ones for -d^3/dx^3
    and -d/dx on n interior points (h = L/(n+1), Dirichlet rows
    eliminated).  The coupled-slope condition w'(0) = w'(L) is closed by
    the ghost values w_{-1} = w_n and w_{n+2} = w_1, which is the unique
    consistent closure keeping the matrix antisymmetric; eigenvalues are
    therefore purely imaginary to machine precision.
    """
    h = L / (n + 1)
    c3 = 1.0 / (2.0 * h**3)
    c1 = 1.0 / (2.0 * h)
    A = sp.lil_matrix((n, n))
    for i in range(n):
        # -w''' with centered stencil (-w_{i-2} + 2w_{i-1} - 2w_{i+1} + w_{i+2})/(2h^3)
        for off, w in ((-2, 1.0), (-1, -2.0), (1, 2.0), (2, -1.0)):
            j = i + off
            if 0 <= j < n:
                A[i, j] += w * c3
        # -w' with centered stencil
        for off, w in ((-1, 1.0), (1, -1.0)):
            j = i + off
            if 0 <= j < n:
                A[i, j] += w * c1
    # ghost closures: w_{-1} = w_{n-1 (index n)} and w_{n+2} = w_1 wrap the
    # third-derivative stencil across the interval
    A[0, n - 1] += 1.0 * c3          # -(-w_{-1})/(2h^3) with w_{-1} = w_N
    A[n - 1, 0] += -1.0 * c3         # -(+w_{n+2})/(2h^3) with w_{n+2} = w_1
    return A.tocsr()


def jump_forcing_vector(L: float, n: int) -> np.ndarray:
    """Boundary forcing of the jump datum v in the modified FD system."""
    h = L / (n + 1)
    b = np.zeros(n)
    b[0] = 1.0 / (2.0 * h**2)
    b[-1] = -1.0 / (2.0 * h**2)
    return b


def fd_eigenvalues_modified(L: float, n: int, count: int) -> np.ndarray:
    """Imaginary parts of the ``count`` smallest-magnitude FD eigenvalues.

    Shift-invert Arnoldi around the origin; falls back to a dense
    Hermitian solve of i*A when the iteration stalls.
    """
    A = modified_fd_matrix(L, n).tocsc()
    k = 2 * count
    try:
        vals = spla.eigs(A, k=k, sigma=0.0, which="LM", return_eigenvectors=False)
    except (spla.ArpackNoConvergence, RuntimeError):
        herm = (1j * A).toarray()
        vals = -1j * np.linalg.eigvalsh(herm)
    lam = np.sort(vals.imag[vals.imag > 0])
    return lam[:count]


def original_fd_matrix(L: float, n: int, variant: str = "adjoint") -> sp.csr_matrix:
    """FD matrix of -d^3/dx^3 - d/dx with one-sided slope constraints.

    variant="adjoint": domain w(0)=w(L)=0, w'(0)=0 (the backward-system
    operator); variant="forward": w(0)=w(L)=0, w'(L)=0 (the homogeneous
    right-Neumann generator, dissipative).  Neither is normal.
    """
    if variant not in ("adjoint", "forward"):
        raise ValueError("variant must be 'adjoint' or 'forward'")
    h = L / (n + 1)
    c3 = 1.0 / (2.0 * h**3)
    c1 = 1.0 / (2.0 * h)
    A = sp.lil_matrix((n, n))
    for i in range(1, n - 1):
        for off, w in ((-2, 1.0), (-1, -2.0), (1, 2.0), (2, -1.0)):
            j = i + off
            if 0 <= j < n:
                A[i, j] += w * c3
    for i in range(n):
        for off, w in ((-1, 1.0), (1, -1.0)):
            j = i + off
            if 0 <= j < n:
                A[i, j] += w * c1
    if variant == "adjoint":
        # left slope vanishes: ghost w_{-1} = w_1
        A[0, 0] += 1.0 * c3
        A[0, 1] += -2.0 * c3
        if n > 2:
            A[0, 2] += 1.0 * c3
        # right end: one-sided 5-point third derivative (no slope condition)
        w5 = _fd_weights(np.arange(-3, 2, dtype=float), 0.0, 3)
        for off, w in zip(range(-3, 2), w5):
            j = (n - 1) + off
            if 0 <= j < n:
                A[n - 1, j] += -w / h**3
    else:
        # right slope vanishes: ghost w_{n+2} = w_n
        A[n - 1, n - 1] += -1.0 * c3
        A[n - 1, n - 2] += 2.0 * c3
        if n > 2:
            A[n - 1, n - 3] += -1.0 * c3
        w5 = _fd_weights(np.arange(-1, 4, dtype=float), 0.0, 3)
        for off, w in zip(range(-1, 4), w5):
            j = 0 + off
            if 0 <= j < n:
                A[0, j] += -w / h**3
    return A.tocsr()


def _fd_weights(nodes: np.ndarray, x0: float, m: int) -> np.ndarray:
    """Fornberg finite-difference weights for the m-th derivative at x0."""
    n = nodes.size
    c = np.zeros((n, m + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = nodes[0] - x0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = nodes[i] - x0
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            if j == i - 1:
                for s in range(mn, 0, -1):
                    c[i, s] = c1 * (s * c[i - 1, s - 1] - c5 * c[i - 1, s]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for s in range(mn, 0, -1):
                c[j, s] = (c4 * c[j, s] - s * c[j, s - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


@dataclass
class OriginalOperatorReport:
    variant: str
    n_x: int
    eigenvalues: np.ndarray
    eigvec_condition: float
    max_real_part: float
    min_real_part: float


def solve_modes_original(
    L: float, K: int, n_x: int = 400, variant: str = "adjoint"
) -> OriginalOperatorReport:
    """Diagnostic eigensolve of the non-normal original operator.

    Reports the K eigenvalues nearest the origin and the condition
    number of the full eigenvector matrix (a non-normality measure).
    """
    A = original_fd_matrix(L, n_x, variant).toarray()
    vals, vecs = np.linalg.eig(A)
    order = np.argsort(np.abs(vals))
    vals = vals[order]
    cond = float(np.linalg.cond(vecs))
    sel = vals[:K]
    return OriginalOperatorReport(
        variant=variant,
        n_x=n_x,
        eigenvalues=sel,
        eigvec_condition=cond,
        max_real_part=float(np.max(sel.real)),
        min_real_part=float(np.min(sel.real)),
    )
