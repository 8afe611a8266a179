# memctrl/core/spectral.py

"""
Spectral Data of A = d²/dx² + b on (0,1)
Dirichlet eigenpairs, boundary traces at x = 0 and coefficient diagnostics:
- Interval basis: lambda_n² = n²π² - b, phi_n = √2 sin(nπx)
- Synthetic bases imitating lambda_n² ~ n^(2/d) growth
- Dirichlet lift coefficients <Dg0, phi_n>
- Weighted tails |lambda_n|^k |w_n| and their partial sums
- Log-log decay fits with summable / divergent verdicts
"""

from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np

from .. import settings
from ..exceptions import DegenerateEigenvalue, InvalidArgument, NoSolution

logger = logging.getLogger(__name__)


# =============================================================================
# CONSTANTS & CONFIGURATION
# =============================================================================

class DomainTag(str, Enum):
    """Where the modes come from"""
    INTERVAL = "interval"
    SYNTHETIC = "synthetic"


class TailVerdict(str, Enum):
    """Classification of a fitted partial-sum slope"""
    SUMMABLE = "summable"
    DIVERGENT = "divergent"
    INCONCLUSIVE = "inconclusive"


PSI_RANGE = (1e-3, 1e3)


def choose_root(lambda_sq: float) -> complex:
    """Square root of lambda_sq with nonnegative imaginary part (and positive real part when lambda_sq > 0)."""
    root = np.sqrt(complex(lambda_sq))
    if root.imag < 0:
        root = -root
    return complex(root)


# =============================================================================
# DATA CLASSES
# =============================================================================

@dataclass(frozen=True)
class Mode:
    """One eigenpair of -A with the boundary data the moment problems need"""
    index: int
    lambda_sq: float
    lam: complex
    psi: complex  # trace / lam
    trace: float  # exterior normal derivative of phi_n at x = 0

    @classmethod
    def build(cls, index: int, lambda_sq: float, trace: float) -> 'Mode':
        if abs(lambda_sq) <= settings.DEGENERATE_TOL:
            raise DegenerateEigenvalue(index, lambda_sq)
        lam = choose_root(lambda_sq)
        return cls(index=index, lambda_sq=float(lambda_sq), lam=lam, psi=trace / lam, trace=float(trace))

    @property
    def is_real(self) -> bool:
        return self.lambda_sq > 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'n': self.index,
            'lambda_sq': self.lambda_sq,
            'lambda_re': self.lam.real,
            'lambda_im': self.lam.imag,
            'psi_re': self.psi.real,
            'psi_im': self.psi.imag,
            'trace': self.trace,
        }


@dataclass(frozen=True)
class ModalBasis:
    """Ordered modes of one operator"""
    b: float
    modes: Tuple[Mode, ...]
    domain: DomainTag = DomainTag.INTERVAL
    dimension: int = 1

    def __post_init__(self):
        lambda_sq = [m.lambda_sq for m in self.modes]
        if any(later <= earlier for earlier, later in zip(lambda_sq, lambda_sq[1:])):
            raise InvalidArgument("modes must have strictly increasing lambda_sq")

    def __len__(self) -> int:
        return len(self.modes)

    def __iter__(self):
        return iter(self.modes)

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([m.lam for m in self.modes], dtype=complex)

    @property
    def lambda_sq(self) -> np.ndarray:
        return np.array([m.lambda_sq for m in self.modes])

    @property
    def traces(self) -> np.ndarray:
        return np.array([m.trace for m in self.modes])

    @property
    def psis(self) -> np.ndarray:
        return np.array([m.psi for m in self.modes], dtype=complex)

    @property
    def indices(self) -> List[int]:
        return [m.index for m in self.modes]

    def truncate(self, n_modes: int) -> 'ModalBasis':
        return ModalBasis(b=self.b, modes=self.modes[:n_modes], domain=self.domain, dimension=self.dimension)

    def describe(self) -> str:
        if self.domain == DomainTag.INTERVAL:
            return f"interval(b={self.b:g}, N={len(self)})"
        return f"synthetic(d={self.dimension}, N={len(self)})"


@dataclass(frozen=True)
class CoeffState:
    """Position and velocity coefficients (w_n, w_n') at one instant"""
    w: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=complex)
        v = np.asarray(self.v, dtype=complex)
        if w.shape != v.shape or w.ndim != 1:
            raise InvalidArgument(f"position/velocity lengths differ: {w.shape} vs {v.shape}")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(v))):
            raise InvalidArgument("coefficient state has non-finite entries")
        object.__setattr__(self, 'w', w)
        object.__setattr__(self, 'v', v)

    def __len__(self) -> int:
        return len(self.w)

    @classmethod
    def zeros(cls, n: int) -> 'CoeffState':
        return cls(np.zeros(n, dtype=complex), np.zeros(n, dtype=complex))


@dataclass
class WeightedTail:
    """Entries |lambda_n|^k |w_n| and partial sums of their squares"""
    k: int
    entries: np.ndarray
    partial_sums: np.ndarray

    def to_dict(self) -> Dict[str, Any]:
        return {
            'k': self.k,
            'entries': self.entries.tolist(),
            'partial_sums': self.partial_sums.tolist(),
        }


@dataclass
class DecayFit:
    """Least-squares slope of log S(N) against log N"""
    slope: float
    verdict: TailVerdict
    n_used: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'slope': round(float(self.slope), 6),
            'verdict': self.verdict.value,
            'n_used': self.n_used,
        }


# =============================================================================
# BASIS CONSTRUCTION
# =============================================================================

def build_interval_basis(b: float, n_modes: int) -> ModalBasis:
    """
    Exact Dirichlet spectrum of A = d²/dx² + b on (0,1) with Gamma = {0}.

    lambda_n² = n²π² - b, trace = -phi_n'(0) = -√2 nπ, psi = trace / lambda_n.
    """
    if n_modes < 1:
        raise InvalidArgument(f"n_modes must be >= 1, got {n_modes}")

    modes = []
    for n in range(1, n_modes + 1):
        lambda_sq = (n * math.pi) ** 2 - b
        trace = -math.sqrt(2.0) * n * math.pi
        modes.append(Mode.build(n, lambda_sq, trace))

    imaginary = [m.index for m in modes if not m.is_real]
    if imaginary:
        logger.info(f"b={b:g}: modes {imaginary} have imaginary lambda_n")

    return ModalBasis(b=b, modes=tuple(modes), domain=DomainTag.INTERVAL, dimension=1)


def build_synthetic_basis(d: int, n_modes: int, psi_profile: Sequence[float]) -> ModalBasis:
    """Modes with lambda_n² = n^(2/d) and user-supplied trace factors; no eigenfunctions."""
    if d not in (1, 2, 3):
        raise InvalidArgument(f"synthetic dimension must be 1, 2 or 3, got {d}")
    if n_modes < 1:
        raise InvalidArgument(f"n_modes must be >= 1, got {n_modes}")

    psi = np.asarray(psi_profile, dtype=float)
    if psi.shape != (n_modes,):
        raise InvalidArgument(f"psi_profile needs {n_modes} entries, got {psi.size}")
    low, high = PSI_RANGE
    bad = np.flatnonzero((np.abs(psi) < low) | (np.abs(psi) > high))
    if bad.size:
        raise InvalidArgument(f"psi_profile entries {(bad + 1).tolist()} outside [{low}, {high}] in absolute value")

    modes = []
    for n in range(1, n_modes + 1):
        lambda_sq = float(n) ** (2.0 / d)
        lam = choose_root(lambda_sq)
        modes.append(Mode(index=n, lambda_sq=lambda_sq, lam=lam,
                          psi=complex(psi[n - 1]), trace=float(psi[n - 1] * lam.real)))

    return ModalBasis(b=0.0, modes=tuple(modes), domain=DomainTag.SYNTHETIC, dimension=d)


# =============================================================================
# DIRICHLET LIFT
# =============================================================================

def _resonant_index(b: float) -> Optional[int]:
    if b <= 0:
        return None
    m = round(math.sqrt(b) / math.pi)
    if m >= 1 and abs(b - (m * math.pi) ** 2) <= settings.DEGENERATE_TOL * max(1.0, b):
        return m
    return None


def lift_profile(b: float, boundary_value: float, x: np.ndarray) -> np.ndarray:
    """Solution of u'' + bu = 0, u(0) = g0, u(1) = 0 sampled at x."""
    x = np.asarray(x, dtype=float)
    if _resonant_index(b) is not None:
        raise NoSolution(f"b = {b:g} is resonant: u'' + bu = 0 has no lift")
    if b > 0:
        r = math.sqrt(b)
        return boundary_value * np.sin(r * (1.0 - x)) / math.sin(r)
    if b < 0:
        r = math.sqrt(-b)
        return boundary_value * np.sinh(r * (1.0 - x)) / math.sinh(r)
    return boundary_value * (1.0 - x)


def dirichlet_lift_coeffs(basis: ModalBasis, boundary_value: float) -> np.ndarray:
    """
    Coefficients <Dg0, phi_n> of the lift of a constant boundary datum at x = 0.

    Green's identity on (0,1) gives (n²π² - b) <u, phi_n> = -g0 * trace_n,
    which is g0·√2/(nπ) when b = 0.
    """
    if basis.domain != DomainTag.INTERVAL:
        raise InvalidArgument("Dirichlet lift needs an interval basis")
    resonant = _resonant_index(basis.b)
    if resonant is not None:
        raise NoSolution(f"b = {basis.b:g} equals ({resonant}π)²: lift is resonant")

    return -boundary_value * basis.traces / basis.lambda_sq


# =============================================================================
# TAIL DIAGNOSTICS
# =============================================================================

def weighted_tail(state: CoeffState, basis: ModalBasis, k: int) -> WeightedTail:
    """Entries |lambda_n|^k |w_n| for the dom A^k diagnostics, with cumulative sums of squares."""
    if k < 0:
        raise InvalidArgument(f"k must be >= 0, got {k}")
    if len(state) > len(basis):
        raise InvalidArgument(f"state has {len(state)} modes, basis only {len(basis)}")

    weights = np.abs(basis.lambdas[:len(state)]) ** k
    entries = weights * np.abs(state.w)
    return WeightedTail(k=k, entries=entries, partial_sums=np.cumsum(entries ** 2))


def fit_decay_exponent(partial_sums: Sequence[float]) -> DecayFit:
    """Slope of log S(N) vs log N over the upper half of the index range."""
    sums = np.asarray(partial_sums, dtype=float)
    if sums.size < 8:
        raise InvalidArgument(f"need at least 8 partial sums, got {sums.size}")
    if np.any(sums <= 0):
        raise InvalidArgument("partial sums must be positive")

    n = np.arange(1, sums.size + 1)
    start = sums.size // 2
    x = np.log(n[start:])
    y = np.log(sums[start:])

    # Simple linear regression
    slope = float(np.polyfit(x, y, 1)[0])

    if slope <= settings.SUMMABLE_SLOPE:
        verdict = TailVerdict.SUMMABLE
    elif slope >= settings.DIVERGENT_SLOPE:
        verdict = TailVerdict.DIVERGENT
    else:
        verdict = TailVerdict.INCONCLUSIVE

    return DecayFit(slope=slope, verdict=verdict, n_used=int(x.size))
