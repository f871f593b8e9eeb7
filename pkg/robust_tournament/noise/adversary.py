"""
Adversary - the entropy-bounded noise that minimizes equilibrium effort.

Noise enters equilibrium effort only through its inverse quantile density
m(z) = f(F^{-1}(z)). For a prize vector d the adversary's best reply is
m*(z; d) = lambda / a(z; d) with lambda = exp(-H + W(d)), so the entropy
bound binds.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Union

import numpy as np
from numpy.typing import ArrayLike

from ..config import QuadratureSpec
from ..numerics.kernel import PrizeDifferentials, a_values, as_differentials, objective_W
from ..numerics.quadrature import integrate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EntropyBound:
    """Upper bound on Shannon entropy of the noise density, in nats."""
    value: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"entropy bound must be finite, got {self.value!r}")

    def __float__(self) -> float:
        return float(self.value)


def as_entropy(H: Union[EntropyBound, float]) -> float:
    """Finite entropy bound as a float."""
    return float(H) if isinstance(H, EntropyBound) else float(EntropyBound(float(H)))


@dataclass(frozen=True, eq=False)
class QuantileDensity:
    """Inverse quantile density m(z) on (0, 1) with its provenance."""
    func: Callable[[np.ndarray], np.ndarray]
    provenance: str
    constant: float = float("nan")
    n: Optional[int] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __call__(self, z: ArrayLike) -> np.ndarray:
        return self.func(np.asarray(z, dtype=float))

    @classmethod
    def uniform(cls) -> "QuantileDensity":
        """m = 1: uniform noise on a unit support."""
        return cls(func=lambda z: np.ones_like(z, dtype=float), provenance="uniform", constant=1.0)

    @classmethod
    def exponential(cls, rate: float) -> "QuantileDensity":
        """m = rate * (1 - z): exponential noise with the given rate."""
        if not rate > 0:
            raise ValueError("exponential rate must be positive")
        return cls(func=lambda z: rate * (1.0 - z), provenance="exponential-limit", constant=rate)

    @classmethod
    def from_grid(cls, z: ArrayLike, m: ArrayLike) -> "QuantileDensity":
        """Log-linear interpolation of user-supplied positive samples."""
        z = np.asarray(z, dtype=float)
        m = np.asarray(m, dtype=float)
        if z.shape != m.shape or z.size < 2:
            raise ValueError("grid needs matching z and m arrays with at least two points")
        if np.any(np.diff(z) <= 0) or z[0] < 0 or z[-1] > 1:
            raise ValueError("grid z must be strictly increasing inside [0, 1]")
        if np.any(m <= 0) or not np.all(np.isfinite(m)):
            raise ValueError("grid m must be finite and positive")
        log_m = np.log(m)
        return cls(func=lambda x: np.exp(np.interp(x, z, log_m)), provenance="grid")


def adversarial_m(
    d: Union[PrizeDifferentials, ArrayLike],
    H: Union[EntropyBound, float] = 0.0,
    q: Optional[QuadratureSpec] = None,
) -> QuantileDensity:
    """Effort-minimizing m*(z; d) = exp(-H + W(d)) / a(z; d)."""
    d = as_differentials(d).copy()
    if d[0] <= 0 or d[-1] <= 0:
        raise ValueError("adversarial density needs d_1 > 0 and d_{n-1} > 0")
    d.setflags(write=False)
    H = as_entropy(H)
    W = objective_W(d, q)
    lam = math.exp(-H + W)
    logger.debug("Adversarial density n=%d: W=%.6f lambda=%.6f", d.size + 1, W, lam)
    return QuantileDensity(
        func=lambda z: lam / a_values(d, z),
        provenance="adversarial",
        constant=lam,
        n=d.size + 1,
        metadata={"W": W, "H": H, "d": d},
    )


def entropy_of(m: QuantileDensity, q: Optional[QuadratureSpec] = None) -> float:
    """Shannon entropy -integral of log m(z) over (0, 1)."""
    q = q or QuadratureSpec()
    panels = q.panels_for(m.n) if m.n else q.panels
    return integrate(lambda z: -np.log(m(z)), q, panels=panels, graded=True, what="entropy")
