"""Regimes for the autoregressive root and simulation of the AR(1) recursion

    y_t = mu + rho_n * y_{t-1} + e_t,   t = 1..n,

with a constant start y_0.  A regime fixes how rho_n depends on n:

    P1  |rho| < 1 fixed          (stationary)
    P2  |rho| > 1 fixed          (explosive)
    P3  rho = 1                  (unit root)
    P4  rho = 1 + c/n, c != 0    (near unit root)
    P5  rho = 1 + c/n^alpha, c < 0, alpha in (0,1)   (moderately stationary)
    P6  rho = 1 + c/n^alpha, c > 0, alpha in (0,1)   (moderately explosive)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .innovations import InnovationModel, sample_innovations

__all__ = ["Regime", "Ar1Path", "resolve_rho", "simulate_path", "companion_series"]

_TAGS = ("P1", "P2", "P3", "P4", "P5", "P6")

# Explosive paths are refused once rho^n would exceed this, instead of
# silently producing infinities.
_OVERFLOW_LIMIT = 1e300


@dataclass(frozen=True)
class Regime:
    tag: str
    rho: float | None = None
    c: float | None = None
    alpha: float | None = None

    def __post_init__(self):
        if self.tag not in _TAGS:
            raise ValueError(f"unknown regime tag {self.tag!r}; expected one of {_TAGS}")
        if self.tag == "P1":
            self._need(rho=True)
            if not abs(self.rho) < 1:
                raise ValueError("P1 requires |rho| < 1")
        elif self.tag == "P2":
            self._need(rho=True)
            if not abs(self.rho) > 1:
                raise ValueError("P2 requires |rho| > 1")
        elif self.tag == "P3":
            self._need()
        elif self.tag == "P4":
            self._need(c=True)
            if self.c == 0:
                raise ValueError("P4 requires c != 0")
        elif self.tag == "P5":
            self._need(c=True, alpha=True)
            if not self.c < 0:
                raise ValueError("P5 requires c < 0")
            if not 0 < self.alpha < 1:
                raise ValueError("P5 requires alpha in (0, 1)")
        else:  # P6
            self._need(c=True, alpha=True)
            if not self.c > 0:
                raise ValueError("P6 requires c > 0")
            if not 0 < self.alpha < 1:
                raise ValueError("P6 requires alpha in (0, 1)")

    def _need(self, rho=False, c=False, alpha=False):
        for name, wanted in (("rho", rho), ("c", c), ("alpha", alpha)):
            have = getattr(self, name) is not None
            if wanted and not have:
                raise ValueError(f"regime {self.tag} requires parameter {name!r}")
            if have and not wanted:
                raise ValueError(f"regime {self.tag} does not take parameter {name!r}")
            if have and not math.isfinite(getattr(self, name)):
                raise ValueError(f"regime parameter {name!r} must be finite")

    @classmethod
    def from_config(cls, cfg: dict) -> "Regime":
        if not isinstance(cfg, dict) or "tag" not in cfg:
            raise ValueError("regime config must be a mapping with a 'tag' field")
        extra = set(cfg) - {"tag", "rho", "c", "alpha"}
        if extra:
            raise ValueError(f"unknown regime config keys: {sorted(extra)}")
        kw = {k: float(cfg[k]) for k in ("rho", "c", "alpha") if k in cfg}
        return cls(cfg["tag"], **kw)

    def to_config(self) -> dict:
        out = {"tag": self.tag}
        for k in ("rho", "c", "alpha"):
            v = getattr(self, k)
            if v is not None:
                out[k] = v
        return out


def resolve_rho(regime: Regime, n: int) -> float:
    """The autoregressive root used at sample size ``n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    tag = regime.tag
    if tag in ("P1", "P2"):
        return regime.rho
    if tag == "P3":
        return 1.0
    if tag == "P4":
        return 1.0 + regime.c / n
    return 1.0 + regime.c / n ** regime.alpha


@dataclass(frozen=True)
class Ar1Path:
    """One simulated trajectory: y_1..y_n plus the innovations that made it."""

    mu: float
    rho: float
    y0: float
    y: np.ndarray
    e: np.ndarray

    @property
    def n(self) -> int:
        return len(self.y)

    def lagged(self) -> np.ndarray:
        """The regressor series y_0..y_{n-1}."""
        return np.concatenate(([self.y0], self.y[:-1]))

    def refit_residual(self) -> float:
        """max_t |y_t - mu - rho*y_{t-1} - e_t|, for round-off checks."""
        resid = self.y - (self.mu + self.rho * self.lagged() + self.e)
        return float(np.max(np.abs(resid)))


def _recurse(x: np.ndarray, rho: float, init: float) -> np.ndarray:
    """y_t = x_t + rho*y_{t-1} with y_0 = init, via a C-loop filter."""
    out, _ = lfilter([1.0], [1.0, -rho], x, zi=np.array([rho * init]))
    return out


def _recurse_kahan(x: np.ndarray, rho: float, init: float) -> np.ndarray:
    # Compensated recursion: carries the rounding error of each step into
    # the next, which keeps the refit residual small for very long paths.
    out = np.empty(len(x))
    y = init
    carry = 0.0
    for t in range(len(x)):
        term = x[t] + carry
        s = rho * y + term
        carry = term - (s - rho * y)
        out[t] = y = s
    return out


def _explosive_path(mu: float, rho: float, y0: float, e: np.ndarray) -> np.ndarray:
    # For |rho| > 1 the recursion adds O(1) innovations onto terms of size
    # rho^t; each step then rounds at eps*|y_t|, which acts as a fake
    # innovation that the diverging rates of the error theory amplify.
    # Building the path elementwise from the exact solution
    #     y_t = mu*(rho^t - 1)/(rho - 1) + rho^t*y0 + rho^t * sum_i e_i rho^-i
    # keeps every ingredient accurate to a few ulps of itself.
    n = len(e)
    t = np.arange(1, n + 1)
    p = np.power(rho, t)
    w = np.cumsum(e * np.power(rho, -t))
    return mu * (p - 1.0) / (rho - 1.0) + p * (y0 + w)


def simulate_path(
    regime: Regime,
    mu: float,
    y0: float,
    model: InnovationModel,
    n: int,
    seed: int,
    kahan: bool | None = None,
) -> Ar1Path:
    """Simulate y_1..y_n under ``regime`` with innovations from ``model``.

    ``kahan=None`` switches to the compensated recursion automatically for
    n > 10^6, where plain accumulation starts to erode the refit identity.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if not (math.isfinite(mu) and math.isfinite(y0)):
        raise ValueError("mu and y0 must be finite")
    rho = resolve_rho(regime, n)
    if abs(rho) > 1 and n * math.log(abs(rho)) > math.log(_OVERFLOW_LIMIT):
        raise OverflowError(
            f"rho^n exceeds {_OVERFLOW_LIMIT:g} at rho={rho}, n={n}; shorten the path"
        )
    e = sample_innovations(model, n, seed)
    if abs(rho) > 1:
        y = _explosive_path(mu, rho, y0, e)
    else:
        x = mu + e
        if kahan is None:
            kahan = n > 10 ** 6
        y = _recurse_kahan(x, rho, y0) if kahan else _recurse(x, rho, y0)
    if not np.isfinite(y[-1]):
        raise OverflowError("simulated path overflowed double precision")
    return Ar1Path(mu=mu, rho=rho, y0=y0, y=y, e=e)


_COMPANIONS = ("centered", "tilde_explosive", "tilde_unit")


def companion_series(path: Ar1Path, kind: str) -> np.ndarray:
    """Auxiliary series (t = 1..n) satisfying its own AR recursion.

    centered          y_t - mu/(1-rho)          (start y_0 - mu/(1-rho))
    tilde_explosive   sum_i rho^{t-i} e_i + rho^t y_0   (start y_0)
    tilde_unit        sum_i rho^{t-i} e_i       (start 0)

    The tilde variants are rebuilt from the innovations, not read off y,
    so they can serve as an independent cross-check on the path.
    """
    if kind == "centered":
        if path.rho == 1.0:
            raise ValueError("centered series is undefined at rho = 1")
        return path.y - path.mu / (1.0 - path.rho)
    if kind == "tilde_explosive":
        if abs(path.rho) > 1:
            return _explosive_path(0.0, path.rho, path.y0, path.e)
        return _recurse(path.e, path.rho, path.y0)
    if kind == "tilde_unit":
        if abs(path.rho) > 1:
            return _explosive_path(0.0, path.rho, 0.0, path.e)
        return _recurse(path.e, path.rho, 0.0)
    raise ValueError(f"unknown companion kind {kind!r}; expected one of {_COMPANIONS}")
