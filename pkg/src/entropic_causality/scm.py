"""Structural causal models Y = f(X, E) and the theoretical bound formulas.

States are 0-based internally; the JSON form uses 1-based labels.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .dist import as_dist, sample_dirichlet, sample_low_entropy


@dataclass(frozen=True)
class Scm:
    """Function table ``fmap[i, k] = f(i, k)`` with cause and exogenous laws.

    ``n_out`` is the number of effect states; it defaults to the number of
    cause states.
    """

    fmap: np.ndarray
    px: np.ndarray
    pe: np.ndarray
    n_out: int | None = None

    def __post_init__(self):
        fmap = np.asarray(self.fmap, dtype=np.int64)
        object.__setattr__(self, "fmap", fmap)
        object.__setattr__(self, "px", as_dist(self.px))
        object.__setattr__(self, "pe", as_dist(self.pe))
        if self.n_out is None:
            object.__setattr__(self, "n_out", fmap.shape[0])
        if fmap.shape != (self.px.size, self.pe.size):
            raise ValueError(f"fmap shape {fmap.shape} != ({self.px.size}, {self.pe.size})")
        if fmap.min() < 0 or fmap.max() >= self.n_out:
            raise ValueError("fmap entries out of range")

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": int(self.px.size),
                "m": int(self.pe.size),
                "n_out": int(self.n_out),
                "fmap": (self.fmap + 1).tolist(),
                "px": self.px.tolist(),
                "pe": self.pe.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "Scm":
        doc = json.loads(text)
        fmap = np.asarray(doc["fmap"], dtype=np.int64) - 1
        return cls(fmap, np.asarray(doc["px"]), np.asarray(doc["pe"]), doc.get("n_out", doc["n"]))


def sample_uniform_function(n: int, m: int, rng: np.random.Generator, n_out: int | None = None) -> np.ndarray:
    """Independent uniform entries in ``range(n_out)`` for an n x m table."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    return rng.integers(0, n if n_out is None else n_out, size=(n, m))


def sample_scm(n: int, rng: np.random.Generator, theta: float | None = None,
               n_out: int | None = None, m: int | None = None) -> Scm:
    """Random model: p(X) ~ Dir(1), f uniform, p(E) with H(E) <= theta.

    E gets ``n * n_out`` states unless ``m`` is given, enough to realise any joint.
    ``theta=None`` draws p(E) from Dir(1).
    """
    n_out = n if n_out is None else n_out
    m = n * n_out if m is None else m
    px = sample_dirichlet(n, 1.0, rng)
    pe = sample_dirichlet(m, 1.0, rng) if theta is None else sample_low_entropy(m, theta, rng)
    fmap = sample_uniform_function(n, m, rng, n_out)
    return Scm(fmap, px, pe, n_out)


def scm_joint(s: Scm) -> np.ndarray:
    """p(X=i, Y=j) = x_i * sum_k [f(i,k) = j] e_k."""
    n = s.px.size
    flat = (s.fmap + s.n_out * np.arange(n)[:, None]).ravel()
    cond = np.bincount(flat, weights=np.tile(s.pe, n), minlength=n * s.n_out)
    cond = cond.reshape(n, s.n_out)
    return s.px[:, None] * cond


@dataclass(frozen=True)
class ConfoundedScm:
    """Latent L drives X and Y; E drives Y only.

    ``mechanism`` is either an integer table of shape (n_x, n_l, n_e) holding
    the effect state of each configuration (point-mass conditionals), or a
    float array of shape (n_x, n_l, n_e, n_y) of conditionals p(y | x, l, e).
    """

    pl: np.ndarray
    pe: np.ndarray
    px_given_l: np.ndarray
    mechanism: np.ndarray
    n_y: int

    def __post_init__(self):
        as_dist(self.pl)
        as_dist(self.pe)
        for row in self.px_given_l:
            as_dist(row)
        n_l, n_x = self.px_given_l.shape
        if self.pl.size != n_l:
            raise ValueError("px_given_l has wrong number of latent rows")
        if self.mechanism.shape[:3] != (n_x, n_l, self.pe.size):
            raise ValueError(f"mechanism shape {self.mechanism.shape} inconsistent")
        if self.mechanism.ndim == 4 and self.mechanism.shape[3] != self.n_y:
            raise ValueError("mechanism effect dimension != n_y")


def sample_confounded(
    n: int,
    m: int,
    l_states: int,
    theta_e: float,
    theta_l: float,
    rng: np.random.Generator,
    n_e: int | None = None,
    mechanism: str = "function",
) -> ConfoundedScm:
    """Random confounded model with H(E) <= theta_e and H(L) <= theta_l.

    ``n`` cause states, ``m`` effect states, E on ``n_e`` (default n * m)
    states. ``mechanism="function"`` draws Y = f(X, L, E) with f uniform;
    ``"dirichlet"`` draws every p(Y | x, l, e) from Dir(1) instead.
    """
    n_e = n * m if n_e is None else n_e
    pl = sample_low_entropy(l_states, theta_l, rng)
    pe = sample_low_entropy(n_e, theta_e, rng)
    px_given_l = np.stack([sample_dirichlet(n, 1.0, rng) for _ in range(l_states)])
    if mechanism == "function":
        mech = rng.integers(0, m, size=(n, l_states, n_e))
    elif mechanism == "dirichlet":
        mech = rng.dirichlet(np.ones(m), size=(n, l_states, n_e))
    else:
        raise ValueError(f"unknown mechanism {mechanism!r}")
    return ConfoundedScm(pl, pe, px_given_l, mech, m)


def confounded_joint(c: ConfoundedScm) -> np.ndarray:
    """p(x, y) = sum_{l,e} p(l) p(e) p(x | l) p(y | x, l, e)."""
    n_x, n_l, n_e = c.mechanism.shape[:3]
    if c.mechanism.ndim == 3:
        flat = (c.mechanism + c.n_y * np.arange(n_x * n_l).reshape(n_x, n_l, 1)).ravel()
        w = np.bincount(flat, weights=np.tile(c.pe, n_x * n_l), minlength=n_x * n_l * c.n_y)
        py_given_xl = w.reshape(n_x, n_l, c.n_y)
    else:
        py_given_xl = np.einsum("e,xley->xly", c.pe, c.mechanism)
    # weight of (x, l) is p(l) p(x | l)
    wxl = (c.pl[:, None] * c.px_given_l).T
    return np.einsum("xl,xly->xy", wxl, py_given_xl)


@dataclass(frozen=True)
class UniformityReport:
    rho: float
    subset: np.ndarray
    d: float


def uniformity_check(p, rho: float) -> UniformityReport:
    """States whose mass lies in [1 / (sqrt(rho) n), sqrt(rho) / n]."""
    if rho < 1:
        raise ValueError("rho must be >= 1")
    p = as_dist(p)
    n = p.size
    lo, hi = 1.0 / (math.sqrt(rho) * n), math.sqrt(rho) / n
    # relative slack so that exactly-uniform vectors pass at rho = 1
    tol = 1e-12 / n
    subset = np.flatnonzero((p >= lo - tol) & (p <= hi + tol))
    return UniformityReport(rho, subset, subset.size / n)


def identifiability_threshold(r: float, q: float, rho: float, c: float, d: float) -> float:
    """Smallest n for which the explicit reverse-entropy bound is guaranteed."""
    if not 0 < r < q:
        raise ValueError("need 0 < r < q")
    if d <= 0:
        raise ValueError("d must be positive")
    if rho < 1 or c < 0:
        raise ValueError("need rho >= 1 and c >= 0")
    try:
        mid = math.exp((4.0 / d) ** (1.0 / r))
    except OverflowError:
        mid = math.inf
    try:
        last = 2.0 * math.exp(q * q * 2.0 ** (2 * (c + 1)) * rho)
    except OverflowError:
        last = math.inf
    return max(4.0, mid, last)


def max_probability_penalty(rho: float, c: float) -> float:
    """Entropy penalty (bits) for a distribution whose mass ratio is at most rho * 2**c."""
    a = rho * 2.0 ** c
    if a - 1.0 < 1e-9:
        return 0.0  # removable singularity at a = 1
    t = a * math.log(a) / (a - 1.0)
    return (t - 1.0 - math.log(t)) / math.log(2.0)


def theoretical_lower_bound(n: float, r: float, q: float, rho: float, c: float) -> float:
    """Lower bound (bits) on the reverse exogenous entropy; may be negative for small n."""
    if n < 4:
        raise ValueError("n must be >= 4")
    if not 0 < r < q:
        raise ValueError("need 0 < r < q")
    lead = 1.0 - (1.0 + r) / (1.0 + q)
    return lead * (0.5 * math.log2(math.log2(n)) - math.log2(1.0 + r) - max_probability_penalty(rho, c))
