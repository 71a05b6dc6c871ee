"""Resource coupling matrices ``r_jk`` for the always-on ZZ interaction."""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

GAUSSIAN_FLOOR = 0.01


class ResourceError(ValueError):
    pass


@dataclass
class ResourceCoupling:
    """Symmetric resource matrix with zero diagonal and nonzero off-diagonal."""

    r: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        if r.ndim != 2 or r.shape[0] != r.shape[1] or r.shape[0] < 2:
            raise ResourceError(f"resource must be a square matrix with n >= 2, got shape {r.shape}")
        if not np.allclose(r, r.T, rtol=0, atol=1e-14):
            raise ResourceError("resource matrix must be symmetric")
        if np.any(np.diag(r) != 0):
            raise ResourceError("resource matrix must have zero diagonal")
        if np.any(self._pairs(r) == 0):
            raise ResourceError("no off-diagonal resource coupling may be zero")
        self.r = r

    @staticmethod
    def _pairs(r):
        return r[np.triu_indices(r.shape[0], 1)]

    @property
    def n(self) -> int:
        return self.r.shape[0]

    @property
    def homogeneous(self) -> bool:
        return bool(np.all(self.pair_vector() == 1.0))

    def pair_vector(self) -> np.ndarray:
        """r_jk in lexicographic pair order."""
        return self._pairs(self.r).copy()

    def mean_coupling(self) -> float:
        return float(self.pair_vector().mean())

    @classmethod
    def from_pairs(cls, n: int, values) -> "ResourceCoupling":
        r = np.zeros((n, n))
        r[np.triu_indices(n, 1)] = values
        return cls(r + r.T)

    def to_dict(self) -> dict:
        return {"n": self.n, "r": self.r.tolist()}


@dataclass(frozen=True)
class ResourceModel:
    kind: str = "homogeneous"
    sigma: float | None = None
    seed: int | None = None
    exponent: float | None = None

    def __post_init__(self):
        if self.kind not in ("homogeneous", "gaussian", "powerlaw"):
            raise ResourceError(f"unknown resource model {self.kind!r}")
        if self.kind == "gaussian" and (self.sigma is None or self.sigma < 0):
            raise ResourceError("gaussian model needs sigma >= 0")
        if self.kind == "powerlaw" and (self.exponent is None or self.exponent <= 0):
            raise ResourceError("powerlaw model needs a positive exponent")

    @classmethod
    def homogeneous_model(cls) -> "ResourceModel":
        return cls("homogeneous")

    @classmethod
    def gaussian(cls, sigma: float, seed=None) -> "ResourceModel":
        return cls("gaussian", sigma=sigma, seed=seed)

    @classmethod
    def power_law(cls, exponent: float) -> "ResourceModel":
        return cls("powerlaw", exponent=exponent)

    @property
    def label(self) -> str:
        if self.kind == "gaussian":
            return f"gaussian{self.sigma:g}"
        if self.kind == "powerlaw":
            return f"powerlaw{self.exponent:g}"
        return "homogeneous"

    def with_seed(self, seed) -> "ResourceModel":
        return ResourceModel(self.kind, self.sigma, seed, self.exponent)

    def to_dict(self) -> dict:
        d = {"model": self.kind}
        if self.kind == "gaussian":
            d.update(sigma=self.sigma, seed=self.seed)
        elif self.kind == "powerlaw":
            d["exponent"] = self.exponent
        return d


def _normalise(values: np.ndarray) -> np.ndarray:
    return values / values.mean()


def build_resource(model: ResourceModel, n: int) -> ResourceCoupling:
    if n < 2:
        raise ResourceError(f"resource needs n >= 2, got {n}")
    if n == 4:
        raise ResourceError("n = 4 is unsupported: the sign matrix is singular")
    npairs = n * (n - 1) // 2
    if model.kind == "homogeneous":
        return ResourceCoupling.from_pairs(n, np.ones(npairs))
    if model.kind == "gaussian":
        rng = np.random.default_rng(model.seed)
        vals = rng.normal(1.0, model.sigma, npairs)
        bad = vals <= GAUSSIAN_FLOOR
        while bad.any():
            vals[bad] = rng.normal(1.0, model.sigma, int(bad.sum()))
            bad = vals <= GAUSSIAN_FLOOR
        return ResourceCoupling.from_pairs(n, _normalise(vals))
    j, k = np.triu_indices(n, 1)
    vals = np.abs(j - k).astype(float) ** (-model.exponent)
    return ResourceCoupling.from_pairs(n, _normalise(vals))


def resource_from_dict(d: dict, n: int | None = None) -> ResourceCoupling:
    """Parse either an explicit matrix ``{"n", "r"}`` or a model spec ``{"model", ...}``."""
    if "r" in d:
        res = ResourceCoupling(np.asarray(d["r"], dtype=float))
        if "n" in d and int(d["n"]) != res.n:
            raise ResourceError("resource 'n' does not match matrix size")
        if n is not None and res.n != n:
            raise ResourceError(f"resource has n={res.n}, problem has n={n}")
        return res
    size = d.get("n", n)
    if size is None:
        raise ResourceError("resource model spec needs 'n' (or a problem to take it from)")
    return build_resource(model_from_dict(d), int(size))


def model_from_dict(d: dict) -> ResourceModel:
    kind = d.get("model", "homogeneous")
    if kind == "gaussian":
        return ResourceModel.gaussian(float(d["sigma"]), d.get("seed"))
    if kind == "powerlaw":
        return ResourceModel.power_law(float(d["exponent"]))
    return ResourceModel(kind)


def load_resource(path, n: int | None = None) -> ResourceCoupling:
    with open(path) as fh:
        return resource_from_dict(json.load(fh), n)
