"""
Input model: marginal distributions, Gaussian copula, isoprobabilistic
transform and the MCS / LHS / uniform-ball samplers.

Normal CDF and its inverse come from scipy.special (ndtr/ndtri, Cephes
erfc-based rational approximations, accurate to ~1e-15 on [-8, 8]). The
transform uses the survival-function branch for the upper half of each
marginal so that points far in the upper tail keep full precision.
"""

import logging
import math
from typing import Optional, Sequence

import numpy as np
from scipy import linalg, stats
from scipy.special import ndtr, ndtri
from scipy.stats import qmc

from modules.models import Family, MarginalDistribution, RandomVector, SampleMatrix, SpaceTag

logger = logging.getLogger(__name__)

EULER_GAMMA = 0.57721566490153286061
Z_CLIP = 37.5  # ndtr underflows to 0 beyond this
P_TINY = float(ndtr(-Z_CLIP))


# ============= MARGINALS =============

def marginal_from_moments(family: Family, mean: float, std: float,
                          name: str = "", unit: str = "") -> MarginalDistribution:
    """
    Convert mean/std into family parameters (Gaussian, Lognormal, Gumbel).
    TruncatedGaussian and Uniform use the direct constructors below.
    """
    family = Family(family)
    if not std > 0:
        raise ValueError(f"std must be > 0, got {std}")

    if family == Family.GAUSSIAN:
        params = {"mu": float(mean), "sigma": float(std)}
    elif family == Family.LOGNORMAL:
        if not mean > 0:
            raise ValueError(f"lognormal mean must be > 0, got {mean}")
        zeta = math.sqrt(math.log1p((std / mean) ** 2))
        params = {"lambda": math.log(mean) - 0.5 * zeta ** 2, "zeta": zeta}
    elif family == Family.GUMBEL:
        scale = std * math.sqrt(6.0) / math.pi
        params = {"loc": mean - EULER_GAMMA * scale, "scale": scale}
    else:
        raise ValueError(f"moment conversion not supported for family '{family.value}'")

    return MarginalDistribution(family=family, params=params, name=name, unit=unit)


def truncated_gaussian(mu: float, sigma: float, lower: float, upper: float = math.inf,
                       name: str = "", unit: str = "") -> MarginalDistribution:
    """Truncated Gaussian from its untruncated mu/sigma and the bounds"""
    return MarginalDistribution(
        family=Family.TRUNCATED_GAUSSIAN,
        params={"mu": mu, "sigma": sigma, "lower": lower, "upper": upper},
        name=name, unit=unit,
    )


def uniform(lower: float, upper: float, name: str = "", unit: str = "") -> MarginalDistribution:
    return MarginalDistribution(
        family=Family.UNIFORM, params={"lower": lower, "upper": upper}, name=name, unit=unit
    )


def marginal_moments(m: MarginalDistribution):
    """Analytic (mean, std) of a marginal"""
    mean, var = frozen_distribution(m).stats(moments="mv")
    return float(mean), float(np.sqrt(var))


def frozen_distribution(m: MarginalDistribution):
    """scipy.stats frozen distribution for a marginal"""
    p = m.params
    if m.family == Family.GAUSSIAN:
        return stats.norm(loc=p["mu"], scale=p["sigma"])
    if m.family == Family.LOGNORMAL:
        return stats.lognorm(s=p["zeta"], scale=math.exp(p["lambda"]))
    if m.family == Family.GUMBEL:
        return stats.gumbel_r(loc=p["loc"], scale=p["scale"])
    if m.family == Family.UNIFORM:
        return stats.uniform(loc=p["lower"], scale=p["upper"] - p["lower"])
    if m.family == Family.TRUNCATED_GAUSSIAN:
        a = (p["lower"] - p["mu"]) / p["sigma"]
        b = (p["upper"] - p["mu"]) / p["sigma"]
        return stats.truncnorm(a, b, loc=p["mu"], scale=p["sigma"])
    raise ValueError(f"unsupported family '{m.family}'")


def support(m: MarginalDistribution):
    lo, hi = frozen_distribution(m).support()
    return float(lo), float(hi)


def cdf(m: MarginalDistribution, x):
    """Marginal CDF; TruncatedGaussian renormalized by the truncation mass"""
    return frozen_distribution(m).cdf(x)


def pdf(m: MarginalDistribution, x):
    """Marginal density; zero outside the support"""
    return frozen_distribution(m).pdf(x)


def icdf(m: MarginalDistribution, p):
    """Marginal quantile function, p in (0, 1)"""
    p_arr = np.asarray(p, dtype=float)
    if np.any(~((p_arr > 0) & (p_arr < 1))):
        raise ValueError(f"probability must lie in (0, 1), got {p}")
    return frozen_distribution(m).ppf(p)


# ============= ISOPROBABILISTIC TRANSFORM =============

def _to_normal_scores(m: MarginalDistribution, x: np.ndarray) -> np.ndarray:
    """
    z = Phi^-1(F(x)) using sf on the upper half. Support end points map to
    -/+Z_CLIP instead of infinity; points outside the support give nan.
    """
    dist = frozen_distribution(m)
    lo, hi = dist.support()
    lower = dist.cdf(x)
    z = ndtri(np.clip(lower, P_TINY, 1.0))
    upper = lower > 0.5
    if np.any(upper):
        z[upper] = -ndtri(np.clip(dist.sf(x[upper]), P_TINY, 1.0))
    z[~((x >= lo) & (x <= hi))] = np.nan
    return z


def _from_normal_scores(m: MarginalDistribution, z: np.ndarray) -> np.ndarray:
    """x = F^-1(Phi(z)) using isf on the upper half"""
    dist = frozen_distribution(m)
    z = np.clip(z, -Z_CLIP, Z_CLIP)
    x = np.empty_like(z)
    upper = z > 0
    x[~upper] = dist.ppf(ndtr(z[~upper]))
    x[upper] = dist.isf(ndtr(-z[upper]))
    return x


def _as_values(rv: RandomVector, x) -> np.ndarray:
    values = x.values if isinstance(x, SampleMatrix) else np.asarray(x, dtype=float)
    if values.ndim == 1:
        values = values.reshape(-1, rv.dimension)
    if values.shape[1] != rv.dimension:
        raise ValueError(f"points have {values.shape[1]} coordinates, random vector has {rv.dimension}")
    return values


def to_standard(rv: RandomVector, x) -> SampleMatrix:
    """
    Physical points -> independent standard-normal space.
    Marginal normal scores z, then u = L^-1 z with L the copula Cholesky factor.
    """
    if isinstance(x, SampleMatrix) and x.space != SpaceTag.PHYSICAL:
        raise ValueError("to_standard expects physical-space points")
    values = _as_values(rv, x)
    z = np.empty_like(values)
    for i, m in enumerate(rv.marginals):
        z[:, i] = _to_normal_scores(m, values[:, i])
    if not np.all(np.isfinite(z)):
        bad = np.argwhere(~np.isfinite(z))[0]
        raise ValueError(
            f"point {bad[0]} coordinate {bad[1]} = {values[bad[0], bad[1]]} "
            f"lies outside the support of marginal '{rv.names[bad[1]]}'"
        )
    if not rv.is_independent:
        z = linalg.solve_triangular(rv.cholesky_factor, z.T, lower=True).T
    return SampleMatrix(values=z, space=SpaceTag.STANDARD)


def from_standard(rv: RandomVector, u) -> SampleMatrix:
    """Standard-normal points -> physical space; exact inverse of to_standard"""
    if isinstance(u, SampleMatrix) and u.space != SpaceTag.STANDARD:
        raise ValueError("from_standard expects standard-space points")
    z = _as_values(rv, u)
    if not rv.is_independent:
        z = z @ rv.cholesky_factor.T
    x = np.empty_like(z)
    for i, m in enumerate(rv.marginals):
        x[:, i] = _from_normal_scores(m, z[:, i])
    return SampleMatrix(values=x, space=SpaceTag.PHYSICAL)


# ============= SAMPLERS =============

def _check_size(n: int):
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")


def sample_standard(rv: RandomVector, n: int, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. independent standard-normal points (n x M)"""
    _check_size(n)
    return rng.standard_normal((n, rv.dimension))


def sample_mcs(rv: RandomVector, n: int, rng: np.random.Generator) -> SampleMatrix:
    """Crude Monte Carlo sample in physical space"""
    return from_standard(rv, sample_standard(rv, n, rng))


def lhs_unit(n: int, dimension: int, rng: np.random.Generator, centered: bool = False) -> np.ndarray:
    """
    Latin hypercube on the unit cube: one point per stratum and dimension,
    jittered within its stratum unless centered.
    """
    _check_size(n)
    sampler = qmc.LatinHypercube(d=dimension, scramble=not centered, seed=rng)
    return sampler.random(n)


def sample_lhs(rv: RandomVector, n: int, rng: np.random.Generator, centered: bool = False) -> SampleMatrix:
    """Latin hypercube sample mapped through Phi^-1 and the copula"""
    unit = lhs_unit(n, rv.dimension, rng, centered=centered)
    return from_standard(rv, ndtri(unit))


def sample_uniform_ball(rv: RandomVector, n: int, radius: float,
                        rng: np.random.Generator) -> SampleMatrix:
    """Points uniform in the standard-space ball of the given radius"""
    _check_size(n)
    if not radius > 0:
        raise ValueError(f"ball radius must be > 0, got {radius}")
    m = rv.dimension
    direction = rng.standard_normal((n, m))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    r = radius * rng.random(n) ** (1.0 / m)
    return from_standard(rv, direction * r[:, None])


def build_random_vector(marginals: Sequence[MarginalDistribution],
                        correlation: Optional[np.ndarray] = None) -> RandomVector:
    """RandomVector from marginals and an optional copula matrix"""
    rv = RandomVector(marginals=tuple(marginals), copula_correlation=correlation)
    logger.debug("Random vector with %d inputs (independent=%s)", rv.dimension, rv.is_independent)
    return rv
