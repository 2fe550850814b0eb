"""Spin systems on Z^d: pattern catalogs, order conditions, exact and sampled measures."""

import json
from fractions import Fraction

from ._errors import SpinlabError
from . import _core

__all__ = [
    "SpinlabError",
    "catalog",
    "analyze",
    "check",
    "zfun",
    "verify_condition",
    "exact",
    "mcmc",
    "breakup",
    "reweight",
    "product",
    "project",
    "cover",
    "lift_check",
    "fraction",
]

__version__ = "0.1.0"
RNG_ALGORITHM = _core.rng_algorithm


def _dump(obj):
    return obj if isinstance(obj, str) else json.dumps(obj)


def _exact(x):
    if x is None:
        return None
    if isinstance(x, float):
        raise SpinlabError("SchemaError", "exact parameters must be int, Fraction or 'p/q' strings")
    return str(x)


def fraction(text):
    """Parse a "p/q" value from the JSON output."""
    return Fraction(text)


def catalog(name, *, q=None, m=None, lam=None, lambda_e=None, lambda_o=None, exp_neg_beta=None, beta=None, h=None):
    return json.loads(
        _core.catalog(name, q, m, _exact(lam), _exact(lambda_e), _exact(lambda_o), _exact(exp_neg_beta), beta, h)
    )


def analyze(system, d=None):
    return json.loads(_core.analyze(_dump(system), d))


def check(system, d, condition="simple", C=1.0, s=None):
    return json.loads(_core.check(_dump(system), d, condition, C, s))


def zfun(system, d, psi, I="all", method="compositions"):
    return json.loads(_core.zfun(_dump(system), d, psi, I, method))


def verify_condition(system, d, alpha=None, gamma=None, eps=None, eps_bar=None, c=1.0, max_restricted=3,
                     random_samples=100, seed=0):
    return json.loads(
        _core.verify_condition(_dump(system), d, alpha, gamma, eps, eps_bar, c, max_restricted, random_samples, seed)
    )


def exact(system, lattice, pattern=None, sites=()):
    return json.loads(_core.exact(_dump(system), lattice, pattern, list(sites)))


def mcmc(system, lattice, pattern=None, sweeps=1000, burn_in=0, seed=0, sites=(), random_site=False, waiver=False,
         batches=50):
    return json.loads(
        _core.mcmc(_dump(system), lattice, pattern, int(sweeps), int(burn_in), seed, list(sites), random_site, waiver,
                   batches)
    )


def breakup(system, lattice, config, pattern=None, seen=()):
    return json.loads(_core.breakup(_dump(system), lattice, _dump(config), pattern, list(seen)))


def reweight(system, multipliers, d):
    return json.loads(_core.reweight(_dump(system), [str(x) for x in multipliers], d))


def product(a, b):
    return json.loads(_core.product(_dump(a), _dump(b)))


def project(system):
    return json.loads(_core.project(_dump(system)))


def cover(system):
    return json.loads(_core.cover(_dump(system)))


def lift_check(system, states, edges, phi):
    return json.loads(_core.lift_check(_dump(system), states, [tuple(e) for e in edges], list(phi)))
