# chains/records.py
# Chaîne agrégée à n+1 états et résultats analytiques associés

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import expit


def _readonly(array):
    array = np.asarray(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class BirthDeathChain:
    """
    Chaîne de naissance et de mort sur ℓ ∈ [0, n].

    Attributes:
        up, down, hold: Probabilités p(ℓ), q(ℓ) et 1 − p(ℓ) − q(ℓ)
        log_up, log_down: Leurs logarithmes (−inf aux bords)
        log_weights: logw(ℓ), avec π̂(ℓ) = exp(logw(ℓ) − log_z)
    """
    n: int
    up: np.ndarray
    down: np.ndarray
    hold: np.ndarray
    log_up: np.ndarray
    log_down: np.ndarray
    log_weights: np.ndarray
    log_z: float

    def __post_init__(self):
        for name in ('up', 'down', 'hold', 'log_up', 'log_down', 'log_weights'):
            object.__setattr__(self, name, _readonly(getattr(self, name)))

    @property
    def log_probs(self):
        return self.log_weights - self.log_z

    @property
    def probs(self):
        return np.exp(self.log_probs)

    def kernel(self):
        """Noyau dense (n+1)×(n+1), boucle sur place comprise."""
        size = self.n + 1
        matrix = np.diag(self.hold)
        matrix[np.arange(size - 1), np.arange(1, size)] = self.up[:-1]
        matrix[np.arange(1, size), np.arange(size - 1)] = self.down[1:]
        return matrix


@dataclass(frozen=True)
class StationaryLaw:
    n: int
    log_weights: np.ndarray
    log_probs: np.ndarray
    mean_level: float
    expected_value: float
    tau: Optional[int] = None
    p_high: Optional[float] = None

    @property
    def probs(self):
        return np.exp(self.log_probs)


@dataclass(frozen=True)
class SuccessProbability:
    """
    p_high(ρ) = 1/(1 + C·e^{−ρB}) pour la technologie à seuil.

    C ne dépend ni de ρ ni des valeurs V_low, V_high.
    """
    rho: float
    p_high: float
    b: float
    c: float
    log_c: float
    log_s_low: float
    log_s_high: float

    def at(self, rho):
        """p_high pour un autre ρ (scalaire ou tableau), à α, β, n, τ fixés."""
        return expit(np.asarray(rho, dtype=float) * self.b - self.log_c)

    @property
    def p_high_at_zero(self):
        return float(expit(-self.log_c))


@dataclass(frozen=True)
class HittingTime:
    start: int
    target: int
    value: float
    log_value: float
    finite: bool = True


@dataclass(frozen=True)
class CutoffReport:
    """T_cutoff et encadrement [T_cutoff/24, 288·T_cutoff] du temps de mélange."""
    ell0: int
    t_cutoff: float
    left_sum: float
    right_sum: float
    mix_lower: float
    mix_upper: float


@dataclass(frozen=True)
class MixingLowerBound:
    applicable: bool
    p_high: float
    derived_form: Optional[float] = None
    reduced_form: Optional[float] = None
    log_derived_form: Optional[float] = None
    log_reduced_form: Optional[float] = None


@dataclass(frozen=True)
class HittingLowerBound:
    """
    Bornes inférieures du temps d'atteinte ; chaque forme vaut None si elle ne s'applique pas.

    best est le maximum des formes valides ; threshold_stated_form (exposant τ−ℓ)
    n'est qu'informative et n'y entre pas.
    """
    interval: tuple
    target: int
    drift_form: float
    steep_form: float
    threshold_form: Optional[float] = None
    threshold_best: Optional[float] = None
    threshold_stated_form: Optional[float] = None
    ell_star_form: Optional[float] = None
    linear_form: Optional[float] = None

    @property
    def best(self):
        forms = [self.drift_form, self.steep_form, self.threshold_form, self.threshold_best,
                 self.ell_star_form, self.linear_form]
        return max(f for f in forms if f is not None and not math.isnan(f))
