# dynamics/records.py
# États, trajectoires et estimations produits par la simulation de la dynamique logit

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from games.domain import Profile
from games.services.game_service import GameService


@dataclass(frozen=True)
class DynamicsState:
    """Profil courant et son pas, avec ℓ et V(a) mis en cache."""
    profile: tuple
    step: int
    ell: float
    value: float

    @classmethod
    def of(cls, config, profile, step=0):
        profile = Profile.of(config, profile)
        return cls(
            profile=profile.a,
            step=step,
            ell=profile.level,
            value=GameService.system_value(config, profile),
        )


def _frozen_array(values, dtype=float):
    array = np.asarray(values, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class TrajectoryRecord:
    """
    Pas enregistrés d'une trajectoire (pas 0 puis tous les stride pas).

    Attributes:
        steps: Indices de pas strictement croissants
        ells, values, potentials: ℓ, V(a) et φ(a) à chaque pas enregistré
        final_profile: Profil atteint au dernier pas simulé
    """
    seed: int
    trial: int
    stride: int
    steps: np.ndarray
    ells: np.ndarray
    values: np.ndarray
    potentials: np.ndarray
    final_profile: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, 'steps', _frozen_array(self.steps, dtype=np.int64))
        for name in ('ells', 'values', 'potentials'):
            object.__setattr__(self, name, _frozen_array(getattr(self, name)))
        if self.steps.size > 1 and np.any(np.diff(self.steps) <= 0):
            raise ValueError("indices de pas non strictement croissants")

    def __len__(self):
        return int(self.steps.size)

    def rows(self):
        for step, ell, value, potential in zip(self.steps, self.ells, self.values, self.potentials):
            yield {'step': int(step), 'ell': float(ell), 'value': float(value), 'potential': float(potential)}

    def first_passage(self, level):
        """Premier pas enregistré où ℓ ≥ level, ou None."""
        reached = np.flatnonzero(self.ells >= level)
        if reached.size == 0:
            return None
        return int(self.steps[reached[0]])


@dataclass(frozen=True)
class HittingEstimate:
    """
    Estimation Monte-Carlo du temps d'atteinte de ℓ ≥ target depuis le profil nul.

    Les essais censurés (cap atteint) sont comptés à part ; censored_mean les
    compte pour cap et minore donc la vraie moyenne.
    """
    target: float
    trials: int
    successes: int
    cap: int
    mean: Optional[float]
    std_error: Optional[float]
    ci_low: Optional[float]
    ci_high: Optional[float]
    censored_mean: float
    samples: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if not 0 <= self.successes <= self.trials:
            raise ValueError("successes doit appartenir à [0, trials]")

    @property
    def censored(self):
        return self.trials - self.successes

    def sample_rows(self):
        for trial, hit in enumerate(self.samples):
            yield {'trial': trial, 'hit_step': hit, 'censored': hit is None}


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Fréquences empiriques de ℓ après rodage, comparées à la loi stationnaire exacte."""
    samples: int
    burn_in: int
    frequencies: np.ndarray
    stationary: np.ndarray
    tv_distance: float

    def rows(self):
        for ell, (frequency, prob) in enumerate(zip(self.frequencies, self.stationary)):
            yield {'ell': ell, 'frequency': float(frequency), 'prob': float(prob)}

    def mass_at_least(self, level):
        return math.fsum(self.frequencies[level:])


@dataclass(frozen=True)
class SweepResult:
    """Une ligne d'un balayage de paramètre (α ou ρ)."""
    parameter: str
    value: float
    trials: int
    successes: Optional[int] = None
    mean_hitting: Optional[float] = None
    std_error: Optional[float] = None
    exact_hitting: Optional[float] = None
    occupancy: Optional[float] = None
    p_high: Optional[float] = None

    def to_dict(self):
        return {
            'parameter': self.parameter,
            'value': self.value,
            'trials': self.trials,
            'successes': self.successes,
            'mean_hitting': self.mean_hitting,
            'std_error': self.std_error,
            'exact_hitting': self.exact_hitting,
            'occupancy': self.occupancy,
            'p_high': self.p_high,
        }
