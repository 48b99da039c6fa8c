# games/domain.py
# Types primitifs du jeu d'airdrop : configuration, profils, niveaux de contribution, métriques

import itertools
import logging
import math
from dataclasses import dataclass, replace

from common.exceptions import InvalidConfigError
from .technologies import GeneralTechnology, Technology, TechnologySpec, make_technology

logger = logging.getLogger('airdrop_lab')

BINARY_ACTIONS = (0.0, 1.0)


def _as_float(value, field_name):
    if isinstance(value, bool):
        raise InvalidConfigError("nombre attendu", field=field_name)
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise InvalidConfigError("nombre attendu", field=field_name)
    if not math.isfinite(value):
        raise InvalidConfigError("valeur non finie", field=field_name)
    return value


@dataclass(frozen=True)
class GameConfig:
    """
    Instance complète d'un jeu d'airdrop.

    Attributes:
        n (int): Nombre de joueurs
        costs (tuple): Coût unitaire c_i de chaque joueur
        rho (float): Fraction ρ de l'offre distribuée par airdrop
        t_tot (float): Offre totale de tokens T_tot
        beta (float): Bruit inverse β de la dynamique logit
        technology (Technology): Fonction technologique V validée
        actions (tuple): Ensembles d'actions A_i, croissants et sans doublon
        d_v (float): Coût de développement d_V
    """
    n: int
    costs: tuple
    rho: float
    t_tot: float
    beta: float
    technology: Technology
    actions: tuple
    d_v: float = 0.0

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 1:
            raise InvalidConfigError("n doit être un entier ≥ 1", field='n')
        if len(self.costs) != self.n:
            raise InvalidConfigError(f"{len(self.costs)} coûts fournis pour n={self.n} joueurs", field='costs')
        for i, cost in enumerate(self.costs):
            if cost < 0:
                raise InvalidConfigError("les coûts doivent être positifs ou nuls", field=f'costs.{i}')
        if not 0.0 <= self.rho <= 1.0:
            raise InvalidConfigError("ρ doit appartenir à [0, 1]", field='rho')
        if self.t_tot <= 0:
            raise InvalidConfigError("T_tot doit être strictement positif", field='t_tot')
        if self.beta < 0:
            raise InvalidConfigError("β doit être positif ou nul", field='beta')
        if self.d_v < 0:
            raise InvalidConfigError("d_V doit être positif ou nul", field='d_v')
        if len(self.actions) != self.n:
            raise InvalidConfigError(f"{len(self.actions)} ensembles d'actions pour n={self.n} joueurs", field='actions')
        for i, action_set in enumerate(self.actions):
            if not action_set:
                raise InvalidConfigError("ensemble d'actions vide", field=f'actions.{i}')
            if any(a < 0 for a in action_set):
                raise InvalidConfigError("les actions doivent être positives ou nulles", field=f'actions.{i}')
            if any(b <= a for a, b in zip(action_set, action_set[1:])):
                raise InvalidConfigError("actions non triées ou dupliquées", field=f'actions.{i}')
        if self.technology.n != self.n:
            raise InvalidConfigError("technologie construite pour un autre n", field='technology')
        if isinstance(self.technology, GeneralTechnology):
            self._check_general_technology()

    @classmethod
    def build(cls, n, costs, rho, t_tot, beta, technology, actions=None, d_v=0.0):
        """
        Construit une configuration à partir de valeurs brutes.

        Args:
            costs: Un réel (coût uniforme α) ou une liste de n réels
            technology: TechnologySpec, dict {kind, params} ou Technology déjà construite
            actions: None (binaire), une liste partagée ou une liste par joueur
        """
        if isinstance(n, bool) or not isinstance(n, int):
            if isinstance(n, float) and n.is_integer():
                n = int(n)
            else:
                raise InvalidConfigError("n doit être un entier ≥ 1", field='n')
        if n < 1:
            raise InvalidConfigError("n doit être un entier ≥ 1", field='n')

        if isinstance(costs, (list, tuple)):
            costs = tuple(_as_float(c, f'costs.{i}') for i, c in enumerate(costs))
        else:
            costs = (_as_float(costs, 'costs'),) * n

        if actions is None:
            actions = (BINARY_ACTIONS,) * n
        elif actions and all(not isinstance(a, (list, tuple)) for a in actions):
            shared = tuple(_as_float(a, 'actions') for a in actions)
            actions = (shared,) * n
        else:
            actions = tuple(
                tuple(_as_float(a, f'actions.{i}') for a in action_set)
                for i, action_set in enumerate(actions)
            )

        if not isinstance(technology, Technology):
            if isinstance(technology, dict):
                technology = TechnologySpec(kind=technology.get('kind'), params=technology.get('params', {}))
            technology = make_technology(technology, n)

        return cls(
            n=n,
            costs=costs,
            rho=_as_float(rho, 'rho'),
            t_tot=_as_float(t_tot, 't_tot'),
            beta=_as_float(beta, 'beta'),
            technology=technology,
            actions=actions,
            d_v=_as_float(d_v, 'd_v'),
        )

    def _check_general_technology(self):
        """Une technologie générale doit couvrir tout l'espace de profils et être monotone."""
        values = self.technology.values
        for profile in itertools.product(*self.actions):
            if profile not in values:
                raise InvalidConfigError(f"profil {profile} absent de la table générale", field='technology.params.values')
        for profile in itertools.product(*self.actions):
            for i, action_set in enumerate(self.actions):
                k = action_set.index(profile[i])
                if k + 1 < len(action_set):
                    upper = profile[:i] + (action_set[k + 1],) + profile[i + 1:]
                    if values[upper] < values[profile]:
                        raise InvalidConfigError(
                            f"V doit être croissante : V{upper} < V{profile}", field='technology.params.values'
                        )

    @property
    def reward_rate(self):
        """ρ/n : part de la valeur du système reçue par chaque joueur."""
        return self.rho / self.n

    @property
    def uniform_cost(self):
        """α si tous les coûts sont égaux, None sinon."""
        first = self.costs[0]
        if all(c == first for c in self.costs):
            return first
        return None

    @property
    def is_binary(self):
        return all(action_set == BINARY_ACTIONS for action_set in self.actions)

    @property
    def is_anonymous(self):
        return self.technology.anonymous

    @property
    def profile_count(self):
        return math.prod(len(action_set) for action_set in self.actions)

    def with_rho(self, rho):
        return replace(self, rho=float(rho))

    def with_beta(self, beta):
        return replace(self, beta=float(beta))

    def with_costs(self, costs):
        if not isinstance(costs, (list, tuple)):
            costs = (float(costs),) * self.n
        return replace(self, costs=tuple(float(c) for c in costs))

    def to_dict(self):
        """Forme JSON résolue (utilisée pour l'empreinte de configuration)."""
        return {
            'n': self.n,
            'costs': list(self.costs),
            'rho': self.rho,
            't_tot': self.t_tot,
            'beta': self.beta,
            'd_v': self.d_v,
            'actions': [list(a) for a in self.actions],
            'technology': {'kind': self.technology.kind, 'params': self.technology.describe()},
        }


@dataclass(frozen=True)
class Profile:
    """Profil de stratégies a = (a_1, …, a_n)."""
    a: tuple

    @classmethod
    def of(cls, config, profile):
        """Valide un profil (ou une séquence de contributions) contre la configuration."""
        if isinstance(profile, Profile):
            values = profile.a
        else:
            values = tuple(float(x) for x in profile)
        if len(values) != config.n:
            raise InvalidConfigError(f"profil de longueur {len(values)} pour n={config.n}", field='profile')
        for i, (a_i, action_set) in enumerate(zip(values, config.actions)):
            if a_i not in action_set:
                raise InvalidConfigError(f"a_{i}={a_i} n'appartient pas à A_{i}", field=f'profile.{i}')
        return cls(a=values)

    @property
    def level(self):
        return math.fsum(self.a)

    def __iter__(self):
        return iter(self.a)

    def __len__(self):
        return len(self.a)

    def __getitem__(self, i):
        return self.a[i]


@dataclass(frozen=True)
class ContributionLevel:
    """Réduction anonyme ℓ = Σ a_i d'un profil binaire."""
    ell: int
    n: int

    def __post_init__(self):
        if not 0 <= self.ell <= self.n:
            raise InvalidConfigError(f"ℓ={self.ell} hors de [0, {self.n}]", field='ell')

    def cheapest_profile(self, costs):
        """Profil où contribuent les ℓ joueurs les moins coûteux (égalités départagées par indice)."""
        order = sorted(range(self.n), key=lambda i: (costs[i], i))
        contributors = set(order[:self.ell])
        return Profile(a=tuple(1.0 if i in contributors else 0.0 for i in range(self.n)))


@dataclass(frozen=True)
class Metrics:
    system_value: float
    token_value: float
    social_cost: float
    users_welfare: float
    designer_profit: float

    def to_dict(self):
        return {
            'system_value': self.system_value,
            'token_value': self.token_value,
            'social_cost': self.social_cost,
            'users_welfare': self.users_welfare,
            'designer_profit': self.designer_profit,
        }
