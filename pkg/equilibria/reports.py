# equilibria/reports.py
# Résultats des analyses statiques : équilibres de Nash purs, maximiseurs du potentiel, régimes du concepteur

from dataclasses import dataclass, field
from typing import Optional


@dataclass(frozen=True)
class Deviation:
    """Déviation unilatérale profitable d'un joueur."""
    player: int
    from_action: float
    to_action: float
    gain: float


@dataclass(frozen=True)
class NashCheck:
    is_equilibrium: bool
    deviation: Optional[Deviation] = None

    def __bool__(self):
        return self.is_equilibrium


@dataclass(frozen=True)
class LevelClass:
    """
    Classe de profils binaires de même niveau ℓ.

    Attributes:
        ell (int): Niveau de contribution
        count (int): Nombre de profils du niveau appartenant à l'ensemble
        witness (tuple): Profil témoin (les ℓ joueurs les moins coûteux)
    """
    ell: int
    count: int
    witness: tuple


@dataclass(frozen=True)
class EquilibriumReport:
    """
    Équilibres de Nash purs, maximiseurs du potentiel et loi limite quand β → ∞.

    Le chemin 'anonymous' décrit les ensembles par niveaux (LevelClass) ;
    le chemin 'brute-force' liste les profils dans l'ordre lexicographique.
    """
    method: str
    pne: tuple = ()
    pne_levels: tuple = ()
    potmax: tuple = ()
    potmax_levels: tuple = ()
    limit_distribution: dict = field(default_factory=dict)
    max_potential: Optional[float] = None
    # Faux si un maximiseur du potentiel n'est pas un équilibre
    consistent: bool = True

    @property
    def pne_count(self):
        if self.method == 'anonymous':
            return sum(level.count for level in self.pne_levels)
        return len(self.pne)

    @property
    def potmax_count(self):
        if self.method == 'anonymous':
            return sum(level.count for level in self.potmax_levels)
        return len(self.potmax)

    def equilibrium_levels(self):
        """Niveaux ℓ portant au moins un équilibre, quel que soit le chemin de calcul."""
        if self.method == 'anonymous':
            return sorted(level.ell for level in self.pne_levels)
        return sorted({round(sum(profile)) for profile in self.pne})

    def level_counts(self, of='pne'):
        """Nombre de profils par niveau, pour l'ensemble 'pne' ou 'potmax'."""
        if self.method == 'anonymous':
            levels = self.pne_levels if of == 'pne' else self.potmax_levels
            return {level.ell: level.count for level in levels}
        counts = {}
        for profile in (self.pne if of == 'pne' else self.potmax):
            ell = round(sum(profile))
            counts[ell] = counts.get(ell, 0) + 1
        return counts

    def limit_mass(self, predicate):
        """Masse limite des profils dont le niveau vérifie le prédicat."""
        if self.method == 'anonymous':
            return sum(p for ell, p in self.limit_distribution.items() if predicate(ell))
        return sum(p for profile, p in self.limit_distribution.items() if predicate(sum(profile)))


@dataclass(frozen=True)
class DesignerRegime:
    """
    Régime du concepteur dans la limite de bruit nul (technologie à seuil).

    Attributes:
        regime (str): no-airdrop-forced, no-airdrop-optimal ou airdrop-optimal
        boundary (bool): Égalité exacte sur l'une des inégalités de bascule
    """
    regime: str
    rho_c: float
    recommended_rho: float
    guaranteed_profit: float
    epsilon: float
    alpha_n_tau: float
    delta_v: float
    intermediate_cut: float
    boundary: bool = False


@dataclass(frozen=True)
class LinearOptimum:
    rho_star: float
    ell_star: int
    profit: float
    contributors: tuple
    permutation: tuple
    candidates: tuple


@dataclass(frozen=True)
class LinearEquilibriumValue:
    value: float
    critical_rho: float
    levels: tuple
    boundary: bool = False


@dataclass(frozen=True)
class QuadraticRegime:
    region: int
    description: str
    lower_alpha: float
    upper_alpha: float
    boundary: bool = False
    rho: Optional[float] = None
    bad_pne: Optional[bool] = None
    good_pne: Optional[bool] = None
    selected: Optional[str] = None
