# designer/records.py
# Courbes de profit espéré et airdrop optimal

from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class ProfitPoint:
    rho: float
    p_high: Optional[float]
    value: float
    profit: float

    def to_dict(self):
        return {'rho': self.rho, 'p_high': self.p_high, 'value': self.value, 'profit': self.profit}


@dataclass(frozen=True)
class ProfitCurve:
    """
    Profit espéré (1 − ρ)·V(π_ρ) − d_V sur une grille croissante de ρ.

    Attributes:
        closed_form (bool): Valeurs issues de la forme logistique (seuil, V_low = 0)
        max_relative_gap (float): Écart maximal entre forme fermée et sommation sur π̂
        rho_bar (float): Majorant 1 − n/(βV_high) de ρ*, lorsqu'il s'applique
    """
    points: tuple
    rho_star: float
    profit_star: float
    d_v: float
    closed_form: bool
    b: Optional[float] = None
    c: Optional[float] = None
    rho_bar: Optional[float] = None
    max_relative_gap: Optional[float] = None

    def __post_init__(self):
        rhos = [point.rho for point in self.points]
        if any(b <= a for a, b in zip(rhos, rhos[1:])):
            raise ValueError("grille de ρ non strictement croissante")

    def rows(self):
        return [point.to_dict() for point in self.points]


@dataclass(frozen=True)
class OptimalAirdrop:
    """
    ρ* pour la technologie à seuil à β fini.

    regime vaut no-airdrop (n ≥ βV_high), capped (ρ* ≤ ρ̄), positive-airdrop
    (ρ* > 0 garanti) ou grid-search lorsque V_low ≠ 0.
    """
    rho_star: float
    profit_star: float
    regime: str
    closed_form_applies: bool
    b: float
    c: float
    rho_bar: Optional[float]
    p_high_zero: float
    p_high_star: float
    p_high_bar: Optional[float]
    derivative_at_zero: Optional[float]
    grid_best_rho: float
    grid_best_profit: float
