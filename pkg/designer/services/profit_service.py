# designer/services/profit_service.py
# Profit espéré du concepteur sous la loi stationnaire logit et choix de ρ*

import logging
import math

import numpy as np
from scipy.special import expit, logsumexp

from chains.services.birth_death_service import BirthDeathService
from common.exceptions import InvalidConfigError
from common.utils import golden_section_max, lab_setting
from equilibria.services.designer_regime_service import DesignerRegimeService
from games.technologies import ThresholdTechnology
from ..records import OptimalAirdrop, ProfitCurve, ProfitPoint

logger = logging.getLogger('airdrop_lab')

REGIME_NO_AIRDROP = 'no-airdrop'
REGIME_CAPPED = 'capped'
REGIME_POSITIVE = 'positive-airdrop'
REGIME_GRID = 'grid-search'

CLOSED_FORM_TOLERANCE = 1e-10


class ProfitService:
    """
    Profit espéré (1 − ρ)·V(π_ρ) − d_V, où V(π_ρ) = Σ_ℓ π̂_ρ(ℓ)·V(ℓ).
    """

    @staticmethod
    def _require_positive_beta(config):
        if config.beta <= 0:
            raise InvalidConfigError("β > 0 requis pour le profit espéré", field='beta')

    @staticmethod
    def _uses_closed_form(config):
        technology = config.technology
        return isinstance(technology, ThresholdTechnology) and technology.v_low == 0

    @staticmethod
    def expected_value(config, rho):
        """V(π_ρ) par sommation sur la loi stationnaire agrégée."""
        return BirthDeathService.stationary(config.with_rho(rho)).expected_value

    @staticmethod
    def and_game_expected_value(alpha, beta, rho, v_high):
        """
        V(π_ρ) du jeu ET à deux joueurs :
        V_high·e^{βρV_high/2} / (e^{2αβ} + 2e^{αβ} + e^{βρV_high/2}).
        """
        log_high = beta * rho * v_high / 2
        log_denominator = logsumexp([2 * alpha * beta, math.log(2) + alpha * beta, log_high])
        return v_high * math.exp(log_high - log_denominator)

    @staticmethod
    def profit_derivative(rho, b, c, v_high):
        """
        Dérivée de V_high(1 − ρ)/(1 + C·e^{−Bρ}) :
        −V_high·(1 + C·e^{−Bρ}(B(ρ − 1) + 1)) / (1 + C·e^{−Bρ})²,
        évaluée via r = 1/(1 + C·e^{−Bρ}) pour éviter les débordements.
        """
        log_c = math.log(c) if c > 0 else -math.inf
        r = float(expit(b * rho - log_c))
        return -v_high * (r * r + r * (1.0 - r) * (b * (rho - 1.0) + 1.0))

    @classmethod
    def profit_curve(cls, config, rho_grid, d_v=None):
        """
        Profit espéré sur une grille de ρ.

        Pour un seuil avec V_low = 0, la forme fermée V_high/(1 + C·e^{−ρB}) est
        utilisée puis recoupée avec la sommation sur π̂.

        Args:
            config (GameConfig): Jeu anonyme binaire à coût uniforme
            rho_grid (iterable): Valeurs de ρ dans [0, 1]
            d_v (float): Coût de développement (par défaut celui de la configuration)

        Returns:
            ProfitCurve

        Raises:
            InvalidConfigError: Grille vide, ρ hors de [0, 1] ou β = 0
        """
        BirthDeathService.require_lumpable(config)
        cls._require_positive_beta(config)
        d_v = config.d_v if d_v is None else float(d_v)
        rhos = sorted({float(r) for r in rho_grid})
        if not rhos:
            raise InvalidConfigError("grille de ρ vide", field='experiment.rho_grid')
        if rhos[0] < 0.0 or rhos[-1] > 1.0:
            raise InvalidConfigError("les valeurs de ρ doivent appartenir à [0, 1]", field='experiment.rho_grid')

        summed = np.array([cls.expected_value(config, rho) for rho in rhos])
        closed_form = cls._uses_closed_form(config)
        b = c = rho_bar = gap = None
        p_high = [None] * len(rhos)
        values = summed
        if isinstance(config.technology, ThresholdTechnology):
            success = BirthDeathService.success_probability(config)
            b, c = success.b, success.c
            p_high = [float(p) for p in success.at(rhos)]
            if closed_form:
                v_high = config.technology.v_high
                values = v_high * success.at(rhos)
                scale = np.maximum(np.abs(summed), np.finfo(float).tiny)
                gap = float(np.max(np.abs(values - summed) / scale))
                if gap > CLOSED_FORM_TOLERANCE:
                    logger.warning(f"Forme fermée et sommation divergent (écart relatif {gap:.3g})")
                if config.n < config.beta * v_high:
                    rho_bar = 1.0 - config.n / (config.beta * v_high)

        points = tuple(
            ProfitPoint(rho=rho, p_high=p, value=float(v), profit=(1.0 - rho) * float(v) - d_v)
            for rho, p, v in zip(rhos, p_high, values)
        )
        best = max(points, key=lambda point: point.profit)
        return ProfitCurve(
            points=points, rho_star=best.rho, profit_star=best.profit, d_v=d_v,
            closed_form=closed_form, b=b, c=c, rho_bar=rho_bar, max_relative_gap=gap,
        )

    @classmethod
    def optimal_rho(cls, config, d_v=None):
        """
        ρ* maximisant le profit espéré pour une technologie à seuil.

        Cas 1, n ≥ βV_high : ρ* = 0 exactement. Sinon ρ* ≤ ρ̄ = 1 − n/(βV_high),
        cherché par section dorée sur [0, ρ̄] puis confronté à une grille de 10⁴ points
        (la meilleure des deux valeurs est retenue). Si n < βV_high(1 − p_high(0)),
        ρ* > 0 strictement.

        Returns:
            OptimalAirdrop
        """
        technology = DesignerRegimeService.require_threshold(config)
        cls._require_positive_beta(config)
        d_v = config.d_v if d_v is None else float(d_v)
        grid = np.linspace(0.0, 1.0, lab_setting('PROFIT_GRID_POINTS'))

        if technology.v_low != 0:
            logger.warning("V_low ≠ 0 : recherche sur grille, hors du cadre de la forme fermée")
            curve = cls.profit_curve(config, grid, d_v=d_v)
            success = BirthDeathService.success_probability(config)
            return OptimalAirdrop(
                rho_star=curve.rho_star, profit_star=curve.profit_star, regime=REGIME_GRID,
                closed_form_applies=False, b=success.b, c=success.c, rho_bar=None,
                p_high_zero=success.p_high_at_zero, p_high_star=float(success.at(curve.rho_star)),
                p_high_bar=None, derivative_at_zero=None,
                grid_best_rho=curve.rho_star, grid_best_profit=curve.profit_star,
            )

        success = BirthDeathService.success_probability(config)
        v_high = technology.v_high
        b, log_c = success.b, success.log_c

        def profit(rho):
            return v_high * float(expit(rho * b - log_c)) * (1.0 - rho) - d_v

        grid_profits = v_high * expit(grid * b - log_c) * (1.0 - grid) - d_v
        grid_index = int(np.argmax(grid_profits))
        grid_best_rho, grid_best_profit = float(grid[grid_index]), float(grid_profits[grid_index])
        p_high_zero = success.p_high_at_zero
        derivative_at_zero = cls.profit_derivative(0.0, b, success.c, v_high)
        scale = config.beta * v_high

        if config.n >= scale:
            rho_star, rho_bar, regime = 0.0, None, REGIME_NO_AIRDROP
            profit_star = v_high * p_high_zero - d_v
        else:
            rho_bar = 1.0 - config.n / scale
            candidates = [(0.0, profit(0.0)), (rho_bar, profit(rho_bar)), golden_section_max(profit, 0.0, rho_bar)]
            if grid_best_profit > max(value for _, value in candidates):
                step = 1.0 / (len(grid) - 1)
                lo, hi = max(0.0, grid_best_rho - step), min(1.0, grid_best_rho + step)
                logger.info(f"La grille domine la section dorée, affinage autour de ρ = {grid_best_rho:.6g}")
                candidates += [(grid_best_rho, grid_best_profit), golden_section_max(profit, lo, hi)]
            rho_star, profit_star = max(candidates, key=lambda item: (item[1], -item[0]))
            regime = REGIME_POSITIVE if config.n < scale * (1.0 - p_high_zero) else REGIME_CAPPED
            if rho_star > rho_bar:
                logger.warning(f"ρ* = {rho_star:.6g} au-delà de ρ̄ = {rho_bar:.6g}")

        logger.info(f"ρ* = {rho_star:.6g} (régime {regime}), profit {profit_star:.6g}")
        return OptimalAirdrop(
            rho_star=float(rho_star), profit_star=float(profit_star), regime=regime, closed_form_applies=True,
            b=b, c=success.c, rho_bar=rho_bar, p_high_zero=p_high_zero,
            p_high_star=float(expit(rho_star * b - log_c)),
            p_high_bar=None if rho_bar is None else float(expit(rho_bar * b - log_c)),
            derivative_at_zero=derivative_at_zero,
            grid_best_rho=grid_best_rho, grid_best_profit=grid_best_profit,
        )

    @staticmethod
    def vanishing_noise_profit(config, d_v=None, epsilon=None):
        """Régime du concepteur dans la limite β → ∞, rapporté à côté du cas β fini."""
        return DesignerRegimeService.threshold_designer_regime(config, d_v=d_v, epsilon=epsilon)
