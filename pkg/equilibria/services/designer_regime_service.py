# equilibria/services/designer_regime_service.py
# Résultats fermés du concepteur : ρ critique (seuil), ρ optimal (linéaire), régimes quadratiques

import logging
import math

from common.exceptions import InvalidConfigError, UnsupportedCombinationError
from common.utils import lab_setting
from games.technologies import LinearTechnology, QuadraticTechnology, ThresholdTechnology
from ..reports import DesignerRegime, LinearEquilibriumValue, LinearOptimum, QuadraticRegime

logger = logging.getLogger('airdrop_lab')

REGIME_FORCED = 'no-airdrop-forced'
REGIME_NO_AIRDROP = 'no-airdrop-optimal'
REGIME_AIRDROP = 'airdrop-optimal'


def _equal(a, b):
    return math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-12)


class DesignerRegimeService:
    """Formules fermées du concepteur pour les technologies à seuil, linéaire et quadratique."""

    @staticmethod
    def require_threshold(config):
        """
        Raises:
            UnsupportedCombinationError: Technologie autre que seuil, coûts hétérogènes
                                         ou actions non binaires
        """
        if not isinstance(config.technology, ThresholdTechnology):
            raise UnsupportedCombinationError("technologie à seuil requise", field='technology.kind')
        if config.uniform_cost is None:
            raise UnsupportedCombinationError("coûts uniformes requis (α identique pour tous)", field='costs')
        if not config.is_binary:
            raise UnsupportedCombinationError("actions binaires requises", field='actions')
        return config.technology

    @classmethod
    def threshold_critical_rho(cls, config):
        """ρ_c = α·n·τ / (V_high − V_low) ; peut dépasser 1 (bon état jamais stable)."""
        technology = cls.require_threshold(config)
        return config.uniform_cost * config.n * technology.tau / technology.delta_v

    @classmethod
    def threshold_edge_mass(cls, config):
        """
        Masse limite de la classe haute lorsque ρ = ρ_c exactement.

        Les maximiseurs sont alors l'état nul et les C(n, τ) états de niveau τ,
        d'où C(n, τ)/(1 + C(n, τ)) ; la valeur 1/(1 + C(n, τ)) parfois annoncée
        correspond à la classe basse.
        """
        technology = cls.require_threshold(config)
        high = math.comb(config.n, technology.tau)
        mass = high / (1 + high)
        logger.warning(
            f"Cas limite ρ = ρ_c : masse de la classe haute {mass:.6g} "
            f"(et non 1/(1+C(n,τ)) = {1 / (1 + high):.6g}, qui est la masse de l'état nul)"
        )
        return mass

    @classmethod
    def threshold_designer_regime(cls, config, d_v=None, epsilon=None):
        """
        Classe le problème du concepteur dans la limite de bruit nul.

        Args:
            d_v (float): Coût de développement (par défaut celui de la configuration)
            epsilon (float): Marge au-dessus de ρ_c (défaut 1e-3)

        Returns:
            DesignerRegime
        """
        technology = cls.require_threshold(config)
        d_v = config.d_v if d_v is None else float(d_v)
        epsilon = lab_setting('EPSILON') if epsilon is None else float(epsilon)
        if epsilon < 0:
            raise InvalidConfigError("ε doit être positif ou nul", field='experiment.epsilon')
        cost_of_success = config.uniform_cost * config.n * technology.tau
        delta_v = technology.delta_v
        cut = delta_v * (1.0 - technology.v_low / technology.v_high)
        rho_c = cost_of_success / delta_v

        boundary = False
        if _equal(cost_of_success, delta_v) or cost_of_success > delta_v:
            regime = REGIME_FORCED
            boundary = _equal(cost_of_success, delta_v)
        elif cost_of_success >= cut or _equal(cost_of_success, cut):
            regime = REGIME_NO_AIRDROP
            boundary = _equal(cost_of_success, cut)
        else:
            regime = REGIME_AIRDROP

        if regime == REGIME_AIRDROP:
            recommended = rho_c + epsilon
            if recommended > 1.0:
                logger.warning(f"ρ_c + ε = {recommended:.6g} dépasse 1, ramené à 1")
                recommended = 1.0
            profit = (1.0 - recommended) * technology.v_high - d_v
        else:
            recommended = 0.0
            profit = technology.v_low - d_v

        if boundary:
            logger.warning(f"Régime {regime} atteint sur une égalité exacte (α·n·τ = {cost_of_success:.6g})")
        return DesignerRegime(
            regime=regime,
            rho_c=rho_c,
            recommended_rho=recommended,
            guaranteed_profit=profit,
            epsilon=epsilon,
            alpha_n_tau=cost_of_success,
            delta_v=delta_v,
            intermediate_cut=cut,
            boundary=boundary,
        )

    @staticmethod
    def linear_optimal_rho(costs, lambda_v, n=None, d_v=0.0):
        """
        ρ optimal pour une technologie linéaire avec coûts hétérogènes.

        Pour chaque ℓ, ρ*_ℓ = n·c_(ℓ)/λ_V fait contribuer les ℓ joueurs les moins
        coûteux ; on retient le ℓ maximisant (λ_V − n·c_(ℓ))·ℓ parmi les ρ*_ℓ ≤ 1,
        à égalité le plus petit ρ.

        Returns:
            LinearOptimum
        """
        if lambda_v <= 0:
            raise InvalidConfigError("λ_V doit être strictement positif", field='technology.params.lambda_v')
        costs = [float(c) for c in costs]
        n = len(costs) if n is None else int(n)
        if n != len(costs):
            raise InvalidConfigError(f"{len(costs)} coûts fournis pour n={n}", field='costs')
        permutation = tuple(sorted(range(n), key=lambda i: (costs[i], i)))
        ordered = [costs[i] for i in permutation]

        candidates = []
        best_ell, best_value = 0, 0.0
        for ell in range(1, n + 1):
            rho_ell = n * ordered[ell - 1] / lambda_v
            value = (lambda_v - n * ordered[ell - 1]) * ell
            candidates.append((ell, rho_ell, value))
            if rho_ell > 1.0:
                continue
            if value > best_value + 1e-12 * max(1.0, abs(best_value)):
                best_ell, best_value = ell, value

        if best_ell == 0:
            return LinearOptimum(rho_star=0.0, ell_star=0, profit=-d_v, contributors=(),
                                 permutation=permutation, candidates=tuple(candidates))
        rho_star = n * ordered[best_ell - 1] / lambda_v
        profit = (1.0 - rho_star) * lambda_v * best_ell - d_v
        return LinearOptimum(
            rho_star=rho_star,
            ell_star=best_ell,
            profit=profit,
            contributors=tuple(sorted(permutation[:best_ell])),
            permutation=permutation,
            candidates=tuple(candidates),
        )

    @classmethod
    def linear_equilibrium_value(cls, config):
        """
        Propriété « tout ou rien » de la technologie linéaire à coût uniforme :
        V* = λ_V·n si ρ > nα/λ_V, 0 si ρ < nα/λ_V ; à l'égalité tous les niveaux sont des équilibres.
        """
        if not isinstance(config.technology, LinearTechnology):
            raise UnsupportedCombinationError("technologie linéaire requise", field='technology.kind')
        alpha = config.uniform_cost
        if alpha is None:
            raise UnsupportedCombinationError("coûts uniformes requis", field='costs')
        lambda_v = config.technology.lambda_v
        critical = config.n * alpha / lambda_v
        if _equal(config.rho, critical):
            return LinearEquilibriumValue(value=lambda_v * config.n, critical_rho=critical,
                                          levels=tuple(range(config.n + 1)), boundary=True)
        if config.rho > critical:
            return LinearEquilibriumValue(value=lambda_v * config.n, critical_rho=critical, levels=(config.n,))
        return LinearEquilibriumValue(value=0.0, critical_rho=critical, levels=(0,))

    @staticmethod
    def quadratic_equilibria(alpha, tau, n, rho):
        """
        Existence des deux équilibres de la technologie quadratique V(ℓ) = ℓ²/τ.

        Returns:
            tuple: (mauvais équilibre ℓ=0 existe : ρ ≤ ατn, bon équilibre ℓ=n existe : ρ ≥ ατn/(2n−1))
        """
        bad = rho <= alpha * tau * n or _equal(rho, alpha * tau * n)
        good_bound = alpha * tau * n / (2 * n - 1)
        good = rho >= good_bound or _equal(rho, good_bound)
        return bad, good

    @classmethod
    def quadratic_regimes(cls, alpha, tau, n, rho=None):
        """
        Régimes de la technologie quadratique selon α, seuils 1/(τn) et 1/τ.

        Returns:
            QuadraticRegime: région 1, 2 ou 3, et si ρ est fourni l'existence des
                             équilibres et l'état sélectionné (good, bad ou tie)
        """
        if tau <= 0:
            raise InvalidConfigError("τ doit être strictement positif", field='technology.params.tau')
        if alpha < 0:
            raise InvalidConfigError("α doit être positif ou nul", field='costs')
        lower, upper = 1.0 / (tau * n), 1.0 / tau
        boundary = _equal(alpha, lower) or _equal(alpha, upper)
        if alpha < lower or _equal(alpha, lower):
            region = 1
            description = "mauvais équilibre ssi ρ ≤ ατn, sinon seul le bon équilibre"
        elif alpha < upper or _equal(alpha, upper):
            region = 2
            description = "les deux équilibres coexistent pour tout ρ ; la dynamique logit sans bruit choisit le bon ssi ρ > ατ"
        else:
            region = 3
            description = "le mauvais équilibre est sélectionné pour tout ρ"
        if boundary:
            logger.warning(f"α = {alpha:.6g} sur une frontière de régime quadratique")
        if rho is None:
            return QuadraticRegime(region=region, description=description, lower_alpha=lower,
                                   upper_alpha=upper, boundary=boundary)
        bad, good = cls.quadratic_equilibria(alpha, tau, n, rho)
        # φ(n) − φ(0) = n(ρ/τ − α)
        if _equal(rho, alpha * tau):
            selected = 'tie'
        else:
            selected = 'good' if rho > alpha * tau else 'bad'
        return QuadraticRegime(region=region, description=description, lower_alpha=lower, upper_alpha=upper,
                               boundary=boundary, rho=rho, bad_pne=bad, good_pne=good, selected=selected)

    @classmethod
    def quadratic_regimes_for(cls, config):
        if not isinstance(config.technology, QuadraticTechnology):
            raise UnsupportedCombinationError("technologie quadratique requise", field='technology.kind')
        if config.uniform_cost is None:
            raise UnsupportedCombinationError("coûts uniformes requis", field='costs')
        return cls.quadratic_regimes(config.uniform_cost, config.technology.tau, config.n, config.rho)

