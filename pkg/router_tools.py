import logging

from thefuzz import process

from aligned_tools import AlignedEstimator
from baseline_tools import EquispacedEstimator, P2Estimator, ReservoirEstimator
from errors import ConfigError
from interpolated_tools import InterpolatedEstimator
from stream_tools import preset_streams

logger = logging.getLogger(__name__)


class Router:
    """Maps user-typed estimator and preset names onto canonical ones.

    Exact aliases win; otherwise a fuzzy match scoring above the threshold is
    accepted with a warning.
    """

    FUZZY_THRESHOLD = 80

    def __init__(self):
        self.estimator_routes = {
            "interpolated": ["interpolated", "interp", "method1", "m1", "interpolated-bins"],
            "aligned": ["aligned", "data-aligned", "method2", "m2", "maxent", "aligned-bins"],
            "p2": ["p2", "p-square", "p^2", "psquare", "jain-chlamtac"],
            "reservoir": ["reservoir", "random-sample", "sample", "vitter"],
            "equispaced": ["equispaced", "uniform-hist", "equidistant", "schmeiser-deutsch"],
            "oracle": ["oracle", "exact", "truth"],
        }
        self.preset_routes = {
            "spiky": ["spiky", "spikes"],
            "shifting": ["shifting", "shift", "level-shift"],
            "heavy-tail-drift": ["heavy-tail-drift", "heavy-tail drift", "heavy_tail_drift", "drift"],
        }

    def _route(self, raw, routes, kind):
        name = str(raw).lower().strip()
        for canonical, aliases in routes.items():
            if name in aliases:
                return canonical

        best_score, best = 0, None
        for canonical, aliases in routes.items():
            match, score = process.extractOne(name, aliases)
            if score > self.FUZZY_THRESHOLD and score > best_score:
                best_score, best = score, canonical
        if best is None:
            raise ConfigError(f"unknown {kind} {raw!r}; choose from {', '.join(routes)}")
        logger.warning("⚠️ interpreting %s %r as %r (match score %d)", kind, raw, best, best_score)
        return best

    def resolve_estimator(self, raw):
        return self._route(raw, self.estimator_routes, "estimator")

    def resolve_preset(self, raw):
        return self._route(raw, self.preset_routes, "preset")

    def is_preset(self, raw):
        try:
            self.resolve_preset(raw)
        except ConfigError:
            return False
        return True

    def build_estimator(self, name, bin_budget, q, seed=0, criterion="discrete"):
        """Fresh estimator for one bin budget; P2 ignores the budget, the reservoir uses it as size."""
        name = self.resolve_estimator(name)
        if name == "interpolated":
            return InterpolatedEstimator(bin_budget)
        if name == "aligned":
            return AlignedEstimator(bin_budget, criterion=criterion)
        if name == "p2":
            return P2Estimator(q)
        if name == "reservoir":
            return ReservoirEstimator(bin_budget, seed=seed)
        if name == "equispaced":
            return EquispacedEstimator(bin_budget)
        raise ConfigError(f"{name!r} is not a bounded-memory estimator")

    def preset(self, raw, seed=0):
        return preset_streams(seed=seed)[self.resolve_preset(raw)]

    def get_description(self, name):
        return {
            "interpolated": "📐 Interpolated equiprobable bins",
            "aligned": "🎯 Data-aligned maximal-entropy bins",
            "p2": "📍 P2 five-marker tracker",
            "reservoir": "🎲 Reservoir sample",
            "equispaced": "📏 Equispaced rescaling histogram",
            "oracle": "🔍 Exact oracle",
        }.get(self.resolve_estimator(name), name)


router = Router()
