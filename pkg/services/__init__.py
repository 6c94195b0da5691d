"""Potential-algebra, analytic-model and spectral-verification services"""

from .algebra_core import algebra_service, PotentialAlgebra
from .analytic_models import analytic_models, AnalyticModels
from .spectral_verify import spectral_verifier, SpectralVerifier
from .model_cases import model_catalog, ModelCatalog, ModelCase

__all__ = [
    'algebra_service', 'PotentialAlgebra',
    'analytic_models', 'AnalyticModels',
    'spectral_verifier', 'SpectralVerifier',
    'model_catalog', 'ModelCatalog', 'ModelCase',
]
