"""
도메인 모델 패키지
"""
from app.models.layers import BeamParams, CouplingData, EvenLayer, Gains, LayerStack, OddLayer
from app.models.system import DiscretizedSystem, DofMap, Mesh
from app.models.spectrum import SOURCE_PENCIL, SOURCE_ROOTS, CharacteristicParams, Spectrum
from app.models.state import BeamState, EnergyTrace

__all__ = [
    "BeamParams",
    "CouplingData",
    "EvenLayer",
    "Gains",
    "LayerStack",
    "OddLayer",
    "DiscretizedSystem",
    "DofMap",
    "Mesh",
    "SOURCE_PENCIL",
    "SOURCE_ROOTS",
    "CharacteristicParams",
    "Spectrum",
    "BeamState",
    "EnergyTrace",
]
