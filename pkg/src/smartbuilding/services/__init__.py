"""The eight building services as pure step functions."""

from smartbuilding.services.door import DoorConfig, DoorState, door_step
from smartbuilding.services.firegas import FireGasConfig, FireGasState, firegas_step
from smartbuilding.services.iaq import IaqConfig, IaqState, classify, iaq_step
from smartbuilding.services.intrusion import IntrusionConfig, IntrusionState, intrusion_step
from smartbuilding.services.irrigation import IrrigationConfig, IrrigationState, irrigation_step
from smartbuilding.services.lighting import LightingConfig, LightingState, lighting_step
from smartbuilding.services.medicine import MedicineConfig, MedicineState, medicine_step
from smartbuilding.services.parking import ParkingConfig, ParkingState, parking_step

__all__ = [
    "DoorConfig", "DoorState", "door_step",
    "FireGasConfig", "FireGasState", "firegas_step",
    "IaqConfig", "IaqState", "classify", "iaq_step",
    "IntrusionConfig", "IntrusionState", "intrusion_step",
    "IrrigationConfig", "IrrigationState", "irrigation_step",
    "LightingConfig", "LightingState", "lighting_step",
    "MedicineConfig", "MedicineState", "medicine_step",
    "ParkingConfig", "ParkingState", "parking_step",
]
