"""Binocular ağı: WDM blokları, ağ grafı ve eğitim"""

from .wdm import WdmConfig, WideDeepModule, build_wdm
from .network import BinocularConfig, BinocularNet, build_binocular, forward, parameter_count
from .trainer import TrainResult, TrainSchedule, set_determinism, train
