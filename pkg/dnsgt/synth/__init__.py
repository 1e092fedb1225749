from .generator import CLEAN_CLASS, Session, SyntheticTraffic, generate, host_address
from .presets import PRESETS, SynthConfig, preset_config


__all__ = (
    "CLEAN_CLASS",
    "PRESETS",
    "Session",
    "SynthConfig",
    "SyntheticTraffic",
    "generate",
    "host_address",
    "preset_config",
)
