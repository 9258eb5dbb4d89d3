"""
Near-RT RIC skeleton: registries, the xNIB ledger, the KPI bus and the gated submission path.
"""

from .bus import KpiBus
from .platform import ActionGate, RicPlatform
from .registry import DEFAULT_PARAMETERS, ParameterRegistry, ParameterSpec, XAppHandle, XAppRegistry
from .xnib import XNIB

__all__ = [
    "ActionGate",
    "DEFAULT_PARAMETERS",
    "KpiBus",
    "ParameterRegistry",
    "ParameterSpec",
    "RicPlatform",
    "XAppHandle",
    "XAppRegistry",
    "XNIB",
]
