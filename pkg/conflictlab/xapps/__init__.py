"""
xApps for ConflictLab

The conflicting control policies: MLB (CIO), MRO (H/TTT), an under-declaring
power xApp and scripted injectors.
"""

from typing import Dict, List

from ..scenario import ScenarioConfig
from .base import XApp
from .injector import InjectorXApp
from .mlb import MlbXApp
from .mro import MroXApp, step_ttt
from .stealth import StealthXApp

# Registry of built-in xApps, keyed by scenario section name
XAPP_REGISTRY = {
    'mro': MroXApp,
    'mlb': MlbXApp,
    'stealth': StealthXApp,
}


def get_xapp_for_name(name: str, scenario: ScenarioConfig, neighbors: Dict[int, List[int]]) -> XApp:
    """
    Build the xApp configured under ``scenario.xapps.<name>``.

    Args:
        name: Registry key or the xapp_id of an injector
        scenario: Scenario holding the policy constants
        neighbors: Neighbour lists of the topology

    Returns:
        XApp instance

    Raises:
        ValueError: If the name is neither registered nor an injector id
    """
    if name in XAPP_REGISTRY:
        return XAPP_REGISTRY[name](scenario.xapps.policy(name), neighbors)
    for policy in scenario.xapps.injectors:
        if policy.xapp_id == name:
            return InjectorXApp(policy, neighbors)
    raise ValueError(f"Unsupported xApp: {name}")


def build_xapps(scenario: ScenarioConfig, neighbors: Dict[int, List[int]]) -> List[XApp]:
    """Every enabled xApp, in registration order."""
    return [get_xapp_for_name(name, scenario, neighbors) for name in scenario.xapps.enabled_names()]


__all__ = [
    "InjectorXApp",
    "MlbXApp",
    "MroXApp",
    "StealthXApp",
    "XAPP_REGISTRY",
    "XApp",
    "build_xapps",
    "get_xapp_for_name",
    "step_ttt",
]
