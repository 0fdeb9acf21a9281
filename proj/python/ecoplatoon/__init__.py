"""Python front end for the Eco-CACC platoon planner."""

from ._core import (
    ConfigError,
    Scenario,
    fuel_rate,
    load_scenario,
    parse_scenario,
    preset_search_path,
    run_command,
    run_comparison,
    run_eco,
)

__all__ = [
    "ConfigError",
    "Scenario",
    "fuel_rate",
    "load_scenario",
    "parse_scenario",
    "preset_search_path",
    "run_command",
    "run_comparison",
    "run_eco",
]
