"""Population protocols with unordered data.

Thin Python layer over the C++ core: protocol and configuration parsing,
exact output classification, bounded well-specification sweeps, random
scheduling, and the compiler from two-counter machines.
"""

from ._udpp import (  # noqa: F401
    Configuration,
    Error,
    Protocol,
    active_states,
    build_witness,
    check_observations,
    check_well_specification,
    classify_output,
    cm,
    compile,
    enabled_instances,
    explore,
    is_initial,
    random_fair_run,
    replay_sigma,
    successors,
)

__all__ = [
    "Configuration",
    "Error",
    "Protocol",
    "active_states",
    "build_witness",
    "check_observations",
    "check_well_specification",
    "classify_output",
    "cm",
    "compile",
    "enabled_instances",
    "explore",
    "is_initial",
    "random_fair_run",
    "replay_sigma",
    "successors",
]
