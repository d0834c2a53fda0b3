"""Access to the bundled RDDL corpus."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .rddl import TypedModel, parse_domain, parse_instance, validate

#: instance name -> domain name, for every bundled instance
INSTANCES = {
    "wildfire_mini_2x1": "wildfire_mini",
    "wildfire_mini_3x1": "wildfire_mini",
    "wildfire_mini_2x3": "wildfire_mini",
    "wildfire_mini_xy_2x1": "wildfire_mini_xy",
    "wildfire_replica_3x3": "wildfire_replica",
    "sysadmin_ring_n3": "sysadmin_ring",
    "sysadmin_ring_n4": "sysadmin_ring",
    "sysadmin_ring_n5": "sysadmin_ring",
    "sysadmin_ring_n8": "sysadmin_ring",
    "sysadmin_ring_n10": "sysadmin_ring",
    "chain2_h15": "chain2",
}

DOMAINS = sorted(set(INSTANCES.values()))


def corpus_path(name: str) -> Path:
    """Filesystem path of a bundled ``<name>.rddl`` file."""
    path = resources.files("relplan").joinpath("data", f"{name}.rddl")
    return Path(str(path))


def read_text(name: str) -> str:
    return corpus_path(name).read_text(encoding="utf-8")


def load(instance_name: str) -> TypedModel:
    """Parse and validate a bundled instance together with its domain."""
    if instance_name not in INSTANCES:
        known = ", ".join(sorted(INSTANCES))
        raise KeyError(f"unknown bundled instance {instance_name!r} (have: {known})")
    domain = parse_domain(read_text(INSTANCES[instance_name]))
    instance = parse_instance(read_text(instance_name))
    return validate(domain, instance)
