"""Bundled benchmark instances and reference numbers."""
import json
from importlib import resources

from ..instance import Instance, parse_cvrplib

CMT_NAMES = ("CMT1", "CMT2", "CMT3", "CMT11")


def instance_text(name: str) -> str:
    return resources.files(__name__).joinpath("instances", f"{name}.vrp").read_text()


def load_cmt(name: str) -> Instance:
    if name not in CMT_NAMES:
        raise KeyError(f"no bundled instance {name!r}; choose from {CMT_NAMES}")
    return parse_cvrplib(instance_text(name))


def optimum_registry() -> dict[str, float]:
    raw = json.loads(resources.files(__name__).joinpath("optima.json").read_text())
    return {k: v["optimum"] for k, v in raw.items()}


def published_results() -> dict:
    return json.loads(resources.files(__name__).joinpath("published_results.json").read_text())
