"""Access to the bundled scenario documents shipped with the package."""

from __future__ import annotations

from importlib import resources

# camera/detector first, chains next, environment and behaviors last:
# later files reference classes the earlier ones declare.
SCENARIO_FILES = (
    "camera.sxdl",
    "detector.sxdl",
    "visual_chain.sxdl",
    "acoustic_chain.sxdl",
    "environment.sxdl",
    "behaviors.sxdl",
)

ALL_FILES = SCENARIO_FILES + ("environment_dim.sxdl", "environment_hazy.sxdl")


def bundled_text(name: str) -> str:
    if name not in ALL_FILES:
        raise KeyError(f"no bundled document named {name!r}")
    return resources.files("selfx").joinpath("data", name).read_text(encoding="utf-8")
