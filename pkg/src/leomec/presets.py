"""Published LEO constellation configurations."""

from dataclasses import dataclass
from typing import Dict, List, Tuple


@dataclass(frozen=True)
class ConstellationPreset:
    name: str
    altitude_km: float
    counts: Tuple[int, ...]

    def __post_init__(self):
        if not self.altitude_km > 0 or not self.counts or any(c < 1 for c in self.counts):
            raise ValueError(f"preset {self.name} needs a positive altitude and counts")

    def points(self) -> List[Tuple[str, float, int]]:
        return [(f"{self.name}-{count}", self.altitude_km, count) for count in self.counts]


PRESETS: Dict[str, ConstellationPreset] = {
    "starlink": ConstellationPreset("starlink", 550.0, (1584, 12000)),
    "oneweb": ConstellationPreset("oneweb", 1200.0, (716, 6372)),
    "amazon": ConstellationPreset("amazon", 630.0, (578, 3236)),
    "telesat-1015": ConstellationPreset("telesat-1015", 1015.0, (298,)),
    "telesat-1325": ConstellationPreset("telesat-1325", 1325.0, (1671,)),
}


def preset_points() -> Dict[str, Tuple[float, int]]:
    """Every `<family>-<count>` point mapped to (altitude_km, n_sats)."""
    points = {}
    for preset in PRESETS.values():
        for name, altitude, count in preset.points():
            points[name] = (altitude, count)
    return points


def resolve_preset(name: str) -> List[Tuple[str, float, int]]:
    """Resolve a point name, a family name or `all` into evaluation points.

    Raises:
        ValueError: For an unknown name; the message lists what is available.
    """
    key = name.strip().lower()
    if key == "all":
        return [point for preset in PRESETS.values() for point in preset.points()]
    if key in PRESETS:
        return PRESETS[key].points()
    points = preset_points()
    if key in points:
        altitude, count = points[key]
        return [(key, altitude, count)]
    available = ", ".join(["all"] + list(PRESETS) + list(points))
    raise ValueError(f"unknown preset '{name}', available presets: {available}")


__all__ = ["ConstellationPreset", "PRESETS", "preset_points", "resolve_preset"]
