"""Default asset class registry.

Heights follow the three warehouse asset profiles (mobile workstation,
stationary workstation, mobile storage unit); footprints are nominal cart
dimensions. All three have a rectangular footprint, hence one vertical
symmetry plane (half-turn ambiguity for a box-level detector).
"""
from .geometry import ClassSpec

DEFAULT_CLASS_SPECS: dict[str, ClassSpec] = {
    "MW": ClassSpec("MW", (1.2, 0.8, 0.7), symmetry_planes=1),
    "SW": ClassSpec("SW", (1.2, 0.8, 0.82), symmetry_planes=1),
    "MSU": ClassSpec("MSU", (0.8, 0.6, 1.8), symmetry_planes=1),
}
