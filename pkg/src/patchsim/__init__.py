"""Microstrip patch antenna design and FDTD full-wave verification toolkit.

Modules:
- design: closed-form transmission-line patch sizing
- geometry: parametric slotted reconfigurable patch scene + voxelization
- fdtd: 3-D Yee finite-difference time-domain solver with CPML and coax port
- spectra: S11 / VSWR / bandwidth post-processing
- farfield: near-to-far-field transformation and gain
- config / cli: run configuration and batch pipeline
"""

from .design import DesignError, DesignResult, DesignSpec, design
from .geometry import (AntennaScene, CoaxFeedSpec, GeometryError, MaterialMap,
                       ResolutionError, SrrSlotSpec, SwitchState, apply_switch,
                       build_scene, voxelize, voxelize_calibration)
from .fdtd import (CpmlSpec, GridError, InstabilityError, MemoryCapError,
                   PortRecord, SimulationGrid, SourceSpec, init_grid, run)
from .spectra import (BandReport, Spectrum, SpectrumError, accepted_power,
                      find_bands, reflection_spectrum, vswr, vswr_from_s11_db)
from .farfield import (EquivalenceBox, FarFieldError, FarFieldPattern,
                       peak_gain, to_far_field)
from .config import ConfigError, RunConfig, parse_config

__version__ = "0.1.0"

__all__ = [
    "design", "DesignSpec", "DesignResult", "DesignError",
    "AntennaScene", "SrrSlotSpec", "CoaxFeedSpec", "SwitchState",
    "GeometryError", "ResolutionError", "MaterialMap",
    "build_scene", "apply_switch", "voxelize", "voxelize_calibration",
    "CpmlSpec", "SourceSpec", "SimulationGrid", "PortRecord",
    "GridError", "MemoryCapError", "InstabilityError", "init_grid", "run",
    "Spectrum", "BandReport", "SpectrumError", "reflection_spectrum",
    "accepted_power", "find_bands", "vswr", "vswr_from_s11_db",
    "EquivalenceBox", "FarFieldPattern", "FarFieldError",
    "to_far_field", "peak_gain",
    "RunConfig", "ConfigError", "parse_config",
    "__version__",
]
