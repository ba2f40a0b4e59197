"""
Hexgas-Lattice: FHP-I Lattice-Gas Cellular Automaton
====================================================

Exact bitwise FHP-I microdynamics on a hexagonal lattice, coarse-grained
density/velocity/momentum-flux fields, and probes that measure sound speed
and kinematic viscosity against their closed-form values.

Usage:
------
    from hexgas_lattice import SimConfig, run

    config = SimConfig(width=100, height=100, steps=300, seed=42,
                       scenario="hole", fill=0.667)
    result = run(config)
    result.summary.mass_start == result.summary.mass_end

    # Stepping by hand
    from hexgas_lattice import BoundaryMode, ChiralityStream, Scenario, Stepper, init

    lattice = init(Scenario(fill=0.5), (64, 64), seed=7)
    with Stepper(BoundaryMode.periodic(64, 64), ChiralityStream(7)) as stepper:
        for t in range(100):
            lattice = stepper.advance(lattice, t)
"""

__version__ = "0.3.0"

from .boundary import (
    BoundaryKind,
    BoundaryMode,
    bounce_back,
    dump_mask,
    load_mask,
    load_mask_file,
    random_obstacles,
)
from .config import SimConfig, load_config, parse_config, serialize_config
from .dynamics import (
    ChiralityStream,
    CollisionTable,
    Stepper,
    build_table,
    collide_formula,
    default_table,
    step,
)
from .engine import RunResult, RunSummary, measure, run
from .exceptions import (
    ConfigurationError,
    ContractViolation,
    DomainError,
    ExpansionValidityWarning,
    LatticeGasError,
    MaskFormatError,
    OutputError,
    RegionError,
)
from .frames import Frame, frame_from_field, read_pgm, write_field_csv, write_frame
from .lattice import (
    CellKind,
    Direction,
    Lattice,
    LatticeUnits,
    neighbor,
    site_mass,
    site_momentum,
    state_from_directions,
    state_from_labels,
)
from .observables import (
    MacroField,
    TheoryParams,
    coarse_grain,
    equilibrium_occupation,
    sound_speed,
    theory_pressure,
    theory_viscosity,
)
from .probes import (
    ProbeResult,
    ProbeStatus,
    probe_equilibrium,
    probe_near_wall,
    probe_relaxation,
    probe_sound_speed,
    probe_viscosity,
)
from .scenarios import Disk, Rect, Scenario, ScenarioKind, init
from .verify import CheckResult, run_invariant_suite

__all__ = [
    "__version__",
    "BoundaryKind",
    "BoundaryMode",
    "CellKind",
    "CheckResult",
    "ChiralityStream",
    "CollisionTable",
    "ConfigurationError",
    "ContractViolation",
    "Direction",
    "Disk",
    "DomainError",
    "ExpansionValidityWarning",
    "Frame",
    "Lattice",
    "LatticeGasError",
    "LatticeUnits",
    "MacroField",
    "MaskFormatError",
    "OutputError",
    "ProbeResult",
    "ProbeStatus",
    "Rect",
    "RegionError",
    "RunResult",
    "RunSummary",
    "Scenario",
    "ScenarioKind",
    "SimConfig",
    "Stepper",
    "TheoryParams",
    "bounce_back",
    "build_table",
    "coarse_grain",
    "collide_formula",
    "default_table",
    "dump_mask",
    "equilibrium_occupation",
    "frame_from_field",
    "init",
    "load_config",
    "load_mask",
    "load_mask_file",
    "measure",
    "neighbor",
    "parse_config",
    "probe_equilibrium",
    "probe_near_wall",
    "probe_relaxation",
    "probe_sound_speed",
    "probe_viscosity",
    "random_obstacles",
    "read_pgm",
    "run",
    "run_invariant_suite",
    "serialize_config",
    "site_mass",
    "site_momentum",
    "sound_speed",
    "state_from_directions",
    "state_from_labels",
    "step",
    "theory_pressure",
    "theory_viscosity",
    "write_field_csv",
    "write_frame",
]
