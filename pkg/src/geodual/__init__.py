"""Conformal-dual geodesic flows, a Kaluza-Klein lift and gauge-algebra checks
for relativistic (Stueckelberg-type) Hamiltonians on a 4D Lorentzian manifold."""

from .dual import DualPair, map_orbit_to_dual
from .errors import ConfigError, GeoDualError, NumericalFailure
from .fields import GaugeGenerator, VectorFieldU
from .gauge import GaugeContext
from .kk import kk_contract, kk_hamiltonian_direct, solve_p5
from .lattice import WaveSample
from .orbit import HamiltonianSpec, IntegratorOptions, PhaseState, integrate_orbit
from .tensor import Metric4, MetricField

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DualPair", "GaugeContext", "GaugeGenerator", "GeoDualError", "HamiltonianSpec",
    "IntegratorOptions", "Metric4", "MetricField", "NumericalFailure", "PhaseState", "VectorFieldU",
    "WaveSample", "integrate_orbit", "kk_contract", "kk_hamiltonian_direct", "map_orbit_to_dual", "solve_p5",
]
