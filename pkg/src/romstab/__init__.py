"""POD-Galerkin ROMs of the coupled Burgers equation with ES-tuned closures."""

from .closures import ClosureSpec, nonlinear_penalty, viscosity_profile
from .es import CostWeights, EsParams, EsState, es_step_dual, es_step_single, learning_cost, tune
from .fem import GridSpec, PhysicalParams, SnapshotSet, StateField, assemble, integrate, rhs
from .pod import PodBasis, build_basis, correlation, pod_basis, project
from .rom import RomState, RomTensors, integrate_rom, project_tensors, rom_rhs

__version__ = "0.1.0"
