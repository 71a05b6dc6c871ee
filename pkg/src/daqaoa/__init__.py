"""Digital-analog QAOA workbench: compile, simulate, optimise and bound."""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .compiler import DASchedule, compile_schedule, lambda_eigenvalue, solve_times, x_gate_layers
from .problems import Graph, IsingHamiltonian, Problem, SatClause, maxcut_hamiltonian, max2sat_hamiltonian
from .resources import ResourceCoupling, ResourceModel, build_resource

__all__ = [
    "DASchedule", "Graph", "IsingHamiltonian", "Problem", "ResourceCoupling", "ResourceModel", "SatClause",
    "build_resource", "compile_schedule", "lambda_eigenvalue", "max2sat_hamiltonian", "maxcut_hamiltonian",
    "solve_times", "x_gate_layers", "__version__",
]
