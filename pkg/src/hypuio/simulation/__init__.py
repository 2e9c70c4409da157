from .cosim import GridSpec, InitialData, Signal, SignalSpec, SimulationTrace, simulate
from .functionals import (DecayDiagnostics, decay_diagnostics, error_norms, evaluate_V, evaluate_W,
                          squared_error_norm)
from .schemes import SCHEMES, SpeedTable, cell_centers, step_pde

__all__ = [
    "SCHEMES", "DecayDiagnostics", "GridSpec", "InitialData", "Signal", "SignalSpec",
    "SimulationTrace", "SpeedTable", "cell_centers", "decay_diagnostics", "error_norms",
    "evaluate_V", "evaluate_W", "simulate", "squared_error_norm", "step_pde",
]
