"""Byzantine agreement on incomplete networks under the weak cut property."""
from .agreement import (AgreementConfig, AgreementOutcome, run_agreement, run_configured, run_trusted_leader,
                        run_trusted_subgraph)
from .chain import run_theorem1_chain
from .checker import CutVerdict, check_weak_cut_property, classical_condition_holds, majority_condition_holds
from .faults import FaultModel, enumerate_maximal_fault_sets
from .flood import DecodeResult, PathMessage, flood_decode, flood_decode_unknown, round_budget
from .graph import Graph, VertexCut, components_after_removal, connectivity, enumerate_minimal_cuts, is_cut
from .sim import Scenario, Transcript

__all__ = [
    "AgreementConfig", "AgreementOutcome", "CutVerdict", "DecodeResult", "FaultModel", "Graph",
    "PathMessage", "Scenario", "Transcript", "VertexCut", "check_weak_cut_property",
    "classical_condition_holds", "components_after_removal", "connectivity",
    "enumerate_maximal_fault_sets", "enumerate_minimal_cuts", "flood_decode", "flood_decode_unknown",
    "is_cut", "majority_condition_holds", "round_budget", "run_agreement", "run_configured",
    "run_theorem1_chain", "run_trusted_leader", "run_trusted_subgraph",
]
