"""Exact and approximate unitary synthesis, transpilation and gate-count reports."""
from .approx import ApproximationFailure, SynthesisConfig, TemplateCache, approx_synthesize
from .gateset import EAGLE, GENERIC, HERON, GateSet, get_gateset
from .kak import SynthesisError, kak_decompose
from .metrics import hs_distance
from .qsd import qsd_decompose
from .report import GateCountReport, count_report
from .transpile import transpile
