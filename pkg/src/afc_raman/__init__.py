"""Photon-pair source from spontaneous Raman emission in a shaped atomic frequency comb."""

from . import analytic, comb, dynamics, link, optimize
from .analytic import EfficiencyReport, ProtocolError, ProtocolParams, full_report
from .comb import CombParams, RegimeWarning
from .dynamics import EnsembleGrid, EnsembleState, FieldTrace, GridSpec
from .link import LinkParams, LinkReport, MaterialPreset
from .optimize import OptimizationResult

__version__ = "0.1.0"
