from core.analysis.cfg import Cfg, CfgBlock, build_cfg
from core.analysis.dataflow import Dfg, build_dfg
from core.analysis.dependences import Dependence, DependenceKind, classify_dependences
from core.analysis.locations import AbstractLocation, AccessEvent, AccessMode
from core.analysis.pointers import PointsToMap, pointer_analysis
from core.analysis.summaries import MethodSummary, summarize
from core.analysis.unit_analysis import FunctionAnalysis, UnitAnalysis, analyze_unit

__all__ = [
    'Cfg', 'CfgBlock', 'build_cfg', 'Dfg', 'build_dfg', 'Dependence', 'DependenceKind',
    'classify_dependences', 'AbstractLocation', 'AccessEvent', 'AccessMode', 'PointsToMap',
    'pointer_analysis', 'MethodSummary', 'summarize', 'FunctionAnalysis', 'UnitAnalysis', 'analyze_unit',
]
