import logging
from typing import List

from core.analysis.unit_analysis import UnitAnalysis
from core.detectors.base import AbstractDetector, contract_site
from core.solidity.ast_nodes import CallOptions, ContractDef, Identifier, MemberAccess, walk
from core.solidity.calls import TRANSFER_BUILTINS
from models.finding import DetectorVote, VulnerabilityClass

logger = logging.getLogger(__name__)

# tokens the syntactic strategy accepts as a way out for ether
EXIT_TOKENS = {'send', 'transfer', 'call', 'delegatecall', 'callcode'}


def payable_contracts(analysis: UnitAnalysis) -> List[ContractDef]:
    return [analysis.contracts[c.name] for c in analysis.unit.contracts
            if c.kind != 'interface' and analysis.contracts[c.name].has_payable_entry]


def has_exit_token(contract: ContractDef) -> bool:
    for function in contract.functions:
        if function.body is None:
            continue
        for node in walk(function.body):
            if isinstance(node, MemberAccess) and node.member in EXIT_TOKENS:
                return True
            if isinstance(node, CallOptions) and node.option('value') is not None:
                return True
            if isinstance(node, Identifier) and node.name in TRANSFER_BUILTINS:
                return True
    return False


def transfers_ether(analysis: UnitAnalysis, contract: ContractDef) -> bool:
    for function in contract.functions:
        summary = analysis.summary_of(function)
        if summary is not None and summary.makes_ether_transfer:
            return True
    return False


def entry_transfers_ether(analysis: UnitAnalysis, contract: ContractDef) -> bool:
    """Ether leaves through some public entry point; delegatecall never counts"""
    for function in contract.functions:
        if not function.is_entry:
            continue
        summary = analysis.summary_of(function)
        if summary is not None and summary.makes_ether_transfer:
            return True
    return False


class SyntacticLockedEther(AbstractDetector):
    NAME = 'syntactic'
    VULN_CLASS = VulnerabilityClass.LOCKED_ETHER
    HELP = 'Payable contract without any send/transfer/call token'

    def _detect(self, analysis: UnitAnalysis) -> List[DetectorVote]:
        return [self.vote(contract_site(c)) for c in payable_contracts(analysis) if not has_exit_token(c)]


class DataflowLockedEther(AbstractDetector):
    NAME = 'dataflow'
    VULN_CLASS = VulnerabilityClass.LOCKED_ETHER
    HELP = 'Payable contract whose method summaries never transfer ether'

    def _detect(self, analysis: UnitAnalysis) -> List[DetectorVote]:
        return [self.vote(contract_site(c)) for c in payable_contracts(analysis)
                if not transfers_ether(analysis, c)]


class SemanticLockedEther(AbstractDetector):
    NAME = 'semantic'
    VULN_CLASS = VulnerabilityClass.LOCKED_ETHER
    HELP = 'Payable contract with no ether exit reachable from a public entry point'

    def _detect(self, analysis: UnitAnalysis) -> List[DetectorVote]:
        return [self.vote(contract_site(c)) for c in payable_contracts(analysis)
                if not entry_transfers_ether(analysis, c)]


DETECTORS = [SyntacticLockedEther, DataflowLockedEther, SemanticLockedEther]
