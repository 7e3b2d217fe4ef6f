from core.verifier.verification import Verifier, contract_report, verify

__all__ = ['Verifier', 'contract_report', 'verify']
