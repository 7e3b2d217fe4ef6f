from models.patch import EditScript, GasEstimate, InsertStatement, WrapInRequire

LOCK_GAS = 25000
REORDER_GAS = 5
REQUIRE_GAS = 30  # per inserted check
WITHDRAW_GAS = 10  # per edit

# script pattern -> reported band
BANDS = {'lock': 'lock', 'reorder': 'reorder', 'require': 'require', 'validate': 'require', 'withdraw': 'withdraw'}


def estimate_cost(script: EditScript) -> GasEstimate:
    """Heuristic per-transaction gas delta of a patch"""
    pattern = BANDS.get(script.pattern, script.pattern)
    if script.is_empty:
        return GasEstimate(pattern, 0)
    if pattern == 'lock':
        return GasEstimate(pattern, LOCK_GAS)
    if pattern == 'reorder':
        return GasEstimate(pattern, REORDER_GAS)
    if pattern == 'require':
        checks = sum(1 for e in script.edits if isinstance(e, (InsertStatement, WrapInRequire)))
        return GasEstimate(pattern, REQUIRE_GAS * checks)
    return GasEstimate(pattern, WITHDRAW_GAS * len(script))
