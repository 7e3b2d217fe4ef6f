from core.patcher.diff import changed_lines, unified_diff
from core.patcher.edits import ScriptApplier, applied_copy, apply_script
from core.patcher.gas import estimate_cost
from core.patcher.generator import PatchGenerator, PatchSet, generate_patches
from core.patcher.input_validation import fix_missing_input_validation
from core.patcher.locked_ether import fix_locked_ether
from core.patcher.reentrancy import ReorderPlan, apply_lock, apply_reorder, plan_reorder
from core.patcher.unhandled_exception import fix_unhandled_exception

__all__ = [
    'changed_lines', 'unified_diff', 'ScriptApplier', 'applied_copy', 'apply_script', 'estimate_cost',
    'PatchGenerator', 'PatchSet', 'generate_patches', 'fix_missing_input_validation', 'fix_locked_ether',
    'ReorderPlan', 'apply_lock', 'apply_reorder', 'plan_reorder', 'fix_unhandled_exception',
]
