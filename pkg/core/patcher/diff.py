import difflib


def unified_diff(before: str, after: str, from_name: str = 'original', to_name: str = 'patched') -> str:
    lines = difflib.unified_diff(before.splitlines(keepends=True), after.splitlines(keepends=True),
                                 fromfile=from_name, tofile=to_name)
    return ''.join(line if line.endswith('\n') else line + '\n' for line in lines)


def changed_lines(diff: str) -> int:
    """Added plus removed lines of a unified diff"""
    count = 0
    for line in diff.splitlines():
        if line.startswith(('+++', '---')):
            continue
        if line.startswith(('+', '-')):
            count += 1
    return count
