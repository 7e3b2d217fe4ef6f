"""Plain-text graph dumps, one edge per line: ``fromId -> toId [kind]``"""
from pathlib import Path
from typing import List

from core.analysis.cfg import Cfg
from core.analysis.dataflow import Dfg


def cfg_to_text(cfg: Cfg) -> str:
    lines = [f"// cfg {cfg.function_id}"]
    for block in [cfg.blocks[b] for b in sorted(cfg.blocks)]:
        label = type(block.node).__name__ if block.node is not None else block.role
        lines.append(f"// {block.block_id}: {label}" + (f" line {block.node.span.line}" if block.node else ''))
    lines.extend(f"{u} -> {v} [{kind}]" for u, v, kind in cfg.edges())
    return '\n'.join(lines) + '\n'


def dfg_to_text(dfg: Dfg) -> str:
    lines = [f"// dfg {dfg.function_id}"]
    lines.extend(f"{u} -> {v} [{location}]" for u, v, location in dfg.edges())
    return '\n'.join(lines) + '\n'


def write_dumps(cfg: Cfg, dfg: Dfg, out_dir: Path, stem: str) -> List[Path]:
    """Write ``<stem>.<Contract>.<function>.cfg.txt`` and ``.dfg.txt`` into ``out_dir``"""
    out_dir.mkdir(parents=True, exist_ok=True)
    base = f"{stem}.{cfg.function_id}"
    cfg_path = out_dir / f"{base}.cfg.txt"
    dfg_path = out_dir / f"{base}.dfg.txt"
    cfg_path.write_text(cfg_to_text(cfg), encoding='utf-8')
    dfg_path.write_text(dfg_to_text(dfg), encoding='utf-8')
    return [cfg_path, dfg_path]
