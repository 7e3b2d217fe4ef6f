from core.pipeline.report import render, report_document, to_json, to_text
from core.pipeline.runner import PipelineRunner, exit_code, process_file, run

__all__ = ['render', 'report_document', 'to_json', 'to_text', 'PipelineRunner', 'exit_code', 'process_file', 'run']
