"""Pipeline orchestration for the command line and the corpus harness."""

from src.driver.pipeline import Mode, PipelineConfig, PipelineResult, Stage, compile_file, run_pipeline

__all__ = ["Mode", "PipelineConfig", "PipelineResult", "Stage", "compile_file", "run_pipeline"]
