"""Experiment orchestration: training loops, sweeps, CSV and checkpoints."""

from .io import (CheckpointError, CheckpointVersionError, MetricRow, emit_csv, load_checkpoint, read_csv,
                 save_checkpoint)
from .runner import (Agents, RunResult, baseline_run, build, evaluate, final_window, load_agents, save_agents,
                     sweep, train_run)

__all__ = ["Agents", "CheckpointError", "CheckpointVersionError", "MetricRow", "RunResult", "baseline_run",
           "build", "emit_csv", "evaluate", "final_window", "load_agents", "load_checkpoint", "read_csv",
           "save_agents", "save_checkpoint", "sweep", "train_run"]
