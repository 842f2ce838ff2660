from src.cuckooharness.harness import ExperimentConfig, TrialSummary, run_cell, run_sweep
