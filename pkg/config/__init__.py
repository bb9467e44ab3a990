"""Run settings, run-file parsing and logging setup for softmix."""
