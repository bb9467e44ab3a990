"""Simulation benchmark: scenarios, estimation methods, matched error metrics."""
