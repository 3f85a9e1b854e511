"""Exhaustive searches used to check the closed-form capacities."""
