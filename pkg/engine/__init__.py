"""Exact engine for forbidden-agreement families on [m]^n."""
